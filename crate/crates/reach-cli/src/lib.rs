//! Replay machinery behind the `reach` binary: runs a change script
//! through one of the engines, optionally cross-checking every step against
//! the exhaustive oracles, and renders a line-delimited report.

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use reach_core::algebraic::{AlgebraicState, EngineMode, WeightScheme};
use reach_core::oracle;
use reach_core::tc_insert::TCState;
use reach_core::undirected::ForestState;
use reach_core::weights::btw_weights;
use reach_core::{affected_nodes, BulkChange, Graph, TreeDecomposition, WeightAssignment};

/// Which engine a replay drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    TcInsert,
    Undirected,
    Algebraic,
}

/// Replay configuration. `timing` off keeps reports byte-identical across
/// runs; `budget_c` annotates steps against the ⌈log₂^c n⌉ size budget.
#[derive(Debug, Clone)]
pub struct ReplayOptions {
    pub engine: EngineKind,
    pub oracle_check: bool,
    pub budget_c: Option<u32>,
    pub seed: u64,
    pub mode: EngineMode,
    pub scheme: WeightScheme,
    pub timing: bool,
    /// Witness decomposition, required by the paper weight scheme.
    pub decomposition: Option<TreeDecomposition>,
}

impl ReplayOptions {
    pub fn new(engine: EngineKind) -> Self {
        ReplayOptions {
            engine,
            oracle_check: false,
            budget_c: None,
            seed: 0,
            mode: EngineMode::Verified,
            scheme: WeightScheme::Random,
            timing: true,
            decomposition: None,
        }
    }
}

/// One replayed step. Optional fields render only when their feature was
/// requested, so disabled timing cannot perturb the byte output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub step: usize,
    pub inserted: usize,
    pub deleted: usize,
    pub affected: usize,
    pub agree: Option<bool>,
    pub within_budget: Option<bool>,
    pub elapsed_micros: Option<u128>,
    pub stats: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub steps: Vec<StepReport>,
    pub pass: bool,
}

impl ReplayReport {
    /// One record per line: `step=… inserted=… …`, then a summary line.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let _ = write!(
                out,
                "step={} inserted={} deleted={} affected={}",
                s.step, s.inserted, s.deleted, s.affected
            );
            if let Some(agree) = s.agree {
                let _ = write!(out, " agree={agree}");
            }
            if let Some(within) = s.within_budget {
                let _ = write!(out, " budget={}", if within { "within" } else { "exceeded" });
            }
            if let Some(us) = s.elapsed_micros {
                let _ = write!(out, " elapsed_us={us}");
            }
            let _ = writeln!(out, " stats={}", s.stats);
        }
        let _ = writeln!(out, "summary steps={} pass={}", self.steps.len(), self.pass);
        out
    }
}

/// ⌈(log₂ n)^c⌉, the change-size budget the complexity statements allow.
pub fn budget_limit(n: usize, c: u32) -> usize {
    if n < 2 {
        return 0;
    }
    (n as f64).log2().powi(c as i32).ceil() as usize
}

/// Informational check that a step's |∆E| fits the budget.
pub fn budget_check(n: usize, change_size: usize, c: u32) -> bool {
    change_size <= budget_limit(n, c)
}

enum EngineState {
    Tc(TCState),
    Forest(ForestState),
    Algebraic(Box<AlgebraicState>),
}

/// Ordered query pairs after each step: everything up to 64 nodes, a seeded
/// sample of 4096 pairs above.
fn query_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    if n <= 64 {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..4096).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
    }
}

/// Doubles an undirected change into explicit directed orientations for the
/// engines that track directed edge sets.
fn bidirect_pairs(pairs: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    pairs.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect()
}

fn paper_state(g: &Graph, original: &Graph, opts: &ReplayOptions) -> Result<AlgebraicState> {
    let t = opts
        .decomposition
        .as_ref()
        .ok_or_else(|| anyhow!("the paper weight scheme needs a tree decomposition"))?;
    if original.is_directed() {
        bail!("the paper weight scheme builds skew weights on an undirected graph");
    }
    let u = btw_weights(original, t).context("building cycle weights")?;
    let k = smallest_bound_exponent(g.n(), &u);
    Ok(AlgebraicState::init(g, &u, k, opts.mode, opts.seed)?)
}

/// Smallest k with n^k covering every |w|, the exponent the isolating shift
/// wants.
pub fn smallest_bound_exponent(n: usize, w: &WeightAssignment) -> u32 {
    let max = w.max_abs();
    let mut k = 1u32;
    while num_bigint::BigInt::from(n).pow(k) < max {
        k += 1;
    }
    k
}

/// Replays `script` on `g` with the selected engine.
///
/// The closure and algebraic engines track directed edges, so an undirected
/// input is handed to them bidirected, with each scripted pair doubled into
/// both orientations. Oracle disagreements mark the step and fail the
/// summary; they do not abort the replay.
pub fn replay(g: &Graph, script: &[BulkChange], opts: &ReplayOptions) -> Result<ReplayReport> {
    let needs_directed = matches!(opts.engine, EngineKind::TcInsert | EngineKind::Algebraic);
    let doubled = needs_directed && !g.is_directed();
    let replay_graph = if doubled { g.bidirected() } else { g.clone() };

    if opts.engine == EngineKind::TcInsert {
        if let Some(step) = script.iter().position(|c| !c.deleted.is_empty()) {
            bail!("the closure engine does not support deletions (step {})", step + 1);
        }
    }
    if opts.engine == EngineKind::Undirected && g.is_directed() {
        bail!("the forest engine needs an undirected graph");
    }

    let mut state = match opts.engine {
        EngineKind::TcInsert => {
            let mut s = TCState::init_empty(replay_graph.n())?;
            s.bulk_insert(&replay_graph.edges().collect())?;
            EngineState::Tc(s)
        }
        EngineKind::Undirected => {
            let mut s = ForestState::init_empty(replay_graph.n())?;
            s.bulk_insert(&replay_graph.undirected_edges().collect())?;
            EngineState::Forest(s)
        }
        EngineKind::Algebraic => EngineState::Algebraic(Box::new(match opts.scheme {
            WeightScheme::Random => {
                AlgebraicState::init_random(&replay_graph, opts.mode, opts.seed)?
            }
            WeightScheme::Paper => paper_state(&replay_graph, g, opts)?,
        })),
    };

    let pairs = query_pairs(replay_graph.n(), opts.seed);
    let mut steps = Vec::with_capacity(script.len());
    let mut pass = true;
    for (i, change) in script.iter().enumerate() {
        let (inserted, deleted) = if doubled {
            (bidirect_pairs(&change.inserted), bidirect_pairs(&change.deleted))
        } else {
            (change.inserted.clone(), change.deleted.clone())
        };
        let started = Instant::now();
        match &mut state {
            EngineState::Tc(s) => s.bulk_insert(&inserted)?,
            EngineState::Forest(s) => {
                s.bulk_insert(&inserted)?;
                s.bulk_delete(&deleted)?;
            }
            EngineState::Algebraic(s) => {
                s.insert_edges(&inserted)?;
                s.delete_edges(&deleted)?;
            }
        }
        let elapsed = started.elapsed().as_micros();

        let agree = if opts.oracle_check { Some(check_step(&state, &pairs)?) } else { None };
        pass &= agree.unwrap_or(true);
        let change_size = inserted.len() + deleted.len();
        steps.push(StepReport {
            step: i + 1,
            inserted: inserted.len(),
            deleted: deleted.len(),
            affected: affected_nodes(&BulkChange::new(
                inserted.iter().copied(),
                deleted.iter().copied(),
            ))
            .len(),
            agree,
            within_budget: opts.budget_c.map(|c| budget_check(replay_graph.n(), change_size, c)),
            elapsed_micros: opts.timing.then_some(elapsed),
            stats: engine_stats(&state),
        });
    }
    Ok(ReplayReport { steps, pass })
}

fn check_step(state: &EngineState, pairs: &[(usize, usize)]) -> Result<bool> {
    match state {
        EngineState::Tc(s) => {
            let closure = oracle::transitive_closure(s.graph());
            for &(a, b) in pairs {
                if s.query(a, b)? != (a == b || closure.contains(&(a, b))) {
                    return Ok(false);
                }
            }
        }
        EngineState::Forest(s) => {
            let comp = oracle::connected_components(s.graph())?;
            for &(a, b) in pairs {
                if s.query(a, b)? != (comp[a] == comp[b]) {
                    return Ok(false);
                }
            }
        }
        EngineState::Algebraic(s) => {
            let closure = oracle::transitive_closure(s.graph());
            for &(a, b) in pairs {
                if s.query(a, b)? != (a == b || closure.contains(&(a, b))) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn engine_stats(state: &EngineState) -> String {
    match state {
        EngineState::Tc(s) => format!("closure={}", s.ans().len()),
        EngineState::Forest(s) => {
            let roots: BTreeSet<usize> = (0..s.graph().n()).map(|v| s.root(v)).collect();
            format!("components={}", roots.len())
        }
        EngineState::Algebraic(s) => {
            format!("members={},bound={}", s.members().len(), s.bound())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use reach_core::generate::{random_change_script, random_gnp};

    #[test]
    fn budget_examples() {
        assert_eq!(budget_limit(16, 2), 16);
        assert!(budget_check(16, 16, 2));
        assert!(!budget_check(16, 17, 2));
        assert_eq!(budget_limit(8, 2), 9);
        assert_eq!(budget_limit(1, 3), 0);
    }

    #[test]
    fn empty_script_passes() {
        let g = Graph::with_edges(4, true, [(0, 1)]).unwrap();
        let mut opts = ReplayOptions::new(EngineKind::TcInsert);
        opts.oracle_check = true;
        let report = replay(&g, &[], &opts).unwrap();
        assert!(report.pass);
        assert!(report.steps.is_empty());
        assert_eq!(report.to_lines(), "summary steps=0 pass=true\n");
    }

    #[test]
    fn closure_engine_rejects_deletions() {
        let g = Graph::with_edges(3, true, [(0, 1)]).unwrap();
        let script = vec![BulkChange::new([], [(0, 1)])];
        let err = replay(&g, &script, &ReplayOptions::new(EngineKind::TcInsert)).unwrap_err();
        assert!(err.to_string().contains("deletions"));
    }

    #[test]
    fn forest_engine_rejects_directed_graphs() {
        let g = Graph::with_edges(3, true, [(0, 1)]).unwrap();
        let err = replay(&g, &[], &ReplayOptions::new(EngineKind::Undirected)).unwrap_err();
        assert!(err.to_string().contains("undirected"));
    }

    #[test]
    fn mixed_replay_agrees_per_step() {
        let g = random_gnp(10, 0.3, false, 7).unwrap();
        let script = random_change_script(&g, 5, 4, true, 8);
        let mut opts = ReplayOptions::new(EngineKind::Undirected);
        opts.oracle_check = true;
        opts.timing = false;
        let report = replay(&g, &script, &opts).unwrap();
        assert!(report.pass);
        assert_eq!(report.steps.len(), 5);
        assert!(report.steps.iter().all(|s| s.agree == Some(true)));
        assert!(report.to_lines().ends_with("summary steps=5 pass=true\n"));
    }

    #[test]
    fn reports_without_timing_are_reproducible() {
        let g = random_gnp(9, 0.25, true, 3).unwrap();
        let script = random_change_script(&g, 4, 3, true, 4);
        let mut opts = ReplayOptions::new(EngineKind::Algebraic);
        opts.oracle_check = true;
        opts.timing = false;
        opts.seed = 11;
        let a = replay(&g, &script, &opts).unwrap();
        let b = replay(&g, &script, &opts).unwrap();
        assert!(a.pass);
        assert_eq!(a.to_lines(), b.to_lines());
    }

    #[test]
    fn undirected_input_is_doubled_for_directed_engines() {
        let g = Graph::with_edges(4, false, [(0, 1), (1, 2)]).unwrap();
        let script = vec![BulkChange::new([(2usize, 3usize)], [(0usize, 1usize)])];
        let mut opts = ReplayOptions::new(EngineKind::Algebraic);
        opts.oracle_check = true;
        opts.timing = false;
        let report = replay(&g, &script, &opts).unwrap();
        assert!(report.pass);
        assert_eq!(report.steps[0].inserted, 2);
        assert_eq!(report.steps[0].deleted, 2);
    }

    #[test]
    fn budget_annotation_flags_oversized_steps() {
        let g = Graph::new(16, true).unwrap();
        // 17 distinct inserts on 16 nodes need a second source node.
        let mut big = BTreeSet::new();
        for v in 1..16 {
            big.insert((0usize, v));
        }
        big.insert((1, 2));
        big.insert((1, 3));
        assert_eq!(big.len(), 17);
        let script = vec![BulkChange::new(big, []), BulkChange::new([(2usize, 4usize)], [])];
        let mut opts = ReplayOptions::new(EngineKind::TcInsert);
        opts.budget_c = Some(2);
        opts.timing = false;
        let report = replay(&g, &script, &opts).unwrap();
        assert_eq!(report.steps[0].within_budget, Some(false));
        assert_eq!(report.steps[1].within_budget, Some(true));
        assert!(report.pass);
    }
}
