//! Brute-force reference computations on small instances.
//!
//! Everything here is deliberately exhaustive: per-source BFS closures,
//! simple-path and simple-cycle enumeration, and a walk-parity dynamic
//! program. Enumerators carry hard size guards and fail loudly instead of
//! slowing down silently. The engines are tested against these functions.

use crate::graph::Graph;
use crate::weights::WeightAssignment;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Max node count for the exhaustive enumerators.
pub const MAX_ENUM_NODES: usize = 12;

/// Step budget for path/cycle enumeration, as a backstop behind the node guard.
const ENUM_STEP_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("operation requires an undirected graph")]
    DirectedInput,
    #[error("instance too large for exhaustive enumeration: {n} nodes, guard {max}")]
    TooLarge { n: usize, max: usize },
    #[error("edge ({0}, {1}) has no weight")]
    MissingWeight(usize, usize),
    #[error("edge ({0}, {1}) has non-positive weight")]
    NonPositiveWeight(usize, usize),
    #[error("weights not skew-symmetric at edge ({0}, {1})")]
    NotSkewSymmetric(usize, usize),
    #[error("enumeration budget exceeded during {0}")]
    BudgetExceeded(&'static str),
}

/// All ordered pairs (u, v), u ≠ v, with a directed path from u to v.
/// Per-source BFS; on undirected graphs both orientations are stored, so the
/// same traversal applies.
pub fn transitive_closure(g: &Graph) -> BTreeSet<(usize, usize)> {
    let mut closure = BTreeSet::new();
    for s in 0..g.n() {
        let mut seen = vec![false; g.n()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in g.out_neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    closure.insert((s, v));
                    queue.push_back(v);
                }
            }
        }
    }
    closure
}

/// Component representative (minimum node id) per node.
pub fn connected_components(g: &Graph) -> Result<Vec<usize>, OracleError> {
    if g.is_directed() {
        return Err(OracleError::DirectedInput);
    }
    let mut rep = vec![usize::MAX; g.n()];
    for s in 0..g.n() {
        if rep[s] != usize::MAX {
            continue;
        }
        rep[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in g.out_neighbors(u) {
                if rep[v] == usize::MAX {
                    rep[v] = s;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(rep)
}

/// Per-pair statistics for one reachable ordered pair with s ≠ t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairStats {
    pub min_weight: BigInt,
    /// Number of distinct minimum-weight simple paths.
    pub count: usize,
}

/// Exhaustive min-weight-path statistics. Pairs absent from `pairs` are
/// unreachable; (s, s) pairs are not listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolationReport {
    pub pairs: BTreeMap<(usize, usize), PairStats>,
    /// Every reachable pair has exactly one minimum-weight path.
    pub is_isolating: bool,
    /// Isolating, and all per-pair minima are pairwise distinct.
    pub is_strongly_isolating: bool,
}

impl IsolationReport {
    pub fn reachable(&self, s: usize, t: usize) -> bool {
        s == t || self.pairs.contains_key(&(s, t))
    }
}

fn check_guard(g: &Graph) -> Result<(), OracleError> {
    if g.n() > MAX_ENUM_NODES {
        return Err(OracleError::TooLarge { n: g.n(), max: MAX_ENUM_NODES });
    }
    Ok(())
}

fn edge_weights(g: &Graph, w: &WeightAssignment) -> Result<Vec<Vec<Option<BigInt>>>, OracleError> {
    let mut table = vec![vec![None; g.n()]; g.n()];
    for (u, v) in g.edges() {
        let wt = w.get(u, v).ok_or(OracleError::MissingWeight(u, v))?;
        table[u][v] = Some(wt.clone());
    }
    Ok(table)
}

/// Single-source min path weights by Dijkstra over `wt`. Positive weights
/// make minimum-weight walks simple, so this is also the simple-path minimum.
fn dijkstra(n: usize, wt: &[Vec<Option<BigInt>>], s: usize) -> Vec<Option<BigInt>> {
    let mut dist: Vec<Option<BigInt>> = vec![None; n];
    let mut done = vec![false; n];
    dist[s] = Some(BigInt::zero());
    loop {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if !done[v] && dist[v].is_some() {
                match best {
                    Some(b) if dist[b] <= dist[v] => {}
                    _ => best = Some(v),
                }
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        for v in 0..n {
            if let Some(edge) = &wt[u][v] {
                let cand = dist[u].clone().unwrap() + edge;
                if dist[v].as_ref().is_none_or(|d| cand < *d) {
                    dist[v] = Some(cand);
                }
            }
        }
    }
    dist
}

/// Min path weight and minimum-weight simple-path counts for all ordered
/// pairs. Requires positive weights on every edge and a small node count.
pub fn isolation_report(g: &Graph, w: &WeightAssignment) -> Result<IsolationReport, OracleError> {
    check_guard(g)?;
    let wt = edge_weights(g, w)?;
    for (u, v) in g.edges() {
        if !wt[u][v].as_ref().unwrap().is_positive() {
            return Err(OracleError::NonPositiveWeight(u, v));
        }
    }
    let n = g.n();
    // dist_to[t][v] = min weight of a v -> t path, for pruning the counter.
    let mut rev = vec![vec![None; n]; n];
    for u in 0..n {
        for v in 0..n {
            rev[v][u] = wt[u][v].clone();
        }
    }
    let dist_to: Vec<Vec<Option<BigInt>>> = (0..n).map(|t| dijkstra(n, &rev, t)).collect();

    let mut pairs = BTreeMap::new();
    let mut budget = ENUM_STEP_BUDGET;
    for s in 0..n {
        let dist_from = dijkstra(n, &wt, s);
        for t in 0..n {
            if s == t {
                continue;
            }
            let Some(min) = dist_from[t].clone() else { continue };
            let mut count = 0usize;
            let mut visited = vec![false; n];
            visited[s] = true;
            count_min_paths(
                &wt,
                &dist_to[t],
                s,
                t,
                BigInt::zero(),
                &min,
                &mut visited,
                &mut count,
                &mut budget,
            )?;
            pairs.insert((s, t), PairStats { min_weight: min, count });
        }
    }
    let is_isolating = pairs.values().all(|p| p.count == 1);
    let minima: BTreeSet<&BigInt> = pairs.values().map(|p| &p.min_weight).collect();
    let is_strongly_isolating = is_isolating && minima.len() == pairs.len();
    Ok(IsolationReport { pairs, is_isolating, is_strongly_isolating })
}

#[allow(clippy::too_many_arguments)]
fn count_min_paths(
    wt: &[Vec<Option<BigInt>>],
    dist_to_t: &[Option<BigInt>],
    cur: usize,
    t: usize,
    acc: BigInt,
    min: &BigInt,
    visited: &mut Vec<bool>,
    count: &mut usize,
    budget: &mut u64,
) -> Result<(), OracleError> {
    if *budget == 0 {
        return Err(OracleError::BudgetExceeded("min-path counting"));
    }
    *budget -= 1;
    if cur == t {
        if acc == *min {
            *count += 1;
        }
        return Ok(());
    }
    for (v, edge) in wt[cur].iter().enumerate() {
        let Some(edge) = edge else { continue };
        if visited[v] {
            continue;
        }
        let next = acc.clone() + edge;
        // Only prefixes that can still close at exactly the minimum survive.
        match &dist_to_t[v] {
            Some(rest) if next.clone() + rest <= *min => {}
            _ => continue,
        }
        visited[v] = true;
        count_min_paths(wt, dist_to_t, v, t, next, min, visited, count, budget)?;
        visited[v] = false;
    }
    Ok(())
}

/// One simple directed cycle: `nodes` in traversal order, closing back to
/// `nodes[0]`, and the sum of its edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub nodes: Vec<usize>,
    pub weight: BigInt,
}

/// Exhaustive listing of simple directed cycles on ≥ 3 distinct nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculationReport {
    pub cycles: Vec<Cycle>,
    /// True when every listed cycle has non-zero weight.
    pub has_nonzero_circulation: bool,
}

/// Enumerates every simple directed cycle on at least 3 distinct nodes and
/// sums its weights. Requires skew-symmetric weights on the (bidirected)
/// input; 2-node cycles are excluded because skew-symmetry forces their
/// weight to 0.
pub fn circulation_report(
    g: &Graph,
    w: &WeightAssignment,
) -> Result<CirculationReport, OracleError> {
    check_guard(g)?;
    let wt = edge_weights(g, w)?;
    for (u, v) in g.edges() {
        let forward = wt[u][v].as_ref().unwrap();
        match &wt[v][u] {
            Some(back) if forward + back == BigInt::zero() => {}
            _ => return Err(OracleError::NotSkewSymmetric(u, v)),
        }
    }
    let n = g.n();
    let mut cycles = Vec::new();
    let mut budget = ENUM_STEP_BUDGET;
    // Each directed cycle is found once, rooted at its minimum node; the two
    // traversal directions of an undirected cycle are distinct entries.
    for s in 0..n {
        let mut path = vec![s];
        let mut visited = vec![false; n];
        visited[s] = true;
        extend_cycles(&wt, s, &mut path, &mut visited, BigInt::zero(), &mut cycles, &mut budget)?;
    }
    let has_nonzero_circulation = cycles.iter().all(|c| !c.weight.is_zero());
    Ok(CirculationReport { cycles, has_nonzero_circulation })
}

fn extend_cycles(
    wt: &[Vec<Option<BigInt>>],
    start: usize,
    path: &mut Vec<usize>,
    visited: &mut Vec<bool>,
    acc: BigInt,
    cycles: &mut Vec<Cycle>,
    budget: &mut u64,
) -> Result<(), OracleError> {
    if *budget == 0 {
        return Err(OracleError::BudgetExceeded("cycle enumeration"));
    }
    *budget -= 1;
    let cur = *path.last().unwrap();
    for (v, edge) in wt[cur].iter().enumerate() {
        let Some(edge) = edge else { continue };
        if v == start && path.len() >= 3 {
            cycles.push(Cycle { nodes: path.clone(), weight: acc.clone() + edge });
        } else if v > start && !visited[v] {
            visited[v] = true;
            path.push(v);
            extend_cycles(wt, start, path, visited, acc.clone() + edge, cycles, budget)?;
            path.pop();
            visited[v] = false;
        }
    }
    Ok(())
}

/// Parity table of weighted walk counts: `get(s, t, i)` is the parity of the
/// number of s → t walks of total weight exactly i, for i ≤ bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkParityTable {
    n: usize,
    bound: usize,
    bits: Vec<Vec<Vec<bool>>>,
}

impl WalkParityTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn get(&self, s: usize, t: usize, i: usize) -> bool {
        self.bits[s][t][i]
    }
}

/// Dynamic program for walk parities: coeff(s, t, i) = [s=t ∧ i=0] ⊕
/// ⨁_{(u,t)∈E} coeff(s, u, i−w(u,t)). Positive integer weights make the
/// recurrence well-founded in i; edges heavier than `bound` never contribute.
pub fn count_weighted_walks_mod2(
    g: &Graph,
    w: &WeightAssignment,
    bound: usize,
) -> Result<WalkParityTable, OracleError> {
    let n = g.n();
    if n * n * (bound + 1) > 100_000_000 {
        return Err(OracleError::BudgetExceeded("walk parity table"));
    }
    // (in-edge, weight) lists per target, dropping edges heavier than bound.
    let mut in_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        let wt = w.get(u, v).ok_or(OracleError::MissingWeight(u, v))?;
        if !wt.is_positive() {
            return Err(OracleError::NonPositiveWeight(u, v));
        }
        if let Ok(wt) = usize::try_from(wt.clone()) {
            if wt <= bound {
                in_edges[v].push((u, wt));
            }
        }
    }
    let mut bits = vec![vec![vec![false; bound + 1]; n]; n];
    for s in 0..n {
        bits[s][s][0] = true;
        for i in 1..=bound {
            for t in 0..n {
                let mut parity = false;
                for &(u, wt) in &in_edges[t] {
                    if wt <= i {
                        parity ^= bits[s][u][i - wt];
                    }
                }
                bits[s][t][i] = parity;
            }
        }
    }
    Ok(WalkParityTable { n, bound, bits })
}

/// Breadth-first spanning forest with per-component minimum roots. Returns
/// child → parent links; roots have `None`. Layered from each component's
/// minimum node, with the smallest eligible parent chosen per node.
pub fn spanning_forest(g: &Graph) -> Result<Vec<Option<usize>>, OracleError> {
    if g.is_directed() {
        return Err(OracleError::DirectedInput);
    }
    let n = g.n();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut frontier = vec![s];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &u in &frontier {
                for v in g.out_neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            // Smallest neighbor in the previous layer wins the parent slot.
            for &v in &next {
                parent[v] =
                    g.out_neighbors(v).filter(|&u| frontier.contains(&u)).min().map(Some).unwrap();
            }
            frontier = next;
        }
    }
    Ok(parent)
}
