use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use reach_cli::{replay, smallest_bound_exponent, EngineKind, ReplayOptions};
use reach_core::algebraic::{EngineMode, WeightScheme};
use reach_core::generate::{partial_k_tree, path_union, random_change_script, random_gnp};
use reach_core::io::{
    format_change_script, format_decomposition, format_graph, format_weights, parse_change_script,
    parse_decomposition, parse_graph,
};
use reach_core::oracle::{circulation_report, isolation_report};
use reach_core::weights::{
    btw_bounded_degree_weights, btw_weights, random_isolating_weights, shift_to_isolating,
};
use reach_core::{Graph, TreeDecomposition, WeightAssignment};

/// Dynamic reachability workbench: generates instances, replays change
/// scripts through the engines, and builds the weight assignments the
/// algebraic engine runs on.
///
/// Exit codes: 0 on success, 1 when a replay disagrees with the oracle or a
/// weight check fails, 2 on usage and input errors.
#[derive(Parser)]
#[command(name = "reach", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate graphs, change scripts, and tree decompositions.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Replay a change script through an engine, step by step.
    Replay(ReplayArgs),
    /// Build a weight assignment for a graph and print it.
    Weights {
        #[command(subcommand)]
        scheme: WeightsCommand,
    },
    /// Replay repeatedly and report per-iteration timings.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum Family {
    /// G(n, p) with each (ordered) pair kept independently.
    RandomGnp {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        prob: f64,
        #[arg(long)]
        directed: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: GenOut,
    },
    /// Disjoint union of directed paths, a worst case for path counting.
    PathUnion {
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        length: usize,
        #[command(flatten)]
        out: GenOut,
    },
    /// Subgraph of a k-tree together with its witness decomposition.
    PartialKTree {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = 0.5)]
        keep: f64,
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the tree decomposition here.
        #[arg(long)]
        decomp_out: Option<PathBuf>,
        #[command(flatten)]
        out: GenOut,
    },
}

/// Output options shared by the generators. A change script is produced when
/// `--script-steps` is positive; files default to stdout.
#[derive(Args)]
struct GenOut {
    /// Write the graph here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    script_steps: usize,
    #[arg(long, default_value_t = 4)]
    script_batch: usize,
    /// Let the script delete edges as well as insert them.
    #[arg(long)]
    script_deletes: bool,
    #[arg(long, default_value_t = 1)]
    script_seed: u64,
    /// Write the script here instead of stdout.
    #[arg(long)]
    script_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    TcInsert,
    Undirected,
    Algebraic,
}

impl From<EngineArg> for EngineKind {
    fn from(e: EngineArg) -> EngineKind {
        match e {
            EngineArg::TcInsert => EngineKind::TcInsert,
            EngineArg::Undirected => EngineKind::Undirected,
            EngineArg::Algebraic => EngineKind::Algebraic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Verified,
    Faithful,
}

impl From<ModeArg> for EngineMode {
    fn from(m: ModeArg) -> EngineMode {
        match m {
            ModeArg::Verified => EngineMode::Verified,
            ModeArg::Faithful => EngineMode::Faithful,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Random,
    Paper,
}

impl From<SchemeArg> for WeightScheme {
    fn from(s: SchemeArg) -> WeightScheme {
        match s {
            SchemeArg::Random => WeightScheme::Random,
            SchemeArg::Paper => WeightScheme::Paper,
        }
    }
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    script: PathBuf,
    #[arg(long, value_enum)]
    engine: EngineArg,
    /// Cross-check every step against the brute-force oracle.
    #[arg(long)]
    oracle_check: bool,
    /// Annotate steps against the ⌈log₂^c n⌉ change-size budget.
    #[arg(long)]
    budget_c: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Verified)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Random)]
    weight_scheme: SchemeArg,
    /// Tree decomposition file, required by the paper weight scheme.
    #[arg(long)]
    decomp: Option<PathBuf>,
    /// Omit timing fields, making reports byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum WeightsCommand {
    /// Skew-symmetric non-zero-circulation weights for a bounded-degree
    /// graph with a given-width decomposition.
    BoundedDegree {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        decomp: PathBuf,
        /// Degree bound the construction is sized for.
        #[arg(long)]
        degree: usize,
        /// Width bound the construction is sized for.
        #[arg(long)]
        width: usize,
        #[command(flatten)]
        post: WeightsPost,
    },
    /// Non-zero-circulation weights for any bounded-treewidth graph, pulled
    /// back through its bounded-degree copy graph.
    PullBack {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        decomp: PathBuf,
        #[command(flatten)]
        post: WeightsPost,
    },
    /// Random positive weights retried until they isolate shortest paths.
    Random {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest weight value to draw.
        #[arg(long, default_value_t = 32)]
        cap: u64,
        #[command(flatten)]
        post: WeightsPost,
    },
}

#[derive(Args)]
struct WeightsPost {
    /// Apply the additive shift that turns non-zero circulation into
    /// isolation (skew schemes only).
    #[arg(long)]
    shift: bool,
    /// Verify the produced assignment with the exhaustive oracle.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    script: PathBuf,
    #[arg(long, value_enum)]
    engine: EngineArg,
    #[arg(long, default_value_t = 3)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Verified)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Random)]
    weight_scheme: SchemeArg,
    #[arg(long)]
    decomp: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate { family } => {
            generate(family)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay(args) => run_replay(args),
        Command::Weights { scheme } => run_weights(scheme),
        Command::Bench(args) => run_bench(args),
    }
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn generate(family: Family) -> Result<()> {
    let (graph, out) = match family {
        Family::RandomGnp { nodes, prob, directed, seed, out } => {
            (random_gnp(nodes, prob, directed, seed)?, out)
        }
        Family::PathUnion { paths, length, out } => (path_union(paths, length)?, out),
        Family::PartialKTree {
            nodes,
            width,
            keep,
            directed,
            max_degree,
            seed,
            decomp_out,
            out,
        } => {
            let (g, t) = partial_k_tree(nodes, width, keep, directed, max_degree, seed)?;
            if let Some(p) = &decomp_out {
                emit(&Some(p.clone()), &format_decomposition(&t))?;
            }
            (g, out)
        }
    };
    emit(&out.out, &format_graph(&graph))?;
    if out.script_steps > 0 {
        let script = random_change_script(
            &graph,
            out.script_steps,
            out.script_batch,
            out.script_deletes,
            out.script_seed,
        );
        emit(&out.script_out, &format_change_script(&script))?;
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_graph(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn load_decomp(path: &Path) -> Result<TreeDecomposition> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_decomposition(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn run_replay(args: ReplayArgs) -> Result<ExitCode> {
    let graph = load_graph(&args.graph)?;
    let text = fs::read_to_string(&args.script)
        .with_context(|| format!("reading {}", args.script.display()))?;
    let script =
        parse_change_script(&text).with_context(|| format!("parsing {}", args.script.display()))?;
    let opts = ReplayOptions {
        engine: args.engine.into(),
        oracle_check: args.oracle_check,
        budget_c: args.budget_c,
        seed: args.seed,
        mode: args.mode.into(),
        scheme: args.weight_scheme.into(),
        timing: !args.no_timing,
        decomposition: args.decomp.as_deref().map(load_decomp).transpose()?,
    };
    let report = replay(&graph, &script, &opts)?;
    print!("{}", report.to_lines());
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Builds the requested assignment and prints `w u v <int>` lines. `--check`
/// verdict lines go last; a failed check exits 1.
fn run_weights(scheme: WeightsCommand) -> Result<ExitCode> {
    match scheme {
        WeightsCommand::BoundedDegree { graph, decomp, degree, width, post } => {
            let g = load_graph(&graph)?;
            let t = load_decomp(&decomp)?;
            let w = btw_bounded_degree_weights(&g, &t, degree, width)?;
            finish_skew(&g, w, &post)
        }
        WeightsCommand::PullBack { graph, decomp, post } => {
            let g = load_graph(&graph)?;
            let t = load_decomp(&decomp)?;
            let w = btw_weights(&g, &t)?;
            finish_skew(&g, w, &post)
        }
        WeightsCommand::Random { graph, seed, cap, post } => {
            if post.shift {
                bail!("--shift applies to the skew-symmetric schemes only");
            }
            let g = load_graph(&graph)?;
            let g = if g.is_directed() { g } else { g.bidirected() };
            let w = random_isolating_weights(&g, seed, cap)?;
            print!("{}", format_weights(w.map(), false));
            if post.check {
                let report = isolation_report(&g, &w)?;
                println!("check isolation={}", verdict(report.is_isolating));
                if !report.is_isolating {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Shared tail for the skew-symmetric schemes: optional shift to isolating
/// weights, optional oracle check, skew-aware printing.
fn finish_skew(g: &Graph, w: WeightAssignment, post: &WeightsPost) -> Result<ExitCode> {
    if g.is_directed() {
        bail!("the skew-symmetric weight schemes need an undirected graph");
    }
    let directed = g.bidirected();
    if post.shift {
        let k = smallest_bound_exponent(g.n(), &w);
        let shifted = shift_to_isolating(&w, g.n(), k)?;
        print!("{}", format_weights(shifted.map(), false));
        if post.check {
            let report = isolation_report(&directed, &shifted)?;
            println!("check isolation={}", verdict(report.is_isolating));
            if !report.is_isolating {
                return Ok(ExitCode::from(1));
            }
        }
    } else {
        print!("{}", format_weights(w.map(), true));
        if post.check {
            let report = circulation_report(&directed, &w)?;
            println!(
                "check circulation={} cycles={}",
                verdict(report.has_nonzero_circulation),
                report.cycles.len()
            );
            if !report.has_nonzero_circulation {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "failed"
    }
}

fn run_bench(args: BenchArgs) -> Result<ExitCode> {
    if args.iters == 0 {
        bail!("--iters must be positive");
    }
    let graph = load_graph(&args.graph)?;
    let text = fs::read_to_string(&args.script)
        .with_context(|| format!("reading {}", args.script.display()))?;
    let script =
        parse_change_script(&text).with_context(|| format!("parsing {}", args.script.display()))?;
    let opts = ReplayOptions {
        engine: args.engine.into(),
        oracle_check: false,
        budget_c: None,
        seed: args.seed,
        mode: args.mode.into(),
        scheme: args.weight_scheme.into(),
        timing: true,
        decomposition: args.decomp.as_deref().map(load_decomp).transpose()?,
    };
    let mut best: Option<u128> = None;
    for iter in 0..args.iters {
        let report = replay(&graph, &script, &opts)?;
        let total: u128 = report.steps.iter().filter_map(|s| s.elapsed_micros).sum();
        println!("iter={} steps={} elapsed_us={}", iter + 1, report.steps.len(), total);
        best = Some(best.map_or(total, |b| b.min(total)));
    }
    println!("bench iters={} best_us={}", args.iters, best.unwrap_or(0));
    Ok(ExitCode::SUCCESS)
}
