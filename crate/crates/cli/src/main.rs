//! `pcsp`: command-line front end for the deletion solvers, reductions,
//! kernelization and hardness generator. Every command prints one JSON value
//! on stdout. Exit status 0 means answered, 2 means the budget ran out
//! before an answer, and 1 means the input was rejected.

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcsp_core::graph::{faces, EdgeId, Graph, RotationSystem, Vertex};
use pcsp_core::hardness::{
    brute_ceec, brute_grid_tiling, gridtiling_to_ceec, remove_weights_undeletable, GridTilingInstance,
};
use pcsp_core::kernel::{
    bound_terminals, contract_to_undeletable, planar_grid_replacement, RuleConfig, SfvsKernelInstance,
};
use pcsp_core::oracle::brute_deletion;
use pcsp_core::reductions::{reduce, MwcEncoding, ProblemInstance, ProblemKind};
use pcsp_core::solvers::{solve_problem, Mode, SolverConfig, Verdict};
use pcsp_core::treewidth::{self, TreeDecomposition};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "pcsp", version, about = "Deletion problems on planar permutation CSPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a deletion problem and print a witness.
    Solve(SolveArgs),
    /// Print the permutation-CSP encoding of a problem instance.
    Reduce(ReduceArgs),
    /// Run the Subset-FVS kernelization steps on an edge-terminal instance.
    Kernelize(KernelizeArgs),
    /// Generate a hard instance from a Grid Tiling instance.
    GenHardness(GenHardnessArgs),
    /// Check a graph, its rotation system and an optional tree decomposition.
    Validate(GraphInput),
    /// Compute treewidth exactly or bound it with the min-fill heuristic.
    Treewidth(TreewidthArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file: a problem instance plus `rotation`, a list of incident
    /// edge ids per vertex in clockwise order.
    input: PathBuf,
    /// Overrides the problem kind stored in the file.
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    #[arg(long, value_enum, default_value_t = Algorithm::Structured)]
    algorithm: Algorithm,
    /// Overrides the deletion budget stored in the file.
    #[arg(long)]
    k: Option<usize>,
    /// Maximum number of guesses.
    #[arg(long, default_value_t = 1_000_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    body_cap: usize,
    /// JSON array with a single guess tuple; only that guess is tried.
    #[arg(long)]
    tuple_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Structured,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Oct,
    GroupFvs,
    VertexMwc,
    Coc,
    SubsetFvs,
    TwoSubsetFvs,
    SubsetGroupFvs,
    TwoConnCoc,
}

impl From<ProblemArg> for ProblemKind {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Oct => ProblemKind::Oct,
            ProblemArg::GroupFvs => ProblemKind::GroupFvs,
            ProblemArg::VertexMwc => ProblemKind::VertexMwc,
            ProblemArg::Coc => ProblemKind::Coc,
            ProblemArg::SubsetFvs => ProblemKind::SubsetFvs,
            ProblemArg::TwoSubsetFvs => ProblemKind::TwoSubsetFvs,
            ProblemArg::SubsetGroupFvs => ProblemKind::SubsetGroupFvs,
            ProblemArg::TwoConnCoc => ProblemKind::TwoConnCoc,
        }
    }
}

#[derive(Args)]
struct ReduceArgs {
    input: PathBuf,
    /// Multiway cut only: how terminals are separated in the CSP.
    #[arg(long, value_enum, default_value_t = MwcArg::SizeConstraint)]
    mwc_encoding: MwcArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MwcArg {
    SizeConstraint,
    TerminalDomain,
}

#[derive(Args)]
struct KernelizeArgs {
    /// Edge-terminal Subset-FVS instance; may carry a `rotation` for
    /// `--grid-replace`.
    input: PathBuf,
    /// Normalize, find a hitting set and apply the reduction rules.
    #[arg(long)]
    rules: bool,
    /// Override the leaf count that triggers the expansion rule.
    #[arg(long, requires = "rules")]
    leaf_threshold: Option<usize>,
    /// Contract the components outside W to undeletable vertices. Takes a
    /// JSON array of vertex ids, or `all` for W = V(G).
    #[arg(long = "supply-W", value_name = "FILE|all")]
    supply_w: Option<String>,
    /// Replace undeletable vertices by grids, using the input rotation.
    #[arg(long, conflicts_with_all = ["rules", "supply_w"])]
    grid_replace: bool,
}

#[derive(Args)]
struct GenHardnessArgs {
    /// Coordinate bound: values range over 0..=n.
    #[arg(long)]
    n: usize,
    /// Grid size.
    #[arg(long)]
    k: usize,
    /// JSON matrix of pair lists, `sets[i][j] = [[a, b], ...]`. Without it
    /// every pair is kept with probability `--density`.
    #[arg(long)]
    sets_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.7)]
    density: f64,
    /// Also remove weights and undeletable edges.
    #[arg(long)]
    unweighted: bool,
    /// Also decide both sides by brute force.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct GraphInput {
    /// JSON with `graph`, optional `rotation` and optional `decomposition`.
    input: PathBuf,
    /// Read the input as a DIMACS edge list (`p edge n m`, `e u v`, 1-based).
    #[arg(long)]
    dimacs: bool,
}

#[derive(Args)]
struct TreewidthArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    #[arg(long)]
    heuristic: bool,
}

/// A command failure: exit status and the JSON error object.
struct Failure {
    kind: &'static str,
    message: String,
}

impl From<pcsp_core::Error> for Failure {
    fn from(e: pcsp_core::Error) -> Self {
        use pcsp_core::Error as E;
        let kind = match e {
            E::CapExceeded(_) => "cap_exceeded",
            E::Parse(_) => "parse",
            E::InvalidEmbedding(_) | E::MissingEmbedding => "embedding",
            _ => "invalid_input",
        };
        Failure { kind, message: e.to_string() }
    }
}

fn fail(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure { kind, message: message.into() }
}

type Outcome = Result<(Value, u8), Failure>;

/// Enumeration caps, each overridable through `PH_CAPS`, e.g.
/// `PH_CAPS=brute=1e8,dp=1000000,tw=22`.
#[derive(Clone, Copy, Debug)]
struct Caps {
    brute: u128,
    dp: usize,
    tw: usize,
    grid: u128,
    search: u64,
    kernel: u128,
}

impl Caps {
    fn from_env() -> Result<Caps, Failure> {
        let mut caps = Caps {
            brute: pcsp_core::oracle::DEFAULT_CAP,
            dp: pcsp_core::dp::DpConfig::default().max_cells,
            tw: treewidth::DEFAULT_EXACT_CAP,
            grid: 1 << 24,
            search: 100_000_000,
            kernel: RuleConfig::default().cap,
        };
        let Ok(spec) = std::env::var("PH_CAPS") else {
            return Ok(caps);
        };
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| fail("caps", format!("expected key=value in PH_CAPS, got {item:?}")))?;
            let value = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0 && v.fract() == 0.0)
                .ok_or_else(|| fail("caps", format!("PH_CAPS value {raw:?} is not a nonnegative integer")))?;
            match key {
                "brute" => caps.brute = value as u128,
                "dp" => caps.dp = value as usize,
                "tw" => caps.tw = value as usize,
                "grid" => caps.grid = value as u128,
                "search" => caps.search = value as u64,
                "kernel" => caps.kernel = value as u128,
                _ => return Err(fail("caps", format!("unknown PH_CAPS key {key:?}"))),
            }
        }
        Ok(caps)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| fail("parse", format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
struct ProblemFile {
    #[serde(flatten)]
    instance: ProblemInstance,
    rotation: Option<Vec<Vec<EdgeId>>>,
}

/// The file's rotation, or the adjacency order if that happens to be planar.
fn rotation_for(g: &Graph, lists: Option<Vec<Vec<EdgeId>>>) -> Result<RotationSystem, Failure> {
    let rot = match lists {
        Some(l) => RotationSystem::from_edge_lists(g, l)?,
        None => RotationSystem::from_adjacency_order(g),
    };
    rot.validate(g).map_err(|e| fail("embedding", format!("{e}; supply a planar `rotation`")))?;
    Ok(rot)
}

#[derive(Serialize)]
struct SolveStatsOut {
    guesses: usize,
    width: usize,
    table_cells: usize,
    wall_ms: u128,
}

fn solve(args: SolveArgs, caps: Caps) -> Outcome {
    let file: ProblemFile = read_json(&args.input)?;
    let mut p = file.instance.clone();
    p.graph = p.graph.validated()?;
    if let Some(kind) = args.problem {
        p.problem = kind.into();
    }
    if let Some(k) = args.k {
        p.k = k;
    }
    p.validate()?;
    let start = Instant::now();
    let (answer, witness, stats, status) = match args.algorithm {
        Algorithm::Brute => {
            let w = brute_deletion(&p, caps.brute)?;
            (Some(w.is_some()), w, (0, 0, 0), 0)
        }
        Algorithm::Structured => {
            let rot = rotation_for(&p.graph, file.rotation)?;
            let mode = match &args.tuple_file {
                Some(path) => Mode::PlantedTuple(read_json(path)?),
                None => Mode::FullEnumeration,
            };
            let mut cfg = SolverConfig {
                budget: args.budget,
                body_cap: args.body_cap,
                mode,
                threads: args.threads.max(1),
                ..SolverConfig::default()
            };
            cfg.dp.max_cells = caps.dp;
            cfg.brute_cap = caps.brute;
            let report = solve_problem(&p, &rot, &cfg)?;
            let s = report.stats;
            match report.verdict {
                Verdict::Solved(z) => (Some(true), Some(z), (s.guesses, s.width, s.table_cells), 0),
                Verdict::Infeasible => (Some(false), None, (s.guesses, s.width, s.table_cells), 0),
                Verdict::BudgetExhausted => (None, None, (s.guesses, s.width, s.table_cells), 2),
            }
        }
    };
    let stats =
        SolveStatsOut { guesses: stats.0, width: stats.1, table_cells: stats.2, wall_ms: start.elapsed().as_millis() };
    Ok((json!({ "answer": answer, "witness": witness, "stats": stats }), status))
}

fn reduce_cmd(args: ReduceArgs) -> Outcome {
    let file: ProblemFile = read_json(&args.input)?;
    let mut p = file.instance;
    p.graph = p.graph.validated()?;
    let enc = match args.mwc_encoding {
        MwcArg::SizeConstraint => MwcEncoding::SizeConstraint,
        MwcArg::TerminalDomain => MwcEncoding::TerminalDomain,
    };
    let out = reduce(&p, enc)?;
    Ok((serde_json::to_value(out).map_err(|e| fail("internal", e.to_string()))?, 0))
}

#[derive(Deserialize)]
struct KernelFile {
    #[serde(flatten)]
    instance: SfvsKernelInstance,
    rotation: Option<Vec<Vec<EdgeId>>>,
}

fn kernelize(args: KernelizeArgs, caps: Caps) -> Outcome {
    let file: KernelFile = read_json(&args.input)?;
    let mut inst = file.instance;
    inst.validate()?;
    let mut out = serde_json::Map::new();
    if args.grid_replace {
        let g = inst.multigraph();
        let lists = file.rotation.ok_or_else(|| fail("embedding", "--grid-replace needs a `rotation`"))?;
        let rot = RotationSystem::from_edge_lists(&g, lists)?;
        let r = planar_grid_replacement(&inst, &rot)?;
        out.insert("grids".into(), json!(r.grids));
        out.insert("rotation".into(), json!(edge_lists(&r.rotation)));
        inst = r.instance;
    }
    if args.rules {
        let cfg = RuleConfig { leaf_threshold: args.leaf_threshold, cap: caps.kernel, ..RuleConfig::default() };
        let r = bound_terminals(&inst, &cfg)?;
        out.insert("hitting_set".into(), json!({ "z": r.z, "exact": r.z_exact }));
        out.insert("trivial_no".into(), json!(r.trivial_no));
        out.insert("log".into(), json!(r.log));
        inst = r.instance;
    }
    if let Some(spec) = &args.supply_w {
        let w: Vec<Vertex> = if spec == "all" { (0..inst.n).collect() } else { read_json(Path::new(spec))? };
        let c = contract_to_undeletable(&inst, &w)?;
        out.insert("map".into(), json!(c.map));
        inst = c.instance;
    }
    out.insert("instance".into(), json!(inst));
    Ok((Value::Object(out), 0))
}

fn edge_lists(rot: &RotationSystem) -> Vec<Vec<EdgeId>> {
    rot.order.iter().map(|row| row.iter().map(|ee| ee.edge).collect()).collect()
}

fn gen_hardness(args: GenHardnessArgs, caps: Caps) -> Outcome {
    let gt = match &args.sets_file {
        Some(path) => GridTilingInstance { n: args.n, k: args.k, sets: read_json(path)? },
        None => {
            if !(0.0..=1.0).contains(&args.density) {
                return Err(fail("invalid_input", "--density must lie in [0, 1]"));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            let mut gt = GridTilingInstance::full(args.n, args.k);
            for row in &mut gt.sets {
                for set in row {
                    set.retain(|_| rng.gen_bool(args.density));
                }
            }
            gt
        }
    };
    gt.validate()?;
    let inst = gridtiling_to_ceec(&gt)?;
    let mut out = serde_json::Map::new();
    out.insert("grid_tiling".into(), json!(gt));
    if args.check {
        let tiling = brute_grid_tiling(&gt, caps.grid)?;
        let deletion = brute_ceec(&inst, caps.search)?;
        out.insert("check".into(), json!({ "grid_tiling": tiling, "deletion": deletion }));
    }
    let emitted = if args.unweighted { remove_weights_undeletable(&inst)? } else { inst };
    out.insert("instance".into(), ceec_json(&emitted));
    Ok((Value::Object(out), 0))
}

/// Weights are written as strings when they exceed what JSON readers treat
/// as exact integers.
fn ceec_json(inst: &pcsp_core::hardness::WeightedCeecInstance) -> Value {
    let weight = |w: u128| if w < (1u128 << 53) { json!(w as u64) } else { json!(w.to_string()) };
    json!({
        "graph": inst.graph,
        "weights": inst.weights.iter().map(|&w| weight(w)).collect::<Vec<_>>(),
        "undeletable": inst.undeletable,
        "k": inst.k,
        "t": weight(inst.t),
        "rotation": edge_lists(&inst.rotation),
    })
}

#[derive(Deserialize)]
struct GraphFile {
    graph: Graph,
    rotation: Option<Vec<Vec<EdgeId>>>,
    decomposition: Option<TreeDecomposition>,
}

fn parse_dimacs(text: &str) -> Result<Graph, Failure> {
    let mut g: Option<Graph> = None;
    for (no, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        let bad = || fail("parse", format!("DIMACS line {}: {line:?}", no + 1));
        match it.next() {
            None | Some("c") => {}
            Some("p") => {
                it.next().ok_or_else(bad)?;
                let n: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                g = Some(Graph::new(n));
            }
            Some("e") => {
                let g = g.as_mut().ok_or_else(|| fail("parse", "DIMACS edge before the `p` line"))?;
                let mut end = || it.next().and_then(|s| s.parse::<usize>().ok()).filter(|&v| v >= 1).ok_or_else(bad);
                let (u, v) = (end()?, end()?);
                if !g.has_edge(u - 1, v - 1) {
                    g.add_edge(u - 1, v - 1)?;
                }
            }
            Some(_) => return Err(bad()),
        }
    }
    g.ok_or_else(|| fail("parse", "DIMACS input has no `p` line"))
}

fn load_graph(input: &GraphInput) -> Result<GraphFile, Failure> {
    if input.dimacs {
        let text =
            std::fs::read_to_string(&input.input).map_err(|e| fail("io", format!("{}: {e}", input.input.display())))?;
        return Ok(GraphFile { graph: parse_dimacs(&text)?, rotation: None, decomposition: None });
    }
    let mut f: GraphFile = read_json(&input.input)?;
    f.graph = f.graph.validated()?;
    Ok(f)
}

fn validate(input: GraphInput) -> Outcome {
    let f = load_graph(&input)?;
    let g = &f.graph;
    let mut report = serde_json::Map::new();
    report.insert("graph".into(), json!({ "valid": true, "n": g.n(), "m": g.m() }));
    let mut all_ok = true;
    if let Some(lists) = f.rotation {
        let checked = RotationSystem::from_edge_lists(g, lists).and_then(|rot| rot.validate(g).map(|_| rot));
        let entry = match checked {
            Ok(rot) => json!({ "valid": true, "faces": faces(g, &rot)?.len() }),
            Err(e) => {
                all_ok = false;
                json!({ "valid": false, "error": e.to_string() })
            }
        };
        report.insert("embedding".into(), entry);
    }
    if let Some(td) = f.decomposition {
        let entry = match treewidth::validate(g, &td) {
            Ok(()) => json!({ "valid": true, "width": td.width() }),
            Err(v) => {
                all_ok = false;
                json!({ "valid": false, "violation": v })
            }
        };
        report.insert("decomposition".into(), entry);
    }
    report.insert("valid".into(), json!(all_ok));
    Ok((Value::Object(report), 0))
}

fn treewidth_cmd(args: TreewidthArgs, caps: Caps) -> Outcome {
    let f = load_graph(&args.graph)?;
    let g = &f.graph;
    if args.exact {
        let w = treewidth::exact_treewidth_capped(g, caps.tw)?;
        return Ok((json!({ "method": "exact", "width": w }), 0));
    }
    let td = treewidth::heuristic_decomposition(g);
    Ok((json!({ "method": "heuristic", "width": td.width(), "decomposition": td }), 0))
}

fn run(cli: Cli) -> Outcome {
    let caps = Caps::from_env()?;
    match cli.command {
        Command::Solve(a) => solve(a, caps),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Kernelize(a) => kernelize(a, caps),
        Command::GenHardness(a) => gen_hardness(a, caps),
        Command::Validate(a) => validate(a),
        Command::Treewidth(a) => treewidth_cmd(a, caps),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            println!("{}", json!({ "error": { "kind": "usage", "message": e.to_string() } }));
            return ExitCode::from(1);
        }
    };
    let (value, status) = match run(cli) {
        Ok(v) => v,
        Err(f) => (json!({ "error": { "kind": f.kind, "message": f.message } }), 1),
    };
    println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
    ExitCode::from(status)
}
