//! Structured deletion solvers. Each one guesses a contraction class together
//! with the solution's part inside it, contracts what is left of the class
//! and decides the rest with a treewidth DP over the quotient.

mod driver;
mod edge;
mod two_conn;
mod vertex;

pub use driver::{edge_to_vertex_2conn, solve_2conn_vertex_deletion, tw_threshold};
pub use edge::solve_perm_csp_edge_deletion;
pub use two_conn::{
    canonical_tuple, solve_2conn_with_bodies, translate_2conn_with_bodies, Alpha, BodiesOutcome, Translation,
    TupleValue,
};
pub use vertex::solve_perm_csp_vertex_deletion;

use crate::dp::{DpConfig, DpStats};
use crate::error::{Error, Result};
use crate::graph::{Graph, RotationSystem};
use crate::oracle::{brute_csp_deletion, brute_csp_edge_deletion, check_problem_solution, for_each_subset_upto};
use crate::reductions::{edge_index, reduce, CspDeletion, Encoded, MwcEncoding, ProblemInstance, Subdivided, Target};
use crate::segments::class_count;
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// How a solver chooses its guesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every guess, in lexicographic order; exact within the budget.
    FullEnumeration,
    /// Exactly one guess `(v1, v2, v3, …)`: v1 selects its class, the id of v2
    /// is the count j, and `v3..v_{j+2}` are the removed items.
    PlantedTuple(Vec<usize>),
    /// Full enumeration; if the budget runs out, exhaustive search decides.
    BruteFallback,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Maximum number of guesses examined.
    pub budget: usize,
    /// Minimum size cap for body enumeration; the budget k is always allowed.
    pub body_cap: usize,
    /// Overrides ℓ = ⌈√k⌉.
    pub classes: Option<usize>,
    pub mode: Mode,
    pub threads: usize,
    /// Guesses whose quotient has treewidth above `tw_slope·⌈√k⌉ + tw_offset` are skipped.
    pub tw_slope: usize,
    pub tw_offset: usize,
    pub dp: DpConfig,
    /// Cap on the search space of the exhaustive fallback.
    pub brute_cap: u128,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: 1_000_000,
            body_cap: 0,
            classes: None,
            mode: Mode::FullEnumeration,
            threads: 1,
            tw_slope: 17,
            tw_offset: 2,
            dp: DpConfig::default(),
            brute_cap: crate::oracle::DEFAULT_CAP,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Precondition("solver budget must be at least 1".into()));
        }
        if self.classes == Some(0) {
            return Err(Error::Precondition("ℓ must be at least 1".into()));
        }
        Ok(())
    }

    pub fn class_count(&self, k: usize) -> usize {
        self.classes.unwrap_or_else(|| class_count(k))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict<Z = Vec<usize>> {
    Solved(Z),
    Infeasible,
    /// No solution was found, but the guess budget ran out or some guess hit
    /// the DP cell cap, so infeasibility is not established.
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub guesses: usize,
    /// Guesses dropped by the treewidth threshold.
    pub skipped: usize,
    pub width: usize,
    pub table_cells: usize,
    /// DP witnesses that failed re-verification. Always zero unless a
    /// translation is wrong.
    pub rejected: usize,
    /// Guesses abandoned because their DP exceeded the cell cap.
    pub capped: usize,
    pub brute_fallback: bool,
}

impl SolveStats {
    fn absorb(&mut self, s: &DpStats) {
        self.width = self.width.max(s.width);
        self.table_cells += s.table_cells;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveReport<Z = Vec<usize>> {
    pub verdict: Verdict<Z>,
    pub stats: SolveStats,
}

impl<Z> SolveReport<Z> {
    pub fn solution(&self) -> Option<&Z> {
        match &self.verdict {
            Verdict::Solved(z) => Some(z),
            _ => None,
        }
    }
}

/// Outcome of a single guess.
pub(crate) enum GuessResult<Z> {
    Found(Z, DpStats),
    Empty(DpStats),
    Skipped,
    /// The DP answered yes but its witness failed verification.
    Rejected(DpStats),
}

/// A decoded guess: class index and removed items of that class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Guess {
    pub class: usize,
    pub removed: Vec<usize>,
}

/// Guesses of a solver: either all subsets of size ≤ `per_class` of each
/// class minus `forbidden`, or the one guess decoded from a planted tuple.
pub(crate) fn guesses(
    classes: &[Vec<usize>],
    class_of: &[usize],
    forbidden: &[bool],
    per_class: usize,
    mode: &Mode,
) -> Result<Vec<Guess>> {
    if let Mode::PlantedTuple(t) = mode {
        if t.len() < 2 {
            return Err(Error::Precondition("guess tuple needs at least two entries".into()));
        }
        if let Some(&x) = t.iter().find(|&&x| x >= class_of.len()) {
            return Err(Error::Precondition(format!("tuple entry {x} is out of range")));
        }
        let j = t[1];
        if t.len() < j + 2 {
            return Err(Error::Precondition(format!("tuple announces {j} removed items but is too short")));
        }
        let class = class_of[t[0]];
        let mut removed: Vec<usize> = t[2..j + 2].to_vec();
        removed.sort_unstable();
        removed.dedup();
        // Items of other classes or forbidden items cannot be part of Z ∩ class.
        removed.retain(|&x| class_of[x] == class && !forbidden[x]);
        return Ok(vec![Guess { class, removed }]);
    }
    let mut out = Vec::new();
    for (class, items) in classes.iter().enumerate() {
        let universe: Vec<usize> = items.iter().copied().filter(|&x| !forbidden[x]).collect();
        for_each_subset_upto(&universe, per_class, |s| {
            out.push(Guess { class, removed: s.to_vec() });
            true
        });
    }
    Ok(out)
}

/// Runs `f` over the guesses (in parallel when `threads > 1`) and reports the
/// solution of the earliest successful guess, so the answer does not depend
/// on scheduling.
pub(crate) fn run_guesses<G: Sync, Z: Send>(
    guesses: &[G],
    cfg: &SolverConfig,
    f: impl Fn(&G) -> Result<GuessResult<Z>> + Sync,
) -> Result<SolveReport<Z>> {
    let limit = guesses.len().min(cfg.budget);
    let next = AtomicUsize::new(0);
    let best = AtomicUsize::new(usize::MAX);
    let results: Mutex<Vec<Option<Result<GuessResult<Z>>>>> = Mutex::new((0..limit).map(|_| None).collect());
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= limit || i > best.load(Ordering::SeqCst) {
            break;
        }
        let r = f(&guesses[i]);
        if matches!(r, Ok(GuessResult::Found(..))) {
            best.fetch_min(i, Ordering::SeqCst);
        }
        results.lock().expect("no panics while holding the lock")[i] = Some(r);
    };
    let threads = cfg.threads.max(1);
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(work);
            }
        });
    }
    let results = results.into_inner().expect("workers finished");
    let mut stats = SolveStats::default();
    for r in results.into_iter().flatten() {
        stats.guesses += 1;
        let r = match r {
            Err(Error::CapExceeded(_)) => {
                stats.capped += 1;
                continue;
            }
            r => r?,
        };
        match r {
            GuessResult::Found(z, s) => {
                stats.absorb(&s);
                return Ok(SolveReport { verdict: Verdict::Solved(z), stats });
            }
            GuessResult::Empty(s) => stats.absorb(&s),
            GuessResult::Rejected(s) => {
                stats.absorb(&s);
                stats.rejected += 1;
            }
            GuessResult::Skipped => stats.skipped += 1,
        }
    }
    let verdict =
        if limit < guesses.len() || stats.capped > 0 { Verdict::BudgetExhausted } else { Verdict::Infeasible };
    Ok(SolveReport { verdict, stats })
}

/// Embedding of the subdivided constraint graph: each edge uv is replaced in
/// place by the path u − x − v.
pub fn subdivided_rotation(src: &Graph, rot: &RotationSystem, sub: &Subdivided) -> Result<RotationSystem> {
    rot.validate(src)?;
    let dst = sub.inner.csp.constraint_graph();
    let mut lists = vec![Vec::new(); dst.n()];
    for v in 0..src.n() {
        for end in &rot.order[v] {
            let (a, b) = src.edge(end.edge);
            let x = sub.var_of(a, b).ok_or(Error::MissingEdge(a, b))?;
            lists[v].push(dst.edge_between(v, x).ok_or(Error::MissingEdge(v, x))?);
        }
    }
    for (i, &(a, b)) in sub.edges.iter().enumerate() {
        let x = sub.first_edge_var + i;
        lists[x] = vec![
            dst.edge_between(x, a).ok_or(Error::MissingEdge(x, a))?,
            dst.edge_between(x, b).ok_or(Error::MissingEdge(x, b))?,
        ];
    }
    RotationSystem::from_edge_lists(&dst, lists)
}

/// Solves a vertex-deletion CSP encoding with the structured solver matching
/// its target.
pub fn solve_csp_deletion(d: &CspDeletion, rot: &RotationSystem, cfg: &SolverConfig) -> Result<SolveReport> {
    let report = match &d.target {
        Target::Components(set) => solve_perm_csp_vertex_deletion(&d.csp, set, &d.undeletable, d.k, rot, cfg)?,
        Target::Blocks(set) => solve_2conn_vertex_deletion(&d.csp, set, &d.undeletable, d.k, rot, cfg)?,
    };
    with_fallback(report, cfg, || brute_csp_deletion(d, cfg.brute_cap))
}

fn with_fallback<Z>(
    mut report: SolveReport<Z>,
    cfg: &SolverConfig,
    brute: impl FnOnce() -> Result<Option<Z>>,
) -> Result<SolveReport<Z>> {
    if cfg.mode == Mode::BruteFallback && matches!(report.verdict, Verdict::BudgetExhausted) {
        report.stats.brute_fallback = true;
        report.verdict = match brute()? {
            Some(z) => Verdict::Solved(z),
            None => Verdict::Infeasible,
        };
    }
    Ok(report)
}

/// Solves a problem instance end to end: encodes it, runs the matching
/// structured solver and maps the solution back to vertex ids (edge ids in
/// the edge version). Every returned solution is checked against the problem
/// definition.
pub fn solve_problem(p: &ProblemInstance, rot: &RotationSystem, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    p.validate()?;
    let enc = reduce(p, MwcEncoding::default())?;
    let report = match &enc {
        Encoded::Vertex(d) => {
            let crot = rot.transfer(&p.graph, &d.csp.constraint_graph())?;
            solve_csp_deletion(d, &crot, cfg)?
        }
        Encoded::Edge(d) => {
            let crot = rot.transfer(&p.graph, &d.csp.constraint_graph())?;
            let r = solve_perm_csp_edge_deletion(&d.csp, &d.undeletable, d.k, &crot, cfg)?;
            let r = with_fallback(r, cfg, || brute_csp_edge_deletion(d, cfg.brute_cap))?;
            map_solution(r, |z| {
                let index = edge_index(&p.graph);
                z.iter()
                    .map(|&(u, v)| index.get(&(u.min(v), u.max(v))).copied().ok_or(Error::MissingEdge(u, v)))
                    .collect()
            })?
        }
        Encoded::Subdivided(s) => {
            let srot = subdivided_rotation(&p.graph, rot, s)?;
            let r = solve_csp_deletion(&s.inner, &srot, cfg)?;
            map_solution(r, |z| {
                let index = edge_index(&p.graph);
                z.iter()
                    .map(|&x| {
                        let (u, v) =
                            s.edge_of_var(x).ok_or(Error::Precondition(format!("variable {x} is not an edge")))?;
                        index.get(&(u, v)).copied().ok_or(Error::MissingEdge(u, v))
                    })
                    .collect()
            })?
        }
    };
    if let Some(z) = report.solution() {
        if !check_problem_solution(p, z)? {
            return Err(Error::Precondition(format!("solver returned an invalid solution {z:?}")));
        }
    }
    Ok(report)
}

fn map_solution<Z>(r: SolveReport<Z>, f: impl FnOnce(&Z) -> Result<Vec<usize>>) -> Result<SolveReport> {
    let verdict = match r.verdict {
        Verdict::Solved(z) => {
            let mut mapped = f(&z)?;
            mapped.sort_unstable();
            Verdict::Solved(mapped)
        }
        Verdict::Infeasible => Verdict::Infeasible,
        Verdict::BudgetExhausted => Verdict::BudgetExhausted,
    };
    Ok(SolveReport { verdict, stats: r.stats })
}
