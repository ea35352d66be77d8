//! Guess loop for 2-connected vertex deletion and the edge-to-vertex
//! reduction for its edge version.

use super::two_conn::solve_forced;
use super::{guesses, run_guesses, GuessResult, SolveReport, SolverConfig};
use crate::csp::{Constraint2cc, CspInstance};
use crate::decomp::vertex_partition_planar;
use crate::error::{Error, Result};
use crate::graph::{RotationSystem, Vertex};
use crate::reductions::{subdivide, CspDeletion, Subdivided, Target};
use crate::segments::{build_segments, class_count, enumerate_body_family, BodyFamily};
use crate::treewidth::{exact_treewidth, nice_decomposition};

/// Quotients wider than this are skipped: `tw_slope·⌈√k⌉ + tw_offset`, with
/// ⌈√0⌉ read as 1.
pub fn tw_threshold(k: usize, cfg: &SolverConfig) -> usize {
    cfg.tw_slope * class_count(k) + cfg.tw_offset
}

/// Guesses a class V_i and Z_i = Z ∩ V_i, takes the components of
/// G[V_i ∖ Z_i] as segments, enumerates their candidate bodies and hands each
/// guess to the with-bodies solver with Z_i forced into the solution.
pub fn solve_2conn_vertex_deletion(
    inst: &CspInstance,
    set: &[Constraint2cc],
    undeletable: &[usize],
    k: usize,
    rot: &RotationSystem,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    inst.validate()?;
    if !inst.is_permutation_instance() {
        return Err(Error::Precondition("2-connected deletion requires a permutation instance".into()));
    }
    if let Some(&u) = undeletable.iter().find(|&&u| u >= inst.num_vars) {
        return Err(Error::UnknownVertex(u));
    }
    let g = inst.normalized().constraint_graph();
    let part = vertex_partition_planar(&g, rot, 0, cfg.class_count(k))?;
    let mut hard = vec![false; g.n()];
    for &u in undeletable {
        hard[u] = true;
    }
    let per_class = k / part.classes.len();
    let all = guesses(&part.classes, &part.class_of, &hard, per_class, &cfg.mode)?;
    let threshold = tw_threshold(k, cfg);
    // Bodies must be recoverable for any Z of size ≤ k, whatever the configured cap.
    let cap = cfg.body_cap.max(k);
    run_guesses(&all, cfg, |guess| {
        let removed: &[Vertex] = &guess.removed;
        let seg = build_segments(&g, &part.classes[guess.class], removed);
        let q = &seg.contracted;
        let ntd = nice_decomposition(q);
        if ntd.width() > threshold {
            // The heuristic only bounds treewidth from above; ask the exact
            // routine before dropping the guess.
            match exact_treewidth(q) {
                Ok(tw) if tw <= threshold => {}
                Ok(_) => return Ok(GuessResult::Skipped),
                Err(Error::CapExceeded(_)) => return Ok(GuessResult::Skipped),
                Err(e) => return Err(e),
            }
        }
        let per_segment =
            seg.segments.iter().map(|s| enumerate_body_family(&g, s, cap, removed)).collect::<Result<_>>()?;
        let family = BodyFamily { per_segment };
        let out = solve_forced(inst, set, undeletable, &seg, &family, k, removed, &ntd, cfg.dp)?;
        Ok(match out.solution {
            Some(z) => GuessResult::Found(z, out.stats),
            None if out.rejected => GuessResult::Rejected(out.stats),
            None => GuessResult::Empty(out.stats),
        })
    })
}

/// Subdivides every constraint edge so that deleting an edge becomes
/// deleting its new middle variable. Original variables and the middles of
/// `undeletable_edges` are undeletable; the budget is unchanged.
pub fn edge_to_vertex_2conn(
    inst: &CspInstance,
    set: &[Constraint2cc],
    undeletable_edges: &[(Vertex, Vertex)],
    k: usize,
) -> Result<Subdivided> {
    let base = CspDeletion { csp: inst.clone(), target: Target::Blocks(set.to_vec()), undeletable: Vec::new(), k };
    subdivide(&base, undeletable_edges)
}
