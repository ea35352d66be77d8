//! Definitional solution checks for each problem and exhaustive deletion search.

use super::{count_subsets_upto, for_each_subset_upto};
use crate::csp::GroupTable;
use crate::error::{Error, Result};
use crate::graph::{biconnected_decomposition, EdgeId, Graph, Vertex};
use crate::reductions::{CspDeletion, CspEdgeDeletion, ProblemInstance, ProblemKind};
use std::collections::{BTreeSet, VecDeque};

/// The graph left after deleting vertices or edges, with maps back to the
/// original ids. Edges keep their orientation.
#[derive(Clone, Debug)]
pub struct Residual {
    pub h: Graph,
    pub old_vertex: Vec<Vertex>,
    pub old_edge: Vec<EdgeId>,
}

impl Residual {
    pub fn new(g: &Graph, dead_vertex: &[bool], dead_edge: &[bool]) -> Self {
        let mut new_of = vec![usize::MAX; g.n()];
        let mut old_vertex = Vec::new();
        for v in 0..g.n() {
            if !dead_vertex[v] {
                new_of[v] = old_vertex.len();
                old_vertex.push(v);
            }
        }
        let mut h = Graph::new(old_vertex.len());
        let mut old_edge = Vec::new();
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if !dead_edge[e] && !dead_vertex[u] && !dead_vertex[v] {
                h.add_edge(new_of[u], new_of[v]).expect("subgraph of a simple graph");
                old_edge.push(e);
            }
        }
        Residual { h, old_vertex, old_edge }
    }
}

fn is_bipartite(h: &Graph) -> bool {
    let mut side = vec![None; h.n()];
    for s in 0..h.n() {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            let sx = side[x].expect("visited");
            for y in h.neighbors(x) {
                match side[y] {
                    None => {
                        side[y] = Some(!sx);
                        q.push_back(y);
                    }
                    Some(sy) if sy == sx => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Whether G[set] (within `h`) has a labeling Λ with Λ(x)λ(x,y) = Λ(y) on every edge.
fn consistent_labeling(h: &Graph, lambda: &[usize], group: &GroupTable, set: &[Vertex]) -> bool {
    let mut inside = vec![false; h.n()];
    for &v in set {
        inside[v] = true;
    }
    let mut label = vec![None; h.n()];
    for &s in set {
        if label[s].is_some() {
            continue;
        }
        label[s] = Some(group.identity());
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            let lx = label[x].expect("visited");
            for &(y, e) in h.incident(x) {
                if !inside[y] {
                    continue;
                }
                let arc = if h.edge(e).0 == x { lambda[e] } else { group.inv(lambda[e]) };
                let want = group.mul(lx, arc);
                match label[y] {
                    None => {
                        label[y] = Some(want);
                        q.push_back(y);
                    }
                    Some(ly) if ly != want => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Checks Z against the problem definition: |Z| ≤ k and the deletion leaves
/// no forbidden structure. Items are vertex ids, or edge ids in the edge
/// version. Deleting an undeletable item is an error.
pub fn check_problem_solution(p: &ProblemInstance, z: &[usize]) -> Result<bool> {
    let g = &p.graph;
    let zs: BTreeSet<usize> = z.iter().copied().collect();
    let allowed: BTreeSet<usize> = p.deletable_universe()?.into_iter().collect();
    let limit = if p.edge_version { g.m() } else { g.n() };
    if let Some(&x) = zs.iter().find(|&&x| x >= limit) {
        return Err(if p.edge_version { Error::UnknownEdge(x) } else { Error::UnknownVertex(x) });
    }
    if let Some(&x) = zs.iter().find(|x| !allowed.contains(x)) {
        return Err(Error::Precondition(format!("item {x} is undeletable")));
    }
    if zs.len() > p.k {
        return Ok(false);
    }
    let mut dead_v = vec![false; g.n()];
    let mut dead_e = vec![false; g.m()];
    for &x in &zs {
        if p.edge_version {
            dead_e[x] = true;
        } else {
            dead_v[x] = true;
        }
    }
    let r = Residual::new(g, &dead_v, &dead_e);
    let h = &r.h;
    let is_terminal = {
        let t: BTreeSet<Vertex> = p.terminals.iter().copied().collect();
        move |v: Vertex| t.contains(&r.old_vertex[v])
    };
    let lambda = |p: &ProblemInstance| -> Result<Vec<usize>> {
        let full = p.edge_labels()?;
        Ok(r.old_edge.iter().map(|&e| full[e]).collect())
    };
    Ok(match p.problem {
        ProblemKind::Oct => is_bipartite(h),
        ProblemKind::GroupFvs => {
            let all: Vec<Vertex> = (0..h.n()).collect();
            consistent_labeling(h, &lambda(p)?, p.group()?, &all)
        }
        ProblemKind::VertexMwc => h.components().iter().all(|c| c.iter().filter(|&&v| is_terminal(v)).count() <= 1),
        ProblemKind::Coc => h.components().iter().all(|c| c.len() <= p.t),
        ProblemKind::SubsetFvs => {
            biconnected_decomposition(h).blocks.iter().all(|b| b.len() <= 2 || !b.iter().any(|&v| is_terminal(v)))
        }
        ProblemKind::TwoSubsetFvs => biconnected_decomposition(h)
            .blocks
            .iter()
            .all(|b| b.len() <= 2 || b.iter().filter(|&&v| is_terminal(v)).count() <= 1),
        ProblemKind::SubsetGroupFvs => {
            let lam = lambda(p)?;
            let group = p.group()?;
            biconnected_decomposition(h)
                .blocks
                .iter()
                .all(|b| !b.iter().any(|&v| is_terminal(v)) || consistent_labeling(h, &lam, group, b))
        }
        ProblemKind::TwoConnCoc => biconnected_decomposition(h).blocks.iter().all(|b| b.len() <= p.t),
    })
}

/// All simple cycles of a simple graph, each once, as vertex sequences
/// starting at their smallest vertex with `c[1] < c[last]`.
pub fn simple_cycles(g: &Graph) -> Vec<Vec<Vertex>> {
    fn extend(g: &Graph, start: Vertex, path: &mut Vec<Vertex>, on: &mut [bool], out: &mut Vec<Vec<Vertex>>) {
        let last = *path.last().expect("nonempty");
        for w in g.neighbors(last) {
            if w == start && path.len() >= 3 && path[1] < last {
                out.push(path.clone());
            }
            if w > start && !on[w] {
                on[w] = true;
                path.push(w);
                extend(g, start, path, on, out);
                path.pop();
                on[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; g.n()];
    for s in 0..g.n() {
        on[s] = true;
        extend(g, s, &mut vec![s], &mut on, &mut out);
        on[s] = false;
    }
    out
}

/// λ(v1,v2)·λ(v2,v3)·…·λ(vℓ,v1) for a cycle given as a vertex sequence.
pub fn cycle_label(g: &Graph, lambda: &[usize], group: &GroupTable, cycle: &[Vertex]) -> usize {
    let arcs = (0..cycle.len()).map(|i| {
        let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        let e = g.edge_between(a, b).expect("cycle edge");
        if g.edge(e).0 == a {
            lambda[e]
        } else {
            group.inv(lambda[e])
        }
    });
    group.product(arcs)
}

/// Independent check by explicit cycle enumeration on the residual graph:
/// whether some forbidden cycle survives. Only meaningful for the cycle
/// problems (OCT, the FVS variants).
pub fn has_bad_cycle_by_enumeration(p: &ProblemInstance, z: &[usize]) -> Result<bool> {
    let g = &p.graph;
    let mut dead_v = vec![false; g.n()];
    let mut dead_e = vec![false; g.m()];
    for &x in z {
        if p.edge_version {
            dead_e[x] = true;
        } else {
            dead_v[x] = true;
        }
    }
    let r = Residual::new(g, &dead_v, &dead_e);
    let terminals: BTreeSet<Vertex> = p.terminals.iter().copied().collect();
    let lam: Option<Vec<usize>> = if p.problem.needs_group() {
        Some(r.old_edge.iter().map(|&e| p.edge_labels().map(|l| l[e])).collect::<Result<_>>()?)
    } else {
        None
    };
    let t_count = |c: &[Vertex]| c.iter().filter(|&&v| terminals.contains(&r.old_vertex[v])).count();
    for c in simple_cycles(&r.h) {
        let bad = match p.problem {
            ProblemKind::Oct => c.len() % 2 == 1,
            ProblemKind::GroupFvs => {
                let group = p.group()?;
                cycle_label(&r.h, lam.as_ref().expect("labels"), group, &c) != group.identity()
            }
            ProblemKind::SubsetFvs => t_count(&c) >= 1,
            ProblemKind::TwoSubsetFvs => t_count(&c) >= 2,
            ProblemKind::SubsetGroupFvs => {
                let group = p.group()?;
                t_count(&c) >= 1 && cycle_label(&r.h, lam.as_ref().expect("labels"), group, &c) != group.identity()
            }
            other => return Err(Error::Precondition(format!("{other:?} is not a cycle-hitting problem"))),
        };
        if bad {
            return Ok(true);
        }
    }
    Ok(false)
}

fn search(
    universe: &[usize],
    k: usize,
    cap: u128,
    mut ok: impl FnMut(&[usize]) -> Result<bool>,
) -> Result<Option<Vec<usize>>> {
    let total = count_subsets_upto(universe.len(), k);
    if total > cap {
        return Err(Error::CapExceeded(format!("{total} candidate sets (cap {cap})")));
    }
    let mut found = None;
    let mut err = None;
    for_each_subset_upto(universe, k, |s| match ok(s) {
        Ok(true) => {
            found = Some(s.to_vec());
            false
        }
        Ok(false) => true,
        Err(e) => {
            err = Some(e);
            false
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

/// Minimum-size solution of at most `p.k` items, lexicographically least
/// among the minimum ones.
pub fn brute_deletion(p: &ProblemInstance, cap: u128) -> Result<Option<Vec<usize>>> {
    let universe = p.deletable_universe()?;
    search(&universe, p.k, cap, |s| check_problem_solution(p, s))
}

/// Same search against a CSP vertex-deletion encoding.
pub fn brute_csp_deletion(d: &CspDeletion, cap: u128) -> Result<Option<Vec<usize>>> {
    let und: BTreeSet<usize> = d.undeletable.iter().copied().collect();
    let universe: Vec<usize> = (0..d.csp.num_vars).filter(|v| !und.contains(v)).collect();
    search(&universe, d.k, cap, |s| d.accepts(s))
}

/// Same search over constraint-graph edges (returned as sorted pairs).
pub fn brute_csp_edge_deletion(d: &CspEdgeDeletion, cap: u128) -> Result<Option<Vec<(Vertex, Vertex)>>> {
    let g = d.csp.constraint_graph();
    let und: BTreeSet<(Vertex, Vertex)> = d.undeletable.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let universe: Vec<usize> = (0..g.m()).filter(|&e| !und.contains(&g.edge(e))).collect();
    let found = search(&universe, d.k, cap, |s| {
        let pairs: Vec<(Vertex, Vertex)> = s.iter().map(|&e| g.edge(e)).collect();
        d.accepts(&pairs)
    })?;
    Ok(found.map(|s| s.iter().map(|&e| g.edge(e)).collect()))
}
