//! Kernelization for Subset FVS in its edge form: delete at most k vertices
//! (none from the undeletable set F) so that no cycle uses a terminal edge.
//!
//! The pieces are the normalization that makes terminal endpoints avoidable,
//! the expansion lemma with priorities, flowers and blockers, the five
//! reduction rules, contraction of the non-marked part to undeletable
//! vertices, and the planar grid gadget that removes undeletable vertices.

mod compress;
mod expansion;
mod flower;
mod rules;

pub use compress::{
    contract_to_undeletable, edge_to_vertex_sfvs, planar_grid_replacement, vertex_to_edge_sfvs, Contracted,
    GridReplaced, SfvsVertexInstance,
};
pub use expansion::{check_expansion, expansion_with_priority, priority_measure, Expansion, PrioritizedBipartite};
pub use flower::{gallai_blocker, hits_all_a_paths, max_z_flower, Flower};
pub use rules::{
    apply_one_rule, apply_rules, apply_rules_traced, bound_terminals, build_bubble_forest, exit_bounds, hitting_set,
    BoundOutcome, BubbleForest, ExitBounds, HittingSet, Rule, RuleConfig, RuleOutcome, RuleStep,
};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, UnionFind, Vertex};
use crate::oracle::{count_subsets_upto, for_each_subset_upto};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelEdge {
    pub u: Vertex,
    pub v: Vertex,
    #[serde(default)]
    pub terminal: bool,
}

/// An Edge-Subset FVS instance with undeletable vertices. Loops and
/// parallel edges are allowed. Vertex ids are stable: deleting a vertex
/// removes its edges and leaves it isolated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfvsKernelInstance {
    pub n: usize,
    pub edges: Vec<KernelEdge>,
    #[serde(default)]
    pub undeletable: Vec<Vertex>,
    pub k: usize,
}

impl SfvsKernelInstance {
    pub fn new(n: usize, k: usize) -> Self {
        SfvsKernelInstance { n, edges: Vec::new(), undeletable: Vec::new(), k }
    }

    /// A fixed instance with answer no: a triangle with a terminal edge and k = 0.
    pub fn trivial_no() -> Self {
        let mut t = SfvsKernelInstance::new(3, 0);
        t.push(0, 1, true);
        t.push(1, 2, false);
        t.push(0, 2, false);
        t
    }

    pub fn push(&mut self, u: Vertex, v: Vertex, terminal: bool) -> EdgeId {
        self.edges.push(KernelEdge { u, v, terminal });
        self.edges.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.edges {
            if e.u >= self.n {
                return Err(Error::UnknownVertex(e.u));
            }
            if e.v >= self.n {
                return Err(Error::UnknownVertex(e.v));
            }
        }
        if let Some(&f) = self.undeletable.iter().find(|&&f| f >= self.n) {
            return Err(Error::UnknownVertex(f));
        }
        Ok(())
    }

    pub fn is_undeletable_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &f in &self.undeletable {
            m[f] = true;
        }
        m
    }

    pub fn terminal_count(&self) -> usize {
        self.edges.iter().filter(|e| e.terminal).count()
    }

    /// Endpoints of terminal edges.
    pub fn terminal_vertices(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for e in self.edges.iter().filter(|e| e.terminal) {
            m[e.u] = true;
            m[e.v] = true;
        }
        m
    }

    /// The underlying multigraph without loops; edge ids of `self` map to
    /// the returned ids in order, skipping loops.
    pub fn multigraph(&self) -> Graph {
        let mut g = Graph::new_multigraph(self.n);
        for e in self.edges.iter().filter(|e| e.u != e.v) {
            g.ensure_edge(e.u, e.v);
        }
        g
    }

    /// Incident (neighbor, edge id) lists, loops listed once.
    pub fn adjacency(&self) -> Vec<Vec<(Vertex, EdgeId)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            if e.u != e.v {
                adj[e.v].push((e.u, i));
            }
        }
        adj
    }

    /// Removes every edge incident to `v`.
    pub fn delete_vertex(&mut self, v: Vertex) {
        self.edges.retain(|e| e.u != v && e.v != v);
        self.undeletable.retain(|&f| f != v);
    }

    pub fn is_isolated(&self, v: Vertex) -> bool {
        !self.edges.iter().any(|e| e.u == v || e.v == v)
    }

    /// Whether some cycle of G − removed contains a terminal edge.
    pub fn has_terminal_cycle(&self, removed: &[bool]) -> bool {
        (0..self.edges.len()).any(|e| self.edges[e].terminal && self.on_cycle(e, removed))
    }

    /// Whether edge `e` lies on a cycle of G − removed.
    pub fn on_cycle(&self, e: EdgeId, removed: &[bool]) -> bool {
        let KernelEdge { u, v, .. } = self.edges[e];
        if removed[u] || removed[v] {
            return false;
        }
        if u == v {
            return true;
        }
        let mut uf = UnionFind::new(self.n);
        for (i, f) in self.edges.iter().enumerate() {
            if i != e && !removed[f.u] && !removed[f.v] {
                uf.union(f.u, f.v);
            }
        }
        uf.find(u) == uf.find(v)
    }

    pub fn is_solution(&self, z: &[Vertex]) -> bool {
        let f = self.is_undeletable_mask();
        if z.len() > self.k || z.iter().any(|&v| v >= self.n || f[v]) {
            return false;
        }
        let mut removed = vec![false; self.n];
        for &v in z {
            removed[v] = true;
        }
        !self.has_terminal_cycle(&removed)
    }
}

/// Exhaustive search over deletable, non-isolated vertices; returns a
/// smallest solution of size at most k.
pub fn brute_sfvs(inst: &SfvsKernelInstance, cap: u128) -> Result<Option<Vec<Vertex>>> {
    inst.validate()?;
    let f = inst.is_undeletable_mask();
    let universe: Vec<Vertex> = (0..inst.n).filter(|&v| !f[v] && !inst.is_isolated(v)).collect();
    let count = count_subsets_upto(universe.len(), inst.k);
    if count > cap {
        return Err(Error::CapExceeded(format!("{count} candidate sets")));
    }
    let mut found = None;
    let mut removed = vec![false; inst.n];
    for_each_subset_upto(&universe, inst.k, |s| {
        for &v in s {
            removed[v] = true;
        }
        if !inst.has_terminal_cycle(&removed) {
            found = Some(s.to_vec());
        }
        for &v in s {
            removed[v] = false;
        }
        found.is_none()
    });
    Ok(found)
}

/// Outcome of normalization: the new instance, whether it is the trivial
/// no-instance, and for every new vertex its origin (`None` for subdivision
/// vertices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub instance: SfvsKernelInstance,
    pub trivial_no: bool,
    pub origin: Vec<Option<Vertex>>,
}

/// A terminal edge is in normal form when both ends are undeletable, have
/// degree two, carry no other terminal edge, and their outer neighbours are
/// not terminal endpoints.
fn terminal_is_normal(inst: &SfvsKernelInstance, adj: &[Vec<(Vertex, EdgeId)>], f: &[bool], e: EdgeId) -> bool {
    let KernelEdge { u, v, .. } = inst.edges[e];
    let tv = inst.terminal_vertices();
    [(u, v), (v, u)].iter().all(|&(x, y)| {
        f[x] && adj[x].len() == 2
            && adj[x].iter().all(|&(w, id)| id == e || (!inst.edges[id].terminal && w != y && !tv[w]))
    })
}

/// Removes loops (a terminal loop forces its vertex into the solution),
/// keeps at most two parallel edges per pair with at most one terminal among
/// them, and subdivides every terminal edge uv twice into u − u′ − v′ − v
/// with u′v′ terminal and u′, v′ undeletable. Afterwards some minimum hitting
/// set of all terminal cycles avoids every terminal endpoint.
pub fn normalize(inst: &SfvsKernelInstance) -> Result<Normalized> {
    inst.validate()?;
    let no = || Normalized { instance: SfvsKernelInstance::trivial_no(), trivial_no: true, origin: Vec::new() };
    let mut cur = inst.clone();
    let f = cur.is_undeletable_mask();
    let forced: Vec<Vertex> = {
        let mut v: Vec<Vertex> = cur.edges.iter().filter(|e| e.u == e.v && e.terminal).map(|e| e.u).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for &v in &forced {
        if f[v] || cur.k == 0 {
            return Ok(no());
        }
        cur.delete_vertex(v);
        cur.k -= 1;
    }
    cur.edges.retain(|e| e.u != e.v);

    // Parallel classes: keep one edge, or a terminal plus a non-terminal one.
    let mut kept: Vec<KernelEdge> = Vec::new();
    let mut seen: std::collections::BTreeMap<(Vertex, Vertex), (usize, usize)> = std::collections::BTreeMap::new();
    for e in &cur.edges {
        let key = (e.u.min(e.v), e.u.max(e.v));
        let slot = seen.entry(key).or_insert((0, 0));
        if e.terminal && slot.0 == 0 {
            slot.0 = 1;
            kept.push(*e);
        } else if !e.terminal && slot.1 == 0 {
            slot.1 = 1;
            kept.push(*e);
        } else if e.terminal {
            // A second terminal edge adds no new terminal cycle but a parallel
            // non-terminal copy may still be missing.
            if slot.1 == 0 {
                slot.1 = 1;
                kept.push(KernelEdge { terminal: false, ..*e });
            }
        }
    }
    cur.edges = kept;

    let adj = cur.adjacency();
    let fm = cur.is_undeletable_mask();
    let subdivide: Vec<EdgeId> =
        (0..cur.edges.len()).filter(|&e| cur.edges[e].terminal && !terminal_is_normal(&cur, &adj, &fm, e)).collect();
    let mut origin: Vec<Option<Vertex>> = (0..cur.n).map(Some).collect();
    let mut out = SfvsKernelInstance { n: cur.n, edges: Vec::new(), undeletable: cur.undeletable.clone(), k: cur.k };
    for (i, e) in cur.edges.iter().enumerate() {
        if subdivide.binary_search(&i).is_ok() {
            let a = out.n;
            let b = out.n + 1;
            out.n += 2;
            origin.extend([None, None]);
            out.undeletable.extend([a, b]);
            out.push(e.u, a, false);
            out.push(a, b, true);
            out.push(b, e.v, false);
        } else {
            out.edges.push(*e);
        }
    }
    out.undeletable.sort_unstable();
    out.undeletable.dedup();
    Ok(Normalized { instance: out, trivial_no: false, origin })
}

/// Bridges of a multigraph given as an edge list (loops are never bridges).
pub(crate) fn bridges(n: usize, edges: &[KernelEdge], alive: &[bool]) -> Vec<EdgeId> {
    let mut adj = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        if alive[i] && e.u != e.v {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut out = Vec::new();
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, edge used to enter, next adjacency index)
        let mut stack: Vec<(Vertex, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, pe, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let (w, e) = adj[v][*i];
                *i += 1;
                if e == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, e, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        out.push(pe);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}
