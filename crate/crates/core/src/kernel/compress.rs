//! Size reductions that trade vertices for undeletable ones and back, plus
//! the conversions between the vertex and edge forms of Subset FVS.

use super::{KernelEdge, SfvsKernelInstance};
use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EdgeId, Graph, RotationSystem, UnionFind, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Result of contracting everything outside W: `map[v]` is the new id of
/// old vertex `v`, `None` when its contracted vertex was dominated and
/// deleted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contracted {
    pub instance: SfvsKernelInstance,
    pub map: Vec<Option<Vertex>>,
}

/// Contracts each component of G − W to one undeletable vertex (at most one
/// edge to each neighbour in W), then deletes contracted vertices whose
/// neighbourhood is contained in another's. W must contain every terminal
/// endpoint; the caller guarantees some minimum solution lies inside W.
pub fn contract_to_undeletable(inst: &SfvsKernelInstance, w: &[Vertex]) -> Result<Contracted> {
    inst.validate()?;
    let mut in_w = vec![false; inst.n];
    for &v in w {
        if v >= inst.n {
            return Err(Error::UnknownVertex(v));
        }
        in_w[v] = true;
    }
    let tv = inst.terminal_vertices();
    if let Some(v) = (0..inst.n).find(|&v| tv[v] && !in_w[v]) {
        return Err(Error::Precondition(format!("terminal endpoint {v} is outside W")));
    }
    let mut uf = UnionFind::new(inst.n);
    for e in inst.edges.iter().filter(|e| !in_w[e.u] && !in_w[e.v]) {
        uf.union(e.u, e.v);
    }
    // New ids: W in increasing order, then one vertex per component.
    let mut map: Vec<Option<Vertex>> = vec![None; inst.n];
    let mut next = 0;
    for v in (0..inst.n).filter(|&v| in_w[v]) {
        map[v] = Some(next);
        next += 1;
    }
    let first_contracted = next;
    let mut root_id = vec![usize::MAX; inst.n];
    for v in (0..inst.n).filter(|&v| !in_w[v]) {
        let r = uf.find(v);
        if root_id[r] == usize::MAX {
            root_id[r] = next;
            next += 1;
        }
        map[v] = Some(root_id[r]);
    }
    let n = next;
    let mut nbrs: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); n];
    let mut edges: Vec<KernelEdge> = Vec::new();
    for e in &inst.edges {
        let (a, b) = (map[e.u].expect("mapped"), map[e.v].expect("mapped"));
        if in_w[e.u] && in_w[e.v] {
            edges.push(KernelEdge { u: a, v: b, terminal: e.terminal });
        } else if a != b && nbrs[a].insert(b) {
            nbrs[b].insert(a);
            edges.push(KernelEdge { u: a, v: b, terminal: false });
        }
    }
    // Delete dominated contracted vertices, one at a time.
    let mut alive = vec![true; n];
    loop {
        let dominated = (first_contracted..n).filter(|&u| alive[u]).find(|&u| {
            (first_contracted..n)
                .any(|v| v != u && alive[v] && nbrs[u].is_subset(&nbrs[v]) && (nbrs[u] != nbrs[v] || u > v))
        });
        let Some(u) = dominated else { break };
        alive[u] = false;
    }
    let mut renumber = vec![None; n];
    let mut count = 0;
    for v in 0..n {
        if alive[v] {
            renumber[v] = Some(count);
            count += 1;
        }
    }
    let mut out = SfvsKernelInstance::new(count, inst.k);
    for e in &edges {
        if let (Some(a), Some(b)) = (renumber[e.u], renumber[e.v]) {
            out.push(a, b, e.terminal);
        }
    }
    out.undeletable = inst.undeletable.iter().filter_map(|&f| map[f].and_then(|x| renumber[x])).collect();
    out.undeletable.extend((first_contracted..n).filter_map(|v| renumber[v]));
    out.undeletable.sort_unstable();
    out.undeletable.dedup();
    let map = map.into_iter().map(|m| m.and_then(|x| renumber[x])).collect();
    Ok(Contracted { instance: out, map })
}

/// Output of the grid gadget: an instance without undeletable vertices, its
/// embedding (edge ids equal instance edge indices), and per replaced
/// vertex its grid vertices in row-major order.
#[derive(Clone, Debug)]
pub struct GridReplaced {
    pub instance: SfvsKernelInstance,
    pub rotation: RotationSystem,
    pub grids: Vec<(Vertex, Vec<Vertex>)>,
}

/// Replaces every undeletable vertex u of degree d by a grid with 2d(k+1)
/// rows and k+1 columns. Row and column indices below are 1-based; the r-th
/// neighbour of u in rotation order is joined to the first-column vertices
/// in rows 2(r−1)(k+1) + 2j for j = 1..=k+1. A deletion set of size k
/// cannot separate two attachment blocks, so the grid acts like u.
///
/// Needs a simple graph, an independent undeletable set disjoint from the
/// terminal endpoints, and `rot` an embedding of `inst.multigraph()`.
pub fn planar_grid_replacement(inst: &SfvsKernelInstance, rot: &RotationSystem) -> Result<GridReplaced> {
    inst.validate()?;
    let g = inst.multigraph();
    if g.m() != inst.edges.len() {
        return Err(Error::Precondition("grid replacement needs an instance without loops".into()));
    }
    let mut seen = BTreeSet::new();
    for e in &inst.edges {
        if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(Error::ParallelEdge(e.u, e.v));
        }
    }
    rot.validate(&g)?;
    let f = inst.is_undeletable_mask();
    let tv = inst.terminal_vertices();
    if let Some(e) = inst.edges.iter().find(|e| f[e.u] && f[e.v]) {
        return Err(Error::Precondition(format!("undeletable vertices {} and {} are adjacent", e.u, e.v)));
    }
    if let Some(v) = (0..inst.n).find(|&v| f[v] && tv[v]) {
        return Err(Error::Precondition(format!("undeletable vertex {v} is a terminal endpoint")));
    }
    let mut cur = inst.clone();
    let mut cur_rot = rot.clone();
    let mut grids = Vec::new();
    let mut targets: Vec<Vertex> = inst.undeletable.clone();
    targets.sort_unstable();
    targets.dedup();
    for u in targets {
        let (next, next_rot, grid) = replace_one(&cur, &cur_rot, u)?;
        cur = next;
        cur_rot = next_rot;
        grids.push((u, grid));
    }
    cur.undeletable.clear();
    Ok(GridReplaced { instance: cur, rotation: cur_rot, grids })
}

fn replace_one(
    inst: &SfvsKernelInstance,
    rot: &RotationSystem,
    u: Vertex,
) -> Result<(SfvsKernelInstance, RotationSystem, Vec<Vertex>)> {
    let k = inst.k;
    let around: Vec<EdgeId> = rot.order[u].iter().map(|ee| ee.edge).collect();
    let d = around.len();
    let mut base = inst.clone();
    base.undeletable.retain(|&x| x != u);
    if d == 0 {
        return Ok((base, rot.clone(), vec![u]));
    }
    let rows = 2 * d * (k + 1);
    let cols = k + 1;
    // Grid cell (i, j), 0-based, gets id u for (0, 0) and fresh ids otherwise.
    let mut id = vec![0; rows * cols];
    let mut n = inst.n;
    for (c, slot) in id.iter_mut().enumerate() {
        if c == 0 {
            *slot = u;
        } else {
            *slot = n;
            n += 1;
        }
    }
    let cell = |i: usize, j: usize| id[i * cols + j];
    let neighbour = |e: EdgeId| {
        let KernelEdge { u: a, v: b, .. } = inst.edges[e];
        if a == u {
            b
        } else {
            a
        }
    };
    // Old edges not at u keep their relative order.
    let mut edges: Vec<KernelEdge> = Vec::new();
    let mut old_to_new = vec![None; inst.edges.len()];
    for (i, e) in inst.edges.iter().enumerate() {
        if e.u != u && e.v != u {
            old_to_new[i] = Some(edges.len());
            edges.push(*e);
        }
    }
    // Grid edges, recorded per cell by direction: 0 up, 1 right, 2 down, 3 left.
    let mut at: Vec<[Option<EdgeId>; 4]> = vec![[None; 4]; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            if j + 1 < cols {
                at[i * cols + j][1] = Some(edges.len());
                at[i * cols + j + 1][3] = Some(edges.len());
                edges.push(KernelEdge { u: cell(i, j), v: cell(i, j + 1), terminal: false });
            }
            if i + 1 < rows {
                at[i * cols + j][2] = Some(edges.len());
                at[(i + 1) * cols + j][0] = Some(edges.len());
                edges.push(KernelEdge { u: cell(i, j), v: cell(i + 1, j), terminal: false });
            }
        }
    }
    // Attachments: neighbour r (0-based) to rows 2r(k+1) + 2j − 1 (0-based), j = 1..=k+1.
    let mut attach: Vec<Vec<EdgeId>> = Vec::with_capacity(d);
    for (r, &e) in around.iter().enumerate() {
        let w = neighbour(e);
        let mut list = Vec::new();
        for j in 1..=k + 1 {
            let i = 2 * r * (k + 1) + 2 * j - 1;
            at[i * cols][3] = Some(edges.len());
            list.push(edges.len());
            edges.push(KernelEdge { u: w, v: cell(i, 0), terminal: false });
        }
        attach.push(list);
    }
    let mut out = SfvsKernelInstance { n, edges, undeletable: base.undeletable.clone(), k };
    out.undeletable.sort_unstable();
    let g = out.multigraph();
    let end_of = |g: &Graph, e: EdgeId, v: Vertex| EdgeEnd { edge: e, end: if g.edge(e).0 == v { 0 } else { 1 } };
    for flip_grid in [false, true] {
        for flip_attach in [false, true] {
            let mut order: Vec<Vec<EdgeEnd>> = vec![Vec::new(); n];
            for v in 0..inst.n {
                if v == u {
                    continue;
                }
                for ee in &rot.order[v] {
                    if let Some(ne) = old_to_new[ee.edge] {
                        order[v].push(end_of(&g, ne, v));
                    } else {
                        let r = around.iter().position(|&x| x == ee.edge).expect("edge at u");
                        let mut list = attach[r].clone();
                        if flip_attach {
                            list.reverse();
                        }
                        order[v].extend(list.into_iter().map(|a| end_of(&g, a, v)));
                    }
                }
            }
            for i in 0..rows {
                for j in 0..cols {
                    let v = cell(i, j);
                    let dirs: [usize; 4] = if flip_grid { [0, 3, 2, 1] } else { [0, 1, 2, 3] };
                    order[v] = dirs.iter().filter_map(|&dd| at[i * cols + j][dd]).map(|e| end_of(&g, e, v)).collect();
                }
            }
            let cand = RotationSystem { order };
            if cand.validate(&g).is_ok() {
                let grid = (0..rows * cols).map(|c| id[c]).collect();
                return Ok((out, cand, grid));
            }
        }
    }
    Err(Error::InvalidEmbedding(format!("no planar placement of the grid for vertex {u}")))
}

/// Subset FVS with terminal vertices: no cycle may pass through a terminal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfvsVertexInstance {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
    pub terminals: Vec<Vertex>,
    #[serde(default)]
    pub undeletable: Vec<Vertex>,
    pub k: usize,
}

impl SfvsVertexInstance {
    fn graph(&self) -> Result<Graph> {
        Graph::from_edges(self.n, &self.edges)
    }

    /// Whether `z` (of size ≤ k, avoiding undeletables) leaves no cycle
    /// through a terminal.
    pub fn is_solution(&self, z: &[Vertex]) -> Result<bool> {
        let g = self.graph()?;
        if z.len() > self.k || z.iter().any(|v| self.undeletable.contains(v)) {
            return Ok(false);
        }
        let mut gone = vec![false; self.n];
        for &v in z {
            gone[v] = true;
        }
        for &t in self.terminals.iter().filter(|&&t| !gone[t]) {
            for &(x, e) in g.incident(t) {
                if gone[x] {
                    continue;
                }
                let mut uf = UnionFind::new(self.n);
                for (i, &(a, b)) in g.edges().iter().enumerate() {
                    if i != e && !gone[a] && !gone[b] {
                        uf.union(a, b);
                    }
                }
                if uf.find(t) == uf.find(x) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn brute(&self, cap: u128) -> Result<Option<Vec<Vertex>>> {
        let universe: Vec<Vertex> = (0..self.n).filter(|v| !self.undeletable.contains(v)).collect();
        let count = crate::oracle::count_subsets_upto(universe.len(), self.k);
        if count > cap {
            return Err(Error::CapExceeded(format!("{count} candidate sets")));
        }
        self.graph()?;
        let mut found = None;
        crate::oracle::for_each_subset_upto(&universe, self.k, |s| {
            if self.is_solution(s).unwrap_or(false) {
                found = Some(s.to_vec());
            }
            found.is_none()
        });
        Ok(found)
    }
}

/// Terminal edges are the edges at terminal vertices; a cycle through a
/// terminal uses such an edge and vice versa.
pub fn vertex_to_edge_sfvs(inst: &SfvsVertexInstance) -> Result<SfvsKernelInstance> {
    inst.graph()?;
    let mut t = vec![false; inst.n];
    for &v in &inst.terminals {
        if v >= inst.n {
            return Err(Error::UnknownVertex(v));
        }
        t[v] = true;
    }
    let mut out = SfvsKernelInstance::new(inst.n, inst.k);
    for &(a, b) in &inst.edges {
        out.push(a, b, t[a] || t[b]);
    }
    out.undeletable = inst.undeletable.clone();
    Ok(out)
}

/// Subdivides every terminal edge by a new undeletable terminal vertex.
/// Non-terminal parallel copies collapse to one edge (their 2-cycles hold
/// no terminal). Loops must be removed first.
pub fn edge_to_vertex_sfvs(inst: &SfvsKernelInstance) -> Result<SfvsVertexInstance> {
    inst.validate()?;
    if let Some(e) = inst.edges.iter().find(|e| e.u == e.v) {
        return Err(Error::SelfLoop(e.u));
    }
    let mut out = SfvsVertexInstance {
        n: inst.n,
        edges: Vec::new(),
        terminals: Vec::new(),
        undeletable: inst.undeletable.clone(),
        k: inst.k,
    };
    let mut plain = BTreeSet::new();
    for e in &inst.edges {
        if e.terminal {
            let t = out.n;
            out.n += 1;
            out.terminals.push(t);
            out.undeletable.push(t);
            out.edges.push((e.u, t));
            out.edges.push((t, e.v));
        } else if plain.insert((e.u.min(e.v), e.u.max(e.v))) {
            out.edges.push((e.u, e.v));
        }
    }
    Ok(out)
}
