//! Undirected graphs with stable edge ids, contractions and connectivity.

mod blocks;
mod embedding;

pub use blocks::{biconnected_decomposition, BlockCutForest, BlockNode};
pub use embedding::{
    dual_graph, faces, radial_graph, vertex_layers, DualGraph, EdgeEnd, Face, Layering, RadialTag, RotationSystem,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

pub type Vertex = usize;
pub type EdgeId = usize;

/// Undirected graph on vertices `0..n`. Edge ids are positions in the edge list
/// and stay stable for the lifetime of the value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    allow_parallel: bool,
    adj: Vec<Vec<(Vertex, EdgeId)>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_parallel: bool,
}

/// Endpoints are range-checked while deserializing; loops and parallel edges
/// are left for [`Graph::validated`] so that stored multigraphs still load.
impl TryFrom<GraphRepr> for Graph {
    type Error = String;

    fn try_from(r: GraphRepr) -> std::result::Result<Self, String> {
        let mut g = Graph::new(r.n);
        g.allow_parallel = r.allow_parallel;
        for (u, v) in r.edges {
            if u >= r.n || v >= r.n {
                return Err(format!("edge ({u}, {v}) has an endpoint outside 0..{}", r.n));
            }
            g.push_edge_unchecked(u, v);
        }
        Ok(g)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr { n: g.n, edges: g.edges, allow_parallel: g.allow_parallel }
    }
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { n, edges: Vec::new(), allow_parallel: false, adj: vec![Vec::new(); n] }
    }

    pub fn new_multigraph(n: usize) -> Self {
        Graph { allow_parallel: true, ..Graph::new(n) }
    }

    /// Builds a simple graph, rejecting loops, parallel edges and bad ids.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Parses a serialized graph and checks it the same way `from_edges` does.
    pub fn validated(self) -> Result<Self> {
        let mut g = Graph { allow_parallel: self.allow_parallel, ..Graph::new(self.n) };
        for &(u, v) in &self.edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn allow_parallel(&self) -> bool {
        self.allow_parallel
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e]
    }

    /// Neighbor/edge-id pairs in insertion order.
    pub fn incident(&self, v: Vertex) -> &[(Vertex, EdgeId)] {
        &self.adj[v]
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adj[v].iter().map(|&(w, _)| w)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_between(u, v).is_some()
    }

    pub fn edge_between(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].iter().find(|&&(w, _)| w == b).map(|&(_, e)| e)
    }

    pub fn add_vertex(&mut self) -> Vertex {
        self.adj.push(Vec::new());
        self.n += 1;
        self.n - 1
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<EdgeId> {
        if u >= self.n {
            return Err(Error::UnknownVertex(u));
        }
        if v >= self.n {
            return Err(Error::UnknownVertex(v));
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !self.allow_parallel && self.has_edge(u, v) {
            return Err(Error::ParallelEdge(u, v));
        }
        Ok(self.push_edge_unchecked(u, v))
    }

    /// Adds `uv` unless it is a loop or (in a simple graph) already present.
    pub fn ensure_edge(&mut self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        if u == v || (!self.allow_parallel && self.has_edge(u, v)) {
            return None;
        }
        Some(self.push_edge_unchecked(u, v))
    }

    fn push_edge_unchecked(&mut self, u: Vertex, v: Vertex) -> EdgeId {
        let id = self.edges.len();
        self.edges.push((u, v));
        self.adj[u].push((v, id));
        if u != v {
            self.adj[v].push((u, id));
        }
        id
    }

    /// Subgraph induced by `keep` (a boolean mask), renumbered densely.
    /// Returns the graph and the new→old vertex map.
    pub fn induced(&self, keep: &[bool]) -> (Graph, Vec<Vertex>) {
        let mut new_of = vec![usize::MAX; self.n];
        let mut old_of = Vec::new();
        for v in 0..self.n {
            if keep[v] {
                new_of[v] = old_of.len();
                old_of.push(v);
            }
        }
        let mut h = Graph { allow_parallel: self.allow_parallel, ..Graph::new(old_of.len()) };
        for &(u, v) in &self.edges {
            if keep[u] && keep[v] {
                h.push_edge_unchecked(new_of[u], new_of[v]);
            }
        }
        (h, old_of)
    }

    /// `self − removed`, renumbered; returns the graph and the new→old map.
    pub fn without_vertices(&self, removed: &[Vertex]) -> (Graph, Vec<Vertex>) {
        let mut keep = vec![true; self.n];
        for &v in removed {
            keep[v] = false;
        }
        self.induced(&keep)
    }

    /// Same vertex set, edges in `drop` removed. Edge ids are renumbered.
    pub fn without_edges(&self, drop: &BTreeSet<EdgeId>) -> Graph {
        let mut h = Graph { allow_parallel: self.allow_parallel, ..Graph::new(self.n) };
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if !drop.contains(&e) {
                h.push_edge_unchecked(u, v);
            }
        }
        h
    }

    /// Connected-component label per vertex among vertices with `mask[v]`;
    /// unmasked vertices get `usize::MAX`. Returns (labels, count).
    pub fn component_labels_masked(&self, mask: &[bool]) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if !mask[s] || label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adj[v] {
                    if mask[w] && label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        self.component_labels_masked(&vec![true; self.n])
    }

    /// Components of the subgraph induced by `mask`, each sorted ascending,
    /// listed by smallest vertex.
    pub fn components_masked(&self, mask: &[bool]) -> Vec<Vec<Vertex>> {
        let (label, count) = self.component_labels_masked(mask);
        let mut comps = vec![Vec::new(); count];
        for v in 0..self.n {
            if label[v] != usize::MAX {
                comps[label[v]].push(v);
            }
        }
        comps
    }

    pub fn components(&self) -> Vec<Vec<Vertex>> {
        self.components_masked(&vec![true; self.n])
    }

    pub fn is_connected(&self) -> bool {
        self.component_labels().1 <= 1
    }

    /// Whether the vertices in `set` induce a connected subgraph (empty counts as connected).
    pub fn induces_connected(&self, set: &[Vertex]) -> bool {
        let mut mask = vec![false; self.n];
        for &v in set {
            mask[v] = true;
        }
        self.component_labels_masked(&mask).1 <= 1
    }

    /// Contracts every component of `(V(f), f)` into one vertex. Loops are
    /// dropped; parallel edges are merged unless the graph allows them.
    pub fn contract_edge_set(&self, f: &[EdgeId]) -> Result<(Graph, Vec<Vertex>)> {
        let mut uf = UnionFind::new(self.n);
        for &e in f {
            if e >= self.m() {
                return Err(Error::UnknownEdge(e));
            }
            let (u, v) = self.edges[e];
            uf.union(u, v);
        }
        Ok(self.quotient(&mut uf))
    }

    /// Contracts each component of `self[s]`.
    pub fn contract_vertex_set(&self, s: &[Vertex]) -> Result<(Graph, Vec<Vertex>)> {
        let mut mask = vec![false; self.n];
        for &v in s {
            if v >= self.n {
                return Err(Error::UnknownVertex(v));
            }
            mask[v] = true;
        }
        let mut uf = UnionFind::new(self.n);
        for &(u, v) in &self.edges {
            if mask[u] && mask[v] {
                uf.union(u, v);
            }
        }
        Ok(self.quotient(&mut uf))
    }

    /// Contracts each of the given vertex groups (assumed disjoint) to one vertex.
    pub fn contract_groups(&self, groups: &[Vec<Vertex>]) -> (Graph, Vec<Vertex>) {
        let mut uf = UnionFind::new(self.n);
        for g in groups {
            for w in g.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        self.quotient(&mut uf)
    }

    /// New vertices are numbered by the smallest old vertex of each class.
    fn quotient(&self, uf: &mut UnionFind) -> (Graph, Vec<Vertex>) {
        let mut id_of_root: HashMap<usize, usize> = HashMap::new();
        let mut map = vec![0; self.n];
        for v in 0..self.n {
            let r = uf.find(v);
            let next = id_of_root.len();
            map[v] = *id_of_root.entry(r).or_insert(next);
        }
        let mut h = Graph { allow_parallel: self.allow_parallel, ..Graph::new(id_of_root.len()) };
        for &(u, v) in &self.edges {
            let (a, b) = (map[u], map[v]);
            if a != b {
                h.ensure_edge(a, b);
            }
        }
        (h, map)
    }

    /// Edge ids with both endpoints in `s`.
    pub fn induced_edge_ids(&self, s: &[Vertex]) -> Vec<EdgeId> {
        let mut mask = vec![false; self.n];
        for &v in s {
            mask[v] = true;
        }
        (0..self.m()).filter(|&e| mask[self.edges[e].0] && mask[self.edges[e].1]).collect()
    }

    /// Whether the graph has a cycle (parallel edges count as 2-cycles).
    pub fn has_cycle(&self) -> bool {
        let (_, c) = self.component_labels();
        self.m() + c > self.n
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

/// Canonical form of a graph up to its own labelling: sorted, normalized edge list.
pub fn edge_key_set(g: &Graph) -> BTreeSet<(Vertex, Vertex)> {
    g.edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deserializing_rejects_out_of_range_endpoints() {
        let g: Graph = serde_json::from_str(r#"{"n":2,"edges":[[0,1]]}"#).unwrap();
        assert_eq!(g.m(), 1);
        let err = serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[0,5]]}"#).unwrap_err();
        assert!(err.to_string().contains("outside 0..2"), "{err}");
    }

    pub(crate) fn grid(r: usize, c: usize) -> Graph {
        let mut g = Graph::new(r * c);
        for i in 0..r {
            for j in 0..c {
                if j + 1 < c {
                    g.add_edge(i * c + j, i * c + j + 1).unwrap();
                }
                if i + 1 < r {
                    g.add_edge(i * c + j, (i + 1) * c + j).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn rejects_loops_and_parallels() {
        let mut g = Graph::new(2);
        assert_eq!(g.add_edge(0, 0), Err(Error::SelfLoop(0)));
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.add_edge(1, 0), Err(Error::ParallelEdge(1, 0)));
        assert_eq!(g.add_edge(0, 5), Err(Error::UnknownVertex(5)));
    }

    #[test]
    fn contract_triangle_edge() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (h, map) = g.contract_edge_set(&[0]).unwrap();
        assert_eq!((h.n(), h.m()), (2, 1));
        assert_eq!(map[0], map[1]);
    }

    #[test]
    fn contract_empty_set_is_identity() {
        let g = grid(2, 3);
        let (h, map) = g.contract_edge_set(&[]).unwrap();
        assert_eq!(h, g);
        assert_eq!(map, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn contract_opposite_edges_of_c4() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let (h, _) = g.contract_edge_set(&[0, 2]).unwrap();
        assert_eq!((h.n(), h.m()), (2, 1));
        assert_eq!(g.contract_edge_set(&[9]).unwrap_err(), Error::UnknownEdge(9));
    }

    #[test]
    fn contract_vertex_set_path_and_grid() {
        let p = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let (h, map) = p.contract_vertex_set(&[0, 1]).unwrap();
        assert_eq!((h.n(), h.m()), (2, 1));
        assert_eq!(map[0], map[1]);
        let (h1, _) = p.contract_vertex_set(&[1]).unwrap();
        assert_eq!(h1, p);

        let g = grid(3, 3);
        let mid = [3, 4, 5];
        let (a, ma) = g.contract_vertex_set(&mid).unwrap();
        let (b, mb) = g.contract_edge_set(&g.induced_edge_ids(&mid)).unwrap();
        assert_eq!(edge_key_set(&a), edge_key_set(&b));
        assert_eq!(ma, mb);
        assert_eq!(a.n(), 7);
    }

    #[test]
    fn components_and_induced() {
        let g = Graph::from_edges(5, &[(0, 1), (3, 4)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2], vec![3, 4]]);
        let (h, map) = g.without_vertices(&[1]);
        assert_eq!(map, vec![0, 2, 3, 4]);
        assert_eq!(h.m(), 1);
        assert!(!g.is_connected());
        assert!(g.induces_connected(&[3, 4]));
        assert!(!g.induces_connected(&[0, 4]));
    }
}
