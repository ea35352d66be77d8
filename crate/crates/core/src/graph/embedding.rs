//! Combinatorial embeddings (rotation systems), faces, radial and dual graphs,
//! and the outer-face layering of plane graphs.

use super::{EdgeId, Graph, Vertex};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

/// One end of an edge: `end` is 0 for the first listed endpoint, 1 for the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeEnd {
    pub edge: EdgeId,
    pub end: u8,
}

/// Clockwise cyclic order of edge-ends around every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSystem {
    pub order: Vec<Vec<EdgeEnd>>,
}

/// A face as a closed walk of darts; `darts[i] = (edge, tail)`. An isolated
/// vertex owns one face with no darts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub darts: Vec<(EdgeId, Vertex)>,
    pub vertices: Vec<Vertex>,
}

impl RotationSystem {
    /// Rotation taking incident edges in the graph's adjacency order.
    pub fn from_adjacency_order(g: &Graph) -> Self {
        let order = (0..g.n())
            .map(|v| {
                g.incident(v)
                    .iter()
                    .map(|&(_, e)| EdgeEnd { edge: e, end: if g.edge(e).0 == v { 0 } else { 1 } })
                    .collect()
            })
            .collect();
        RotationSystem { order }
    }

    /// Rotation given as, per vertex, the cyclic list of incident edge ids.
    pub fn from_edge_lists(g: &Graph, lists: Vec<Vec<EdgeId>>) -> Result<Self> {
        let mut order = Vec::with_capacity(lists.len());
        for (v, list) in lists.into_iter().enumerate() {
            let mut row = Vec::with_capacity(list.len());
            for e in list {
                if e >= g.m() {
                    return Err(Error::UnknownEdge(e));
                }
                let (a, b) = g.edge(e);
                let end = if a == v {
                    0
                } else if b == v {
                    1
                } else {
                    return Err(Error::InvalidEmbedding(format!("edge {e} is not incident to {v}")));
                };
                row.push(EdgeEnd { edge: e, end });
            }
            order.push(row);
        }
        let rot = RotationSystem { order };
        rot.check_ends(g)?;
        Ok(rot)
    }

    /// The same embedding on `dst`, a graph with the same vertices and edges
    /// as `src` but possibly different edge ids.
    pub fn transfer(&self, src: &Graph, dst: &Graph) -> Result<RotationSystem> {
        self.check_ends(src)?;
        if src.n() != dst.n() || src.m() != dst.m() {
            return Err(Error::InvalidEmbedding("graphs differ in size".into()));
        }
        let lists = self
            .order
            .iter()
            .map(|row| {
                row.iter()
                    .map(|end| {
                        let (a, b) = src.edge(end.edge);
                        dst.edge_between(a, b).ok_or(Error::MissingEdge(a, b))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        RotationSystem::from_edge_lists(dst, lists)
    }

    /// Every edge-end appears exactly once, at the right vertex.
    fn check_ends(&self, g: &Graph) -> Result<()> {
        if self.order.len() != g.n() {
            return Err(Error::InvalidEmbedding(format!(
                "rotation lists {} vertices, graph has {}",
                self.order.len(),
                g.n()
            )));
        }
        let mut seen = vec![[false; 2]; g.m()];
        for (v, row) in self.order.iter().enumerate() {
            for ee in row {
                if ee.edge >= g.m() || ee.end > 1 {
                    return Err(Error::InvalidEmbedding(format!("bad edge-end {ee:?}")));
                }
                let (a, b) = g.edge(ee.edge);
                let at = if ee.end == 0 { a } else { b };
                if at != v {
                    return Err(Error::InvalidEmbedding(format!("edge-end {ee:?} listed at {v} but belongs to {at}")));
                }
                if std::mem::replace(&mut seen[ee.edge][ee.end as usize], true) {
                    return Err(Error::InvalidEmbedding(format!("edge-end {ee:?} repeated")));
                }
            }
        }
        if let Some(e) = seen.iter().position(|s| !s[0] || !s[1]) {
            return Err(Error::InvalidEmbedding(format!("edge {e} is missing an end")));
        }
        Ok(())
    }

    /// Checks the edge-ends and Euler's formula on every component, which
    /// certifies a sphere embedding.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        self.check_ends(g)?;
        let fs = trace_faces(g, self);
        let (label, count) = g.component_labels();
        let mut v_c = vec![0i64; count];
        let mut e_c = vec![0i64; count];
        let mut f_c = vec![0i64; count];
        for v in 0..g.n() {
            v_c[label[v]] += 1;
        }
        for &(u, _) in g.edges() {
            e_c[label[u]] += 1;
        }
        for f in &fs {
            f_c[label[f.vertices[0]]] += 1;
        }
        for c in 0..count {
            if v_c[c] - e_c[c] + f_c[c] != 2 {
                return Err(Error::InvalidEmbedding(format!(
                    "Euler formula fails on a component: V={} E={} F={}",
                    v_c[c], e_c[c], f_c[c]
                )));
            }
        }
        Ok(())
    }

    fn position_maps(&self) -> Vec<HashMap<EdgeEnd, usize>> {
        self.order.iter().map(|row| row.iter().enumerate().map(|(i, &ee)| (ee, i)).collect()).collect()
    }
}

/// Faces in discovery order. Each dart lies on exactly one face.
fn trace_faces(g: &Graph, rot: &RotationSystem) -> Vec<Face> {
    let pos = rot.position_maps();
    // dart index: 2*e + end, meaning "leave the `end` endpoint along e"
    let mut used = vec![false; 2 * g.m()];
    let mut out = Vec::new();
    let mut vertex_done = vec![false; g.n()];
    for v in 0..g.n() {
        for &ee in &rot.order[v] {
            let start = 2 * ee.edge + ee.end as usize;
            if used[start] {
                continue;
            }
            let mut darts = Vec::new();
            let mut verts = Vec::new();
            let mut d = start;
            while !used[d] {
                used[d] = true;
                let (e, end) = (d / 2, (d % 2) as u8);
                let (a, b) = g.edge(e);
                let (tail, head) = if end == 0 { (a, b) } else { (b, a) };
                darts.push((e, tail));
                verts.push(tail);
                // arrive at head through the end opposite to `end`
                let arrive = EdgeEnd { edge: e, end: 1 - end };
                let row = &rot.order[head];
                let i = pos[head][&arrive];
                let next = row[(i + 1) % row.len()];
                d = 2 * next.edge + next.end as usize;
            }
            for &x in &verts {
                vertex_done[x] = true;
            }
            out.push(Face { darts, vertices: dedup_keep_order(verts) });
        }
        if g.degree(v) == 0 && !vertex_done[v] {
            vertex_done[v] = true;
            out.push(Face { darts: Vec::new(), vertices: vec![v] });
        }
    }
    out
}

fn dedup_keep_order(v: Vec<Vertex>) -> Vec<Vertex> {
    let mut seen = std::collections::HashSet::new();
    v.into_iter().filter(|x| seen.insert(*x)).collect()
}

/// Face boundary walks of an embedded graph (per component for disconnected input).
pub fn faces(g: &Graph, rot: &RotationSystem) -> Result<Vec<Face>> {
    rot.check_ends(g)?;
    Ok(trace_faces(g, rot))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialTag {
    Original(Vertex),
    Face(usize),
}

/// Vertex–face incidence graph. Original vertices keep their ids; face `f`
/// becomes vertex `n + f`.
pub fn radial_graph(g: &Graph, rot: &RotationSystem, outer_face: usize) -> Result<(Graph, Vec<RadialTag>)> {
    let fs = faces(g, rot)?;
    if outer_face >= fs.len() {
        return Err(Error::UnknownFace(outer_face));
    }
    Ok(radial_from_faces(g, &fs))
}

fn radial_from_faces(g: &Graph, fs: &[Face]) -> (Graph, Vec<RadialTag>) {
    let n = g.n();
    let mut r = Graph::new(n + fs.len());
    let mut tags: Vec<RadialTag> = (0..n).map(RadialTag::Original).collect();
    for (i, f) in fs.iter().enumerate() {
        tags.push(RadialTag::Face(i));
        for &v in &f.vertices {
            r.ensure_edge(v, n + i);
        }
    }
    (r, tags)
}

/// Per-vertex layer index: vertex layer `j` is radial distance `2j − 1` from
/// the outer face of its component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layering {
    pub layer: Vec<usize>,
    /// Outer face used for each component (faces indexed as returned by `faces`).
    pub outer_faces: Vec<usize>,
    /// Set when the graph had more than one component.
    pub per_component: bool,
}

impl Layering {
    pub fn max_layer(&self) -> usize {
        self.layer.iter().copied().max().unwrap_or(0)
    }
}

/// Layers measured from `outer_face`. For disconnected graphs, the outer
/// face's component uses it and every other component uses its first face.
pub fn vertex_layers(g: &Graph, rot: &RotationSystem, outer_face: usize) -> Result<Layering> {
    let fs = faces(g, rot)?;
    if outer_face >= fs.len() {
        return Err(Error::UnknownFace(outer_face));
    }
    let (label, count) = g.component_labels();
    let mut outer = vec![usize::MAX; count];
    outer[label[fs[outer_face].vertices[0]]] = outer_face;
    for (i, f) in fs.iter().enumerate() {
        let c = label[f.vertices[0]];
        if outer[c] == usize::MAX {
            outer[c] = i;
        }
    }
    let (r, _) = radial_from_faces(g, &fs);
    let n = g.n();
    let mut dist = vec![usize::MAX; r.n()];
    let mut q = VecDeque::new();
    for &f in &outer {
        dist[n + f] = 0;
        q.push_back(n + f);
    }
    while let Some(x) = q.pop_front() {
        for y in r.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                q.push_back(y);
            }
        }
    }
    let layer = (0..n).map(|v| (dist[v] + 1) / 2).collect();
    Ok(Layering { layer, outer_faces: outer, per_component: count > 1 })
}

/// Dual multigraph: one vertex per face, one edge per non-bridge primal edge.
/// Primal edges with the same face on both sides are recorded in `loops`.
#[derive(Clone, Debug)]
pub struct DualGraph {
    pub graph: Graph,
    pub faces: Vec<Face>,
    /// Dual edge id → primal edge id.
    pub primal_of: Vec<EdgeId>,
    /// Primal edge id → dual edge id (None for loops).
    pub dual_of: Vec<Option<EdgeId>>,
    /// (primal edge, face) pairs whose dual edge would be a loop.
    pub loops: Vec<(EdgeId, usize)>,
    /// Embedding of the dual, available when there are no loops.
    pub rotation: Option<RotationSystem>,
}

pub fn dual_graph(g: &Graph, rot: &RotationSystem) -> Result<DualGraph> {
    let fs = faces(g, rot)?;
    let mut face_of_dart = vec![usize::MAX; 2 * g.m()];
    for (i, f) in fs.iter().enumerate() {
        for &(e, tail) in &f.darts {
            let end = if g.edge(e).0 == tail { 0 } else { 1 };
            face_of_dart[2 * e + end] = i;
        }
    }
    let mut d = Graph::new_multigraph(fs.len());
    let mut primal_of = Vec::new();
    let mut dual_of = vec![None; g.m()];
    let mut loops = Vec::new();
    for e in 0..g.m() {
        let (f0, f1) = (face_of_dart[2 * e], face_of_dart[2 * e + 1]);
        if f0 == f1 {
            loops.push((e, f0));
        } else {
            let id = d.add_edge(f0, f1)?;
            dual_of[e] = Some(id);
            primal_of.push(e);
        }
    }
    let rotation = if loops.is_empty() {
        // The dual edge of each dart, in face-walk order, circles the face.
        let order = fs
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.darts
                    .iter()
                    .map(|&(e, _)| {
                        let de = dual_of[e].expect("no loops");
                        let (a, _) = d.edge(de);
                        EdgeEnd { edge: de, end: if a == i { 0 } else { 1 } }
                    })
                    .collect()
            })
            .collect();
        Some(RotationSystem { order })
    } else {
        None
    };
    Ok(DualGraph { graph: d, faces: fs, primal_of, dual_of, loops, rotation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{k4_embedded, random_planar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> (Graph, RotationSystem) {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let rot = RotationSystem::from_adjacency_order(&g);
        (g, rot)
    }

    #[test]
    fn euler_counts() {
        let (g, rot) = triangle();
        assert_eq!(faces(&g, &rot).unwrap().len(), 2);
        let (k4, r4) = k4_embedded();
        r4.validate(&k4).unwrap();
        assert_eq!(faces(&k4, &r4).unwrap().len(), 4);
        let p = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let rp = RotationSystem::from_adjacency_order(&p);
        assert_eq!(faces(&p, &rp).unwrap().len(), 1);
    }

    #[test]
    fn bad_rotation_fails_euler() {
        // K4 with one vertex's rotation reversed is a torus-like embedding.
        let (k4, mut r4) = k4_embedded();
        r4.order[3].swap(0, 1);
        assert!(matches!(r4.validate(&k4), Err(Error::InvalidEmbedding(_))));
    }

    #[test]
    fn radial_counts() {
        let (g, rot) = triangle();
        let (r, tags) = radial_graph(&g, &rot, 0).unwrap();
        assert_eq!((r.n(), r.m()), (5, 6));
        assert_eq!(tags[3], RadialTag::Face(0));
        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let (r, _) = radial_graph(&e, &RotationSystem::from_adjacency_order(&e), 0).unwrap();
        assert_eq!((r.n(), r.m()), (3, 2));
        assert!(radial_graph(&g, &rot, 7).is_err());
    }

    #[test]
    fn k4_layers() {
        let (k4, r4) = k4_embedded();
        let fs = faces(&k4, &r4).unwrap();
        let outer = fs.iter().position(|f| !f.vertices.contains(&3)).unwrap();
        let l = vertex_layers(&k4, &r4, outer).unwrap();
        assert_eq!(l.layer, vec![1, 1, 1, 2]);
        let (g, rot) = triangle();
        assert_eq!(vertex_layers(&g, &rot, 0).unwrap().layer, vec![1, 1, 1]);
    }

    #[test]
    fn dual_shapes() {
        let (g, rot) = triangle();
        let d = dual_graph(&g, &rot).unwrap();
        assert_eq!((d.graph.n(), d.graph.m()), (2, 3));
        let p = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let dp = dual_graph(&p, &RotationSystem::from_adjacency_order(&p)).unwrap();
        assert_eq!((dp.graph.n(), dp.graph.m(), dp.loops.len()), (1, 0, 2));
        let (k4, r4) = k4_embedded();
        let d4 = dual_graph(&k4, &r4).unwrap();
        let drot = d4.rotation.clone().unwrap();
        drot.validate(&d4.graph).unwrap();
        let dd = dual_graph(&d4.graph, &drot).unwrap();
        assert_eq!(dd.graph.m(), k4.m());
    }

    #[test]
    fn random_planar_layers_respect_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (g, rot) = random_planar(&mut rng, 12, 0.7);
            rot.validate(&g).unwrap();
            let l = vertex_layers(&g, &rot, 0).unwrap();
            for &(u, v) in g.edges() {
                assert!(l.layer[u].abs_diff(l.layer[v]) <= 1);
            }
            assert!(l.layer.iter().all(|&x| x >= 1));
        }
    }
}
