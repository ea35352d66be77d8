//! Planar contraction decompositions: a vertex partition from outer-face
//! layers and an edge partition from dual BFS levels.

use crate::error::{Error, Result};
use crate::graph::{dual_graph, vertex_layers, EdgeId, Graph, RotationSystem, Vertex};
use crate::treewidth::exact_treewidth;
use serde::Serialize;
use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexPartition {
    /// `classes[i]` is V_{i+1}, sorted.
    pub classes: Vec<Vec<Vertex>>,
    pub class_of: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgePartition {
    pub classes: Vec<Vec<EdgeId>>,
    pub class_of: Vec<usize>,
}

/// V_i is the union of the layers L_j with j ≡ i (mod ℓ); class index `i − 1`
/// holds V_i.
pub fn vertex_partition_planar(
    g: &Graph,
    rot: &RotationSystem,
    outer_face: usize,
    ell: usize,
) -> Result<VertexPartition> {
    if ell == 0 {
        return Err(Error::Precondition("ℓ must be at least 1".into()));
    }
    let layers = vertex_layers(g, rot, outer_face)?;
    let class_of: Vec<usize> = layers.layer.iter().map(|&l| (l - 1) % ell).collect();
    let mut classes = vec![Vec::new(); ell];
    for (v, &c) in class_of.iter().enumerate() {
        classes[c].push(v);
    }
    Ok(VertexPartition { classes, class_of })
}

/// BFS over the dual from the outer face of each component (the first face
/// found for it); an edge goes to class `level mod ℓ`, where `level` is the
/// smaller BFS depth of the two faces beside it.
pub fn edge_partition_planar(g: &Graph, rot: &RotationSystem, ell: usize) -> Result<EdgePartition> {
    if ell == 0 {
        return Err(Error::Precondition("ℓ must be at least 1".into()));
    }
    rot.validate(g)?;
    let dual = dual_graph(g, rot)?;
    let (label, count) = g.component_labels();
    let nf = dual.faces.len();
    let mut depth = vec![usize::MAX; nf];
    let mut seen_comp = vec![false; count];
    let mut q = VecDeque::new();
    for (i, f) in dual.faces.iter().enumerate() {
        let c = label[f.vertices[0]];
        if !seen_comp[c] {
            seen_comp[c] = true;
            depth[i] = 0;
            q.push_back(i);
        }
    }
    while let Some(x) = q.pop_front() {
        for y in dual.graph.neighbors(x) {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                q.push_back(y);
            }
        }
    }
    let mut face_of_dart = vec![0; 2 * g.m()];
    for (i, f) in dual.faces.iter().enumerate() {
        for &(e, tail) in &f.darts {
            face_of_dart[2 * e + usize::from(g.edge(e).0 != tail)] = i;
        }
    }
    let class_of: Vec<usize> =
        (0..g.m()).map(|e| depth[face_of_dart[2 * e]].min(depth[face_of_dart[2 * e + 1]]) % ell).collect();
    let mut classes = vec![Vec::new(); ell];
    for (e, &c) in class_of.iter().enumerate() {
        classes[c].push(e);
    }
    Ok(EdgePartition { classes, class_of })
}

/// Result of comparing an exact treewidth against a stated bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub treewidth: usize,
    pub bound: usize,
    pub pass: bool,
}

/// Exact tw(G / E(G[V_i ∖ W])) against 3ℓ + 14|W| + 2.
pub fn residual_bound_check_vertex(g: &Graph, part: &VertexPartition, i: usize, w: &[Vertex]) -> Result<BoundCheck> {
    let ell = part.classes.len();
    let keep: Vec<Vertex> = part.classes[i].iter().copied().filter(|v| !w.contains(v)).collect();
    let (h, _) = g.contract_vertex_set(&keep)?;
    let treewidth = exact_treewidth(&h)?;
    let bound = 3 * ell + 14 * w.len() + 2;
    Ok(BoundCheck { treewidth, bound, pass: treewidth <= bound })
}

/// Constant of the empirical edge-partition bound tw(G/E_i) ≤ c·ℓ + c.
pub const EDGE_PARTITION_CONSTANT: usize = 4;

/// Exact tw(G / (E_i ∖ W)) against 4ℓ + 4 + |W|.
pub fn residual_bound_check_edge(g: &Graph, part: &EdgePartition, i: usize, w: &[EdgeId]) -> Result<BoundCheck> {
    let ell = part.classes.len();
    let keep: Vec<EdgeId> = part.classes[i].iter().copied().filter(|e| !w.contains(e)).collect();
    let (h, _) = g.contract_edge_set(&keep)?;
    let treewidth = exact_treewidth(&h)?;
    let bound = EDGE_PARTITION_CONSTANT * ell + EDGE_PARTITION_CONSTANT + w.len();
    Ok(BoundCheck { treewidth, bound, pass: treewidth <= bound })
}
