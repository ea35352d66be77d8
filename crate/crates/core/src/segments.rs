//! Segmented graphs, body anchors in the rooted block-cut forest of `G − Z`,
//! segment values and the candidate-body enumeration used by the 2-connected
//! solver.

use crate::decomp::{vertex_partition_planar, VertexPartition};
use crate::error::{Error, Result};
use crate::flow::{vertex_path_packing, PathPacking};
use crate::graph::{biconnected_decomposition, BlockCutForest, Graph, RotationSystem, Vertex};
use crate::oracle::for_each_subset_upto;
use serde::Serialize;
use std::collections::BTreeSet;

/// A graph together with pairwise disjoint connected vertex sets, and the
/// quotient obtained by contracting each of them.
#[derive(Clone, Debug)]
pub struct SegmentedGraph {
    pub base: Graph,
    /// Each segment sorted ascending; that order is the segment's linear order.
    pub segments: Vec<Vec<Vertex>>,
    pub segment_of: Vec<Option<usize>>,
    pub contracted: Graph,
    shr_map: Vec<Vertex>,
    ext_map: Vec<Vec<Vertex>>,
}

impl SegmentedGraph {
    /// Checks that the sets are disjoint, nonempty and connected.
    pub fn new(base: Graph, mut segments: Vec<Vec<Vertex>>) -> Result<Self> {
        let mut segment_of = vec![None; base.n()];
        for (i, s) in segments.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::Precondition("empty segment".into()));
            }
            for &v in s.iter() {
                if v >= base.n() {
                    return Err(Error::UnknownVertex(v));
                }
                if segment_of[v].is_some() {
                    return Err(Error::Precondition(format!("vertex {v} lies in two segments")));
                }
                segment_of[v] = Some(i);
            }
            if !base.induces_connected(s) {
                return Err(Error::Precondition(format!("segment {i} is not connected")));
            }
        }
        let (contracted, shr_map) = base.contract_groups(&segments);
        let mut ext_map = vec![Vec::new(); contracted.n()];
        for (v, &w) in shr_map.iter().enumerate() {
            ext_map[w].push(v);
        }
        Ok(SegmentedGraph { base, segments, segment_of, contracted, shr_map, ext_map })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// The vertex v_I of the quotient.
    pub fn segment_vertex(&self, i: usize) -> Vertex {
        self.shr_map[self.segments[i][0]]
    }

    /// The segment contracted into quotient vertex `w`, if any.
    pub fn segment_at(&self, w: Vertex) -> Option<usize> {
        self.segment_of[self.ext_map[w][0]]
    }

    pub fn shr_vertex(&self, v: Vertex) -> Vertex {
        self.shr_map[v]
    }

    pub fn ext_vertex(&self, w: Vertex) -> &[Vertex] {
        &self.ext_map[w]
    }

    pub fn shr(&self, set: &[Vertex]) -> Vec<Vertex> {
        let s: BTreeSet<Vertex> = set.iter().map(|&v| self.shr_map[v]).collect();
        s.into_iter().collect()
    }

    pub fn ext(&self, set: &[Vertex]) -> Vec<Vertex> {
        let s: BTreeSet<Vertex> = set.iter().flat_map(|&w| self.ext_map[w].iter().copied()).collect();
        s.into_iter().collect()
    }

    /// All segment vertices V(ℐ).
    pub fn covered(&self) -> Vec<bool> {
        self.segment_of.iter().map(Option::is_some).collect()
    }
}

/// Segments are the components of `g[V_i ∖ Z_i]`.
pub fn build_segments(g: &Graph, v_i: &[Vertex], z_i: &[Vertex]) -> SegmentedGraph {
    let mut mask = vec![false; g.n()];
    for &v in v_i {
        mask[v] = true;
    }
    for &z in z_i {
        mask[z] = false;
    }
    let comps = g.components_masked(&mask);
    SegmentedGraph::new(g.clone(), comps).expect("components are disjoint and connected")
}

/// Block-cut forest of `g − removed`, reported in the ids of `g`.
#[derive(Clone, Debug)]
pub struct RootedBlocks {
    pub forest: BlockCutForest,
    /// Vertex of `g` for each vertex of `g − removed`.
    pub old_of: Vec<Vertex>,
    new_of: Vec<Option<Vertex>>,
}

impl RootedBlocks {
    pub fn new(g: &Graph, removed: &[bool]) -> Self {
        let keep: Vec<bool> = removed.iter().map(|r| !r).collect();
        let (h, old_of) = g.induced(&keep);
        let mut new_of = vec![None; g.n()];
        for (i, &v) in old_of.iter().enumerate() {
            new_of[v] = Some(i);
        }
        RootedBlocks { forest: biconnected_decomposition(&h), old_of, new_of }
    }

    pub fn gamma(&self, node: usize) -> Vec<Vertex> {
        self.forest.gamma(node).iter().map(|&v| self.old_of[v]).collect()
    }

    /// Id in `g − removed` of a vertex of `g`.
    pub fn local_id(&self, v: Vertex) -> Option<Vertex> {
        self.new_of[v]
    }

    fn local(&self, set: &[Vertex]) -> Vec<Vertex> {
        set.iter().map(|&v| self.new_of[v].expect("vertex was removed")).collect()
    }

    /// Root node r(I), body nodes B(I) and W(I) for a connected set `I` avoiding the removed vertices.
    pub fn anchor(&self, set: &[Vertex]) -> SegmentAnchor {
        let local = self.local(set);
        let root = self.forest.highest_node_meeting(&local).expect("nonempty set");
        let mut body: BTreeSet<usize> = local.iter().flat_map(|&v| self.forest.nodes_of(v)).collect();
        body.remove(&root);
        let below: Vec<usize> = self.forest.descendants(root).into_iter().filter(|&t| t != root).collect();
        let union = |nodes: &mut dyn Iterator<Item = usize>| -> Vec<Vertex> {
            let s: BTreeSet<Vertex> = nodes.flat_map(|t| self.gamma(t)).collect();
            s.into_iter().collect()
        };
        SegmentAnchor {
            root,
            r_hat: self.gamma(root),
            b_hat: union(&mut body.iter().copied()),
            w_hat: union(&mut below.iter().copied()),
            body: body.into_iter().collect(),
            w_nodes: below,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegmentAnchor {
    pub root: usize,
    pub body: Vec<usize>,
    pub w_nodes: Vec<usize>,
    pub r_hat: Vec<Vertex>,
    pub b_hat: Vec<Vertex>,
    pub w_hat: Vec<Vertex>,
}

#[derive(Clone, Debug)]
pub struct BodyAnchors {
    pub blocks: RootedBlocks,
    pub per_segment: Vec<SegmentAnchor>,
}

/// Anchors of every segment with respect to the canonically rooted block-cut
/// forest of `g − z`.
pub fn body_anchors(seg: &SegmentedGraph, z: &[Vertex]) -> Result<BodyAnchors> {
    let g = &seg.base;
    let mut removed = vec![false; g.n()];
    for &v in z {
        if v >= g.n() {
            return Err(Error::UnknownVertex(v));
        }
        if seg.segment_of[v].is_some() {
            return Err(Error::Precondition(format!("solution vertex {v} lies in a segment")));
        }
        removed[v] = true;
    }
    let blocks = RootedBlocks::new(g, &removed);
    let per_segment = seg.segments.iter().map(|s| blocks.anchor(s)).collect();
    Ok(BodyAnchors { blocks, per_segment })
}

/// Max number of paths from B̂(I) to Z inside G[Ŵ(I) ∪ Z], disjoint outside
/// B̂(I), plus a minimum separator witnessing it.
pub fn segment_val_with_separator(seg: &SegmentedGraph, anchors: &BodyAnchors, i: usize, z: &[Vertex]) -> PathPacking {
    let a = &anchors.per_segment[i];
    if a.body.is_empty() {
        return PathPacking { value: 0, separator: Vec::new() };
    }
    let g = &seg.base;
    let mut allowed = vec![false; g.n()];
    let mut unbounded = vec![false; g.n()];
    for &v in a.w_hat.iter().chain(z) {
        allowed[v] = true;
    }
    for &v in &a.b_hat {
        unbounded[v] = true;
    }
    vertex_path_packing(g, &allowed, &a.b_hat, z, &unbounded)
}

pub fn segment_val(seg: &SegmentedGraph, i: usize, z: &[Vertex]) -> Result<u64> {
    let anchors = body_anchors(seg, z)?;
    Ok(segment_val_with_separator(seg, &anchors, i, z).value)
}

/// A candidate `(B, J)`: a body vertex set and the part of the segment lying
/// in the root block.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BodyPair {
    pub body: Vec<Vertex>,
    pub root_part: Vec<Vertex>,
}

/// Adds, for every block of the component of `g − removed` containing `set`
/// taken as root, the resulting body pair.
fn add_pairs_for_removal(g: &Graph, set: &[Vertex], removed: &[bool], out: &mut BTreeSet<BodyPair>) {
    let mut blocks = RootedBlocks::new(g, removed);
    let start = blocks.forest.blocks_of(blocks.new_of[set[0]].expect("segment vertex removed"))[0];
    let tree = blocks.forest.tree_of(start);
    let candidates: Vec<usize> =
        (0..blocks.forest.blocks.len()).filter(|&b| blocks.forest.tree_of(b) == tree).collect();
    let in_set: BTreeSet<Vertex> = set.iter().copied().collect();
    for b in candidates {
        blocks.forest.reroot(b);
        let a = blocks.anchor(set);
        let root_part = a.r_hat.iter().copied().filter(|v| in_set.contains(v)).collect();
        out.insert(BodyPair { body: a.b_hat, root_part });
    }
}

/// F(I): for each S ⊆ V ∖ (I ∪ L) with |S| ≤ cap and each root block of the
/// component of `g − (S ∪ L)` holding I, the pair (B̂_S(I), r̂_S(I) ∩ I).
pub fn enumerate_body_family(g: &Graph, set: &[Vertex], cap: usize, forced: &[Vertex]) -> Result<BTreeSet<BodyPair>> {
    if set.is_empty() || !g.induces_connected(set) {
        return Err(Error::Precondition("segment must be nonempty and connected".into()));
    }
    let mut base = vec![false; g.n()];
    for &v in forced {
        if set.contains(&v) {
            return Err(Error::Precondition(format!("forced vertex {v} lies in the segment")));
        }
        base[v] = true;
    }
    let universe: Vec<Vertex> = (0..g.n()).filter(|&v| !base[v] && !set.contains(&v)).collect();
    let mut out = BTreeSet::new();
    let mut removed = base.clone();
    for_each_subset_upto(&universe, cap, |s| {
        for &v in s {
            removed[v] = true;
        }
        add_pairs_for_removal(g, set, &removed, &mut out);
        for &v in s {
            removed[v] = false;
        }
        true
    });
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct BodyFamily {
    pub per_segment: Vec<BTreeSet<BodyPair>>,
}

impl BodyFamily {
    pub fn total(&self) -> usize {
        self.per_segment.iter().map(BTreeSet::len).sum()
    }
}

pub fn body_families(seg: &SegmentedGraph, cap: usize) -> Result<BodyFamily> {
    let per_segment =
        seg.segments.iter().map(|s| enumerate_body_family(&seg.base, s, cap, &[])).collect::<Result<_>>()?;
    Ok(BodyFamily { per_segment })
}

#[derive(Clone, Debug)]
pub struct GuessOutcome {
    pub partition: VertexPartition,
    /// Zero-based index of the chosen class.
    pub class: usize,
    pub z_i: Vec<Vertex>,
    pub segmented: SegmentedGraph,
    pub family: BodyFamily,
}

/// Number of classes used for budget `k`: ⌈√k⌉, at least one.
pub fn class_count(k: usize) -> usize {
    let mut l = 1;
    while l * l < k {
        l += 1;
    }
    l
}

/// Decodes a guess `(v1, v2, v3, …)`: `v1` selects the class containing it,
/// vertex id `v2` is the count j, and `v3..v_{j+2}` form Z_i. Entries after
/// position j+2 are ignored since bodies are enumerated with an explicit cap.
pub fn guess_pipeline(g: &Graph, rot: &RotationSystem, k: usize, tuple: &[Vertex], cap: usize) -> Result<GuessOutcome> {
    let partition = vertex_partition_planar(g, rot, 0, class_count(k))?;
    guess_with_partition(g, partition, tuple, cap)
}

pub fn guess_with_partition(
    g: &Graph,
    partition: VertexPartition,
    tuple: &[Vertex],
    cap: usize,
) -> Result<GuessOutcome> {
    if tuple.len() < 2 {
        return Err(Error::Precondition("guess tuple needs at least two entries".into()));
    }
    if let Some(&v) = tuple.iter().find(|&&v| v >= g.n()) {
        return Err(Error::UnknownVertex(v));
    }
    let class = partition.class_of[tuple[0]];
    let j = tuple[1];
    if tuple.len() < j + 2 {
        return Err(Error::Precondition(format!("tuple announces {j} removed vertices but is too short")));
    }
    let mut z_i: Vec<Vertex> = tuple[2..j + 2].to_vec();
    z_i.sort_unstable();
    z_i.dedup();
    let segmented = build_segments(g, &partition.classes[class], &z_i);
    let family = body_families(&segmented, cap)?;
    Ok(GuessOutcome { partition, class, z_i, segmented, family })
}
