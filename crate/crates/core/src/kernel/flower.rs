//! Flowers (terminal cycles through a common vertex, otherwise disjoint)
//! and exhaustive blockers. Everything here is exact and exponential, meant
//! for the small graphs the kernel is exercised on; a step budget turns
//! runaway searches into `CapExceeded`.

use super::SfvsKernelInstance;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::graph::{Graph, Vertex};
use crate::oracle::for_each_subset_upto;
use std::collections::VecDeque;

/// Petals of a z-flower as vertex sets (z excluded). Terminal loops at z are
/// petals with no vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flower {
    pub z: Vertex,
    pub petals: Vec<Vec<Vertex>>,
}

impl Flower {
    pub fn order(&self) -> usize {
        self.petals.len()
    }
}

const STEP_CAP: usize = 5_000_000;

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(words: usize) -> Self {
        Bits(vec![0; words])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize, on: bool) {
        if on {
            self.0[i / 64] |= 1 << (i % 64);
        } else {
            self.0[i / 64] &= !(1 << (i % 64));
        }
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn is_disjoint(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == 0)
    }
    fn union_with(&mut self, other: &Bits) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a |= b);
    }
    fn difference_with(&mut self, other: &Bits) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a &= !b);
    }
}

/// A flower of maximum order (capped at `limit`) among cycles through `z`
/// that contain a terminal edge, in `inst` minus `removed`.
pub fn max_z_flower(inst: &SfvsKernelInstance, z: Vertex, removed: &[bool], limit: usize) -> Result<Flower> {
    if z >= inst.n {
        return Err(Error::UnknownVertex(z));
    }
    let mut petals: Vec<Vec<Vertex>> = Vec::new();
    if removed[z] {
        return Ok(Flower { z, petals });
    }
    let loops = inst.edges.iter().filter(|e| e.u == z && e.v == z && e.terminal).count();
    petals.extend(std::iter::repeat(Vec::new()).take(loops.min(limit)));
    if petals.len() >= limit {
        return Ok(Flower { z, petals });
    }
    let adj = inst.adjacency();
    let words = inst.n.div_ceil(64).max(1);
    let mut masks: Vec<Bits> = Vec::new();
    let mut steps = 0usize;
    let mut on_path = vec![false; inst.n];
    on_path[z] = true;
    for &(a, e0) in &adj[z] {
        if a == z || removed[a] {
            continue;
        }
        // Simple cycles z, a, ..., back to z; the closing edge differs from e0.
        let mut path_mask = Bits::new(words);
        path_mask.set(a, true);
        on_path[a] = true;
        cycles_from(
            inst,
            &adj,
            removed,
            z,
            e0,
            a,
            e0,
            inst.edges[e0].terminal,
            &mut path_mask,
            &mut on_path,
            &mut masks,
            &mut steps,
        )?;
        on_path[a] = false;
    }
    // Keep inclusion-minimal petal sets only.
    masks.sort_unstable_by(|a, b| (a.count(), &a.0).cmp(&(b.count(), &b.0)));
    masks.dedup();
    let mut minimal: Vec<Bits> = Vec::new();
    for m in masks {
        if !minimal.iter().any(|s| s.is_subset(&m)) {
            minimal.push(m);
        }
    }
    let want = limit - petals.len();
    let mut best = Vec::new();
    let mut cur = Vec::new();
    let mut budget = STEP_CAP;
    pack(&minimal, 0, &mut cur, &mut Bits::new(words), &mut best, want, &mut budget)?;
    for i in best {
        petals.push((0..inst.n).filter(|&v| minimal[i].get(v)).collect());
    }
    Ok(Flower { z, petals })
}

#[allow(clippy::too_many_arguments)]
fn cycles_from(
    inst: &SfvsKernelInstance,
    adj: &[Vec<(Vertex, usize)>],
    removed: &[bool],
    z: Vertex,
    e0: usize,
    cur: Vertex,
    last: usize,
    terminal: bool,
    path_mask: &mut Bits,
    on_path: &mut [bool],
    out: &mut Vec<Bits>,
    steps: &mut usize,
) -> Result<()> {
    *steps += 1;
    if *steps > STEP_CAP {
        return Err(Error::CapExceeded("cycle enumeration".into()));
    }
    for &(w, f) in &adj[cur] {
        if f == last || removed[w] || w == cur {
            continue;
        }
        let t = terminal || inst.edges[f].terminal;
        if w == z {
            if f != e0 && t {
                out.push(path_mask.clone());
            }
            continue;
        }
        if on_path[w] {
            continue;
        }
        on_path[w] = true;
        path_mask.set(w, true);
        cycles_from(inst, adj, removed, z, e0, w, f, t, path_mask, on_path, out, steps)?;
        path_mask.set(w, false);
        on_path[w] = false;
    }
    Ok(())
}

/// Maximum packing of pairwise disjoint sets (by index), stopping once
/// `want` are found. `used` is the union of the chosen sets.
fn pack(
    sets: &[Bits],
    from: usize,
    cur: &mut Vec<usize>,
    used: &mut Bits,
    best: &mut Vec<usize>,
    want: usize,
    budget: &mut usize,
) -> Result<()> {
    if *budget == 0 {
        return Err(Error::CapExceeded("petal packing".into()));
    }
    *budget -= 1;
    if cur.len() > best.len() {
        *best = cur.clone();
    }
    if best.len() >= want || cur.len() + (sets.len() - from) <= best.len() {
        return Ok(());
    }
    for i in from..sets.len() {
        if sets[i].is_disjoint(used) {
            cur.push(i);
            used.union_with(&sets[i]);
            pack(sets, i + 1, cur, used, best, want, budget)?;
            used.difference_with(&sets[i]);
            cur.pop();
            if best.len() >= want {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Whether `g − b` has no path of length at least one between two distinct
/// vertices of `a` whose inner vertices avoid `a`. Vertices in `b` are gone.
pub fn hits_all_a_paths(g: &Graph, a: &[Vertex], b: &[Vertex]) -> bool {
    let mut in_a = vec![false; g.n()];
    let mut gone = vec![false; g.n()];
    for &v in a {
        in_a[v] = true;
    }
    for &v in b {
        gone[v] = true;
    }
    for &s in a {
        if gone[s] {
            continue;
        }
        let mut seen = vec![false; g.n()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for w in g.neighbors(v) {
                if gone[w] || seen[w] {
                    continue;
                }
                if in_a[w] {
                    if w != s {
                        return false;
                    }
                    continue;
                }
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    true
}

/// A smallest set of at most `2k` vertices, avoiding `forbidden`, that meets
/// every A-path; `None` if none exists. Vertices of A may be chosen unless
/// forbidden.
pub fn gallai_blocker(g: &Graph, a: &[Vertex], k: usize, forbidden: &[Vertex]) -> Result<Option<Vec<Vertex>>> {
    let mut banned = vec![false; g.n()];
    for &v in forbidden {
        if v >= g.n() {
            return Err(Error::UnknownVertex(v));
        }
        banned[v] = true;
    }
    if let Some(&v) = a.iter().find(|&&v| v >= g.n()) {
        return Err(Error::UnknownVertex(v));
    }
    let universe: Vec<Vertex> = (0..g.n()).filter(|&v| !banned[v] && g.degree(v) > 0).collect();
    let count = crate::oracle::count_subsets_upto(universe.len(), 2 * k);
    if count > crate::oracle::DEFAULT_CAP {
        return Err(Error::CapExceeded(format!("{count} blocker candidates")));
    }
    let mut found = None;
    for_each_subset_upto(&universe, 2 * k, |b| {
        if hits_all_a_paths(g, a, b) {
            found = Some(b.to_vec());
        }
        found.is_none()
    });
    Ok(found)
}

/// Whether G − removed has a cycle through `z` and terminal edge `e`.
/// Uses two vertex-disjoint paths from z to the ends of e, avoiding e.
pub(crate) fn cycle_through(inst: &SfvsKernelInstance, removed: &[bool], z: Vertex, e: usize) -> bool {
    let ed = inst.edges[e];
    if removed[z] || removed[ed.u] || removed[ed.v] {
        return false;
    }
    if ed.u == ed.v {
        return ed.u == z;
    }
    let n = inst.n;
    if ed.u == z || ed.v == z {
        let other = if ed.u == z { ed.v } else { ed.u };
        let mut uf = crate::graph::UnionFind::new(n);
        for (i, f) in inst.edges.iter().enumerate() {
            if i != e && !removed[f.u] && !removed[f.v] {
                uf.union(f.u, f.v);
            }
        }
        return uf.find(z) == uf.find(other);
    }
    // Split every vertex v into v_in = 2v, v_out = 2v + 1; sink = 2n.
    let sink = 2 * n;
    let mut net = FlowNetwork::new(2 * n + 1);
    for v in 0..n {
        if !removed[v] && v != z {
            net.add_edge(2 * v, 2 * v + 1, 1);
        }
    }
    let big = 4;
    for (i, f) in inst.edges.iter().enumerate() {
        if i == e || f.u == f.v || removed[f.u] || removed[f.v] {
            continue;
        }
        net.add_edge(2 * f.u + 1, 2 * f.v, big);
        net.add_edge(2 * f.v + 1, 2 * f.u, big);
    }
    net.add_edge(2 * ed.u + 1, sink, 1);
    net.add_edge(2 * ed.v + 1, sink, 1);
    net.max_flow(2 * z + 1, sink, 2) == 2
}
