//! 2-connected deletion when segments and candidate bodies are known.
//!
//! A solution is described on the quotient G/ℐ by tuples (α, α⁺, h, cut, ρ):
//! α is a value, `sol`, or a body marker; h is the level of the vertex's
//! highest block, with every body collapsed to one level; cut is the cut vertex
//! towards the parent block and α⁺ its value there; ρ picks the body pair of
//! a segment. Binary constraints on G/ℐ make the tuple consistent, a global
//! constraint bounds the number of `sol` values and each 2cc bound becomes a
//! local constraint over same-level value components.
//!
//! Only tuples that some canonical solution could use are materialized, so
//! the value set stays small: a cut must share a block of G with the vertex,
//! α⁺ must pass the unary constraints and weight bounds of the cut, and body
//! markers carry the attachment of their chain in the root part as cut.

use crate::csp::{
    block_satisfiable, check_assignment, CheckContext, Constraint2cc, CspInstance, GlobalConstraint, LocalConstraint,
    LocalContext, Op, PairSet, Propagator, Relation, Value, Weights,
};
use crate::dp::{solve_size_constrained, DpConfig, DpStats};
use crate::error::{Error, Result};
use crate::graph::{biconnected_decomposition, BlockCutForest, Graph, Vertex};
use crate::reductions::{CspDeletion, Target};
use crate::segments::{body_anchors, BodyFamily, BodyPair, SegmentedGraph};
use crate::treewidth::NiceTreeDecomposition;
use indexmap::IndexSet;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};

/// First tuple component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha {
    Sol,
    Val(Value),
    /// The vertex lies in the body of `segment`, whose pair is `pair`
    /// (an index into the filtered family).
    Body {
        segment: usize,
        pair: usize,
    },
}

/// One value of the translated domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TupleValue {
    pub alpha: Alpha,
    pub plus: Value,
    pub h: usize,
    /// `None` stands for ⊤.
    pub cut: Option<Vertex>,
    /// Body pair index; set on segment vertices only.
    pub rho: Option<usize>,
}

impl TupleValue {
    pub const SOL: TupleValue = TupleValue { alpha: Alpha::Sol, plus: 0, h: 0, cut: None, rho: None };
}

/// The translated instance. Γ* has one variable per vertex of G/ℐ and one
/// value per entry of `values`.
#[derive(Clone, Debug)]
pub struct Translation {
    pub csp: CspInstance,
    pub global: Vec<GlobalConstraint>,
    pub local: Vec<LocalConstraint>,
    pub ctx: LocalContext,
    pub values: Vec<TupleValue>,
    /// F(I) after dropping invalid pairs; `Alpha::Body::pair` and `rho` index into it.
    pub family: Vec<Vec<BodyPair>>,
    /// Smallest admissible α⁺ per original vertex, used for body markers.
    pub(crate) plus_min: Vec<Option<Value>>,
    index: HashMap<TupleValue, usize>,
}

impl Translation {
    pub fn value_id(&self, t: &TupleValue) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Whether the tuple (one entry per quotient vertex) satisfies Γ* and its
    /// size constraints.
    pub fn accepts(&self, tuple: &[TupleValue]) -> Result<bool> {
        if tuple.len() != self.csp.num_vars {
            return Err(Error::Precondition(format!(
                "tuple has {} entries for {} variables",
                tuple.len(),
                self.csp.num_vars
            )));
        }
        let Some(ids) = tuple.iter().map(|t| self.value_id(t)).collect::<Option<Vec<_>>>() else {
            return Ok(false);
        };
        check_assignment(
            &self.csp,
            &ids,
            CheckContext::GlobalLocal { global: &self.global, ctx: &self.ctx, local: &self.local },
        )
    }
}

/// Per valid body pair: membership tables and the root-part assignments.
struct PairData {
    in_b: Vec<bool>,
    in_j: Vec<bool>,
    j: Vec<Vertex>,
    /// Per vertex of B ∖ J: the attachment of its chain, i.e. the single
    /// vertex of B ∩ J adjacent to its component of G[B ∖ J]. `None` when
    /// that vertex is not unique, which no canonical tuple can use.
    attach: Vec<Option<Vertex>>,
    /// Per segment: it meets B.
    meets: Vec<bool>,
    /// Per quotient vertex w: N(ext(w)) ∩ I ⊆ J.
    nbr_ok: Vec<bool>,
    /// α_{J,a} for each a ∈ D, `None` when a is invalid for J.
    assign: Vec<Option<Vec<Option<Value>>>>,
    /// Per a: Σ_{u∈J} w(u, α_{J,a}(u)) for each 2cc constraint.
    weight: Vec<Vec<u64>>,
}

struct Builder<'a> {
    norm: CspInstance,
    set: &'a [Constraint2cc],
    seg: &'a SegmentedGraph,
    rel: HashMap<(Vertex, Vertex), Relation>,
    plus: Vec<Vec<Value>>,
    forced: Vec<bool>,
    hard: Vec<bool>,
    covered: Vec<bool>,
    blocks: BlockCutForest,
    max_h: usize,
    family: Vec<Vec<BodyPair>>,
    pairs: Vec<Vec<PairData>>,
}

pub fn translate_2conn_with_bodies(
    inst: &CspInstance,
    set: &[Constraint2cc],
    undeletable: &[usize],
    seg: &SegmentedGraph,
    family: &BodyFamily,
    k: usize,
) -> Result<Translation> {
    translate(inst, set, undeletable, seg, family, k, &[], DpConfig::default().max_cells)
}

/// Relation pairs allowed per unit of the cell cap. A pair is a fraction of
/// the size of a DP cell, so translations may hold a few times more of them.
const PAIRS_PER_CELL: usize = 4;

fn too_large(limit: usize) -> Error {
    Error::CapExceeded(format!(
        "translation needs more than {limit} candidate values or {} relation pairs",
        limit.saturating_mul(PAIRS_PER_CELL)
    ))
}

/// Translation where the vertices of `forced` are known to be deleted.
/// `limit` bounds the stored candidate values, and `PAIRS_PER_CELL · limit`
/// the relation pairs; past either the result is `CapExceeded`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn translate(
    inst: &CspInstance,
    set: &[Constraint2cc],
    undeletable: &[usize],
    seg: &SegmentedGraph,
    family: &BodyFamily,
    k: usize,
    forced: &[Vertex],
    limit: usize,
) -> Result<Translation> {
    let b = Builder::new(inst, set, undeletable, seg, family, forced)?;
    b.build(k, limit)
}

impl<'a> Builder<'a> {
    fn new(
        inst: &CspInstance,
        set: &'a [Constraint2cc],
        undeletable: &[usize],
        seg: &'a SegmentedGraph,
        family: &BodyFamily,
        forced: &[Vertex],
    ) -> Result<Self> {
        inst.validate()?;
        if !inst.is_permutation_instance() {
            return Err(Error::Precondition("the 2-connected solver requires a permutation instance".into()));
        }
        let norm = inst.normalized();
        let g = &seg.base;
        let n = norm.num_vars;
        if g.n() != n || crate::graph::edge_key_set(g) != crate::graph::edge_key_set(&norm.constraint_graph()) {
            return Err(Error::Precondition("segmented graph is not the constraint graph".into()));
        }
        if family.per_segment.len() != seg.len() {
            return Err(Error::Precondition(format!(
                "body family covers {} segments, expected {}",
                family.per_segment.len(),
                seg.len()
            )));
        }
        for c in set {
            if c.w.num_vars() != n || c.w.domain() != norm.domain {
                return Err(Error::InvalidInstance("2cc weight table shape does not match Γ".into()));
            }
        }
        let mut hard = vec![false; n];
        for &u in undeletable {
            *hard.get_mut(u).ok_or(Error::UnknownVertex(u))? = true;
        }
        let covered = seg.covered();
        let mut forced_mask = vec![false; n];
        for &z in forced {
            if z >= n {
                return Err(Error::UnknownVertex(z));
            }
            if covered[z] || hard[z] {
                return Err(Error::Precondition(format!("forced vertex {z} is a segment or undeletable vertex")));
            }
            forced_mask[z] = true;
        }
        let mut rel = HashMap::new();
        for bc in &norm.binary {
            rel.insert((bc.y, bc.x), bc.rel.transpose());
            rel.insert((bc.x, bc.y), bc.rel.clone());
        }
        let cand = norm.candidates();
        let fits = |x: usize, a: Value| set.iter().all(|c| c.w.get(x, a) <= c.q);
        let plus: Vec<Vec<Value>> = (0..n).map(|x| cand[x].iter().copied().filter(|&a| fits(x, a)).collect()).collect();
        let alive = n - forced.iter().collect::<BTreeSet<_>>().len();
        let mut b = Builder {
            set,
            seg,
            rel,
            plus,
            forced: forced_mask,
            hard,
            covered,
            blocks: biconnected_decomposition(g),
            max_h: alive.saturating_sub(2),
            family: Vec::new(),
            pairs: Vec::new(),
            norm,
        };
        let prop = Propagator::new(&b.norm);
        for (i, pairs) in family.per_segment.iter().enumerate() {
            let mut kept = Vec::new();
            let mut data = Vec::new();
            for p in pairs {
                if let Some(&v) = p.body.iter().chain(&p.root_part).find(|&&v| v >= n) {
                    return Err(Error::UnknownVertex(v));
                }
                if b.valid(i, p, &prop) {
                    data.push(b.pair_data(i, p, &prop));
                    kept.push(p.clone());
                }
            }
            b.family.push(kept);
            b.pairs.push(data);
        }
        Ok(b)
    }

    fn g(&self) -> &Graph {
        &self.seg.base
    }

    fn sat(&self, x: Vertex, a: Value, y: Vertex, b: Value) -> bool {
        self.rel.get(&(x, y)).is_none_or(|r| r.contains(a, b))
    }

    fn mask(&self, sets: &[&[Vertex]]) -> Vec<bool> {
        let mut m = vec![false; self.g().n()];
        for s in sets {
            for &v in *s {
                m[v] = true;
            }
        }
        m
    }

    /// The validity filter on a body pair (B, J) of segment `i`.
    fn valid(&self, i: usize, p: &BodyPair, prop: &Propagator) -> bool {
        let g = self.g();
        let seg_i = &self.seg.segments[i];
        let (body, j) = (&p.body, &p.root_part);
        let in_i = self.mask(&[seg_i]);
        if j.is_empty() || j.iter().any(|&v| !in_i[v]) || body.iter().any(|&v| self.forced[v]) {
            return false;
        }
        // Every block of G[B] admits a satisfying assignment.
        if !body.is_empty() {
            let (h, old_of) = g.induced(&self.mask(&[body]));
            let forest = biconnected_decomposition(&h);
            for blk in &forest.blocks {
                let ids: Vec<Vertex> = blk.iter().map(|&v| old_of[v]).collect();
                if !block_satisfiable(&self.norm, prop, self.set, &ids) {
                    return false;
                }
            }
        }
        // I ⊆ B ∪ J.
        let in_bj = self.mask(&[body, j]);
        if seg_i.iter().any(|&v| !in_bj[v]) {
            return false;
        }
        if !g.induces_connected(j) {
            return false;
        }
        // Vertices of B ∩ J separate G[B ∪ J]; a single-vertex root part
        // attaches the whole body and is exempt.
        if j.len() >= 2 {
            let in_b = self.mask(&[body]);
            let (h, old_of) = g.induced(&in_bj);
            let forest = biconnected_decomposition(&h);
            for (v, &old) in old_of.iter().enumerate() {
                if in_b[old] && j.binary_search(&old).is_ok() && !forest.is_cut_vertex(v) {
                    return false;
                }
            }
        }
        // A body meets I and hangs together with it.
        if !body.is_empty() {
            if !seg_i.iter().any(|v| body.binary_search(v).is_ok()) {
                return false;
            }
            let union: Vec<Vertex> =
                self.mask(&[body, seg_i]).iter().enumerate().filter(|x| *x.1).map(|x| x.0).collect();
            if !g.induces_connected(&union) {
                return false;
            }
        }
        true
    }

    fn pair_data(&self, i: usize, p: &BodyPair, prop: &Propagator) -> PairData {
        let g = self.g();
        let in_b = self.mask(&[&p.body]);
        let in_j = self.mask(&[&p.root_part]);
        let seg_i = &self.seg.segments[i];
        let meets = self.seg.segments.iter().map(|s| s.iter().any(|&v| in_b[v])).collect();
        let in_i = self.mask(&[seg_i]);
        let nbr_ok = (0..self.seg.contracted.n())
            .map(|w| self.seg.ext_vertex(w).iter().all(|&x| g.neighbors(x).all(|y| !in_i[y] || in_j[y])))
            .collect();
        let start = p.root_part[0];
        let assign: Vec<Option<Vec<Option<Value>>>> =
            (0..self.norm.domain).map(|a| prop.propagate(&in_j, start, a, true)).collect();
        let weight = assign
            .iter()
            .map(|val| {
                self.set
                    .iter()
                    .map(|c| {
                        val.as_ref().map_or(0, |val| {
                            p.root_part.iter().map(|&u| c.w.get(u, val[u].expect("J is connected"))).sum()
                        })
                    })
                    .collect()
            })
            .collect();
        PairData {
            attach: attachments(g, &in_b, &in_j),
            j: p.root_part.clone(),
            in_b,
            in_j,
            meets,
            nbr_ok,
            assign,
            weight,
        }
    }

    /// Vertices sharing a block of G with some vertex of `of`, outside `of`.
    fn block_mates(&self, of: &[Vertex]) -> BTreeSet<Vertex> {
        let mut out = BTreeSet::new();
        for &u in of {
            for &b in self.blocks.blocks_of(u) {
                out.extend(self.blocks.gamma(b).iter().copied());
            }
        }
        for u in of {
            out.remove(u);
        }
        out
    }

    /// A cut for a value-carrying vertex: alive and outside every segment.
    fn plain_cut(&self, c: Vertex) -> bool {
        !self.forced[c] && !self.covered[c]
    }

    fn candidates(&self, w: Vertex) -> Vec<TupleValue> {
        let mut out = Vec::new();
        let levels = 1..=self.max_h;
        match self.seg.segment_at(w) {
            None => {
                let x = self.seg.ext_vertex(w)[0];
                if self.forced[x] {
                    return vec![TupleValue::SOL];
                }
                if !self.hard[x] {
                    out.push(TupleValue::SOL);
                }
                let cuts: Vec<Vertex> = self.block_mates(&[x]).into_iter().filter(|&c| self.plain_cut(c)).collect();
                for &a in &self.plus[x] {
                    out.push(TupleValue { alpha: Alpha::Val(a), plus: 0, h: 0, cut: None, rho: None });
                    for &c in &cuts {
                        let adjacent = self.g().has_edge(c, x);
                        for &p in &self.plus[c] {
                            if adjacent && !self.sat(c, p, x, a) {
                                continue;
                            }
                            for h in levels.clone() {
                                out.push(TupleValue { alpha: Alpha::Val(a), plus: p, h, cut: Some(c), rho: None });
                            }
                        }
                    }
                }
                for (i, pairs) in self.pairs.iter().enumerate() {
                    for (idx, pd) in pairs.iter().enumerate() {
                        if pd.in_b[x] {
                            self.push_body(&mut out, i, idx, None, x);
                        }
                    }
                }
            }
            Some(i) => {
                let seg_i = &self.seg.segments[i];
                let in_i = self.mask(&[seg_i]);
                for (idx, pd) in self.pairs[i].iter().enumerate() {
                    let rho = Some(idx);
                    let cuts: Vec<Vertex> = self
                        .block_mates(&pd.j)
                        .into_iter()
                        .filter(|&c| {
                            self.plain_cut(c) && !in_i[c] && self.g().neighbors(c).all(|y| !in_i[y] || pd.in_j[y])
                        })
                        .collect();
                    for a in 0..self.norm.domain {
                        let Some(val) = &pd.assign[a] else { continue };
                        if self.set.iter().zip(&pd.weight[a]).any(|(c, &s)| s > c.q) {
                            continue;
                        }
                        out.push(TupleValue { alpha: Alpha::Val(a), plus: 0, h: 0, cut: None, rho });
                        for &c in &cuts {
                            for &p in &self.plus[c] {
                                let ok = self
                                    .g()
                                    .neighbors(c)
                                    .filter(|&u| pd.in_j[u])
                                    .all(|u| self.sat(c, p, u, val[u].expect("assigned on J")));
                                if !ok {
                                    continue;
                                }
                                for h in levels.clone() {
                                    out.push(TupleValue { alpha: Alpha::Val(a), plus: p, h, cut: Some(c), rho });
                                }
                            }
                        }
                    }
                    for (i2, pairs2) in self.pairs.iter().enumerate() {
                        if i2 == i {
                            continue;
                        }
                        for (idx2, pd2) in pairs2.iter().enumerate() {
                            // ρ₂(I) must equal B' ∩ I.
                            let same = seg_i.iter().all(|&v| pd2.in_b[v] == pd.in_j[v]);
                            if same {
                                self.push_body(&mut out, i2, idx2, rho, pd.j[0]);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Body markers for a vertex whose part inside B contains `x`.
    fn push_body(&self, out: &mut Vec<TupleValue>, segment: usize, pair: usize, rho: Option<usize>, x: Vertex) {
        let Some(c) = self.pairs[segment][pair].attach[x] else { return };
        let Some(&p) = self.plus[c].first() else { return };
        for h in 1..=self.max_h {
            out.push(TupleValue { alpha: Alpha::Body { segment, pair }, plus: p, h, cut: Some(c), rho });
        }
    }

    fn pair(&self, i: usize, t: &TupleValue) -> &PairData {
        &self.pairs[i][t.rho.expect("segment values carry ρ")]
    }

    /// Whether B of the segment vertex's or body marker's pair reaches `w`.
    fn body_reaches(&self, pd: &PairData, w: Vertex, skip: Option<usize>) -> bool {
        match self.seg.segment_at(w) {
            None => pd.in_b[self.seg.ext_vertex(w)[0]],
            Some(i2) => Some(i2) != skip && pd.meets[i2],
        }
    }

    /// Edges between the root part of v (or v itself) and that of w satisfied
    /// under the values `(av, aw)`. Invalid values fail.
    fn roots_agree(&self, v: Vertex, tv: &TupleValue, av: Value, w: Vertex, tw: &TupleValue, aw: Value) -> bool {
        let side = |q: Vertex, t: &TupleValue, a: Value| -> Option<Vec<(Vertex, Value)>> {
            match self.seg.segment_at(q) {
                None => Some(vec![(self.seg.ext_vertex(q)[0], a)]),
                Some(i) => {
                    let pd = self.pair(i, t);
                    let val = pd.assign[a].as_ref()?;
                    Some(pd.j.iter().map(|&u| (u, val[u].expect("assigned on J"))).collect())
                }
            }
        };
        let (Some(sv), Some(sw)) = (side(v, tv, av), side(w, tw, aw)) else { return false };
        sv.iter().all(|&(x, ax)| sw.iter().all(|&(y, ay)| self.sat(x, ax, y, ay)))
    }

    /// Conditions attached to v's side of the quotient edge vw.
    fn directed(&self, v: Vertex, tv: &TupleValue, w: Vertex, tw: &TupleValue) -> bool {
        if tv.alpha == Alpha::Sol {
            return true;
        }
        let sv = self.seg.segment_at(v);
        let sw = self.seg.segment_at(w);
        // The body of a segment starts one level below it.
        if let Some(i) = sv {
            let rho = tv.rho.expect("segment values carry ρ");
            if self.body_reaches(&self.pairs[i][rho], w, None)
                && (tw.alpha != (Alpha::Body { segment: i, pair: rho }) || tw.h != tv.h + 1)
            {
                return false;
            }
        }
        // Bodies spread at a constant level.
        if let Alpha::Body { segment, pair } = tv.alpha {
            if self.body_reaches(&self.pairs[segment][pair], w, Some(segment)) && (tw.alpha != tv.alpha || tw.h != tv.h)
            {
                return false;
            }
        }
        // A body marker next to its own segment agrees with that segment's ρ.
        if let Alpha::Body { segment, pair } = tw.alpha {
            if sv == Some(segment) && tv.rho != Some(pair) {
                return false;
            }
        }
        if tw.alpha == Alpha::Sol {
            return true;
        }
        if tv.h.abs_diff(tw.h) > 1 {
            return false;
        }
        if tv.h == tw.h {
            if tv.cut != tw.cut || tv.plus != tw.plus {
                return false;
            }
            if let Some(i) = sv {
                if !self.pair(i, tv).nbr_ok[w] {
                    return false;
                }
            }
            if matches!(tv.alpha, Alpha::Body { .. }) && tw.alpha != tv.alpha {
                return false;
            }
            if let Alpha::Val(a) = tv.alpha {
                if sv.is_some() || sw.is_none() {
                    let Alpha::Val(b) = tw.alpha else { return false };
                    if !self.roots_agree(v, tv, a, w, tw, b) {
                        return false;
                    }
                }
            }
        }
        if tw.h == tv.h + 1 {
            if !tw.cut.is_some_and(|c| self.seg.ext_vertex(v).contains(&c)) {
                return false;
            }
            if let Some(i) = sw {
                if !self.pair(i, tw).nbr_ok[v] {
                    return false;
                }
            }
            // The child block meets v's vertex, which is its cut, with value α⁺.
            if sv.is_none() {
                let Alpha::Val(b) = tw.alpha else { return false };
                if !self.roots_agree(v, tv, tw.plus, w, tw, b) {
                    return false;
                }
            }
        }
        true
    }

    fn consistent(&self, v: Vertex, tv: &TupleValue, w: Vertex, tw: &TupleValue) -> bool {
        self.directed(v, tv, w, tw) && self.directed(w, tw, v, tv)
    }

    fn build(self, k: usize, limit: usize) -> Result<Translation> {
        let q = &self.seg.contracted;
        let nq = q.n();
        let mut registry: IndexSet<TupleValue> = IndexSet::new();
        let mut stored = 0usize;
        let mut per_var: Vec<Vec<TupleValue>> = Vec::with_capacity(nq);
        for w in 0..nq {
            per_var.push(self.candidates(w));
            stored += per_var[w].len();
            if stored > limit {
                return Err(too_large(limit));
            }
        }
        let ids: Vec<Vec<usize>> =
            per_var.iter().map(|c| c.iter().map(|t| registry.insert_full(*t).0).collect()).collect();
        let nd = registry.len().max(1);
        let mut csp = CspInstance::new(nq, nd);
        for (w, list) in ids.iter().enumerate() {
            csp.add_unary(w, list.iter().copied());
        }
        for &(v, w) in q.edges() {
            let buckets = Buckets::new(&per_var[w], self.max_h);
            let mut pairs = Vec::new();
            for (iv, tv) in per_var[v].iter().enumerate() {
                let mut try_pair = |iw: usize| {
                    if self.consistent(v, tv, w, &per_var[w][iw]) {
                        pairs.push((ids[v][iv], ids[w][iw]));
                    }
                };
                if tv.alpha == Alpha::Sol {
                    (0..per_var[w].len()).for_each(&mut try_pair);
                    continue;
                }
                buckets.sols.iter().copied().for_each(&mut try_pair);
                if let Some(list) = buckets.by_hcp.get(&(tv.h, tv.cut, tv.plus)) {
                    list.iter().copied().for_each(&mut try_pair);
                }
                for &c in self.seg.ext_vertex(v) {
                    if let Some(list) = buckets.by_hc.get(&(tv.h + 1, c)) {
                        list.iter().copied().for_each(&mut try_pair);
                    }
                }
                if tv.h >= 1 && tv.cut.is_some_and(|c| self.seg.ext_vertex(w).contains(&c)) {
                    buckets.by_h[tv.h - 1].iter().copied().for_each(&mut try_pair);
                }
            }
            stored += pairs.len();
            if stored > limit.saturating_mul(PAIRS_PER_CELL) {
                return Err(too_large(limit));
            }
            csp.add_binary(v, w, Relation::from(pairs));
        }

        let values: Vec<TupleValue> = registry.into_iter().collect();
        let global = vec![GlobalConstraint {
            w: Weights::from_fn(nq, nd, |_, a| values.get(a).map_or(0, |t| u64::from(t.alpha == Alpha::Sol))),
            q: k as u64,
            op: Op::Le,
        }];
        let mut classes: IndexSet<(Value, usize, Option<Vertex>)> = IndexSet::new();
        let mut class_of: Vec<usize> = values.iter().map(|t| classes.insert_full((t.plus, t.h, t.cut)).0).collect();
        if values.is_empty() {
            class_of.push(classes.insert_full((0, 0, None)).0);
        }
        let keys = (0..nd)
            .map(|a| values.get(a).and_then(|t| matches!(t.alpha, Alpha::Val(_)).then_some(t.h as u32)))
            .collect();
        let ctx = LocalContext { f: PairSet::KeyEq(keys), class_of, num_classes: classes.len() };
        let local = self
            .set
            .iter()
            .enumerate()
            .map(|(ci, c)| LocalConstraint {
                w: Weights::from_fn(nq, nd, |w, a| {
                    let Some(t) = values.get(a) else { return 0 };
                    let Alpha::Val(b) = t.alpha else { return 0 };
                    // Values outside w's candidate list get weight 0.
                    match self.seg.segment_at(w) {
                        None => c.w.get(self.seg.ext_vertex(w)[0], b),
                        Some(i) => t.rho.and_then(|r| self.pairs[i].get(r)).map_or(0, |pd| pd.weight[b][ci]),
                    }
                }),
                w_class: classes.iter().map(|&(p, _, cut)| cut.map_or(0, |x| c.w.get(x, p))).collect(),
                q: c.q,
                op: Op::Le,
            })
            .collect();
        let index = values.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        Ok(Translation {
            csp,
            global,
            local,
            ctx,
            plus_min: self.plus.iter().map(|p| p.first().copied()).collect(),
            values,
            family: self.family,
            index,
        })
    }
}

/// Candidates of one endpoint indexed by the fields a consistent partner
/// must match.
struct Buckets {
    sols: Vec<usize>,
    by_hcp: HashMap<(usize, Option<Vertex>, Value), Vec<usize>>,
    by_hc: HashMap<(usize, Vertex), Vec<usize>>,
    by_h: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(cands: &[TupleValue], max_h: usize) -> Self {
        let mut b = Buckets {
            sols: Vec::new(),
            by_hcp: HashMap::new(),
            by_hc: HashMap::new(),
            by_h: vec![Vec::new(); max_h + 1],
        };
        for (i, t) in cands.iter().enumerate() {
            if t.alpha == Alpha::Sol {
                b.sols.push(i);
                continue;
            }
            b.by_hcp.entry((t.h, t.cut, t.plus)).or_default().push(i);
            if let Some(c) = t.cut {
                b.by_hc.entry((t.h, c)).or_default().push(i);
            }
            b.by_h[t.h].push(i);
        }
        b
    }
}

/// Answer of the with-bodies solver. `solution` is always verified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BodiesOutcome {
    pub solution: Option<Vec<usize>>,
    pub stats: DpStats,
    /// Size of the translated domain.
    pub domain: usize,
    /// The DP found a tuple whose `sol` set failed verification.
    pub rejected: bool,
}

/// Attachment of every vertex of B ∖ J. Bodies consist of blocks of G − Z,
/// so G[B] has no deleted vertex and each chain hanging below the root part
/// meets J only in the cut vertex it hangs from.
fn attachments(g: &Graph, in_b: &[bool], in_j: &[bool]) -> Vec<Option<Vertex>> {
    let n = g.n();
    let mut out = vec![None; n];
    let mut seen = vec![false; n];
    for s in 0..n {
        if !in_b[s] || in_j[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut hits = BTreeSet::new();
        let mut at = 0;
        while at < comp.len() {
            let u = comp[at];
            at += 1;
            for y in g.neighbors(u) {
                if in_j[y] {
                    hits.insert(y);
                } else if in_b[y] && !seen[y] {
                    seen[y] = true;
                    comp.push(y);
                }
            }
        }
        let c = match (hits.len(), hits.first()) {
            (1, Some(&c)) if in_b[c] => Some(c),
            _ => None,
        };
        for u in comp {
            out[u] = c;
        }
    }
    out
}

/// Decides the with-bodies problem through the translation. `ntd` must be a
/// nice decomposition of G/ℐ.
#[allow(clippy::too_many_arguments)]
pub fn solve_2conn_with_bodies(
    inst: &CspInstance,
    set: &[Constraint2cc],
    undeletable: &[usize],
    seg: &SegmentedGraph,
    family: &BodyFamily,
    k: usize,
    ntd: &NiceTreeDecomposition,
    dp: DpConfig,
) -> Result<BodiesOutcome> {
    solve_forced(inst, set, undeletable, seg, family, k, &[], ntd, dp)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_forced(
    inst: &CspInstance,
    set: &[Constraint2cc],
    undeletable: &[usize],
    seg: &SegmentedGraph,
    family: &BodyFamily,
    k: usize,
    forced: &[Vertex],
    ntd: &NiceTreeDecomposition,
    dp: DpConfig,
) -> Result<BodiesOutcome> {
    let tr = translate(inst, set, undeletable, seg, family, k, forced, dp.max_cells)?;
    // Arc consistency keeps every solution and usually shrinks the tables a lot.
    let out = solve_size_constrained(&tr.csp.arc_consistent(), &tr.ctx, &tr.global, &tr.local, ntd, dp)?;
    let domain = tr.values.len();
    let Some(alpha) = out.witness else {
        return Ok(BodiesOutcome { solution: None, stats: out.stats, domain, rejected: false });
    };
    let mut z: Vec<usize> = (0..alpha.len())
        .filter(|&w| tr.values[alpha[w]].alpha == Alpha::Sol)
        .flat_map(|w| seg.ext_vertex(w).to_vec())
        .collect();
    z.sort_unstable();
    let check =
        CspDeletion { csp: inst.clone(), target: Target::Blocks(set.to_vec()), undeletable: undeletable.to_vec(), k };
    let ok = check.accepts(&z)?;
    Ok(BodiesOutcome { solution: ok.then_some(z), stats: out.stats, domain, rejected: !ok })
}

/// The tuple describing the solution `z`: levels and cuts read off the
/// rooted block-cut forest of G − z, one satisfying assignment per block.
/// Fails if `z` is not a solution or its body pairs were filtered out.
pub fn canonical_tuple(
    inst: &CspInstance,
    set: &[Constraint2cc],
    seg: &SegmentedGraph,
    tr: &Translation,
    z: &[Vertex],
) -> Result<Vec<TupleValue>> {
    let norm = inst.normalized();
    let prop = Propagator::new(&norm);
    let anchors = body_anchors(seg, z)?;
    let rb = &anchors.blocks;
    let f = &rb.forest;
    let nb = f.blocks.len();
    let parent_block = |b: usize| f.parent(b).and_then(|c| f.parent(c));
    let mut owner: Vec<Option<usize>> = vec![None; nb];
    let mut rho = Vec::new();
    for (i, a) in anchors.per_segment.iter().enumerate() {
        for &t in a.body.iter().filter(|&&t| f.is_block(t)) {
            owner[t] = Some(i);
        }
        let root_part: Vec<Vertex> = a.r_hat.iter().copied().filter(|&v| seg.segment_of[v] == Some(i)).collect();
        let pair = BodyPair { body: a.b_hat.clone(), root_part };
        let idx = tr.family[i]
            .iter()
            .position(|p| *p == pair)
            .ok_or_else(|| Error::Precondition(format!("body pair of segment {i} is not in the filtered family")))?;
        rho.push(idx);
    }
    // Level of each block: blocks above it, with each body counted once.
    let level = |b: usize| {
        let mut h = 0;
        let mut cur = b;
        while let Some(p) = parent_block(cur) {
            if owner[p].is_none() || owner[p] != owner[cur] {
                h += 1;
            }
            cur = p;
        }
        h
    };
    // Cut vertex between a block and its parent block, in G's ids.
    let up_cut = |b: usize| f.parent(b).map(|c| rb.old_of[f.gamma(c)[0]]);
    let mut assign: HashMap<usize, Vec<Option<Value>>> = HashMap::new();
    let mut block_assignment = |b: usize| -> Result<Vec<Option<Value>>> {
        if let Some(a) = assign.get(&b) {
            return Ok(a.clone());
        }
        let ids = rb.gamma(b);
        let mut member = vec![false; norm.num_vars];
        for &v in &ids {
            member[v] = true;
        }
        let found = (0..norm.domain).find_map(|a| {
            prop.propagate(&member, ids[0], a, true).filter(|val| {
                let alpha: Vec<Value> = val.iter().map(|x| x.unwrap_or(0)).collect();
                set.iter().all(|c| crate::csp::satisfies_2cc_on(&alpha, c, &ids))
            })
        });
        let val = found.ok_or_else(|| Error::Precondition(format!("block {ids:?} of G − Z is not satisfiable")))?;
        assign.insert(b, val.clone());
        Ok(val)
    };
    let in_z: BTreeSet<Vertex> = z.iter().copied().collect();
    let mut out = Vec::with_capacity(seg.contracted.n());
    for w in 0..seg.contracted.n() {
        let ext = seg.ext_vertex(w);
        if ext.iter().any(|v| in_z.contains(v)) {
            out.push(TupleValue::SOL);
            continue;
        }
        let t = ext
            .iter()
            .flat_map(|&v| f.blocks_of(rb.local_id(v).expect("alive")).iter().copied())
            .min_by_key(|&b| (f.depth(b), b))
            .expect("every vertex lies in a block");
        let h = level(t);
        let seg_w = seg.segment_at(w);
        let rho_w = seg_w.map(|i| rho[i]);
        let tuple = if let Some(i) = owner[t] {
            // Climb to the top of the chain; its attachment lies in the root part.
            let mut top = t;
            while let Some(p) = parent_block(top) {
                if owner[p] != Some(i) {
                    break;
                }
                top = p;
            }
            let c = up_cut(top).expect("body blocks have a parent");
            let plus = tr.plus_min[c].ok_or_else(|| Error::Precondition(format!("attachment {c} has no value")))?;
            TupleValue { alpha: Alpha::Body { segment: i, pair: rho[i] }, plus, h, cut: Some(c), rho: rho_w }
        } else {
            let val = block_assignment(t)?;
            let rep = match seg_w {
                None => ext[0],
                Some(i) => tr.family[i][rho[i]].root_part[0],
            };
            let a = val[rep].expect("representative lies in the block");
            let (cut, plus) = if h == 0 {
                (None, 0)
            } else {
                let c = up_cut(t).expect("non-root block");
                (Some(c), val[c].expect("cut lies in the block"))
            };
            TupleValue { alpha: Alpha::Val(a), plus, h, cut, rho: rho_w }
        };
        out.push(tuple);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::vertex_partition_planar;
    use crate::gen::planted_permutation_csp;
    use crate::segments::{build_segments, enumerate_body_family};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Planted {
        inst: CspInstance,
        set: Vec<Constraint2cc>,
        seg: SegmentedGraph,
        family: BodyFamily,
        z: Vec<Vertex>,
        z_i: Vec<Vertex>,
    }

    /// A random instance with a solution Z and the segments of one class
    /// guess consistent with it.
    fn planted(rng: &mut ChaCha8Rng) -> Option<Planted> {
        let n = rng.gen_range(4..12);
        let d = rng.gen_range(1..4);
        let density = rng.gen_range(0.0..0.6);
        let zs = rng.gen_range(0..4);
        let (inst, rot, z) = planted_permutation_csp(rng, n, d, density, zs);
        let g = inst.normalized().constraint_graph();
        let set: Vec<Constraint2cc> = if rng.gen_bool(0.5) {
            let w = crate::csp::Weights::from_fn(n, d, |_, _| rng.gen_range(0..3));
            vec![Constraint2cc { w, q: rng.gen_range(2..9) }]
        } else {
            Vec::new()
        };
        let check =
            CspDeletion { csp: inst.clone(), target: Target::Blocks(set.clone()), undeletable: vec![], k: z.len() };
        if !check.accepts(&z).unwrap() {
            return None;
        }
        let part = vertex_partition_planar(&g, &rot, 0, rng.gen_range(1..4)).unwrap();
        let class = &part.classes[rng.gen_range(0..part.classes.len())];
        let z_i: Vec<Vertex> = z.iter().copied().filter(|v| class.contains(v)).collect();
        let seg = build_segments(&g, class, &z_i);
        let per_segment = seg.segments.iter().map(|s| enumerate_body_family(&g, s, z.len(), &z_i).unwrap()).collect();
        Some(Planted { inst, set, seg, family: BodyFamily { per_segment }, z, z_i })
    }

    #[test]
    fn canonical_tuples_are_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tested = 0;
        for round in 0..400 {
            let Some(p) = planted(&mut rng) else { continue };
            let k = p.z.len();
            let tr =
                translate(&p.inst, &p.set, &[], &p.seg, &p.family, k, &p.z_i, DpConfig::default().max_cells).unwrap();
            let tuple =
                canonical_tuple(&p.inst, &p.set, &p.seg, &tr, &p.z).unwrap_or_else(|e| panic!("round {round}: {e}"));
            assert!(tr.accepts(&tuple).unwrap(), "round {round}: canonical tuple rejected");
            tested += 1;
        }
        assert!(tested >= 100, "only {tested} planted instances");
    }

    #[test]
    fn oversized_translations_hit_the_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = std::iter::repeat_with(|| planted(&mut rng)).flatten().next().expect("a planted instance");
        let k = p.z.len();
        let full = translate(&p.inst, &p.set, &[], &p.seg, &p.family, k, &p.z_i, usize::MAX).unwrap();
        let stored: usize = full.csp.unary.iter().map(|u| u.allowed.len()).sum();
        let small = translate(&p.inst, &p.set, &[], &p.seg, &p.family, k, &p.z_i, stored - 1);
        assert!(matches!(small, Err(Error::CapExceeded(_))));
    }

    #[test]
    fn sol_on_segment_vertices_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut seen = 0;
        for _ in 0..200 {
            let Some(p) = planted(&mut rng) else { continue };
            let tr =
                translate(&p.inst, &p.set, &[], &p.seg, &p.family, p.z.len(), &p.z_i, DpConfig::default().max_cells)
                    .unwrap();
            for i in 0..p.seg.len() {
                let v = p.seg.segment_vertex(i);
                if let Some(id) = tr.value_id(&TupleValue::SOL) {
                    assert!(!tr.csp.unary.iter().any(|u| u.var == v && u.allowed.contains(&id)));
                    seen += 1;
                }
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn planted_solutions_are_found() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for round in 0..150 {
            let Some(p) = planted(&mut rng) else { continue };
            let k = p.z.len();
            let ntd = crate::treewidth::nice_decomposition(&p.seg.contracted);
            let out =
                solve_forced(&p.inst, &p.set, &[], &p.seg, &p.family, k, &p.z_i, &ntd, DpConfig::default()).unwrap();
            assert!(!out.rejected, "round {round}");
            assert!(out.solution.is_some(), "round {round}");
        }
    }

    #[test]
    fn emptied_family_stays_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let Some(p) = planted(&mut rng) else { continue };
            let empty = BodyFamily { per_segment: vec![BTreeSet::new(); p.seg.len()] };
            let ntd = crate::treewidth::nice_decomposition(&p.seg.contracted);
            let out =
                solve_2conn_with_bodies(&p.inst, &p.set, &[], &p.seg, &empty, p.z.len(), &ntd, DpConfig::default())
                    .unwrap();
            assert!(!out.rejected);
        }
    }
}
