//! The concrete deletion problems and their encodings as permutation CSPs.
//! Every encoding uses the input graph itself as constraint graph.

use crate::csp::{
    satisfiable_on_blocks_brute, satisfiable_on_components, Constraint1cc, Constraint2cc, CspInstance, GroupTable, Op,
    Relation, Value, Weights,
};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Oct,
    GroupFvs,
    VertexMwc,
    Coc,
    SubsetFvs,
    TwoSubsetFvs,
    SubsetGroupFvs,
    TwoConnCoc,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 8] = [
        ProblemKind::Oct,
        ProblemKind::GroupFvs,
        ProblemKind::VertexMwc,
        ProblemKind::Coc,
        ProblemKind::SubsetFvs,
        ProblemKind::TwoSubsetFvs,
        ProblemKind::SubsetGroupFvs,
        ProblemKind::TwoConnCoc,
    ];

    pub fn needs_group(self) -> bool {
        matches!(self, ProblemKind::GroupFvs | ProblemKind::SubsetGroupFvs)
    }

    /// Whether the encoding targets the block (2-connected component) semantics.
    pub fn is_block_problem(self) -> bool {
        matches!(
            self,
            ProblemKind::SubsetFvs | ProblemKind::TwoSubsetFvs | ProblemKind::SubsetGroupFvs | ProblemKind::TwoConnCoc
        )
    }
}

/// An undeletable item in a problem file: a vertex id or an edge `[u, v]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Item {
    Vertex(Vertex),
    Edge([Vertex; 2]),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub problem: ProblemKind,
    pub graph: Graph,
    #[serde(default)]
    pub terminals: Vec<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupTable>,
    /// Arc labels `[u, v, σ]` meaning λ(u, v) = σ; the reverse arc gets σ⁻¹.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<(Vertex, Vertex, usize)>>,
    pub k: usize,
    #[serde(default)]
    pub t: usize,
    #[serde(default)]
    pub edge_version: bool,
    /// Multiway cut only: terminals may be deleted.
    #[serde(default)]
    pub deletable_terminals: bool,
    #[serde(default)]
    pub undeletable: Vec<Item>,
}

impl ProblemInstance {
    pub fn new(problem: ProblemKind, graph: Graph, k: usize) -> Self {
        ProblemInstance {
            problem,
            graph,
            terminals: Vec::new(),
            group: None,
            labels: None,
            k,
            t: 0,
            edge_version: false,
            deletable_terminals: false,
            undeletable: Vec::new(),
        }
    }

    /// Sets λ from one label per edge id, read in the edge's stored orientation.
    pub fn with_edge_labels(mut self, group: GroupTable, per_edge: &[usize]) -> Self {
        self.labels = Some(self.graph.edges().iter().zip(per_edge).map(|(&(u, v), &s)| (u, v, s)).collect());
        self.group = Some(group);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        if let Some(&v) = self.terminals.iter().find(|&&v| v >= n) {
            return Err(Error::UnknownVertex(v));
        }
        if self.problem.needs_group() {
            self.edge_labels()?;
        }
        self.undeletable_vertices()?;
        self.undeletable_edges()?;
        if self.edge_version && !self.undeletable.iter().all(|i| matches!(i, Item::Edge(_))) {
            return Err(Error::InvalidInstance("edge versions take undeletable edges only".into()));
        }
        if !self.edge_version && !self.undeletable.iter().all(|i| matches!(i, Item::Vertex(_))) {
            return Err(Error::InvalidInstance("vertex versions take undeletable vertices only".into()));
        }
        Ok(())
    }

    pub fn group(&self) -> Result<&GroupTable> {
        self.group.as_ref().ok_or_else(|| Error::InvalidInstance("group problems need a group".into()))
    }

    /// λ(u, v) for every edge id in its stored orientation (u, v).
    pub fn edge_labels(&self) -> Result<Vec<usize>> {
        let group = self.group()?;
        let raw = self.labels.as_ref().ok_or_else(|| Error::InvalidInstance("missing arc labels".into()))?;
        let mut out: Vec<Option<usize>> = vec![None; self.graph.m()];
        for &(u, v, s) in raw {
            if s >= group.order() {
                return Err(Error::InvalidInstance(format!("label {s} is not a group element")));
            }
            if u >= self.graph.n() || v >= self.graph.n() {
                return Err(Error::UnknownVertex(u.max(v)));
            }
            let e = self.graph.edge_between(u, v).ok_or(Error::MissingEdge(u, v))?;
            let forward = if self.graph.edge(e).0 == u { s } else { group.inv(s) };
            match out[e] {
                Some(prev) if prev != forward => {
                    return Err(Error::InvalidInstance(format!("labels on ({u}, {v}) violate λ(v, w) = λ(w, v)⁻¹")))
                }
                _ => out[e] = Some(forward),
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(e, l)| {
                l.ok_or_else(|| {
                    let (u, v) = self.graph.edge(e);
                    Error::InvalidInstance(format!("edge ({u}, {v}) has no label"))
                })
            })
            .collect()
    }

    pub fn undeletable_vertices(&self) -> Result<Vec<Vertex>> {
        let mut out = BTreeSet::new();
        for i in &self.undeletable {
            if let Item::Vertex(v) = *i {
                if v >= self.graph.n() {
                    return Err(Error::UnknownVertex(v));
                }
                out.insert(v);
            }
        }
        Ok(out.into_iter().collect())
    }

    pub fn undeletable_edges(&self) -> Result<Vec<EdgeId>> {
        let mut out = BTreeSet::new();
        for i in &self.undeletable {
            if let Item::Edge([u, v]) = *i {
                if u >= self.graph.n() || v >= self.graph.n() {
                    return Err(Error::UnknownVertex(u.max(v)));
                }
                out.insert(self.graph.edge_between(u, v).ok_or(Error::MissingEdge(u, v))?);
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Items that a solution may contain: vertex ids, or edge ids in the edge version.
    pub fn deletable_universe(&self) -> Result<Vec<usize>> {
        if self.edge_version {
            let u: BTreeSet<EdgeId> = self.undeletable_edges()?.into_iter().collect();
            Ok((0..self.graph.m()).filter(|e| !u.contains(e)).collect())
        } else {
            let mut u: BTreeSet<Vertex> = self.undeletable_vertices()?.into_iter().collect();
            if self.problem == ProblemKind::VertexMwc && !self.deletable_terminals {
                u.extend(self.terminals.iter().copied());
            }
            Ok((0..self.graph.n()).filter(|v| !u.contains(v)).collect())
        }
    }
}

/// What "Γ is satisfied" means after deletion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Target {
    /// Every connected component is satisfiable together with the 1cc constraints.
    Components(Vec<Constraint1cc>),
    /// Every 2-connected component is satisfiable with the 2cc constraints on it.
    Blocks(Vec<Constraint2cc>),
}

/// A vertex-deletion CSP problem: delete at most `k` variables outside `undeletable`.
#[derive(Clone, Debug, Serialize)]
pub struct CspDeletion {
    pub csp: CspInstance,
    pub target: Target,
    pub undeletable: Vec<usize>,
    pub k: usize,
}

impl CspDeletion {
    /// Whether deleting `z` solves the instance.
    pub fn accepts(&self, z: &[usize]) -> Result<bool> {
        let zs: BTreeSet<usize> = z.iter().copied().collect();
        if zs.len() > self.k || self.undeletable.iter().any(|u| zs.contains(u)) {
            return Ok(false);
        }
        let keep: Vec<usize> = (0..self.csp.num_vars).filter(|v| !zs.contains(v)).collect();
        let (sub, map) = self.csp.induced_subinstance(&keep)?;
        Ok(match &self.target {
            Target::Components(set) => satisfiable_on_components(&sub, &restrict_1cc(set, &map)),
            Target::Blocks(set) => satisfiable_on_blocks_brute(&sub, &restrict_2cc(set, &map)),
        })
    }
}

fn restrict_weights(w: &Weights, map: &[usize]) -> Weights {
    Weights::from_fn(map.len(), w.domain(), |x, a| w.get(map[x], a))
}

pub fn restrict_1cc(set: &[Constraint1cc], map: &[usize]) -> Vec<Constraint1cc> {
    set.iter().map(|c| Constraint1cc { w: restrict_weights(&c.w, map), q: c.q, op: c.op }).collect()
}

pub fn restrict_2cc(set: &[Constraint2cc], map: &[usize]) -> Vec<Constraint2cc> {
    set.iter().map(|c| Constraint2cc { w: restrict_weights(&c.w, map), q: c.q }).collect()
}

/// Permutation CSP edge deletion: delete at most `k` constraint-graph edges
/// outside `undeletable` so that Γ − Z is satisfiable.
#[derive(Clone, Debug, Serialize)]
pub struct CspEdgeDeletion {
    pub csp: CspInstance,
    pub undeletable: Vec<(Vertex, Vertex)>,
    pub k: usize,
}

impl CspEdgeDeletion {
    pub fn accepts(&self, z: &[(Vertex, Vertex)]) -> Result<bool> {
        let key = |&(u, v): &(Vertex, Vertex)| (u.min(v), u.max(v));
        let zs: BTreeSet<(Vertex, Vertex)> = z.iter().map(key).collect();
        if zs.len() > self.k || self.undeletable.iter().any(|e| zs.contains(&key(e))) {
            return Ok(false);
        }
        let rest = self.csp.remove_edge_constraints(&zs.into_iter().collect::<Vec<_>>())?;
        Ok(satisfiable_on_components(&rest, &[]))
    }
}

/// An edge-deletion problem turned into vertex deletion by subdividing every
/// edge with a fresh variable; original variables become undeletable.
#[derive(Clone, Debug, Serialize)]
pub struct Subdivided {
    pub inner: CspDeletion,
    /// Original constraint-graph edge `(u, v)` (u < v) for each new variable, in order.
    pub edges: Vec<(Vertex, Vertex)>,
    pub first_edge_var: usize,
}

impl Subdivided {
    pub fn var_of(&self, u: Vertex, v: Vertex) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok().map(|i| self.first_edge_var + i)
    }

    pub fn edge_of_var(&self, x: usize) -> Option<(Vertex, Vertex)> {
        x.checked_sub(self.first_edge_var).and_then(|i| self.edges.get(i).copied())
    }
}

/// The encoding produced for a problem instance.
#[derive(Clone, Debug, Serialize)]
pub enum Encoded {
    Vertex(CspDeletion),
    Edge(CspEdgeDeletion),
    Subdivided(Subdivided),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwcEncoding {
    /// One-value domain with a 1cc bound of one terminal per component.
    #[default]
    SizeConstraint,
    /// Domain T with each terminal pinned to its own token.
    TerminalDomain,
}

fn equality_edges(g: &Graph, inst: &mut CspInstance, rel: &Relation) {
    for &(u, v) in g.edges() {
        inst.add_binary(u, v, rel.clone());
    }
}

fn labelled(inst: &mut CspInstance, names: Vec<String>) {
    debug_assert_eq!(names.len(), inst.domain);
    inst.labels = Some(names);
}

fn base_undeletable(p: &ProblemInstance) -> Result<BTreeSet<usize>> {
    Ok(p.undeletable_vertices()?.into_iter().collect())
}

fn vertex(csp: CspInstance, target: Target, undeletable: BTreeSet<usize>, k: usize) -> CspDeletion {
    CspDeletion { csp, target, undeletable: undeletable.into_iter().collect(), k }
}

fn expect_kind(p: &ProblemInstance, kind: ProblemKind) -> Result<()> {
    if p.problem != kind {
        return Err(Error::Precondition(format!("expected a {kind:?} instance, got {:?}", p.problem)));
    }
    p.validate()
}

pub fn oct_to_csp(p: &ProblemInstance) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::Oct)?;
    let mut c = CspInstance::new(p.graph.n(), 2);
    equality_edges(&p.graph, &mut c, &vec![(0, 1), (1, 0)].into());
    labelled(&mut c, vec!["0".into(), "1".into()]);
    Ok(vertex(c, Target::Components(vec![]), base_undeletable(p)?, p.k))
}

/// R_σ = {(δ, δσ)} over the group, shifted by `offset` in the domain.
fn group_relation(group: &GroupTable, sigma: usize, offset: usize) -> Vec<(Value, Value)> {
    (0..group.order()).map(|d| (offset + d, offset + group.mul(d, sigma))).collect()
}

pub fn groupfvs_to_csp(p: &ProblemInstance) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::GroupFvs)?;
    let group = p.group()?;
    let labels = p.edge_labels()?;
    let mut c = CspInstance::new(p.graph.n(), group.order());
    for (e, &(u, v)) in p.graph.edges().iter().enumerate() {
        c.add_binary(u, v, group_relation(group, labels[e], 0).into());
    }
    labelled(&mut c, (0..group.order()).map(|g| format!("g{g}")).collect());
    Ok(vertex(c, Target::Components(vec![]), base_undeletable(p)?, p.k))
}

fn mwc_undeletable(p: &ProblemInstance) -> Result<BTreeSet<usize>> {
    let mut u = base_undeletable(p)?;
    if !p.deletable_terminals {
        u.extend(p.terminals.iter().copied());
    }
    Ok(u)
}

pub fn mwc_to_csp(p: &ProblemInstance, encoding: MwcEncoding) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::VertexMwc)?;
    let n = p.graph.n();
    let terminals: BTreeSet<Vertex> = p.terminals.iter().copied().collect();
    match encoding {
        MwcEncoding::SizeConstraint => {
            let mut c = CspInstance::new(n, 1);
            equality_edges(&p.graph, &mut c, &Relation::equality(1));
            labelled(&mut c, vec!["*".into()]);
            let w = Weights::from_fn(n, 1, |v, _| u64::from(terminals.contains(&v)));
            let target = Target::Components(vec![Constraint1cc { w, q: 1, op: Op::Le }]);
            Ok(vertex(c, target, mwc_undeletable(p)?, p.k))
        }
        MwcEncoding::TerminalDomain => {
            // With no terminals a single spare token keeps the domain nonempty.
            let tokens: Vec<Vertex> = terminals.iter().copied().collect();
            let d = tokens.len().max(1);
            let mut c = CspInstance::new(n, d);
            for (i, &t) in tokens.iter().enumerate() {
                c.add_unary(t, [i]);
            }
            equality_edges(&p.graph, &mut c, &Relation::equality(d));
            let names =
                if tokens.is_empty() { vec!["t*".into()] } else { tokens.iter().map(|t| format!("t{t}")).collect() };
            labelled(&mut c, names);
            Ok(vertex(c, Target::Components(vec![]), mwc_undeletable(p)?, p.k))
        }
    }
}

pub fn coc_to_csp(p: &ProblemInstance) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::Coc)?;
    let n = p.graph.n();
    let mut c = CspInstance::new(n, 1);
    equality_edges(&p.graph, &mut c, &Relation::equality(1));
    labelled(&mut c, vec!["*".into()]);
    let target = Target::Components(vec![Constraint1cc { w: Weights::constant(n, 1, 1), q: p.t as u64, op: Op::Le }]);
    Ok(vertex(c, target, base_undeletable(p)?, p.k))
}

fn incident_edges(g: &Graph, v: Vertex) -> impl Iterator<Item = EdgeId> + '_ {
    g.incident(v).iter().map(|&(_, e)| e)
}

/// Domain ⊛ | vertex tokens | edge tokens.
pub fn sfvs_to_2conn_csp(p: &ProblemInstance) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::SubsetFvs)?;
    let (n, m) = (p.graph.n(), p.graph.m());
    let d = 1 + n + m;
    let terminals: BTreeSet<Vertex> = p.terminals.iter().copied().collect();
    let mut c = CspInstance::new(n, d);
    for v in 0..n {
        let edges = incident_edges(&p.graph, v).map(|e| 1 + n + e);
        if terminals.contains(&v) {
            c.add_unary(v, edges.chain([1 + v]));
        } else {
            c.add_unary(v, edges.chain([0]));
        }
    }
    equality_edges(&p.graph, &mut c, &Relation::equality(d));
    let mut names = vec!["*".to_string()];
    names.extend((0..n).map(|v| format!("v{v}")));
    names.extend(p.graph.edges().iter().map(|(u, v)| format!("e{u}-{v}")));
    labelled(&mut c, names);
    Ok(vertex(c, Target::Blocks(vec![]), base_undeletable(p)?, p.k))
}

/// Domain T | edge tokens. With T = ∅ a single spare token stands in for T,
/// which keeps the "every block passes" answer of that trivial case.
pub fn twosubsetfvs_to_2conn_csp(p: &ProblemInstance) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::TwoSubsetFvs)?;
    let (n, m) = (p.graph.n(), p.graph.m());
    let tokens: Vec<Vertex> = p.terminals.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let nt = tokens.len().max(1);
    let d = nt + m;
    let mut c = CspInstance::new(n, d);
    for v in 0..n {
        let edges = incident_edges(&p.graph, v).map(|e| nt + e);
        match tokens.binary_search(&v) {
            Ok(i) => c.add_unary(v, edges.chain([i])),
            Err(_) => c.add_unary(v, edges.chain(0..nt)),
        }
    }
    equality_edges(&p.graph, &mut c, &Relation::equality(d));
    let mut names: Vec<String> =
        if tokens.is_empty() { vec!["t*".into()] } else { tokens.iter().map(|t| format!("t{t}")).collect() };
    names.extend(p.graph.edges().iter().map(|(u, v)| format!("e{u}-{v}")));
    labelled(&mut c, names);
    Ok(vertex(c, Target::Blocks(vec![]), base_undeletable(p)?, p.k))
}

/// Domain ⊛ | Σ, with R′_σ = {(⊛, ⊛)} ∪ {(δ, δσ)}.
pub fn subsetgroupfvs_to_2conn_csp(p: &ProblemInstance) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::SubsetGroupFvs)?;
    let group = p.group()?;
    let labels = p.edge_labels()?;
    let n = p.graph.n();
    let d = 1 + group.order();
    let mut c = CspInstance::new(n, d);
    for &t in &p.terminals {
        c.add_unary(t, 1..d);
    }
    for (e, &(u, v)) in p.graph.edges().iter().enumerate() {
        let mut rel = group_relation(group, labels[e], 1);
        rel.push((0, 0));
        c.add_binary(u, v, rel.into());
    }
    let mut names = vec!["*".to_string()];
    names.extend((0..group.order()).map(|g| format!("g{g}")));
    labelled(&mut c, names);
    Ok(vertex(c, Target::Blocks(vec![]), base_undeletable(p)?, p.k))
}

pub fn twoconn_coc_to_2conn_csp(p: &ProblemInstance) -> Result<CspDeletion> {
    expect_kind(p, ProblemKind::TwoConnCoc)?;
    let n = p.graph.n();
    let mut c = CspInstance::new(n, 1);
    equality_edges(&p.graph, &mut c, &Relation::equality(1));
    labelled(&mut c, vec!["*".into()]);
    let target = Target::Blocks(vec![Constraint2cc { w: Weights::constant(n, 1, 1), q: p.t as u64 }]);
    Ok(vertex(c, target, base_undeletable(p)?, p.k))
}

/// Vertex-deletion encoding of `p` (ignores `edge_version`).
pub fn reduce_vertex(p: &ProblemInstance, mwc: MwcEncoding) -> Result<CspDeletion> {
    match p.problem {
        ProblemKind::Oct => oct_to_csp(p),
        ProblemKind::GroupFvs => groupfvs_to_csp(p),
        ProblemKind::VertexMwc => mwc_to_csp(p, mwc),
        ProblemKind::Coc => coc_to_csp(p),
        ProblemKind::SubsetFvs => sfvs_to_2conn_csp(p),
        ProblemKind::TwoSubsetFvs => twosubsetfvs_to_2conn_csp(p),
        ProblemKind::SubsetGroupFvs => subsetgroupfvs_to_2conn_csp(p),
        ProblemKind::TwoConnCoc => twoconn_coc_to_2conn_csp(p),
    }
}

/// Edge-deletion encoding. Problems without size constraints and with
/// component semantics map to plain CSP edge deletion; the others are
/// subdivided into vertex deletion over new edge variables.
pub fn edge_variant(p: &ProblemInstance, mwc: MwcEncoding) -> Result<Encoded> {
    let mut q = p.clone();
    q.undeletable.clear();
    q.edge_version = false;
    let undeletable: Vec<(Vertex, Vertex)> = p.undeletable_edges()?.into_iter().map(|e| p.graph.edge(e)).collect();
    let base = match p.problem {
        // Terminal deletability has no meaning once only edges are removed.
        ProblemKind::VertexMwc => {
            q.deletable_terminals = true;
            reduce_vertex(&q, mwc)?
        }
        _ => reduce_vertex(&q, mwc)?,
    };
    let plain = matches!(&base.target, Target::Components(s) if s.is_empty());
    if plain {
        Ok(Encoded::Edge(CspEdgeDeletion { csp: base.csp, undeletable, k: p.k }))
    } else {
        Ok(Encoded::Subdivided(subdivide(&base, &undeletable)?))
    }
}

pub fn reduce(p: &ProblemInstance, mwc: MwcEncoding) -> Result<Encoded> {
    if p.edge_version {
        edge_variant(p, mwc)
    } else {
        reduce_vertex(p, mwc).map(Encoded::Vertex)
    }
}

/// Replaces each constraint edge uv by a path u − e − v. The new variable e
/// ranges over pairs (a, b) ∈ R_uv (encoded as `D + a·D + b`), originals keep
/// their D values and become undeletable, and for block targets pairs whose
/// weight w(u,a) + w(v,b) already exceeds a 2cc bound are dropped.
pub fn subdivide(base: &CspDeletion, undeletable_edges: &[(Vertex, Vertex)]) -> Result<Subdivided> {
    let norm = base.csp.normalized();
    let (n, d) = (norm.num_vars, norm.domain);
    let d2 = d.checked_mul(d).and_then(|x| x.checked_add(d)).ok_or(Error::Overflow("subdivided domain"))?;
    let edges: Vec<(Vertex, Vertex)> = norm.binary.iter().map(|b| (b.x, b.y)).collect();
    let mut c = CspInstance::new(n + edges.len(), d2);
    let code = |a: Value, b: Value| d + a * d + b;
    for v in 0..n {
        c.add_unary(v, 0..d);
    }
    for u in &norm.unary {
        c.add_unary(u.var, u.allowed.iter().copied());
    }
    let filter: Vec<&Constraint2cc> = match &base.target {
        Target::Blocks(set) => set.iter().collect(),
        Target::Components(_) => Vec::new(),
    };
    for (i, b) in norm.binary.iter().enumerate() {
        let e = n + i;
        let pairs: Vec<(Value, Value)> = b
            .rel
            .pairs()
            .iter()
            .copied()
            .filter(|&(a, bb)| filter.iter().all(|s| s.w.get(b.x, a) + s.w.get(b.y, bb) <= s.q))
            .collect();
        c.add_unary(e, pairs.iter().map(|&(a, bb)| code(a, bb)));
        c.add_binary(b.x, e, pairs.iter().map(|&(a, bb)| (a, code(a, bb))).collect());
        c.add_binary(e, b.y, pairs.iter().map(|&(a, bb)| (code(a, bb), bb)).collect());
    }
    if let Some(names) = &norm.labels {
        let mut all = names.clone();
        for a in 0..d {
            for b in 0..d {
                all.push(format!("({},{})", names[a], names[b]));
            }
        }
        c.labels = Some(all);
    }
    let widen =
        |w: &Weights| Weights::from_fn(n + edges.len(), d2, |x, a| if x < n && a < d { w.get(x, a) } else { 0 });
    let target = match &base.target {
        Target::Components(set) => {
            Target::Components(set.iter().map(|s| Constraint1cc { w: widen(&s.w), q: s.q, op: s.op }).collect())
        }
        Target::Blocks(set) => Target::Blocks(set.iter().map(|s| Constraint2cc { w: widen(&s.w), q: s.q }).collect()),
    };
    let mut sub = Subdivided {
        inner: CspDeletion { csp: c, target, undeletable: Vec::new(), k: base.k },
        edges,
        first_edge_var: n,
    };
    let mut und: BTreeSet<usize> = (0..n).collect();
    for &(u, v) in undeletable_edges {
        und.insert(sub.var_of(u, v).ok_or(Error::MissingEdge(u, v))?);
    }
    sub.inner.undeletable = und.into_iter().collect();
    Ok(sub)
}

/// Converts a problem-level solution (vertex ids, or edge ids in the edge
/// version) into the encoding's own deletion set and checks it there.
pub fn encoded_accepts(p: &ProblemInstance, enc: &Encoded, z: &[usize]) -> Result<bool> {
    match enc {
        Encoded::Vertex(d) => d.accepts(z),
        Encoded::Edge(d) => {
            let pairs: Vec<(Vertex, Vertex)> = z.iter().map(|&e| p.graph.edge(e)).collect();
            d.accepts(&pairs)
        }
        Encoded::Subdivided(s) => {
            let vars: Vec<usize> = z
                .iter()
                .map(|&e| {
                    let (u, v) = p.graph.edge(e);
                    s.var_of(u, v).ok_or(Error::MissingEdge(u, v))
                })
                .collect::<Result<_>>()?;
            s.inner.accepts(&vars)
        }
    }
}

/// Edge ids of the problem graph keyed by sorted endpoint pair.
pub fn edge_index(g: &Graph) -> BTreeMap<(Vertex, Vertex), EdgeId> {
    g.edges().iter().enumerate().map(|(e, &(u, v))| ((u.min(v), u.max(v)), e)).collect()
}
