//! Binary CSP instances, permutation constraints and their constraint graphs.

mod check;
mod group;
mod size;

pub use check::{
    block_satisfiable, check_assignment, check_plain, satisfiable_on_blocks_brute, satisfiable_on_components,
    satisfies_1cc, satisfies_2cc_on, satisfies_global, satisfies_local, CheckContext, Propagator,
};
pub use group::GroupTable;
pub use size::{
    norm, Constraint1cc, Constraint2cc, GlobalConstraint, LocalConstraint, LocalContext, Op, PairSet, Weights,
};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub type Value = usize;

/// A binary relation over the domain, kept as a sorted, deduplicated pair list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<(Value, Value)>", into = "Vec<(Value, Value)>")]
pub struct Relation {
    pairs: Vec<(Value, Value)>,
}

impl From<Vec<(Value, Value)>> for Relation {
    fn from(mut pairs: Vec<(Value, Value)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Relation { pairs }
    }
}

impl From<Relation> for Vec<(Value, Value)> {
    fn from(r: Relation) -> Self {
        r.pairs
    }
}

impl FromIterator<(Value, Value)> for Relation {
    fn from_iter<I: IntoIterator<Item = (Value, Value)>>(it: I) -> Self {
        Relation::from(it.into_iter().collect::<Vec<_>>())
    }
}

impl Relation {
    pub fn equality(domain: usize) -> Self {
        (0..domain).map(|a| (a, a)).collect()
    }

    pub fn pairs(&self) -> &[(Value, Value)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: Value, b: Value) -> bool {
        self.pairs.binary_search(&(a, b)).is_ok()
    }

    pub fn transpose(&self) -> Self {
        self.pairs.iter().map(|&(a, b)| (b, a)).collect()
    }

    pub fn intersect(&self, other: &Relation) -> Self {
        self.pairs.iter().copied().filter(|&(a, b)| other.contains(a, b)).collect()
    }

    /// Values `b` with `(a, b)` in the relation.
    pub fn forward(&self, a: Value) -> impl Iterator<Item = Value> + '_ {
        let start = self.pairs.partition_point(|&(x, _)| x < a);
        self.pairs[start..].iter().take_while(move |&&(x, _)| x == a).map(|&(_, b)| b)
    }

    /// A permutation relation pairs every value with at most one partner in
    /// each direction.
    pub fn is_permutation(&self) -> bool {
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        self.pairs.iter().all(|&(a, b)| left.insert(a) && right.insert(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnaryConstraint {
    pub var: usize,
    pub allowed: BTreeSet<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryConstraint {
    pub x: usize,
    pub y: usize,
    pub rel: Relation,
}

/// Γ = (X, D, C) with X = `0..num_vars` and D = `0..domain`. Optional value
/// labels name the tokens a reduction used for each domain index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspInstance {
    pub num_vars: usize,
    pub domain: usize,
    #[serde(default)]
    pub unary: Vec<UnaryConstraint>,
    #[serde(default)]
    pub binary: Vec<BinaryConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl CspInstance {
    pub fn new(num_vars: usize, domain: usize) -> Self {
        CspInstance { num_vars, domain, unary: Vec::new(), binary: Vec::new(), labels: None }
    }

    pub fn add_unary(&mut self, var: usize, allowed: impl IntoIterator<Item = Value>) {
        self.unary.push(UnaryConstraint { var, allowed: allowed.into_iter().collect() });
    }

    pub fn add_binary(&mut self, x: usize, y: usize, rel: Relation) {
        self.binary.push(BinaryConstraint { x, y, rel });
    }

    /// Range checks on variables and values; binary constraints need distinct variables.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInstance(m));
        for u in &self.unary {
            if u.var >= self.num_vars {
                return bad(format!("unary constraint on unknown variable {}", u.var));
            }
            if u.allowed.iter().any(|&a| a >= self.domain) {
                return bad(format!("unary constraint on {} uses a value outside the domain", u.var));
            }
        }
        for b in &self.binary {
            if b.x >= self.num_vars || b.y >= self.num_vars || b.x == b.y {
                return bad(format!("binary constraint on ({}, {})", b.x, b.y));
            }
            if b.rel.pairs().iter().any(|&(a, c)| a >= self.domain || c >= self.domain) {
                return bad(format!("relation on ({}, {}) leaves the domain", b.x, b.y));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != self.domain {
                return bad("label registry does not match the domain size".into());
            }
        }
        Ok(())
    }

    /// Intersects duplicate binary constraints (oriented as `x < y`) and
    /// duplicate unary constraints, so each pair and each variable carries at
    /// most one of each.
    pub fn normalized(&self) -> CspInstance {
        let mut un: BTreeMap<usize, BTreeSet<Value>> = BTreeMap::new();
        for u in &self.unary {
            un.entry(u.var)
                .and_modify(|s| *s = s.intersection(&u.allowed).copied().collect())
                .or_insert_with(|| u.allowed.clone());
        }
        let mut bin: BTreeMap<(usize, usize), Relation> = BTreeMap::new();
        for b in &self.binary {
            let (key, rel) = if b.x < b.y { ((b.x, b.y), b.rel.clone()) } else { ((b.y, b.x), b.rel.transpose()) };
            bin.entry(key).and_modify(|r| *r = r.intersect(&rel)).or_insert(rel);
        }
        CspInstance {
            num_vars: self.num_vars,
            domain: self.domain,
            unary: un.into_iter().map(|(var, allowed)| UnaryConstraint { var, allowed }).collect(),
            binary: bin.into_iter().map(|((x, y), rel)| BinaryConstraint { x, y, rel }).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Vertices X; an edge for every pair carrying a binary constraint.
    pub fn constraint_graph(&self) -> Graph {
        let mut g = Graph::new(self.num_vars);
        let pairs: BTreeSet<(usize, usize)> = self.binary.iter().map(|b| (b.x.min(b.y), b.x.max(b.y))).collect();
        for (x, y) in pairs {
            g.add_edge(x, y).expect("validated variables");
        }
        g
    }

    /// Γ[Y], renumbered densely in ascending order of Y. Returns the new→old map.
    pub fn induced_subinstance(&self, y: &[usize]) -> Result<(CspInstance, Vec<usize>)> {
        let mut new_of = vec![usize::MAX; self.num_vars];
        let mut old: Vec<usize> = y.to_vec();
        old.sort_unstable();
        old.dedup();
        for (i, &v) in old.iter().enumerate() {
            if v >= self.num_vars {
                return Err(Error::UnknownVertex(v));
            }
            new_of[v] = i;
        }
        let mut out = CspInstance::new(old.len(), self.domain);
        out.labels = self.labels.clone();
        for u in &self.unary {
            if new_of[u.var] != usize::MAX {
                out.unary.push(UnaryConstraint { var: new_of[u.var], allowed: u.allowed.clone() });
            }
        }
        for b in &self.binary {
            if new_of[b.x] != usize::MAX && new_of[b.y] != usize::MAX {
                out.binary.push(BinaryConstraint { x: new_of[b.x], y: new_of[b.y], rel: b.rel.clone() });
            }
        }
        Ok((out, old))
    }

    /// Γ − F: drops every binary constraint on the given constraint-graph edges.
    pub fn remove_edge_constraints(&self, f: &[(Vertex, Vertex)]) -> Result<CspInstance> {
        let g = self.constraint_graph();
        let mut drop = BTreeSet::new();
        for &(u, v) in f {
            if u >= self.num_vars || v >= self.num_vars || !g.has_edge(u, v) {
                return Err(Error::Precondition(format!("({u}, {v}) is not a constraint-graph edge")));
            }
            drop.insert((u.min(v), u.max(v)));
        }
        let mut out = self.clone();
        out.binary.retain(|b| !drop.contains(&(b.x.min(b.y), b.x.max(b.y))));
        Ok(out)
    }

    /// The arc-consistent core: repeatedly drops values without a partner in
    /// some neighboring variable's candidates. Every solution of `self` is a
    /// solution of the result and vice versa. Output is normalized, with one
    /// unary constraint per variable.
    pub fn arc_consistent(&self) -> CspInstance {
        let mut norm = self.normalized();
        let mut alive: Vec<Vec<bool>> = vec![vec![true; self.domain]; self.num_vars];
        for u in &norm.unary {
            for (a, ok) in alive[u.var].iter_mut().enumerate() {
                *ok = u.allowed.contains(&a);
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for b in &mut norm.binary {
                b.rel.pairs.retain(|&(a, c)| alive[b.x][a] && alive[b.y][c]);
                for (var, side) in [(b.x, 0), (b.y, 1)] {
                    let mut seen = vec![false; self.domain];
                    for p in &b.rel.pairs {
                        seen[if side == 0 { p.0 } else { p.1 }] = true;
                    }
                    for (ok, s) in alive[var].iter_mut().zip(seen) {
                        if *ok && !s {
                            *ok = false;
                            changed = true;
                        }
                    }
                }
            }
        }
        norm.unary = alive
            .into_iter()
            .enumerate()
            .map(|(var, row)| UnaryConstraint {
                var,
                allowed: row.into_iter().enumerate().filter(|&(_, ok)| ok).map(|(a, _)| a).collect(),
            })
            .collect();
        norm
    }

    pub fn is_permutation_instance(&self) -> bool {
        self.binary.iter().all(|b| b.rel.is_permutation())
    }

    /// Allowed values per variable after intersecting its unary constraints.
    pub fn candidates(&self) -> Vec<Vec<Value>> {
        let mut allowed = vec![vec![true; self.domain]; self.num_vars];
        for u in &self.unary {
            for a in 0..self.domain {
                if !u.allowed.contains(&a) {
                    allowed[u.var][a] = false;
                }
            }
        }
        allowed
            .into_iter()
            .map(|row| row.into_iter().enumerate().filter(|&(_, ok)| ok).map(|(a, _)| a).collect())
            .collect()
    }
}
