//! Size-constraint families: per-component (1cc), per-block (2cc), global and
//! (F, 𝒟)-local.

use super::Value;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Comparison against the threshold: `Le` accepts `p ≤ q`, `Ge` accepts `p ≥ q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Op {
    pub fn holds(self, p: u64, q: u64) -> bool {
        match self {
            Op::Le => p <= q,
            Op::Ge => p >= q,
        }
    }
}

/// Dense weight table w: X × D → ℕ. Serialized sparsely as `[var, val, weight]` triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    num_vars: usize,
    domain: usize,
    data: Vec<u64>,
}

impl Weights {
    pub fn zero(num_vars: usize, domain: usize) -> Self {
        Weights { num_vars, domain, data: vec![0; num_vars * domain] }
    }

    pub fn constant(num_vars: usize, domain: usize, c: u64) -> Self {
        Weights { num_vars, domain, data: vec![c; num_vars * domain] }
    }

    pub fn from_fn(num_vars: usize, domain: usize, mut f: impl FnMut(usize, Value) -> u64) -> Self {
        let mut w = Weights::zero(num_vars, domain);
        for x in 0..num_vars {
            for a in 0..domain {
                w.data[x * domain + a] = f(x, a);
            }
        }
        w
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn get(&self, x: usize, a: Value) -> u64 {
        self.data[x * self.domain + a]
    }

    pub fn set(&mut self, x: usize, a: Value, w: u64) {
        self.data[x * self.domain + a] = w;
    }

    pub fn max(&self) -> u64 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Σ_x w(x, α(x)) over the given variables, saturating.
    pub fn sum_over(&self, vars: impl IntoIterator<Item = usize>, alpha: &[Value]) -> u64 {
        vars.into_iter().fold(0u64, |s, x| s.saturating_add(self.get(x, alpha[x])))
    }

    pub fn to_triples(&self) -> Vec<(usize, Value, u64)> {
        let mut out = Vec::new();
        for x in 0..self.num_vars {
            for a in 0..self.domain {
                let w = self.get(x, a);
                if w != 0 {
                    out.push((x, a, w));
                }
            }
        }
        out
    }

    pub fn from_triples(num_vars: usize, domain: usize, t: &[(usize, Value, u64)]) -> Result<Self> {
        let mut w = Weights::zero(num_vars, domain);
        for &(x, a, v) in t {
            if x >= num_vars || a >= domain {
                return Err(Error::InvalidInstance(format!("weight entry ({x}, {a}) out of range")));
            }
            w.set(x, a, v);
        }
        Ok(w)
    }
}

#[derive(Serialize, Deserialize)]
struct WeightsRepr {
    num_vars: usize,
    domain: usize,
    w: Vec<(usize, Value, u64)>,
}

impl Serialize for Weights {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WeightsRepr { num_vars: self.num_vars, domain: self.domain, w: self.to_triples() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = WeightsRepr::deserialize(d)?;
        Weights::from_triples(r.num_vars, r.domain, &r.w).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint1cc {
    pub w: Weights,
    pub q: u64,
    pub op: Op,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint2cc {
    pub w: Weights,
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalConstraint {
    pub w: Weights,
    pub q: u64,
    pub op: Op,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalConstraint {
    pub w: Weights,
    /// Offset per class of 𝒟.
    pub w_class: Vec<u64>,
    pub q: u64,
    pub op: Op,
}

/// A symmetric set of value pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSet {
    All,
    /// Stored with both orientations.
    Explicit(HashSet<(Value, Value)>),
    /// `(a, b)` is in the set iff both keys are present and equal.
    KeyEq(Vec<Option<u32>>),
}

impl PairSet {
    pub fn explicit(pairs: impl IntoIterator<Item = (Value, Value)>) -> Self {
        let mut s = HashSet::new();
        for (a, b) in pairs {
            s.insert((a, b));
            s.insert((b, a));
        }
        PairSet::Explicit(s)
    }

    pub fn contains(&self, a: Value, b: Value) -> bool {
        match self {
            PairSet::All => true,
            PairSet::Explicit(s) => s.contains(&(a, b)),
            PairSet::KeyEq(k) => matches!((k[a], k[b]), (Some(x), Some(y)) if x == y),
        }
    }
}

/// Shared context of all local constraints: F and the partition 𝒟 (class id per value).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalContext {
    pub f: PairSet,
    pub class_of: Vec<usize>,
    pub num_classes: usize,
}

impl LocalContext {
    /// F = D × D with a single class.
    pub fn trivial(domain: usize) -> Self {
        LocalContext { f: PairSet::All, class_of: vec![0; domain], num_classes: 1 }
    }

    pub fn validate(&self, domain: usize, locals: &[LocalConstraint]) -> Result<()> {
        if self.class_of.len() != domain || self.class_of.iter().any(|&c| c >= self.num_classes) {
            return Err(Error::InvalidInstance("𝒟 does not partition the domain".into()));
        }
        if let PairSet::KeyEq(k) = &self.f {
            if k.len() != domain {
                return Err(Error::InvalidInstance("F key table does not match the domain".into()));
            }
        }
        if let PairSet::Explicit(s) = &self.f {
            if s.iter().any(|&(a, b)| a >= domain || b >= domain || !s.contains(&(b, a))) {
                return Err(Error::InvalidInstance("F must be symmetric and inside D × D".into()));
            }
        }
        if locals.iter().any(|c| c.w_class.len() != self.num_classes) {
            return Err(Error::InvalidInstance("w_D must be total on 𝒟".into()));
        }
        Ok(())
    }
}

/// ‖S‖ = Π (2 + q), computed exactly; errors instead of wrapping.
pub fn norm(qs: impl IntoIterator<Item = u64>) -> Result<u128> {
    qs.into_iter().try_fold(1u128, |acc, q| {
        (q as u128).checked_add(2).and_then(|f| acc.checked_mul(f)).ok_or(Error::Overflow("norm"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        assert_eq!(norm([3]).unwrap(), 5);
        assert_eq!(norm([]).unwrap(), 1);
        assert_eq!(norm([3, 0]).unwrap(), 10);
        assert!(norm([u64::MAX, u64::MAX, u64::MAX]).is_err());
    }

    #[test]
    fn op_direction() {
        assert!(Op::Le.holds(2, 3) && !Op::Le.holds(4, 3));
        assert!(Op::Ge.holds(4, 3) && !Op::Ge.holds(2, 3));
    }

    #[test]
    fn weights_roundtrip() {
        let w = Weights::from_fn(3, 2, |x, a| (x + a) as u64);
        let s = serde_json::to_string(&w).unwrap();
        let back: Weights = serde_json::from_str(&s).unwrap();
        assert_eq!(w, back);
        assert_eq!(w.sum_over([0, 2], &[1, 0, 1]), 1 + 3);
    }

    #[test]
    fn pair_sets() {
        let f = PairSet::explicit([(0, 1)]);
        assert!(f.contains(1, 0) && !f.contains(0, 0));
        let k = PairSet::KeyEq(vec![Some(1), None, Some(1)]);
        assert!(k.contains(0, 2) && !k.contains(0, 1) && !k.contains(1, 1));
    }
}
