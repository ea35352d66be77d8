//! Finite groups given by multiplication tables.

use crate::error::{Error, Result};
use itertools::Itertools;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr", into = "GroupRepr")]
pub struct GroupTable {
    mul: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GroupRepr {
    Cyclic { cyclic: usize },
    Table { table: Vec<Vec<usize>> },
}

impl TryFrom<GroupRepr> for GroupTable {
    type Error = Error;
    fn try_from(r: GroupRepr) -> Result<Self> {
        match r {
            GroupRepr::Cyclic { cyclic } => {
                if cyclic == 0 {
                    Err(Error::InvalidInstance("cyclic group of order 0".into()))
                } else {
                    Ok(GroupTable::cyclic(cyclic))
                }
            }
            GroupRepr::Table { table } => GroupTable::from_table(table),
        }
    }
}

impl From<GroupTable> for GroupRepr {
    fn from(g: GroupTable) -> Self {
        GroupRepr::Table { table: g.mul }
    }
}

impl GroupTable {
    /// ℤ_m with addition mod m.
    pub fn cyclic(m: usize) -> Self {
        let mul = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
        GroupTable { mul, identity: 0, inverse: (0..m).map(|a| (m - a) % m).collect() }
    }

    /// The symmetric group on three letters (smallest non-abelian group).
    pub fn symmetric3() -> Self {
        let perms: Vec<Vec<usize>> = (0..3).permutations(3).collect();
        let idx = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let mul = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx(&(0..3).map(|i| b[a[i]]).collect::<Vec<_>>())).collect())
            .collect();
        GroupTable::from_table(mul).expect("S3 is a group")
    }

    /// Validates closure, identity, inverses and (for order ≤ 12, exhaustively) associativity.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Self> {
        let m = mul.len();
        let bad = |s: &str| Err(Error::InvalidInstance(format!("group table: {s}")));
        if m == 0 || mul.iter().any(|row| row.len() != m || row.iter().any(|&x| x >= m)) {
            return bad("table must be a square over 0..m");
        }
        let Some(identity) = (0..m).find(|&e| (0..m).all(|a| mul[e][a] == a && mul[a][e] == a)) else {
            return bad("no identity");
        };
        let mut inverse = vec![0; m];
        for a in 0..m {
            match (0..m).find(|&b| mul[a][b] == identity && mul[b][a] == identity) {
                Some(b) => inverse[a] = b,
                None => return bad("missing inverse"),
            }
        }
        if m <= 12 {
            for (a, b, c) in itertools::iproduct!(0..m, 0..m, 0..m) {
                if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                    return bad("not associative");
                }
            }
        }
        Ok(GroupTable { mul, identity, inverse })
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// Product of a sequence, left to right.
    pub fn product(&self, seq: impl IntoIterator<Item = usize>) -> usize {
        seq.into_iter().fold(self.identity, |acc, x| self.mul(acc, x))
    }
}
