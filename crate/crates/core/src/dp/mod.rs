//! Dynamic programs over nice tree decompositions of the constraint graph.

mod min_cost;
pub mod partition;
mod size_constrained;

pub use min_cost::{check_symmetric, solve_min_cost, violation_cost, CostFn as CostFnRef, MinCostOutcome};
pub use size_constrained::{solve_size_constrained, DpOutcome};

use crate::csp::{CspInstance, Relation, Value};
use serde::Serialize;

/// Table-size statistics of one DP run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DpStats {
    pub width: usize,
    pub table_cells: usize,
    pub max_table: usize,
}

/// Limits for a DP run; `max_cells` bounds the total number of stored cells.
#[derive(Clone, Copy, Debug)]
pub struct DpConfig {
    pub max_cells: usize,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig { max_cells: 4_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Back {
    Leaf,
    One(usize),
    Two(usize, usize),
}

/// Per-variable lookups shared by both programs.
pub(crate) struct Prepared {
    /// Sorted allowed values after intersecting unary constraints.
    pub cand: Vec<Vec<Value>>,
    /// (neighbor, relation oriented self → neighbor) for each binary constraint.
    pub adj: Vec<Vec<(usize, Relation)>>,
}

impl Prepared {
    pub fn new(inst: &CspInstance) -> Self {
        let norm = inst.normalized();
        let cand = norm.candidates();
        let mut adj = vec![Vec::new(); inst.num_vars];
        for b in &norm.binary {
            adj[b.x].push((b.y, b.rel.clone()));
            adj[b.y].push((b.x, b.rel.transpose()));
        }
        Prepared { cand, adj }
    }

    pub fn allowed(&self, x: usize, a: Value) -> bool {
        self.cand[x].binary_search(&a).is_ok()
    }

    /// Relation oriented x → y, if any.
    pub fn relation(&self, x: usize, y: usize) -> Option<&Relation> {
        self.adj[x].iter().find(|(u, _)| *u == y).map(|(_, r)| r)
    }
}

#[cfg(test)]
mod oracle_tests {
    use super::*;
    use crate::csp::CheckContext;
    use crate::gen::random_size_constrained;
    use crate::oracle::{brute_csp, brute_min_cost, DEFAULT_CAP};
    use crate::treewidth::nice_decomposition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn size_constrained_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..120 {
            let n = rng.gen_range(1..=7);
            let d = rng.gen_range(1..=3);
            let case = random_size_constrained(&mut rng, n, d, 2, 2, 4);
            let ntd = nice_decomposition(&case.inst.constraint_graph());
            let out =
                solve_size_constrained(&case.inst, &case.ctx, &case.global, &case.local, &ntd, DpConfig::default())
                    .unwrap();
            let cx = CheckContext::GlobalLocal { global: &case.global, ctx: &case.ctx, local: &case.local };
            let brute = brute_csp(&case.inst, cx, DEFAULT_CAP).unwrap();
            assert_eq!(out.satisfiable, brute.is_some(), "{case:?}");
            if let Some(w) = out.witness {
                assert!(crate::csp::check_assignment(&case.inst, &w, cx).unwrap());
            }
        }
    }

    #[test]
    fn min_cost_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..120 {
            let n = rng.gen_range(1..=7);
            let d = rng.gen_range(1..=3);
            let case = random_size_constrained(&mut rng, n, d, 0, 0, 0);
            let table: Vec<u64> = (0..n * n * d * d).map(|_| rng.gen_range(0..4)).collect();
            let w = move |x: usize, y: usize, a: usize, b: usize| {
                let (x, y, a, b) = if (x, a) <= (y, b) { (x, y, a, b) } else { (y, x, b, a) };
                table[((x * n + y) * d + a) * d + b]
            };
            let ntd = nice_decomposition(&case.inst.constraint_graph());
            let (best, _) = brute_min_cost(&case.inst, &w, DEFAULT_CAP).unwrap().unwrap();
            for m in [best.saturating_sub(1), best, best + 1] {
                let out = solve_min_cost(&case.inst, &w, m, &ntd, DpConfig::default()).unwrap();
                assert_eq!(out.feasible, best <= m);
                if let Some(a) = &out.witness {
                    assert_eq!(violation_cost(&case.inst, &w, a), out.min_cost.unwrap());
                    assert!(out.min_cost.unwrap() <= m);
                }
            }
        }
    }
}
