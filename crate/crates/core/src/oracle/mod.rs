//! Brute-force ground truth. Every search is exhaustive and refuses to run
//! past its cap instead of truncating.

use crate::csp::{check_assignment, CheckContext, CspInstance, Value};
use crate::dp::violation_cost;
use crate::error::{Error, Result};

mod problems;

pub use problems::{
    brute_csp_deletion, brute_csp_edge_deletion, brute_deletion, check_problem_solution, cycle_label,
    has_bad_cycle_by_enumeration, simple_cycles, Residual,
};

/// Default cap on enumerated assignments or candidate sets.
pub const DEFAULT_CAP: u128 = 50_000_000;

/// Enumerates D^X in lexicographic order and returns the first assignment
/// accepted by `check_assignment` under `context`.
pub fn brute_csp(inst: &CspInstance, context: CheckContext, cap: u128) -> Result<Option<Vec<Value>>> {
    let total = (inst.domain as u128).checked_pow(inst.num_vars as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::CapExceeded(format!("{total} assignments (cap {cap})")));
    }
    let mut found = None;
    for_each_assignment(inst.num_vars, inst.domain, |alpha| {
        if check_assignment(inst, alpha, context).unwrap_or(false) {
            found = Some(alpha.to_vec());
            return false;
        }
        true
    });
    Ok(found)
}

/// Minimum violation cost over all assignments, with a least witness.
pub fn brute_min_cost(inst: &CspInstance, w: &crate::dp::CostFnRef, cap: u128) -> Result<Option<(u64, Vec<Value>)>> {
    let total = (inst.domain as u128).checked_pow(inst.num_vars as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::CapExceeded(format!("{total} assignments (cap {cap})")));
    }
    let mut best: Option<(u64, Vec<Value>)> = None;
    for_each_assignment(inst.num_vars, inst.domain, |alpha| {
        let c = violation_cost(inst, w, alpha);
        if best.as_ref().map_or(true, |(b, _)| c < *b) {
            best = Some((c, alpha.to_vec()));
        }
        true
    });
    Ok(best)
}

/// Calls `visit` on every vector in `0..d` of length `n`, lexicographically,
/// until it returns false.
pub fn for_each_assignment(n: usize, d: usize, mut visit: impl FnMut(&[Value]) -> bool) {
    if n > 0 && d == 0 {
        return;
    }
    let mut alpha = vec![0; n];
    loop {
        if !visit(&alpha) {
            return;
        }
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            alpha[i] += 1;
            if alpha[i] < d {
                break;
            }
            alpha[i] = 0;
        }
    }
}

/// Calls `visit` on every subset of `universe` with at most `k` elements, by
/// increasing size and lexicographically within a size, until it returns false.
pub fn for_each_subset_upto(universe: &[usize], k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    let n = universe.len();
    for size in 0..=k.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let set: Vec<usize> = idx.iter().map(|&i| universe[i]).collect();
            if !visit(&set) {
                return;
            }
            let Some(i) = (0..size).rev().find(|&i| idx[i] < n - size + i) else { break };
            idx[i] += 1;
            for j in i + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

/// Σ_{j ≤ k} C(n, j), saturating.
pub fn count_subsets_upto(n: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for j in 0..=k.min(n) {
        total = total.saturating_add(c);
        c = c.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_subset_upto(&[3, 5, 7], 2, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen, vec![vec![], vec![3], vec![5], vec![7], vec![3, 5], vec![3, 7], vec![5, 7]]);
        assert_eq!(count_subsets_upto(3, 2), 7);
        assert_eq!(count_subsets_upto(10, 3), 1 + 10 + 45 + 120);
    }

    #[test]
    fn assignments_enumerated() {
        let mut count = 0;
        for_each_assignment(3, 2, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 8);
        let mut zero = 0;
        for_each_assignment(0, 3, |a| {
            assert!(a.is_empty());
            zero += 1;
            true
        });
        assert_eq!(zero, 1);
    }

    #[test]
    fn trivial_csps() {
        assert!(brute_csp(&CspInstance::new(0, 2), CheckContext::Plain, DEFAULT_CAP).unwrap().is_some());
        let mut c = CspInstance::new(1, 2);
        c.add_unary(0, []);
        assert!(brute_csp(&c, CheckContext::Plain, DEFAULT_CAP).unwrap().is_none());
        assert!(brute_csp(&CspInstance::new(40, 2), CheckContext::Plain, DEFAULT_CAP).is_err());
    }
}
