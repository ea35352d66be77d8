//! Minimum-cost assignments: every violated constraint pair (or violated
//! unary constraint) pays a weight; decide whether cost ≤ m.
//!
//! Costs are charged when a vertex is forgotten, against itself and every
//! constrained neighbour still in the bag, so each pair is paid exactly once.

use super::{Back, DpConfig, DpStats, Prepared};
use crate::csp::{CspInstance, Value};
use crate::error::{Error, Result};
use crate::treewidth::{NiceKind, NiceTreeDecomposition};
use indexmap::IndexMap;
use std::collections::HashMap;

pub type CostFn<'a> = dyn Fn(usize, usize, Value, Value) -> u64 + 'a;

#[derive(Clone, Debug)]
pub struct MinCostOutcome {
    /// Whether some assignment costs at most m.
    pub feasible: bool,
    /// The minimum cost, when it is at most m.
    pub min_cost: Option<u64>,
    pub witness: Option<Vec<Value>>,
    pub stats: DpStats,
}

/// Requires w(x, y, a, b) = w(y, x, b, a) on every constrained pair.
pub fn check_symmetric(inst: &CspInstance, w: &CostFn) -> Result<()> {
    for b in &inst.binary {
        for x in 0..inst.domain {
            for y in 0..inst.domain {
                if w(b.x, b.y, x, y) != w(b.y, b.x, y, x) {
                    return Err(Error::AsymmetricWeights((b.x, b.y, x, y)));
                }
            }
        }
    }
    Ok(())
}

/// Reference cost of α, straight from the definition.
pub fn violation_cost(inst: &CspInstance, w: &CostFn, alpha: &[Value]) -> u64 {
    let norm = inst.normalized();
    let mut cost = 0u64;
    for u in &norm.unary {
        if !u.allowed.contains(&alpha[u.var]) {
            cost = cost.saturating_add(w(u.var, u.var, alpha[u.var], alpha[u.var]));
        }
    }
    for b in &norm.binary {
        if !b.rel.contains(alpha[b.x], alpha[b.y]) {
            cost = cost.saturating_add(w(b.x, b.y, alpha[b.x], alpha[b.y]));
        }
    }
    cost
}

pub fn solve_min_cost(
    inst: &CspInstance,
    w: &CostFn,
    m: u64,
    ntd: &NiceTreeDecomposition,
    cfg: DpConfig,
) -> Result<MinCostOutcome> {
    inst.validate()?;
    check_symmetric(inst, w)?;
    ntd.validate_nice(&inst.constraint_graph())?;
    let prep = Prepared::new(inst);
    let mut tables: Vec<IndexMap<Box<[Value]>, (u64, Back)>> = Vec::with_capacity(ntd.nodes.len());
    let mut stats = DpStats { width: ntd.width(), ..DpStats::default() };

    for node in &ntd.nodes {
        let mut table: IndexMap<Box<[Value]>, (u64, Back)> = IndexMap::new();
        let offer = |table: &mut IndexMap<Box<[Value]>, (u64, Back)>, f: Box<[Value]>, cost: u64, back: Back| {
            if cost > m {
                return;
            }
            match table.get_mut(&f) {
                Some(e) if e.0 <= cost => {}
                Some(e) => *e = (cost, back),
                None => {
                    table.insert(f, (cost, back));
                }
            }
        };
        match node.kind {
            NiceKind::Leaf => offer(&mut table, Box::new([]), 0, Back::Leaf),
            NiceKind::Introduce(v) => {
                let p = node.bag.iter().position(|&x| x == v).expect("in bag");
                for (ci, (f, &(cost, _))) in tables[node.children[0]].iter().enumerate() {
                    for a in 0..inst.domain {
                        let mut nf = f.to_vec();
                        nf.insert(p, a);
                        offer(&mut table, nf.into(), cost, Back::One(ci));
                    }
                }
            }
            NiceKind::Forget(v) => {
                let cbag = &ntd.nodes[node.children[0]].bag;
                let p = cbag.iter().position(|&x| x == v).expect("in child bag");
                let nbrs: Vec<(usize, usize, &crate::csp::Relation)> = prep.adj[v]
                    .iter()
                    .filter_map(|(u, r)| cbag.iter().position(|x| x == u).map(|i| (i, *u, r)))
                    .collect();
                for (ci, (f, &(cost, _))) in tables[node.children[0]].iter().enumerate() {
                    let a = f[p];
                    let mut c = cost;
                    if !prep.allowed(v, a) {
                        c = c.saturating_add(w(v, v, a, a));
                    }
                    for &(i, u, r) in &nbrs {
                        if !r.contains(a, f[i]) {
                            c = c.saturating_add(w(v, u, a, f[i]));
                        }
                    }
                    let mut nf = f.to_vec();
                    nf.remove(p);
                    offer(&mut table, nf.into(), c, Back::One(ci));
                }
            }
            NiceKind::Join => {
                let (t1, t2) = (&tables[node.children[0]], &tables[node.children[1]]);
                let idx2: HashMap<&[Value], usize> = t2.iter().enumerate().map(|(i, (f, _))| (&**f, i)).collect();
                for (i1, (f, &(c1, _))) in t1.iter().enumerate() {
                    if let Some(&i2) = idx2.get(&**f) {
                        let c2 = t2[i2].0;
                        offer(&mut table, f.clone(), c1.saturating_add(c2), Back::Two(i1, i2));
                    }
                }
            }
        }
        stats.table_cells += table.len();
        stats.max_table = stats.max_table.max(table.len());
        if stats.table_cells > cfg.max_cells {
            return Err(Error::CapExceeded(format!("DP stored more than {} cells", cfg.max_cells)));
        }
        tables.push(table);
    }

    let root = ntd.root();
    let Some((_, &(cost, _))) = tables[root].get_index(0) else {
        return Ok(MinCostOutcome { feasible: false, min_cost: None, witness: None, stats });
    };
    let mut alpha = vec![0; inst.num_vars];
    let mut stack = vec![(root, 0usize)];
    while let Some((node, i)) = stack.pop() {
        let (f, &(_, back)) = tables[node].get_index(i).expect("back-pointer in range");
        let nd = &ntd.nodes[node];
        if let NiceKind::Introduce(v) = nd.kind {
            alpha[v] = f[nd.bag.iter().position(|&x| x == v).expect("in bag")];
        }
        match back {
            Back::Leaf => {}
            Back::One(c) => stack.push((nd.children[0], c)),
            Back::Two(a, b) => {
                stack.push((nd.children[0], a));
                stack.push((nd.children[1], b));
            }
        }
    }
    Ok(MinCostOutcome { feasible: true, min_cost: Some(cost), witness: Some(alpha), stats })
}
