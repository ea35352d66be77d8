//! Satisfiability with global and (F, 𝒟)-local size constraints.
//!
//! A cell records the bag assignment, the partition of the bag into traces of
//! H_α-components, and saturated counters. Counters only hold weights of
//! vertices already forgotten: global counters sum over all of them, local
//! counters over the forgotten part of each bag block's component. A component
//! is checked against its local constraints when its last bag vertex is
//! forgotten.

use super::partition::{self, Labels};
use super::{Back, DpConfig, DpStats, Prepared};
use crate::csp::{CspInstance, GlobalConstraint, LocalConstraint, LocalContext, Value};
use crate::error::{Error, Result};
use crate::treewidth::{NiceKind, NiceTreeDecomposition};
use indexmap::IndexMap;
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Cell {
    f: Box<[Value]>,
    part: Box<[u8]>,
    g: Box<[u64]>,
    /// `l[c * bag_len + block]`, unused slots zero.
    l: Box<[u64]>,
}

#[derive(Clone, Debug)]
pub struct DpOutcome {
    pub satisfiable: bool,
    pub witness: Option<Vec<Value>>,
    pub stats: DpStats,
}

struct Ctx<'a> {
    prep: Prepared,
    global: &'a [GlobalConstraint],
    local: &'a [LocalConstraint],
    track: bool,
}

impl Ctx<'_> {
    fn sat_g(&self, c: usize, x: u64) -> u64 {
        x.min(self.global[c].q.saturating_add(1))
    }

    fn sat_l(&self, c: usize, x: u64) -> u64 {
        x.min(self.local[c].q.saturating_add(1))
    }
}

/// Decides (Γ, S_global, S_local) and returns a witness assignment when
/// satisfiable. `ntd` must be a nice decomposition of Γ's constraint graph.
pub fn solve_size_constrained(
    inst: &CspInstance,
    ctx: &LocalContext,
    global: &[GlobalConstraint],
    local: &[LocalConstraint],
    ntd: &NiceTreeDecomposition,
    cfg: DpConfig,
) -> Result<DpOutcome> {
    inst.validate()?;
    ctx.validate(inst.domain, local)?;
    for w in global.iter().map(|c| &c.w).chain(local.iter().map(|c| &c.w)) {
        if w.num_vars() != inst.num_vars || w.domain() != inst.domain {
            return Err(Error::InvalidInstance("weight table shape does not match Γ".into()));
        }
    }
    ntd.validate_nice(&inst.constraint_graph())?;
    let cx = Ctx { prep: Prepared::new(inst), global, local, track: !local.is_empty() };
    let nl = local.len();
    let mut tables: Vec<IndexMap<Cell, Back>> = Vec::with_capacity(ntd.nodes.len());
    let mut stats = DpStats { width: ntd.width(), ..DpStats::default() };

    for node in &ntd.nodes {
        let b = node.bag.len();
        let mut table: IndexMap<Cell, Back> = IndexMap::new();
        match node.kind {
            NiceKind::Leaf => {
                table.insert(
                    Cell { f: Box::new([]), part: Box::new([]), g: vec![0; global.len()].into(), l: Box::new([]) },
                    Back::Leaf,
                );
            }
            NiceKind::Introduce(v) => {
                let child = &tables[node.children[0]];
                let cbag = &ntd.nodes[node.children[0]].bag;
                let p = node.bag.iter().position(|&x| x == v).expect("introduced vertex in bag");
                // Bag neighbours of v with a constraint, as child positions.
                let nbrs: Vec<(usize, &crate::csp::Relation)> = cx.prep.adj[v]
                    .iter()
                    .filter_map(|(u, r)| cbag.iter().position(|x| x == u).map(|i| (i, r)))
                    .collect();
                let first_back =
                    nbrs.first().map(|&(i, _)| cx.prep.relation(cbag[i], v).expect("constraints are stored both ways"));
                for (ci, (cell, _)) in child.iter().enumerate() {
                    let options: Vec<Value> = match (nbrs.first(), first_back) {
                        // Values of v paired with the first constrained neighbour's value.
                        (Some(&(i, _)), Some(back)) => {
                            back.forward(cell.f[i]).filter(|&a| cx.prep.allowed(v, a)).collect()
                        }
                        _ => cx.prep.cand[v].clone(),
                    };
                    'value: for a in options {
                        let mut f_adj: Vec<usize> = Vec::new();
                        for &(i, r) in &nbrs {
                            let fu = cell.f[i];
                            if !r.contains(a, fu) {
                                continue 'value;
                            }
                            if cx.track && ctx.f.contains(a, fu) {
                                if ctx.class_of[a] != ctx.class_of[fu] {
                                    continue 'value;
                                }
                                f_adj.push(i);
                            }
                        }
                        let mut f: Vec<Value> = cell.f.to_vec();
                        f.insert(p, a);
                        let (part, l) = if cx.track {
                            introduce_partition(&cx, cell, b, p, &f_adj, nl)
                        } else {
                            (Vec::new(), Vec::new())
                        };
                        let new = Cell { f: f.into(), part: part.into(), g: cell.g.clone(), l: l.into() };
                        table.entry(new).or_insert(Back::One(ci));
                        if stats.table_cells + table.len() > cfg.max_cells {
                            return Err(cap_exceeded(cfg));
                        }
                    }
                }
            }
            NiceKind::Forget(v) => {
                let child = &tables[node.children[0]];
                let cbag = &ntd.nodes[node.children[0]].bag;
                let p = cbag.iter().position(|&x| x == v).expect("forgotten vertex in child bag");
                'cell: for (ci, (cell, _)) in child.iter().enumerate() {
                    let a = cell.f[p];
                    let g: Vec<u64> = (0..global.len())
                        .map(|c| cx.sat_g(c, cell.g[c].saturating_add(global[c].w.get(v, a))))
                        .collect();
                    let (part, l) = if cx.track {
                        let cb = b + 1;
                        let lv = cell.part[p];
                        let singleton = cell.part.iter().filter(|&&x| x == lv).count() == 1;
                        let mut lraw: Vec<u64> = cell.l.to_vec();
                        for c in 0..nl {
                            let slot = c * cb + lv as usize;
                            let tot = cx.sat_l(c, lraw[slot].saturating_add(local[c].w.get(v, a)));
                            if singleton {
                                let lc = &local[c];
                                let off = lc.w_class[ctx.class_of[a]];
                                if !lc.op.holds(off.saturating_add(tot), lc.q) {
                                    continue 'cell;
                                }
                            }
                            lraw[slot] = tot;
                        }
                        let mut raw: Vec<u8> = cell.part.to_vec();
                        raw.remove(p);
                        let canon = partition::canonical(&raw);
                        let mut l = vec![0u64; nl * b];
                        for (i, &old) in raw.iter().enumerate() {
                            for c in 0..nl {
                                l[c * b + canon[i] as usize] = lraw[c * cb + old as usize];
                            }
                        }
                        (canon, l)
                    } else {
                        (Vec::new(), Vec::new())
                    };
                    let mut f = cell.f.to_vec();
                    f.remove(p);
                    let new = Cell { f: f.into(), part: part.into(), g: g.into(), l: l.into() };
                    table.entry(new).or_insert(Back::One(ci));
                    if stats.table_cells + table.len() > cfg.max_cells {
                        return Err(cap_exceeded(cfg));
                    }
                }
            }
            NiceKind::Join => {
                let (t1, t2) = (&tables[node.children[0]], &tables[node.children[1]]);
                let mut by_f: HashMap<&[Value], Vec<usize>> = HashMap::new();
                for (i, (cell, _)) in t2.iter().enumerate() {
                    by_f.entry(&cell.f).or_default().push(i);
                }
                for (i1, (c1, _)) in t1.iter().enumerate() {
                    let Some(list) = by_f.get(&*c1.f) else { continue };
                    for &i2 in list {
                        let (c2, _) = t2.get_index(i2).expect("index in range");
                        let g: Vec<u64> =
                            (0..global.len()).map(|c| cx.sat_g(c, c1.g[c].saturating_add(c2.g[c]))).collect();
                        let (part, l) = if cx.track {
                            let (joined, m1, m2) = partition::join(&c1.part, &c2.part);
                            let mut l = vec![0u64; nl * b];
                            for c in 0..nl {
                                for (old, &new) in m1.iter().enumerate() {
                                    let s = &mut l[c * b + new as usize];
                                    *s = s.saturating_add(c1.l[c * b + old]);
                                }
                                for (old, &new) in m2.iter().enumerate() {
                                    let s = &mut l[c * b + new as usize];
                                    *s = s.saturating_add(c2.l[c * b + old]);
                                }
                                for blk in 0..b {
                                    l[c * b + blk] = cx.sat_l(c, l[c * b + blk]);
                                }
                            }
                            (joined, l)
                        } else {
                            (Vec::new(), Vec::new())
                        };
                        let new = Cell { f: c1.f.clone(), part: part.into(), g: g.into(), l: l.into() };
                        table.entry(new).or_insert(Back::Two(i1, i2));
                        if stats.table_cells + table.len() > cfg.max_cells {
                            return Err(cap_exceeded(cfg));
                        }
                    }
                }
            }
        }
        stats.table_cells += table.len();
        stats.max_table = stats.max_table.max(table.len());
        if stats.table_cells > cfg.max_cells {
            return Err(cap_exceeded(cfg));
        }
        tables.push(table);
    }

    let root = ntd.root();
    let accepted =
        tables[root].iter().position(|(cell, _)| global.iter().enumerate().all(|(c, gc)| gc.op.holds(cell.g[c], gc.q)));
    let witness = accepted.map(|idx| reconstruct(ntd, &tables, root, idx, inst.num_vars));
    Ok(DpOutcome { satisfiable: witness.is_some(), witness, stats })
}

fn cap_exceeded(cfg: DpConfig) -> Error {
    Error::CapExceeded(format!("DP stored more than {} cells", cfg.max_cells))
}

/// Merges v's new block with the blocks of its F-neighbours and sums their counters.
fn introduce_partition(cx: &Ctx, cell: &Cell, b: usize, p: usize, f_adj: &[usize], nl: usize) -> (Labels, Vec<u64>) {
    let cb = b - 1;
    let fresh = partition::block_count(&cell.part) as u8;
    let merged: Vec<u8> = f_adj.iter().map(|&i| cell.part[i]).collect();
    let mut raw: Vec<u8> = cell.part.iter().map(|&x| if merged.contains(&x) { fresh } else { x }).collect();
    raw.insert(p, fresh);
    let canon = partition::canonical(&raw);
    let mut l = vec![0u64; nl * b];
    let mut done = vec![false; fresh as usize];
    for ci in 0..cb {
        let old = cell.part[ci] as usize;
        if std::mem::replace(&mut done[old], true) {
            continue;
        }
        let new = canon[if ci < p { ci } else { ci + 1 }] as usize;
        for c in 0..nl {
            let slot = &mut l[c * b + new];
            *slot = cx.sat_l(c, slot.saturating_add(cell.l[c * cb + old]));
        }
    }
    (canon, l)
}

fn reconstruct(
    ntd: &NiceTreeDecomposition,
    tables: &[IndexMap<Cell, Back>],
    root: usize,
    idx: usize,
    n: usize,
) -> Vec<Value> {
    let mut alpha = vec![0; n];
    let mut stack = vec![(root, idx)];
    while let Some((node, i)) = stack.pop() {
        let (cell, back) = tables[node].get_index(i).expect("back-pointer in range");
        let nd = &ntd.nodes[node];
        if let NiceKind::Introduce(v) = nd.kind {
            let p = nd.bag.iter().position(|&x| x == v).expect("in bag");
            alpha[v] = cell.f[p];
        }
        match *back {
            Back::Leaf => {}
            Back::One(c) => stack.push((nd.children[0], c)),
            Back::Two(c1, c2) => {
                stack.push((nd.children[0], c1));
                stack.push((nd.children[1], c2));
            }
        }
    }
    alpha
}
