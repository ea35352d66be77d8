//! Edge deletion in planar permutation CSPs.
//!
//! Guess a class E_i of an edge contraction decomposition and the solution's
//! part W ⊆ E_i. The remaining class edges must survive, so each component
//! of (X, E_i ∖ W) is fixed by the value of its smallest variable. On the
//! quotient every violated original constraint costs one (undeletable ones
//! cost more than the remaining budget), and a min-cost DP decides.

use super::{guesses, run_guesses, GuessResult, SolveReport, SolverConfig};
use crate::csp::{CspInstance, Relation, Value};
use crate::decomp::edge_partition_planar;
use crate::dp::solve_min_cost;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, RotationSystem, UnionFind, Vertex};
use crate::reductions::CspEdgeDeletion;
use crate::treewidth::nice_decomposition;
use std::collections::{BTreeSet, HashMap};

/// Returns a set of constraint-graph edges (as endpoint pairs, smaller
/// endpoint first) whose removal leaves Γ satisfiable.
pub fn solve_perm_csp_edge_deletion(
    inst: &CspInstance,
    undeletable: &[(Vertex, Vertex)],
    k: usize,
    rot: &RotationSystem,
    cfg: &SolverConfig,
) -> Result<SolveReport<Vec<(Vertex, Vertex)>>> {
    cfg.validate()?;
    inst.validate()?;
    if !inst.is_permutation_instance() {
        return Err(Error::Precondition("edge deletion requires a permutation instance".into()));
    }
    let norm = inst.normalized();
    let g = norm.constraint_graph();
    let part = edge_partition_planar(&g, rot, cfg.class_count(k))?;
    let mut hard = vec![false; g.m()];
    for &(u, v) in undeletable {
        hard[g.edge_between(u, v).ok_or(Error::MissingEdge(u, v))?] = true;
    }
    let per_class = k / part.classes.len();
    let all = guesses(&part.classes, &part.class_of, &hard, per_class, &cfg.mode)?;
    let problem = EdgeProblem::new(&norm, g, hard);
    let check = CspEdgeDeletion { csp: inst.clone(), undeletable: undeletable.to_vec(), k };
    run_guesses(&all, cfg, |guess| {
        let removed: BTreeSet<EdgeId> = guess.removed.iter().copied().collect();
        let kept: Vec<EdgeId> = part.classes[guess.class].iter().copied().filter(|e| !removed.contains(e)).collect();
        problem.solve(&removed, &kept, k - removed.len(), cfg, &check)
    })
}

struct EdgeProblem<'a> {
    inst: &'a CspInstance,
    g: Graph,
    hard: Vec<bool>,
    /// Relation oriented from the edge's first endpoint to its second.
    rel: Vec<&'a Relation>,
    cand: Vec<Vec<Value>>,
}

/// Assignments of one group, one per value of its smallest variable.
struct GroupTable {
    /// `assign[a][i]` is the value of the i-th member, `None` if a is invalid.
    assign: Vec<Option<Vec<Value>>>,
    /// Violated deletable edges inside the group, per value.
    internal: Vec<u64>,
}

impl<'a> EdgeProblem<'a> {
    fn new(norm: &'a CspInstance, g: Graph, hard: Vec<bool>) -> Self {
        let by_pair: HashMap<(Vertex, Vertex), &Relation> =
            norm.binary.iter().map(|b| ((b.x.min(b.y), b.x.max(b.y)), &b.rel)).collect();
        let mut rel = Vec::with_capacity(g.m());
        for &(u, v) in g.edges() {
            rel.push(by_pair[&(u, v)]);
        }
        // normalized() keys pairs with x < y, matching the graph's edge orientation.
        debug_assert!(norm.binary.iter().all(|b| b.x < b.y));
        EdgeProblem { inst: norm, g, hard, rel, cand: norm.candidates() }
    }

    fn satisfied(&self, e: EdgeId, u: Vertex, a: Value, b: Value) -> bool {
        if self.g.edge(e).0 == u {
            self.rel[e].contains(a, b)
        } else {
            self.rel[e].contains(b, a)
        }
    }

    fn group_table(
        &self,
        members: Vec<Vertex>,
        group_of: &[usize],
        pos: &[usize],
        tree_edge: &[bool],
        removed: &BTreeSet<EdgeId>,
    ) -> GroupTable {
        let me = group_of[members[0]];
        let d = self.inst.domain;
        let mut assign = Vec::with_capacity(d);
        let mut internal = Vec::with_capacity(d);
        for a in 0..d {
            let mut val: Vec<Option<Value>> = vec![None; members.len()];
            val[0] = Some(a);
            let mut stack = vec![members[0]];
            let mut ok = true;
            while let Some(x) = stack.pop() {
                let vx = val[pos[x]].expect("assigned");
                for &(y, e) in self.g.incident(x) {
                    if !tree_edge[e] || val[pos[y]].is_some() {
                        continue;
                    }
                    let next = if self.g.edge(e).0 == x {
                        self.rel[e].forward(vx).next()
                    } else {
                        self.rel[e].transpose().forward(vx).next()
                    };
                    match next {
                        Some(b) => {
                            val[pos[y]] = Some(b);
                            stack.push(y);
                        }
                        None => ok = false,
                    }
                }
            }
            let val: Vec<Value> = val.into_iter().map(|v| v.unwrap_or(usize::MAX)).collect();
            ok &= members.iter().zip(&val).all(|(&x, &b)| self.cand[x].binary_search(&b).is_ok());
            let mut soft = 0;
            if ok {
                for (i, &x) in members.iter().enumerate() {
                    for &(y, e) in self.g.incident(x) {
                        if x > y || removed.contains(&e) || group_of[y] != me {
                            continue;
                        }
                        if !self.satisfied(e, x, val[i], val[pos[y]]) {
                            if self.hard[e] || tree_edge[e] {
                                ok = false;
                            } else {
                                soft += 1;
                            }
                        }
                    }
                }
            }
            assign.push(ok.then_some(val));
            internal.push(soft);
        }
        GroupTable { assign, internal }
    }

    fn solve(
        &self,
        removed: &BTreeSet<EdgeId>,
        kept_class: &[EdgeId],
        budget: usize,
        cfg: &SolverConfig,
        check: &CspEdgeDeletion,
    ) -> Result<GuessResult<Vec<(Vertex, Vertex)>>> {
        let (n, d) = (self.g.n(), self.inst.domain);
        let hard_cost = budget as u64 + 1;
        let mut tree_edge = vec![false; self.g.m()];
        let mut uf = UnionFind::new(n);
        for &e in kept_class {
            let (u, v) = self.g.edge(e);
            uf.union(u, v);
            tree_edge[e] = true;
        }
        let mut group_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<Vertex>> = Vec::new();
        let mut root_group: HashMap<usize, usize> = HashMap::new();
        for v in 0..n {
            let r = uf.find(v);
            let gi = *root_group.entry(r).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            group_of[v] = gi;
            members[gi].push(v);
        }
        // Within a group, positions index into the member list.
        let mut pos = vec![usize::MAX; n];
        for m in &members {
            for (i, &v) in m.iter().enumerate() {
                pos[v] = i;
            }
        }
        // Kept class edges never leave a group, so propagating along them stays inside it.
        let tables: Vec<GroupTable> =
            members.into_iter().map(|m| self.group_table(m, &group_of, &pos, &tree_edge, removed)).collect();
        let ng = tables.len();

        // Crossing edges per ordered group pair (smaller group first).
        let mut crossing: HashMap<(usize, usize), Vec<(EdgeId, Vertex, Vertex)>> = HashMap::new();
        for (e, &(u, v)) in self.g.edges().iter().enumerate() {
            if removed.contains(&e) || group_of[u] == group_of[v] {
                continue;
            }
            let (x, y) = if group_of[u] < group_of[v] { (u, v) } else { (v, u) };
            crossing.entry((group_of[x], group_of[y])).or_default().push((e, x, y));
        }
        let value_of =
            |x: Vertex, a: Value| -> Option<Value> { tables[group_of[x]].assign[a].as_ref().map(|val| val[pos[x]]) };
        let mut gamma = CspInstance::new(ng, d);
        let mut pair_cost: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
        let mut keys: Vec<(usize, usize)> = crossing.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let edges = &crossing[&key];
            let mut costs = vec![hard_cost; d * d];
            let mut rel = Vec::new();
            for a in 0..d {
                for b in 0..d {
                    let mut c = 0u64;
                    for &(e, x, y) in edges {
                        let (Some(va), Some(vb)) = (value_of(x, a), value_of(y, b)) else {
                            c = hard_cost;
                            break;
                        };
                        if !self.satisfied(e, x, va, vb) {
                            c = if self.hard[e] { hard_cost } else { (c + 1).min(hard_cost) };
                        }
                    }
                    costs[a * d + b] = c;
                    if c == 0 {
                        rel.push((a, b));
                    }
                }
            }
            gamma.add_binary(key.0, key.1, rel.into());
            pair_cost.insert(key, costs);
        }
        for (gi, t) in tables.iter().enumerate() {
            gamma.add_unary(gi, (0..d).filter(|&a| t.assign[a].is_some() && t.internal[a] == 0));
        }
        let cost = |x: usize, y: usize, a: Value, b: Value| -> u64 {
            if x == y {
                return if tables[x].assign[a].is_some() { tables[x].internal[a].min(hard_cost) } else { hard_cost };
            }
            if x < y {
                pair_cost[&(x, y)][a * d + b]
            } else {
                pair_cost[&(y, x)][b * d + a]
            }
        };
        let ntd = nice_decomposition(&gamma.constraint_graph());
        let out = solve_min_cost(&gamma, &cost, budget as u64, &ntd, cfg.dp)?;
        let Some(star) = out.witness.filter(|_| out.feasible) else {
            return Ok(GuessResult::Empty(out.stats));
        };
        let alpha: Vec<Value> =
            (0..n).map(|x| value_of(x, star[group_of[x]]).expect("feasible values are valid")).collect();
        let mut z: Vec<(Vertex, Vertex)> = removed.iter().map(|&e| self.g.edge(e)).collect();
        for (e, &(u, v)) in self.g.edges().iter().enumerate() {
            if !removed.contains(&e) && !self.rel[e].contains(alpha[u], alpha[v]) {
                z.push((u, v));
            }
        }
        z.sort_unstable();
        if check.accepts(&z)? {
            Ok(GuessResult::Found(z, out.stats))
        } else {
            Ok(GuessResult::Rejected(out.stats))
        }
    }
}
