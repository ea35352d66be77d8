//! Vertex deletion in planar permutation CSPs with 1cc size constraints.
//!
//! Guess a layer class V_i and Z_i = Z ∩ V_i. Every component I of
//! G[V_i ∖ Z_i] survives and is fixed by the value of its smallest variable.
//! The quotient gets the domain D ⊎ {sol}: a global constraint caps the
//! number of sol values at k, and each 1cc constraint becomes a local
//! constraint over components of the non-sol part.

use super::{guesses, run_guesses, GuessResult, SolveReport, SolverConfig};
use crate::csp::{
    Constraint1cc, CspInstance, GlobalConstraint, LocalConstraint, LocalContext, Op, PairSet, Relation, Value, Weights,
};
use crate::decomp::vertex_partition_planar;
use crate::dp::solve_size_constrained;
use crate::error::{Error, Result};
use crate::graph::{Graph, RotationSystem, Vertex};
use crate::reductions::{CspDeletion, Target};
use crate::segments::build_segments;
use crate::treewidth::nice_decomposition;
use std::collections::{BTreeMap, HashMap};

pub fn solve_perm_csp_vertex_deletion(
    inst: &CspInstance,
    set: &[Constraint1cc],
    undeletable: &[usize],
    k: usize,
    rot: &RotationSystem,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    inst.validate()?;
    if !inst.is_permutation_instance() {
        return Err(Error::Precondition("vertex deletion requires a permutation instance".into()));
    }
    if let Some(&u) = undeletable.iter().find(|&&u| u >= inst.num_vars) {
        return Err(Error::UnknownVertex(u));
    }
    let norm = inst.normalized();
    let g = norm.constraint_graph();
    let part = vertex_partition_planar(&g, rot, 0, cfg.class_count(k))?;
    let mut hard = vec![false; g.n()];
    for &u in undeletable {
        hard[u] = true;
    }
    let per_class = k / part.classes.len();
    let all = guesses(&part.classes, &part.class_of, &hard, per_class, &cfg.mode)?;
    let problem = VertexProblem::new(&norm, &g, set, &hard, k);
    let check = CspDeletion {
        csp: inst.clone(),
        target: Target::Components(set.to_vec()),
        undeletable: undeletable.to_vec(),
        k,
    };
    run_guesses(&all, cfg, |guess| problem.solve(&part.classes[guess.class], &guess.removed, cfg, &check))
}

struct VertexProblem<'a> {
    norm: &'a CspInstance,
    g: &'a Graph,
    set: &'a [Constraint1cc],
    hard: &'a [bool],
    k: usize,
    /// Relation oriented x → y for every constrained ordered pair.
    rel: HashMap<(Vertex, Vertex), Relation>,
    cand: Vec<Vec<Value>>,
}

impl<'a> VertexProblem<'a> {
    fn new(norm: &'a CspInstance, g: &'a Graph, set: &'a [Constraint1cc], hard: &'a [bool], k: usize) -> Self {
        let mut rel = HashMap::new();
        for b in &norm.binary {
            rel.insert((b.y, b.x), b.rel.transpose());
            rel.insert((b.x, b.y), b.rel.clone());
        }
        VertexProblem { norm, g, set, hard, k, rel, cand: norm.candidates() }
    }

    /// α_{I,a}: the assignment of the connected set `seg` with its smallest
    /// variable set to `a`, if one satisfies Γ[seg].
    fn extend(&self, seg: &[Vertex], a: Value) -> Option<BTreeMap<Vertex, Value>> {
        let mut val = BTreeMap::from([(seg[0], a)]);
        let mut stack = vec![seg[0]];
        while let Some(x) = stack.pop() {
            for y in self.g.neighbors(x) {
                if val.contains_key(&y) || seg.binary_search(&y).is_err() {
                    continue;
                }
                let b = self.rel[&(x, y)].forward(val[&x]).next()?;
                val.insert(y, b);
                stack.push(y);
            }
        }
        let ok = val.iter().all(|(&x, &b)| self.cand[x].binary_search(&b).is_ok())
            && seg.iter().all(|&x| {
                self.g
                    .neighbors(x)
                    .all(|y| seg.binary_search(&y).is_err() || self.rel[&(x, y)].contains(val[&x], val[&y]))
            });
        ok.then_some(val)
    }

    fn solve(
        &self,
        class: &[Vertex],
        z_i: &[Vertex],
        cfg: &SolverConfig,
        check: &CspDeletion,
    ) -> Result<GuessResult<Vec<usize>>> {
        let d = self.norm.domain;
        let sol = d;
        let seg = build_segments(self.g, class, z_i);
        let q = &seg.contracted;
        let nq = q.n();
        let mut forced = vec![false; nq];
        for &z in z_i {
            forced[seg.shr_vertex(z)] = true;
        }
        // Per quotient vertex and value in D: the assignment of its variables.
        let table: Vec<Vec<Option<BTreeMap<Vertex, Value>>>> = (0..nq)
            .map(|w| {
                let ext = seg.ext_vertex(w);
                (0..d).map(|a| self.extend(ext, a)).collect()
            })
            .collect();

        let mut gamma = CspInstance::new(nq, d + 1);
        for w in 0..nq {
            let deletable = seg.segment_at(w).is_none() && !self.hard[seg.ext_vertex(w)[0]];
            if forced[w] {
                gamma.add_unary(w, [sol]);
            } else {
                let values = (0..d).filter(|&a| table[w][a].is_some());
                gamma.add_unary(w, values.chain(deletable.then_some(sol)));
            }
        }
        for &(x, y) in q.edges() {
            let mut pairs = Vec::new();
            for a in 0..=d {
                for b in 0..=d {
                    let ok = if a == sol || b == sol {
                        true
                    } else {
                        match (&table[x][a], &table[y][b]) {
                            (Some(va), Some(vb)) => va.iter().all(|(&u, &au)| {
                                self.g
                                    .neighbors(u)
                                    .all(|v| vb.get(&v).is_none_or(|&bv| self.rel[&(u, v)].contains(au, bv)))
                            }),
                            _ => false,
                        }
                    };
                    if ok {
                        pairs.push((a, b));
                    }
                }
            }
            gamma.add_binary(x, y, Relation::from(pairs));
        }

        let global = vec![GlobalConstraint {
            w: Weights::from_fn(nq, d + 1, |_, a| u64::from(a == sol)),
            q: self.k as u64,
            op: Op::Le,
        }];
        let ctx = LocalContext {
            f: PairSet::KeyEq((0..=d).map(|a| (a != sol).then_some(0)).collect()),
            class_of: vec![0; d + 1],
            num_classes: 1,
        };
        let local: Vec<LocalConstraint> = self
            .set
            .iter()
            .map(|c| LocalConstraint {
                w: Weights::from_fn(nq, d + 1, |w, a| {
                    if a == sol {
                        if c.op == Op::Ge {
                            c.q
                        } else {
                            0
                        }
                    } else {
                        table[w][a].as_ref().map_or(0, |val| val.iter().map(|(&u, &au)| c.w.get(u, au)).sum())
                    }
                }),
                w_class: vec![0],
                q: c.q,
                op: c.op,
            })
            .collect();
        let ntd = nice_decomposition(q);
        let out = solve_size_constrained(&gamma, &ctx, &global, &local, &ntd, cfg.dp)?;
        let Some(alpha) = out.witness else {
            return Ok(GuessResult::Empty(out.stats));
        };
        let mut z: Vec<usize> = (0..nq).filter(|&w| alpha[w] == sol).flat_map(|w| seg.ext_vertex(w).to_vec()).collect();
        z.sort_unstable();
        if check.accepts(&z)? {
            Ok(GuessResult::Found(z, out.stats))
        } else {
            Ok(GuessResult::Rejected(out.stats))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Weights;
    use crate::gen::random_permutation_csp;
    use crate::oracle::{brute_csp_deletion, DEFAULT_CAP};
    use crate::solvers::Verdict;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn odd_cycle_vertex() {
        let mut c = CspInstance::new(3, 2);
        for (x, y) in [(0, 1), (1, 2), (0, 2)] {
            c.add_binary(x, y, vec![(0, 1), (1, 0)].into());
        }
        let rot = RotationSystem::from_adjacency_order(&c.constraint_graph());
        let cfg = SolverConfig::default();
        assert_eq!(solve_perm_csp_vertex_deletion(&c, &[], &[], 0, &rot, &cfg).unwrap().verdict, Verdict::Infeasible);
        let r = solve_perm_csp_vertex_deletion(&c, &[], &[], 1, &rot, &cfg).unwrap();
        assert_eq!(r.solution().map(Vec::len), Some(1));
        let r = solve_perm_csp_vertex_deletion(&c, &[], &[0, 1, 2], 1, &rot, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible);
    }

    #[test]
    fn component_size_bound() {
        // A path on 5 vertices, components of at most 2 vertices: delete 1 and 3... or 2.
        let mut c = CspInstance::new(5, 1);
        for i in 0..4 {
            c.add_binary(i, i + 1, Relation::equality(1));
        }
        let rot = RotationSystem::from_adjacency_order(&c.constraint_graph());
        let set = [Constraint1cc { w: Weights::constant(5, 1, 1), q: 2, op: Op::Le }];
        let cfg = SolverConfig::default();
        let r = solve_perm_csp_vertex_deletion(&c, &set, &[], 1, &rot, &cfg).unwrap();
        assert_eq!(r.solution(), Some(&vec![2]));
        let set = [Constraint1cc { w: Weights::constant(5, 1, 1), q: 1, op: Op::Le }];
        assert_eq!(solve_perm_csp_vertex_deletion(&c, &set, &[], 1, &rot, &cfg).unwrap().verdict, Verdict::Infeasible);
        assert!(solve_perm_csp_vertex_deletion(&c, &set, &[], 2, &rot, &cfg).unwrap().solution().is_some());
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for round in 0..80 {
            let n = rng.gen_range(2..9);
            let d = rng.gen_range(1..4);
            let (c, rot) = random_permutation_csp(&mut rng, n, d);
            let k = rng.gen_range(0..3);
            let set: Vec<Constraint1cc> = if rng.gen_bool(0.6) {
                let op = if rng.gen_bool(0.7) { Op::Le } else { Op::Ge };
                let w = Weights::from_fn(n, d, |_, _| rng.gen_range(0..3));
                vec![Constraint1cc { w, q: rng.gen_range(0..5), op }]
            } else {
                Vec::new()
            };
            let und: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.2)).collect();
            let del =
                CspDeletion { csp: c.clone(), target: Target::Components(set.clone()), undeletable: und.clone(), k };
            let brute = brute_csp_deletion(&del, DEFAULT_CAP).unwrap();
            let r = solve_perm_csp_vertex_deletion(&c, &set, &und, k, &rot, &SolverConfig::default()).unwrap();
            assert_eq!(r.stats.rejected, 0, "round {round}");
            assert_eq!(r.solution().is_some(), brute.is_some(), "round {round}");
        }
    }
}
