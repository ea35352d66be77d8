//! Definitional checkers for assignments, plus value propagation for
//! permutation instances.

use super::size::{Constraint1cc, Constraint2cc, GlobalConstraint, LocalConstraint, LocalContext};
use super::{CspInstance, Relation, Value};
use crate::error::{Error, Result};
use crate::graph::{biconnected_decomposition, Graph};

/// Which constraint families an assignment is checked against, on top of Γ itself.
#[derive(Clone, Copy, Debug)]
pub enum CheckContext<'a> {
    Plain,
    With1cc(&'a [Constraint1cc]),
    /// 2cc constraints summed over the variable set `on`; Γ is checked on `on` only.
    TwoCc {
        set: &'a [Constraint2cc],
        on: &'a [usize],
    },
    GlobalLocal {
        global: &'a [GlobalConstraint],
        ctx: &'a LocalContext,
        local: &'a [LocalConstraint],
    },
}

/// Checks α against Γ and the chosen size constraints. α must be total.
pub fn check_assignment(inst: &CspInstance, alpha: &[Value], context: CheckContext) -> Result<bool> {
    if alpha.len() != inst.num_vars {
        return Err(Error::Precondition(format!(
            "assignment has {} entries for {} variables",
            alpha.len(),
            inst.num_vars
        )));
    }
    if alpha.iter().any(|&a| a >= inst.domain) {
        return Err(Error::Precondition("assignment uses a value outside the domain".into()));
    }
    Ok(match context {
        CheckContext::Plain => check_plain(inst, alpha),
        CheckContext::With1cc(set) => check_plain(inst, alpha) && set.iter().all(|c| satisfies_1cc(inst, alpha, c)),
        CheckContext::TwoCc { set, on } => {
            let (sub, map) = inst.induced_subinstance(on)?;
            let local: Vec<Value> = map.iter().map(|&v| alpha[v]).collect();
            check_plain(&sub, &local) && set.iter().all(|c| satisfies_2cc_on(alpha, c, on))
        }
        CheckContext::GlobalLocal { global, ctx, local } => {
            check_plain(inst, alpha)
                && global.iter().all(|c| satisfies_global(alpha, c))
                && local.iter().all(|c| satisfies_local(inst, alpha, ctx, c))
        }
    })
}

/// All unary and binary constraints hold.
pub fn check_plain(inst: &CspInstance, alpha: &[Value]) -> bool {
    inst.unary.iter().all(|u| u.allowed.contains(&alpha[u.var]))
        && inst.binary.iter().all(|b| b.rel.contains(alpha[b.x], alpha[b.y]))
}

/// Every connected component of the constraint graph meets the bound.
pub fn satisfies_1cc(inst: &CspInstance, alpha: &[Value], c: &Constraint1cc) -> bool {
    inst.constraint_graph().components().into_iter().all(|comp| c.op.holds(c.w.sum_over(comp, alpha), c.q))
}

pub fn satisfies_2cc_on(alpha: &[Value], c: &Constraint2cc, on: &[usize]) -> bool {
    c.w.sum_over(on.iter().copied(), alpha) <= c.q
}

pub fn satisfies_global(alpha: &[Value], c: &GlobalConstraint) -> bool {
    c.op.holds(c.w.sum_over(0..alpha.len(), alpha), c.q)
}

/// Builds H_α (constraint-graph edges whose value pair lies in F) and checks
/// every component: single 𝒟-class, and offset plus weight against q.
pub fn satisfies_local(inst: &CspInstance, alpha: &[Value], ctx: &LocalContext, c: &LocalConstraint) -> bool {
    let g = inst.constraint_graph();
    let mut h = Graph::new(g.n());
    for &(u, v) in g.edges() {
        if ctx.f.contains(alpha[u], alpha[v]) {
            h.add_edge(u, v).expect("subgraph of a simple graph");
        }
    }
    h.components().into_iter().all(|comp| {
        let class = ctx.class_of[alpha[comp[0]]];
        comp.iter().all(|&v| ctx.class_of[alpha[v]] == class)
            && c.op.holds(c.w_class[class].saturating_add(c.w.sum_over(comp.iter().copied(), alpha)), c.q)
    })
}

/// Value propagation over the binary constraints of a permutation instance:
/// fixing one variable determines its whole connected component.
pub struct Propagator<'a> {
    inst: &'a CspInstance,
    adj: Vec<Vec<(usize, usize, bool)>>,
    transposed: Vec<Relation>,
    allowed: Vec<Vec<bool>>,
}

impl<'a> Propagator<'a> {
    pub fn new(inst: &'a CspInstance) -> Self {
        let mut adj = vec![Vec::new(); inst.num_vars];
        for (i, b) in inst.binary.iter().enumerate() {
            adj[b.x].push((b.y, i, true));
            adj[b.y].push((b.x, i, false));
        }
        let transposed = inst.binary.iter().map(|b| b.rel.transpose()).collect();
        let mut allowed = vec![vec![true; inst.domain]; inst.num_vars];
        for u in &inst.unary {
            for a in 0..inst.domain {
                if !u.allowed.contains(&a) {
                    allowed[u.var][a] = false;
                }
            }
        }
        Propagator { inst, adj, transposed, allowed }
    }

    pub fn unary_ok(&self, x: usize, a: Value) -> bool {
        self.allowed[x][a]
    }

    /// Propagates `start := a` through constraints among variables with
    /// `member[x]`, reaching the component of `start`. Returns the forced
    /// values (indexed by variable, `None` outside the component) or `None`
    /// if some constraint or unary constraint fails. With `check_unary` off,
    /// unary constraints are ignored.
    pub fn propagate(&self, member: &[bool], start: usize, a: Value, check_unary: bool) -> Option<Vec<Option<Value>>> {
        let mut val: Vec<Option<Value>> = vec![None; self.inst.num_vars];
        if check_unary && !self.allowed[start][a] {
            return None;
        }
        val[start] = Some(a);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            let ax = val[x].expect("assigned");
            for &(y, ci, fwd) in &self.adj[x] {
                if !member[y] {
                    continue;
                }
                let rel = if fwd { &self.inst.binary[ci].rel } else { &self.transposed[ci] };
                match val[y] {
                    Some(ay) => {
                        if !rel.contains(ax, ay) {
                            return None;
                        }
                    }
                    None => {
                        let ay = rel.forward(ax).next()?;
                        if check_unary && !self.allowed[y][ay] {
                            return None;
                        }
                        val[y] = Some(ay);
                        stack.push(y);
                    }
                }
            }
        }
        Some(val)
    }
}

/// For the 2cc problem semantics: (Γ, S) is satisfiable on every block of the
/// constraint graph, each block checked on its own. Uses propagation, so Γ
/// must be a permutation instance.
pub fn satisfiable_on_blocks_brute(inst: &CspInstance, set: &[Constraint2cc]) -> bool {
    let g = inst.constraint_graph();
    let prop = Propagator::new(inst);
    biconnected_decomposition(&g).blocks.iter().all(|block| block_satisfiable(inst, &prop, set, block))
}

/// Vertex-deletion semantics with 1cc constraints: every connected component
/// of the constraint graph has an assignment meeting Γ and each 1cc bound.
/// Exact for permutation instances, where one value fixes a component.
pub fn satisfiable_on_components(inst: &CspInstance, set: &[Constraint1cc]) -> bool {
    let g = inst.constraint_graph();
    let prop = Propagator::new(inst);
    g.components().iter().all(|comp| {
        let mut member = vec![false; inst.num_vars];
        for &v in comp {
            member[v] = true;
        }
        (0..inst.domain).any(|a| {
            prop.propagate(&member, comp[0], a, true).is_some_and(|val| {
                set.iter().all(|c| {
                    let sum: u64 = comp.iter().map(|&v| c.w.get(v, val[v].expect("in component"))).sum();
                    c.op.holds(sum, c.q)
                })
            })
        })
    })
}

/// Whether some assignment of the (connected) `block` satisfies Γ[block] and
/// all 2cc constraints on it.
pub fn block_satisfiable(inst: &CspInstance, prop: &Propagator, set: &[Constraint2cc], block: &[usize]) -> bool {
    let mut member = vec![false; inst.num_vars];
    for &v in block {
        member[v] = true;
    }
    (0..inst.domain).any(|a| {
        prop.propagate(&member, block[0], a, true).is_some_and(|val| {
            let alpha: Vec<Value> = val.iter().map(|x| x.unwrap_or(0)).collect();
            set.iter().all(|c| satisfies_2cc_on(&alpha, c, block))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Op, PairSet, Weights};
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn neq() -> Relation {
        vec![(0, 1), (1, 0)].into()
    }

    #[test]
    fn oct_triangle_never_satisfied() {
        let mut c = CspInstance::new(3, 2);
        for (x, y) in [(0, 1), (1, 2), (2, 0)] {
            c.add_binary(x, y, neq());
        }
        for alpha in (0..3).map(|_| 0..2).multi_cartesian_product() {
            assert!(!check_assignment(&c, &alpha, CheckContext::Plain).unwrap());
        }
        assert!(check_assignment(&c, &[0, 1], CheckContext::Plain).is_err());
    }

    #[test]
    fn unit_1cc_with_q_n() {
        let mut c = CspInstance::new(4, 2);
        c.add_binary(0, 1, Relation::equality(2));
        let s = [Constraint1cc { w: Weights::constant(4, 2, 1), q: 4, op: Op::Le }];
        assert!(check_assignment(&c, &[1, 1, 0, 0], CheckContext::With1cc(&s)).unwrap());
        let s = [Constraint1cc { w: Weights::constant(4, 2, 1), q: 2, op: Op::Ge }];
        assert!(!check_assignment(&c, &[1, 1, 0, 0], CheckContext::With1cc(&s)).unwrap());
    }

    #[test]
    fn local_class_membership() {
        // Path 0-1-2, F = all pairs, classes {0} and {1}: mixed values on one
        // H-component violate the single-class rule.
        let mut c = CspInstance::new(3, 2);
        c.add_binary(0, 1, vec![(0, 0), (0, 1), (1, 0), (1, 1)].into());
        c.add_binary(1, 2, vec![(0, 0), (0, 1), (1, 0), (1, 1)].into());
        let ctx = LocalContext { f: PairSet::All, class_of: vec![0, 1], num_classes: 2 };
        let l = [LocalConstraint { w: Weights::zero(3, 2), w_class: vec![0, 0], q: 0, op: Op::Le }];
        let cx = CheckContext::GlobalLocal { global: &[], ctx: &ctx, local: &l };
        assert!(check_assignment(&c, &[0, 0, 0], cx).unwrap());
        assert!(!check_assignment(&c, &[0, 1, 0], cx).unwrap());
        // With F = same-value pairs, components split and each is single-class.
        let ctx2 = LocalContext { f: PairSet::explicit([(0, 0), (1, 1)]), ..ctx.clone() };
        let cx2 = CheckContext::GlobalLocal { global: &[], ctx: &ctx2, local: &l };
        assert!(check_assignment(&c, &[0, 1, 0], cx2).unwrap());
    }

    fn naive_local(inst: &CspInstance, alpha: &[Value], ctx: &LocalContext, c: &LocalConstraint) -> bool {
        // Union-find over F-edges, independent of Graph.
        let n = inst.num_vars;
        let mut comp: Vec<usize> = (0..n).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for b in &inst.binary {
                if ctx.f.contains(alpha[b.x], alpha[b.y]) {
                    let m = comp[b.x].min(comp[b.y]);
                    if comp[b.x] != m || comp[b.y] != m {
                        comp[b.x] = m;
                        comp[b.y] = m;
                        changed = true;
                    }
                }
            }
        }
        (0..n).filter(|&r| comp[r] == r).all(|r| {
            let members: Vec<usize> = (0..n).filter(|&v| comp[v] == r).collect();
            let cls = ctx.class_of[alpha[r]];
            let sum: u64 = members.iter().map(|&v| c.w.get(v, alpha[v])).sum();
            members.iter().all(|&v| ctx.class_of[alpha[v]] == cls) && c.op.holds(sum + c.w_class[cls], c.q)
        })
    }

    proptest! {
        #[test]
        fn local_check_matches_naive(
            n in 1usize..7, d in 1usize..4,
            edges in proptest::collection::vec((0usize..7, 0usize..7, proptest::collection::vec((0usize..3, 0usize..3), 0..6)), 0..8),
            alpha_raw in proptest::collection::vec(0usize..3, 7),
            wraw in proptest::collection::vec(0u64..3, 21),
            fpairs in proptest::collection::vec((0usize..3, 0usize..3), 0..5),
            classes in proptest::collection::vec(0usize..2, 3),
            q in 0u64..6, ge in any::<bool>(),
        ) {
            let mut inst = CspInstance::new(n, d);
            for (x, y, rel) in edges {
                let (x, y) = (x % n, y % n);
                if x != y {
                    inst.add_binary(x, y, rel.into_iter().map(|(a, b)| (a % d, b % d)).collect());
                }
            }
            let alpha: Vec<usize> = alpha_raw[..n].iter().map(|a| a % d).collect();
            let ctx = LocalContext {
                f: PairSet::explicit(fpairs.into_iter().map(|(a, b)| (a % d, b % d))),
                class_of: classes[..d].to_vec(),
                num_classes: 2,
            };
            let c = LocalConstraint {
                w: Weights::from_fn(n, d, |x, a| wraw[x * 3 + a]),
                w_class: vec![1, 0],
                q,
                op: if ge { Op::Ge } else { Op::Le },
            };
            prop_assert_eq!(satisfies_local(&inst, &alpha, &ctx, &c), naive_local(&inst, &alpha, &ctx, &c));
        }

        #[test]
        fn propagation_decides_connected_permutation_instances(
            n in 1usize..8, d in 1usize..5, seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng, seq::SliceRandom};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut inst = CspInstance::new(n, d);
            for v in 1..n {
                let u = rng.gen_range(0..v);
                let mut perm: Vec<usize> = (0..d).collect();
                perm.shuffle(&mut rng);
                let keep = rng.gen_range(1..=d);
                inst.add_binary(u, v, (0..keep).map(|a| (a, perm[a])).collect());
            }
            for _ in 0..rng.gen_range(0..3) {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if u != v && !inst.constraint_graph().has_edge(u, v) {
                    let mut perm: Vec<usize> = (0..d).collect();
                    perm.shuffle(&mut rng);
                    inst.add_binary(u, v, (0..d).map(|a| (a, perm[a])).collect());
                }
            }
            if rng.gen_bool(0.5) {
                inst.add_unary(rng.gen_range(0..n), (0..d).filter(|_| rng.gen_bool(0.6)));
            }
            let brute = (0..n).map(|_| 0..d).multi_cartesian_product().any(|a| check_plain(&inst, &a));
            let prop = Propagator::new(&inst);
            let all = vec![true; n];
            let fast = (0..d).any(|a| prop.propagate(&all, 0, a, true).is_some());
            prop_assert_eq!(brute, fast);
        }
    }
}
