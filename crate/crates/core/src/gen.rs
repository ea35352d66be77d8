//! Random generators for embedded planar graphs and small test fixtures.

use crate::graph::{faces, EdgeEnd, EdgeId, Graph, RotationSystem, Vertex};
use rand::seq::SliceRandom;
use rand::Rng;

/// Grows an embedded planar graph: a random plane tree on `n` vertices, then
/// about `density · 2n` attempts to add a chord inside a random face. The
/// result is connected, simple and comes with a valid rotation system.
pub fn random_planar<R: Rng>(rng: &mut R, n: usize, density: f64) -> (Graph, RotationSystem) {
    let mut g = Graph::new(0);
    let mut rot = RotationSystem { order: Vec::new() };
    if n == 0 {
        return (g, rot);
    }
    g.add_vertex();
    rot.order.push(Vec::new());
    for _ in 1..n {
        let fs = faces(&g, &rot).expect("valid rotation");
        let f = fs.choose(rng).expect("at least one face");
        let w = g.add_vertex();
        rot.order.push(Vec::new());
        if f.darts.is_empty() {
            let e = g.add_edge(f.vertices[0], w).unwrap();
            rot.order[f.vertices[0]].push(EdgeEnd { edge: e, end: 0 });
            rot.order[w].push(EdgeEnd { edge: e, end: 1 });
        } else {
            let i = rng.gen_range(0..f.darts.len());
            let a = f.darts[i].1;
            let e = g.add_edge(a, w).unwrap();
            insert_at_corner(&g, &mut rot, &f.darts, i, EdgeEnd { edge: e, end: 0 });
            rot.order[w].push(EdgeEnd { edge: e, end: 1 });
        }
    }
    let attempts = (density * 2.0 * n as f64).round() as usize;
    for _ in 0..attempts {
        let fs = faces(&g, &rot).expect("valid rotation");
        let f = fs.choose(rng).expect("face");
        let len = f.darts.len();
        if len < 4 {
            continue;
        }
        let i = rng.gen_range(0..len);
        let a = f.darts[i].1;
        let options: Vec<usize> = (0..len).filter(|&j| f.darts[j].1 != a && !g.has_edge(a, f.darts[j].1)).collect();
        let Some(&j) = options.choose(rng) else { continue };
        let b = f.darts[j].1;
        let e = g.add_edge(a, b).unwrap();
        let darts = f.darts.clone();
        insert_at_corner(&g, &mut rot, &darts, i, EdgeEnd { edge: e, end: 0 });
        insert_at_corner(&g, &mut rot, &darts, j, EdgeEnd { edge: e, end: 1 });
    }
    (g, rot)
}

/// Inserts `new_end` at the corner of the face walk where dart `i` leaves its
/// tail, i.e. right after the edge the walk arrived on.
fn insert_at_corner(g: &Graph, rot: &mut RotationSystem, darts: &[(EdgeId, Vertex)], i: usize, new_end: EdgeEnd) {
    let v = darts[i].1;
    let prev = darts[(i + darts.len() - 1) % darts.len()].0;
    let (a, b) = g.edge(prev);
    // `prev` arrives at v; its end at v is the one not equal to its tail.
    let prev_tail = darts[(i + darts.len() - 1) % darts.len()].1;
    let end = if a == prev_tail && b == v { 1 } else { 0 };
    let row = &mut rot.order[v];
    let pos = row.iter().position(|x| x.edge == prev && x.end == end).expect("arrival edge-end present");
    row.insert(pos + 1, new_end);
}

/// K4 drawn as a triangle 0,1,2 with vertex 3 in the middle.
pub fn k4_embedded() -> (Graph, RotationSystem) {
    let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)]).unwrap();
    let rot =
        RotationSystem::from_edge_lists(&g, vec![vec![2, 3, 0], vec![0, 4, 1], vec![1, 5, 2], vec![3, 5, 4]]).unwrap();
    (g, rot)
}

/// `r × c` grid with its natural embedding.
pub fn grid_embedded(r: usize, c: usize) -> (Graph, RotationSystem) {
    let id = |i: usize, j: usize| i * c + j;
    let mut g = Graph::new(r * c);
    let mut lists: Vec<Vec<(f64, EdgeId)>> = vec![Vec::new(); r * c];
    let mut link = |g: &mut Graph, a: Vertex, b: Vertex, ang_a: f64, ang_b: f64| {
        let e = g.add_edge(a, b).unwrap();
        lists[a].push((ang_a, e));
        lists[b].push((ang_b, e));
    };
    for i in 0..r {
        for j in 0..c {
            if j + 1 < c {
                link(&mut g, id(i, j), id(i, j + 1), 0.0, 180.0);
            }
            if i + 1 < r {
                link(&mut g, id(i, j), id(i + 1, j), 270.0, 90.0);
            }
        }
    }
    let order = lists
        .into_iter()
        .map(|mut row| {
            // clockwise = decreasing angle
            row.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            row.into_iter().map(|(_, e)| e).collect()
        })
        .collect();
    let rot = RotationSystem::from_edge_lists(&g, order).unwrap();
    (g, rot)
}


/// A random CSP with global and local size constraints, for oracle comparisons.
#[derive(Clone, Debug)]
pub struct SizeConstrainedCase {
    pub inst: crate::csp::CspInstance,
    pub ctx: crate::csp::LocalContext,
    pub global: Vec<crate::csp::GlobalConstraint>,
    pub local: Vec<crate::csp::LocalConstraint>,
}

/// Arbitrary (not necessarily permutation) relations on a random graph with
/// `n` variables and domain `d`; up to `max_g` global and `max_l` local
/// constraints with thresholds at most `max_q`.
pub fn random_size_constrained<R: Rng>(
    rng: &mut R,
    n: usize,
    d: usize,
    max_g: usize,
    max_l: usize,
    max_q: u64,
) -> SizeConstrainedCase {
    use crate::csp::{CspInstance, GlobalConstraint, LocalConstraint, LocalContext, Op, PairSet, Weights};
    let mut inst = CspInstance::new(n, d);
    let p_edge = rng.gen_range(0.15..0.6);
    for x in 0..n {
        for y in x + 1..n {
            if rng.gen_bool(p_edge) {
                let density = rng.gen_range(0.3..1.0);
                let rel = (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).filter(|_| rng.gen_bool(density)).collect();
                inst.add_binary(x, y, rel);
            }
        }
    }
    for x in 0..n {
        if rng.gen_bool(0.2) {
            let allowed: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.7)).collect();
            inst.add_unary(x, allowed);
        }
    }
    let num_classes = rng.gen_range(1..=d.max(1));
    let class_of: Vec<usize> =
        (0..d).map(|a| if a < num_classes { a } else { rng.gen_range(0..num_classes) }).collect();
    let f = if rng.gen_bool(0.3) {
        PairSet::All
    } else {
        let pairs: Vec<(usize, usize)> =
            (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.5)).collect();
        PairSet::explicit(pairs)
    };
    let ctx = LocalContext { f, class_of, num_classes };
    let op = |rng: &mut R| if rng.gen_bool(0.5) { Op::Le } else { Op::Ge };
    let global = (0..rng.gen_range(0..=max_g))
        .map(|_| GlobalConstraint {
            w: Weights::from_fn(n, d, |_, _| rng.gen_range(0..=2)),
            q: rng.gen_range(0..=max_q),
            op: op(rng),
        })
        .collect();
    let local = (0..rng.gen_range(0..=max_l))
        .map(|_| LocalConstraint {
            w: Weights::from_fn(n, d, |_, _| rng.gen_range(0..=2)),
            w_class: (0..num_classes).map(|_| rng.gen_range(0..=1)).collect(),
            q: rng.gen_range(0..=max_q),
            op: op(rng),
        })
        .collect();
    SizeConstrainedCase { inst, ctx, global, local }
}

/// A random instance of `kind` on a random connected planar graph with `n`
/// vertices, budget `k`. Groups are cyclic of order at most `max_group`.
pub fn random_problem<R: Rng>(
    rng: &mut R,
    kind: crate::reductions::ProblemKind,
    n: usize,
    k: usize,
    max_group: usize,
) -> (crate::reductions::ProblemInstance, RotationSystem) {
    use crate::csp::GroupTable;
    use crate::reductions::{ProblemInstance, ProblemKind};
    let density = rng.gen_range(0.1..0.9);
    let (g, rot) = random_planar(rng, n, density);
    let mut p = ProblemInstance::new(kind, g, k);
    let p_term = rng.gen_range(0.1..0.6);
    p.terminals = (0..n).filter(|_| rng.gen_bool(p_term)).collect();
    p.t = rng.gen_range(1..=n.max(1));
    if kind.needs_group() {
        let order = rng.gen_range(1..=max_group.max(1));
        let group = GroupTable::cyclic(order);
        let labels: Vec<usize> =
            (0..p.graph.m()).map(|_| if rng.gen_bool(0.4) { 0 } else { rng.gen_range(0..order) }).collect();
        p = p.with_edge_labels(group, &labels);
    }
    if kind == ProblemKind::VertexMwc {
        p.deletable_terminals = rng.gen_bool(0.3);
    }
    (p, rot)
}

/// A random permutation CSP over a random connected planar graph: each edge
/// carries a random (possibly partial) permutation and some variables get
/// unary constraints. The rotation refers to the CSP's constraint graph.
pub fn random_permutation_csp<R: Rng>(rng: &mut R, n: usize, d: usize) -> (crate::csp::CspInstance, RotationSystem) {
    use crate::csp::CspInstance;
    let density = rng.gen_range(0.1..0.9);
    let (g, rot) = random_planar(rng, n, density);
    let mut inst = CspInstance::new(n, d);
    for &(u, v) in g.edges() {
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(rng);
        let keep = rng.gen_range(0.6..1.0);
        let rel = (0..d).filter(|_| rng.gen_bool(keep)).map(|a| (a, perm[a])).collect();
        inst.add_binary(u, v, rel);
    }
    for x in 0..n {
        if rng.gen_bool(0.25) {
            let allowed: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.6)).collect();
            inst.add_unary(x, allowed);
        }
    }
    let rot = rot.transfer(&g, &inst.constraint_graph()).expect("same edge set");
    (inst, rot)
}

/// A permutation CSP on a random planar graph together with a set `z` whose
/// deletion leaves a satisfiable instance: edges away from `z` carry
/// permutations agreeing with a hidden assignment, edges touching `z` carry
/// random ones. `z` has `z_size` vertices (fewer if `n` is smaller).
pub fn planted_permutation_csp<R: Rng>(
    rng: &mut R,
    n: usize,
    d: usize,
    density: f64,
    z_size: usize,
) -> (crate::csp::CspInstance, RotationSystem, Vec<Vertex>) {
    use crate::csp::CspInstance;
    let (g, rot) = random_planar(rng, n, density);
    let hidden: Vec<usize> = (0..n).map(|_| rng.gen_range(0..d)).collect();
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(rng);
    let mut z = order[..z_size.min(n)].to_vec();
    z.sort_unstable();
    let mut inst = CspInstance::new(n, d);
    for &(u, v) in g.edges() {
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(rng);
        if z.binary_search(&u).is_err() && z.binary_search(&v).is_err() {
            // Swap so that the hidden values correspond.
            let at = perm.iter().position(|&b| b == hidden[v]).expect("permutation");
            perm.swap(at, hidden[u]);
        }
        inst.add_binary(u, v, (0..d).map(|a| (a, perm[a])).collect());
    }
    for x in 0..n {
        if rng.gen_bool(0.2) && z.binary_search(&x).is_err() {
            let mut allowed: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.5)).collect();
            allowed.push(hidden[x]);
            inst.add_unary(x, allowed);
        }
    }
    let rot = rot.transfer(&g, &inst.constraint_graph()).expect("same edge set");
    (inst, rot, z)
}

/// A random Edge-Subset FVS instance on a planar multigraph: a random planar
/// base graph, a few parallel copies and loops, random terminal edges and
/// undeletable vertices.
pub fn random_sfvs_kernel<R: Rng>(rng: &mut R, n: usize, k: usize) -> crate::kernel::SfvsKernelInstance {
    use crate::kernel::SfvsKernelInstance;
    let density = rng.gen_range(0.1..0.9);
    let (g, _) = random_planar(rng, n, density);
    let mut inst = SfvsKernelInstance::new(n, k);
    let p_term = rng.gen_range(0.1..0.6);
    for &(u, v) in g.edges() {
        inst.push(u, v, rng.gen_bool(p_term));
        if rng.gen_bool(0.08) {
            inst.push(u, v, rng.gen_bool(p_term));
        }
    }
    for v in 0..n {
        if rng.gen_bool(0.05) {
            inst.push(v, v, rng.gen_bool(0.5));
        }
    }
    inst.undeletable = (0..n).filter(|_| rng.gen_bool(0.15)).collect();
    inst
}
