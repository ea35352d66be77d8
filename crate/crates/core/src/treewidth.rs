//! Tree decompositions: validation, min-fill heuristic, exact small-graph
//! treewidth, and conversion to nice form.

use crate::error::{Error, Result};
use crate::graph::{biconnected_decomposition, Graph, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<Vertex>>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Largest bag size minus one (0 for an empty decomposition).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1)
    }
}

/// The first violated decomposition condition, with a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TdViolation {
    NotATree,
    BadVertex(Vertex),
    MissingVertex(Vertex),
    UncoveredEdge(Vertex, Vertex),
    DisconnectedTrace(Vertex),
}

pub fn validate(g: &Graph, td: &TreeDecomposition) -> std::result::Result<(), TdViolation> {
    let t = td.bags.len();
    if t == 0 {
        return if g.n() == 0 { Ok(()) } else { Err(TdViolation::MissingVertex(0)) };
    }
    let mut tree = Graph::new(t);
    for &(a, b) in &td.tree_edges {
        if a >= t || b >= t || tree.add_edge(a, b).is_err() {
            return Err(TdViolation::NotATree);
        }
    }
    if tree.m() != t - 1 || !tree.is_connected() {
        return Err(TdViolation::NotATree);
    }
    let mut holders = vec![Vec::new(); g.n()];
    for (i, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            if v >= g.n() {
                return Err(TdViolation::BadVertex(v));
            }
            holders[v].push(i);
        }
    }
    if let Some(v) = (0..g.n()).find(|&v| holders[v].is_empty()) {
        return Err(TdViolation::MissingVertex(v));
    }
    let sets: Vec<BTreeSet<Vertex>> = td.bags.iter().map(|b| b.iter().copied().collect()).collect();
    for &(u, v) in g.edges() {
        if !holders[u].iter().any(|&i| sets[i].contains(&v)) {
            return Err(TdViolation::UncoveredEdge(u, v));
        }
    }
    for v in 0..g.n() {
        if !tree.induces_connected(&holders[v]) {
            return Err(TdViolation::DisconnectedTrace(v));
        }
    }
    Ok(())
}

/// Elimination order chosen greedily by fill-in, ties broken by smaller degree
/// then smaller id.
pub fn min_fill_order(g: &Graph) -> Vec<Vertex> {
    elimination_order(g, |adj, v| {
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        let mut fill = 0usize;
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                if !adj[nb[i]].contains(&nb[j]) {
                    fill += 1;
                }
            }
        }
        (fill, nb.len())
    })
}

fn min_degree_order(g: &Graph) -> Vec<Vertex> {
    elimination_order(g, |adj, v| (adj[v].len(), 0))
}

fn elimination_order(g: &Graph, score: impl Fn(&[BTreeSet<usize>], usize) -> (usize, usize)) -> Vec<Vertex> {
    let n = g.n();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (score(&adj, v), v)).expect("a live vertex");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nb {
            adj[a].remove(&v);
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[v].clear();
        alive[v] = false;
        order.push(v);
    }
    order
}

/// Width of the decomposition induced by an elimination order.
pub fn order_width(g: &Graph, order: &[Vertex]) -> usize {
    decomposition_from_order(g, order).width()
}

/// Standard construction: each vertex's bag is itself plus its later
/// neighbours in the filled graph; its parent is the earliest of those.
pub fn decomposition_from_order(g: &Graph, order: &[Vertex]) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition { bags: vec![Vec::new()], tree_edges: Vec::new() };
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut bags = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for &v in order {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        for &a in &later {
            for &b in &later {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        let mut bag = later.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        parent[pos[v]] = later.iter().map(|&w| pos[w]).min();
    }
    // Link component roots into a chain so the result is a single tree.
    let mut tree_edges = Vec::new();
    let mut prev_root: Option<usize> = None;
    for i in 0..n {
        match parent[i] {
            Some(p) => tree_edges.push((i, p)),
            None => {
                if let Some(r) = prev_root {
                    tree_edges.push((r, i));
                }
                prev_root = Some(i);
            }
        }
    }
    TreeDecomposition { bags, tree_edges }
}

/// Min-fill decomposition; deterministic.
pub fn heuristic_decomposition(g: &Graph) -> TreeDecomposition {
    decomposition_from_order(g, &min_fill_order(g))
}

pub const DEFAULT_EXACT_CAP: usize = 20;

/// Exact treewidth by a pruned subset dynamic program over elimination
/// prefixes, run separately on each block.
pub fn exact_treewidth(g: &Graph) -> Result<usize> {
    exact_treewidth_capped(g, DEFAULT_EXACT_CAP)
}

pub fn exact_treewidth_capped(g: &Graph, cap: usize) -> Result<usize> {
    if g.n() > cap || g.n() > 30 {
        return Err(Error::CapExceeded(format!("exact treewidth on {} vertices (cap {cap})", g.n())));
    }
    let simple = simplify(g);
    let forest = biconnected_decomposition(&simple);
    let mut best = 0;
    for block in &forest.blocks {
        if block.len() <= 2 {
            best = best.max(block.len().saturating_sub(1));
            continue;
        }
        let mut keep = vec![false; simple.n()];
        for &v in block {
            keep[v] = true;
        }
        let (h, _) = simple.induced(&keep);
        best = best.max(exact_connected(&h));
    }
    Ok(best)
}

fn simplify(g: &Graph) -> Graph {
    if !g.allow_parallel() {
        return g.clone();
    }
    let mut h = Graph::new(g.n());
    for &(u, v) in g.edges() {
        h.ensure_edge(u, v);
    }
    h
}

fn exact_connected(g: &Graph) -> usize {
    let n = g.n();
    let nbr: Vec<u32> = (0..n).map(|v| g.neighbors(v).fold(0u32, |m, w| m | 1 << w)).collect();
    let ub = order_width(g, &min_fill_order(g)).min(order_width(g, &min_degree_order(g)));
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // Vertices outside S ∪ {v} reachable from v through S.
    let q_size = |s: u32, v: usize| -> usize {
        let mut comp = 1u32 << v;
        let mut frontier = comp;
        while frontier != 0 {
            let mut next = 0u32;
            let mut f = frontier;
            while f != 0 {
                let x = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= nbr[x] & s;
            }
            next &= !comp;
            comp |= next;
            frontier = next;
        }
        let mut reach = 0u32;
        let mut c = comp;
        while c != 0 {
            let x = c.trailing_zeros() as usize;
            c &= c - 1;
            reach |= nbr[x];
        }
        (reach & !s & !(1u32 << v)).count_ones() as usize
    };
    let mut best = ub;
    let mut level: HashMap<u32, usize> = HashMap::from([(0u32, 0usize)]);
    while !level.is_empty() {
        let mut next: HashMap<u32, usize> = HashMap::new();
        for (&s, &val) in &level {
            if val >= best {
                continue;
            }
            // Eliminating the rest in any order costs at most its size − 1.
            let rest = n - s.count_ones() as usize;
            best = best.min(val.max(rest.saturating_sub(1)));
            let mut avail = full & !s;
            while avail != 0 {
                let v = avail.trailing_zeros() as usize;
                avail &= avail - 1;
                let cand = val.max(q_size(s, v));
                if cand < best {
                    let t = s | 1 << v;
                    next.entry(t).and_modify(|x| *x = (*x).min(cand)).or_insert(cand);
                }
            }
        }
        level = next;
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NiceKind {
    Leaf,
    Introduce(Vertex),
    Forget(Vertex),
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NiceNode {
    pub kind: NiceKind,
    /// Sorted ascending.
    pub bag: Vec<Vertex>,
    pub children: Vec<usize>,
}

/// Nice decomposition with nodes stored children-first; the root is last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(1).saturating_sub(1)
    }

    /// Plain decomposition view, for `validate`.
    pub fn as_tree_decomposition(&self) -> TreeDecomposition {
        let bags = self.nodes.iter().map(|n| n.bag.clone()).collect();
        let mut tree_edges = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                tree_edges.push((c, i));
            }
        }
        TreeDecomposition { bags, tree_edges }
    }

    /// Checks the node-kind rules on top of ordinary validity.
    pub fn validate_nice(&self, g: &Graph) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDecomposition(m));
        if self.nodes.is_empty() || !self.nodes[self.root()].bag.is_empty() {
            return bad("root bag must be empty".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.children.iter().any(|&c| c >= i) {
                return bad(format!("node {i} is not stored after its children"));
            }
            let child = |j: usize| &self.nodes[node.children[j]].bag;
            let ok = match node.kind {
                NiceKind::Leaf => node.children.is_empty() && node.bag.is_empty(),
                NiceKind::Introduce(v) => {
                    node.children.len() == 1 && {
                        let mut b = child(0).clone();
                        b.push(v);
                        b.sort_unstable();
                        !child(0).contains(&v) && b == node.bag
                    }
                }
                NiceKind::Forget(v) => {
                    node.children.len() == 1 && {
                        let mut b = node.bag.clone();
                        b.push(v);
                        b.sort_unstable();
                        !node.bag.contains(&v) && &b == child(0)
                    }
                }
                NiceKind::Join => node.children.len() == 2 && child(0) == &node.bag && child(1) == &node.bag,
            };
            if !ok {
                return bad(format!("node {i} breaks the {:?} rule", node.kind));
            }
        }
        validate(g, &self.as_tree_decomposition()).map_err(|v| Error::InvalidDecomposition(format!("{v:?}")))
    }
}

/// Converts a valid decomposition into a nice one of the same width.
pub fn to_nice(td: &TreeDecomposition, g: &Graph) -> Result<NiceTreeDecomposition> {
    validate(g, td).map_err(|v| Error::InvalidDecomposition(format!("{v:?}")))?;
    let t = td.bags.len();
    let mut adj = vec![Vec::new(); t];
    for &(a, b) in &td.tree_edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let bags: Vec<Vec<Vertex>> = td
        .bags
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b.dedup();
            b
        })
        .collect();
    // Iterative post-order from node 0.
    let mut order = Vec::with_capacity(t);
    let mut parent = vec![usize::MAX; t];
    let mut stack = vec![0usize];
    let mut seen = vec![false; t];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        order.push(x);
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                stack.push(y);
            }
        }
    }
    let mut b = Builder { nodes: Vec::new(), g };
    // top[x] = nice node whose bag equals bags[x] and represents x's subtree.
    let mut top = vec![usize::MAX; t];
    for &x in order.iter().rev() {
        let kids: Vec<usize> = adj[x].iter().copied().filter(|&y| parent[y] == x).collect();
        let mut tops: Vec<usize> = kids.iter().map(|&y| b.transition(top[y], &bags[x])).collect();
        if tops.is_empty() {
            let leaf = b.push(NiceKind::Leaf, Vec::new(), Vec::new());
            tops.push(b.transition(leaf, &bags[x]));
        }
        let mut acc = tops[0];
        for &other in &tops[1..] {
            acc = b.push(NiceKind::Join, bags[x].clone(), vec![acc, other]);
        }
        top[x] = acc;
    }
    let root = b.transition(top[0], &[]);
    debug_assert_eq!(root, b.nodes.len() - 1);
    Ok(NiceTreeDecomposition { nodes: b.nodes })
}

struct Builder<'a> {
    nodes: Vec<NiceNode>,
    g: &'a Graph,
}

impl Builder<'_> {
    fn push(&mut self, kind: NiceKind, bag: Vec<Vertex>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { kind, bag, children });
        self.nodes.len() - 1
    }

    /// Forgets then introduces vertices to move from `from`'s bag to `target`.
    /// Introductions go in greedy order of most neighbours already in the
    /// bag, so a DP over the result filters each new vertex through a
    /// constraint whenever one is available instead of forming products.
    fn transition(&mut self, from: usize, target: &[Vertex]) -> usize {
        let mut cur = from;
        let start = self.nodes[from].bag.clone();
        for &v in start.iter().filter(|v| !target.contains(v)) {
            let bag: Vec<Vertex> = self.nodes[cur].bag.iter().copied().filter(|&x| x != v).collect();
            cur = self.push(NiceKind::Forget(v), bag, vec![cur]);
        }
        let mut pending: Vec<Vertex> = target.iter().copied().filter(|v| !start.contains(v)).collect();
        let mut inside: Vec<Vertex> = start.iter().copied().filter(|v| target.contains(v)).collect();
        let mut ordered = Vec::with_capacity(pending.len());
        while !pending.is_empty() {
            let links = |v: Vertex| self.g.neighbors(v).filter(|y| inside.contains(y)).count();
            let best = (0..pending.len())
                .max_by_key(|&i| (links(pending[i]), std::cmp::Reverse(pending[i])))
                .expect("nonempty");
            let v = pending.swap_remove(best);
            inside.push(v);
            ordered.push(v);
        }
        for v in ordered {
            let mut bag = self.nodes[cur].bag.clone();
            bag.push(v);
            bag.sort_unstable();
            cur = self.push(NiceKind::Introduce(v), bag, vec![cur]);
        }
        cur
    }
}

/// Min-fill decomposition converted to nice form.
pub fn nice_decomposition(g: &Graph) -> NiceTreeDecomposition {
    to_nice(&heuristic_decomposition(g), g).expect("heuristic decompositions are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    fn random_graph(n: usize, bits: &[bool]) -> Graph {
        let mut g = Graph::new(n);
        let mut k = 0;
        for u in 0..n {
            for v in u + 1..n {
                if bits[k % bits.len()] {
                    g.add_edge(u, v).unwrap();
                }
                k += 1;
            }
        }
        g
    }

    #[test]
    fn single_bag_and_path() {
        let g = complete(4);
        let td = TreeDecomposition { bags: vec![vec![0, 1, 2, 3]], tree_edges: vec![] };
        assert_eq!(validate(&g, &td), Ok(()));
        assert_eq!(td.width(), 3);
        let p = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let td = TreeDecomposition { bags: vec![vec![0, 1], vec![1, 2], vec![2, 3]], tree_edges: vec![(0, 1), (1, 2)] };
        assert_eq!(validate(&p, &td), Ok(()));
        assert_eq!(td.width(), 1);
        let broken =
            TreeDecomposition { bags: vec![vec![0, 1], vec![2, 3], vec![1, 2]], tree_edges: vec![(0, 1), (1, 2)] };
        assert_eq!(validate(&p, &broken), Err(TdViolation::DisconnectedTrace(1)));
        let missing = TreeDecomposition { bags: vec![vec![0, 1], vec![2, 3]], tree_edges: vec![(0, 1)] };
        assert_eq!(validate(&p, &missing), Err(TdViolation::UncoveredEdge(1, 2)));
    }

    #[test]
    fn heuristic_widths() {
        let tree = Graph::from_edges(5, &[(0, 1), (0, 2), (2, 3), (2, 4)]).unwrap();
        assert_eq!(heuristic_decomposition(&tree).width(), 1);
        assert_eq!(heuristic_decomposition(&cycle(5)).width(), 2);
        assert_eq!(heuristic_decomposition(&complete(4)).width(), 3);
    }

    #[test]
    fn exact_values() {
        let (grid, _) = crate::gen::grid_embedded(3, 3);
        assert_eq!(exact_treewidth(&grid).unwrap(), 3);
        let star = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        assert_eq!(exact_treewidth(&star).unwrap(), 1);
        assert_eq!(exact_treewidth(&complete(5)).unwrap(), 4);
        assert_eq!(exact_treewidth(&Graph::new(3)).unwrap(), 0);
        let (g44, _) = crate::gen::grid_embedded(4, 4);
        assert_eq!(exact_treewidth(&g44).unwrap(), 4);
        assert!(exact_treewidth_capped(&complete(5), 4).is_err());
    }

    #[test]
    fn nice_of_single_bag_triangle() {
        let g = complete(3);
        let td = TreeDecomposition { bags: vec![vec![0, 1, 2]], tree_edges: vec![] };
        let nice = to_nice(&td, &g).unwrap();
        nice.validate_nice(&g).unwrap();
        let kinds: Vec<NiceKind> = nice.nodes.iter().map(|n| n.kind).collect();
        assert_eq!(kinds.len(), 7);
        assert_eq!(kinds.iter().filter(|k| matches!(k, NiceKind::Introduce(_))).count(), 3);
        assert_eq!(kinds.iter().filter(|k| matches!(k, NiceKind::Forget(_))).count(), 3);
        assert_eq!(nice.width(), 2);
    }

    /// Brute-force treewidth: minimum over all elimination orders.
    fn brute_tw(g: &Graph) -> usize {
        let n = g.n();
        let mut best = n.saturating_sub(1);
        let mut perm: Vec<usize> = (0..n).collect();
        fn rec(g: &Graph, perm: &mut Vec<usize>, k: usize, best: &mut usize) {
            if k == perm.len() {
                *best = (*best).min(order_width(g, perm));
                return;
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                rec(g, perm, k + 1, best);
                perm.swap(k, i);
            }
        }
        rec(g, &mut perm, 0, &mut best);
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn exact_below_heuristic_and_nice_valid(n in 1usize..=12, bits in proptest::collection::vec(any::<bool>(), 1..66)) {
            let g = random_graph(n, &bits);
            let td = heuristic_decomposition(&g);
            prop_assert_eq!(validate(&g, &td), Ok(()));
            let ex = exact_treewidth(&g).unwrap();
            prop_assert!(ex <= td.width());
            let nice = to_nice(&td, &g).unwrap();
            prop_assert!(nice.validate_nice(&g).is_ok());
            prop_assert_eq!(nice.width(), td.width());
        }

        #[test]
        fn exact_matches_all_orders(n in 1usize..=7, bits in proptest::collection::vec(any::<bool>(), 1..21)) {
            let g = random_graph(n, &bits);
            prop_assert_eq!(exact_treewidth(&g).unwrap(), brute_tw(&g));
        }
    }
}
