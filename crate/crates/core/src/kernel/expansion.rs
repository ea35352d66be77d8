//! The expansion lemma on a bipartite graph whose edges are coloured red
//! (priority) or blue, with a repair step that prefers red edges.

use crate::error::{Error, Result};

/// Bipartite graph between `p` left and `q` right vertices. Each edge is
/// `(left, right, red)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrioritizedBipartite {
    pub p: usize,
    pub q: usize,
    pub edges: Vec<(usize, usize, bool)>,
}

impl PrioritizedBipartite {
    fn left_adj(&self) -> Vec<Vec<(usize, bool)>> {
        let mut adj = vec![Vec::new(); self.p];
        for &(a, b, red) in &self.edges {
            adj[a].push((b, red));
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup_by_key(|x| x.0);
        }
        adj
    }

    fn right_adj(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.q];
        for &(a, b, _) in &self.edges {
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    pub fn is_red(&self, a: usize, b: usize) -> bool {
        self.edges.iter().any(|&(x, y, r)| x == a && y == b && r)
    }
}

/// A t-expansion `m` of `x` into `y` (each matched pair is `(left, right)`),
/// with `N(y) ⊆ x` and an unsaturated vertex `w` of `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub m: Vec<(usize, usize)>,
    pub w: usize,
}

/// Σ over left vertices p of [p has a red edge to an unsaturated vertex of
/// `y`] × (number of blue matching edges at p).
pub fn priority_measure(bp: &PrioritizedBipartite, y: &[usize], m: &[(usize, usize)]) -> usize {
    let in_y: Vec<bool> = mask(bp.q, y);
    let saturated = mask(bp.q, &m.iter().map(|&(_, b)| b).collect::<Vec<_>>());
    let adj = bp.left_adj();
    (0..bp.p)
        .map(|a| {
            let red = usize::from(adj[a].iter().any(|&(b, r)| r && in_y[b] && !saturated[b]));
            let blue = m.iter().filter(|&&(x, b)| x == a && !bp.is_red(a, b)).count();
            red * blue
        })
        .sum()
}

fn mask(n: usize, items: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in items {
        m[i] = true;
    }
    m
}

/// Requires `q > t·p` and no isolated right vertex. Finds nonempty `X ⊆ P`,
/// `Y ⊆ Q` with a t-expansion `M` of X into Y, `N(Y) ⊆ X`, no red edge from
/// a vertex of X to an unsaturated vertex of Y while that vertex still has a
/// blue matching edge, and an unsaturated `w ∈ Y`.
///
/// Method: match t copies of every left vertex maximally; the right vertices
/// reachable by alternating paths from the unmatched ones form Y, their
/// neighbours X. Strict `q > t·p` leaves at least one unmatched vertex in Y.
/// Blue matching edges are then swapped for red edges to unsaturated
/// vertices of Y, which strictly lowers the measure each time.
pub fn expansion_with_priority(bp: &PrioritizedBipartite, t: usize) -> Result<Expansion> {
    if t == 0 || bp.q <= t * bp.p {
        return Err(Error::Precondition(format!("need q > t·p, got q = {}, t = {t}, p = {}", bp.q, bp.p)));
    }
    if let Some(&(a, b, _)) = bp.edges.iter().find(|&&(a, b, _)| a >= bp.p || b >= bp.q) {
        return Err(Error::InvalidInstance(format!("edge ({a}, {b}) out of range")));
    }
    let radj = bp.right_adj();
    if let Some(b) = (0..bp.q).find(|&b| radj[b].is_empty()) {
        return Err(Error::Precondition(format!("right vertex {b} is isolated")));
    }
    // Copies: left copy c stands for vertex c / t.
    let copies = bp.p * t;
    let mut match_right: Vec<Option<usize>> = vec![None; bp.q];
    let mut match_copy: Vec<Option<usize>> = vec![None; copies];
    let ladj = bp.left_adj();
    for c in 0..copies {
        let mut seen = vec![false; bp.q];
        augment(c, t, &ladj, &mut seen, &mut match_right, &mut match_copy);
    }
    // Alternating reachability from unmatched right vertices.
    let mut in_y = vec![false; bp.q];
    let mut in_x = vec![false; bp.p];
    let mut stack: Vec<usize> = (0..bp.q).filter(|&b| match_right[b].is_none()).collect();
    for &b in &stack {
        in_y[b] = true;
    }
    while let Some(b) = stack.pop() {
        for &a in &radj[b] {
            if in_x[a] {
                continue;
            }
            in_x[a] = true;
            for c in a * t..(a + 1) * t {
                // Every copy of a reachable vertex is matched, else there
                // would be an augmenting path.
                let Some(b2) = match_copy[c] else {
                    return Err(Error::Precondition("matching is not maximum".into()));
                };
                if !in_y[b2] {
                    in_y[b2] = true;
                    stack.push(b2);
                }
            }
        }
    }
    let x: Vec<usize> = (0..bp.p).filter(|&a| in_x[a]).collect();
    let y: Vec<usize> = (0..bp.q).filter(|&b| in_y[b]).collect();
    let mut m: Vec<(usize, usize)> = x
        .iter()
        .flat_map(|&a| (a * t..(a + 1) * t).map(move |c| (a, c)))
        .map(|(a, c)| (a, match_copy[c].expect("matched")))
        .collect();

    // Repair: swap a blue edge at p for a red edge from p to an unsaturated
    // vertex of Y. The number of red matching edges grows, so this stops.
    loop {
        let saturated = mask(bp.q, &m.iter().map(|&(_, b)| b).collect::<Vec<_>>());
        let swap = x.iter().find_map(|&a| {
            let blue = m.iter().position(|&(p, b)| p == a && !bp.is_red(a, b))?;
            let red = ladj[a].iter().find(|&&(b, r)| r && in_y[b] && !saturated[b])?.0;
            Some((blue, red))
        });
        match swap {
            Some((i, b)) => m[i].1 = b,
            None => break,
        }
    }
    m.sort_unstable();
    let saturated = mask(bp.q, &m.iter().map(|&(_, b)| b).collect::<Vec<_>>());
    let w = *y.iter().find(|&&b| !saturated[b]).expect("|Y| > t|X|");
    Ok(Expansion { x, y, m, w })
}

fn augment(
    c: usize,
    t: usize,
    ladj: &[Vec<(usize, bool)>],
    seen: &mut [bool],
    match_right: &mut [Option<usize>],
    match_copy: &mut [Option<usize>],
) -> bool {
    for &(b, _) in &ladj[c / t] {
        if seen[b] {
            continue;
        }
        seen[b] = true;
        let free = match match_right[b] {
            None => true,
            Some(c2) => augment(c2, t, ladj, seen, match_right, match_copy),
        };
        if free {
            match_right[b] = Some(c);
            match_copy[c] = Some(b);
            return true;
        }
    }
    false
}

/// Checks every promised property of an expansion; used by tests and the
/// rule that relies on it.
pub fn check_expansion(bp: &PrioritizedBipartite, t: usize, e: &Expansion) -> std::result::Result<(), String> {
    if e.x.is_empty() || e.y.is_empty() {
        return Err("empty side".into());
    }
    let in_x = mask(bp.p, &e.x);
    let in_y = mask(bp.q, &e.y);
    let ladj = bp.left_adj();
    for &(a, b) in &e.m {
        if !in_x[a] || !in_y[b] || !ladj[a].iter().any(|&(c, _)| c == b) {
            return Err(format!("bad matching edge ({a}, {b})"));
        }
    }
    for &a in &e.x {
        if e.m.iter().filter(|&&(p, _)| p == a).count() != t {
            return Err(format!("left vertex {a} is not matched {t} times"));
        }
    }
    let mut rights: Vec<usize> = e.m.iter().map(|&(_, b)| b).collect();
    rights.sort_unstable();
    rights.dedup();
    if rights.len() != t * e.x.len() {
        return Err("right vertices matched twice".into());
    }
    if rights.binary_search(&e.w).is_ok() || !in_y[e.w] {
        return Err("w is saturated or outside Y".into());
    }
    for &(a, b, _) in &bp.edges {
        if in_y[b] && !in_x[a] {
            return Err(format!("Y vertex {b} has neighbour {a} outside X"));
        }
    }
    let mu = priority_measure(bp, &e.y, &e.m);
    if mu != 0 {
        return Err(format!("priority measure {mu}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bp(rng: &mut ChaCha8Rng, t: usize) -> PrioritizedBipartite {
        let p = rng.gen_range(1..6);
        let q = t * p + rng.gen_range(1..8);
        let mut edges = Vec::new();
        for b in 0..q {
            let a = rng.gen_range(0..p);
            edges.push((a, b, rng.gen_bool(0.4)));
            for a2 in 0..p {
                if a2 != a && rng.gen_bool(0.3) {
                    edges.push((a2, b, rng.gen_bool(0.4)));
                }
            }
        }
        PrioritizedBipartite { p, q, edges }
    }

    #[test]
    fn random_graphs_satisfy_every_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let t = rng.gen_range(1..4);
            let bp = random_bp(&mut rng, t);
            let e = expansion_with_priority(&bp, t).unwrap();
            check_expansion(&bp, t, &e).unwrap_or_else(|m| panic!("{m}: {bp:?} {e:?}"));
        }
    }

    #[test]
    fn preconditions_are_checked() {
        let bp = PrioritizedBipartite { p: 1, q: 2, edges: vec![(0, 0, false), (0, 1, false)] };
        assert!(expansion_with_priority(&bp, 2).is_err());
        let bp = PrioritizedBipartite { p: 1, q: 3, edges: vec![(0, 0, false), (0, 1, false)] };
        assert!(expansion_with_priority(&bp, 2).is_err());
    }

    #[test]
    fn red_edges_are_preferred() {
        // One left vertex, t = 1, three right vertices; only the last edge is red.
        let bp = PrioritizedBipartite { p: 1, q: 3, edges: vec![(0, 0, false), (0, 1, false), (0, 2, true)] };
        let e = expansion_with_priority(&bp, 1).unwrap();
        assert_eq!(e.m, vec![(0, 2)]);
    }
}
