//! Hard instances for component-size edge deletion: a brute-force Grid
//! Tiling solver, the planar gadget reduction from Grid Tiling to weighted
//! equal-component edge deletion with undeletable edges, and the removal of
//! weights and undeletable edges.

use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EdgeId, Graph, RotationSystem, Vertex};
use serde::{Deserialize, Serialize};

/// A k×k Grid Tiling instance. `sets[i][j]` (0-based) lists the allowed
/// `(r_i, c_j)` pairs of cell (i, j), each coordinate in `0..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridTilingInstance {
    pub n: usize,
    pub k: usize,
    pub sets: Vec<Vec<Vec<(usize, usize)>>>,
}

impl GridTilingInstance {
    /// Every cell allows every pair.
    pub fn full(n: usize, k: usize) -> Self {
        let all: Vec<(usize, usize)> = (0..=n).flat_map(|a| (0..=n).map(move |b| (a, b))).collect();
        GridTilingInstance { n, k, sets: vec![vec![all; k]; k] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sets.len() != self.k || self.sets.iter().any(|row| row.len() != self.k) {
            return Err(Error::InvalidInstance(format!("expected a {0}×{0} matrix of sets", self.k)));
        }
        for (i, row) in self.sets.iter().enumerate() {
            for (j, set) in row.iter().enumerate() {
                if let Some(&(a, b)) = set.iter().find(|&&(a, b)| a > self.n || b > self.n) {
                    return Err(Error::InvalidInstance(format!(
                        "pair ({a}, {b}) in cell ({i}, {j}) exceeds n = {}",
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn allows(&self, i: usize, j: usize, a: usize, b: usize) -> bool {
        self.sets[i][j].contains(&(a, b))
    }

    /// Pads odd k with one extra row and column of full sets; the answer is
    /// unchanged because the new row and column accept any value.
    pub fn padded_to_even(&self) -> GridTilingInstance {
        if self.k % 2 == 0 {
            return self.clone();
        }
        let full = GridTilingInstance::full(self.n, 1).sets[0][0].clone();
        let mut sets = self.sets.clone();
        for row in &mut sets {
            row.push(full.clone());
        }
        sets.push(vec![full; self.k + 1]);
        GridTilingInstance { n: self.n, k: self.k + 1, sets }
    }
}

/// Row values `r` and column values `c` with `(r_i, c_j) ∈ S_{i,j}` for every
/// cell, lexicographically least over `(r, c)`, or `None`. `cap` bounds the
/// number of candidate profiles, `(n+1)^{2k}`.
pub fn brute_grid_tiling(gt: &GridTilingInstance, cap: u128) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    gt.validate()?;
    let base = gt.n as u128 + 1;
    let total = (0..2 * gt.k)
        .try_fold(1u128, |acc, _| acc.checked_mul(base))
        .ok_or(Error::Overflow("grid tiling profile count"))?;
    if total > cap {
        return Err(Error::CapExceeded(format!("{total} grid tiling profiles exceed cap {cap}")));
    }
    let mut r = vec![0usize; gt.k];
    let mut c = vec![0usize; gt.k];
    loop {
        if (0..gt.k).all(|i| (0..gt.k).all(|j| gt.allows(i, j, r[i], c[j]))) {
            return Ok(Some((r, c)));
        }
        // Odometer over (r, c) with the last column value varying fastest.
        let mut pos = 2 * gt.k;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            let slot = if pos < gt.k { &mut r[pos] } else { &mut c[pos - gt.k] };
            if *slot < gt.n {
                *slot += 1;
                break;
            }
            *slot = 0;
        }
    }
}

/// Weighted equal-component edge deletion: delete at most `k` edges, none of
/// them in `undeletable`, so that every component of what remains has total
/// weight exactly `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedCeecInstance {
    pub graph: Graph,
    pub weights: Vec<u128>,
    pub undeletable: Vec<EdgeId>,
    pub k: usize,
    pub t: u128,
    pub rotation: RotationSystem,
}

impl WeightedCeecInstance {
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.graph.n() {
            return Err(Error::InvalidInstance("one weight per vertex is required".into()));
        }
        if let Some(&e) = self.undeletable.iter().find(|&&e| e >= self.graph.m()) {
            return Err(Error::UnknownEdge(e));
        }
        self.rotation.validate(&self.graph)
    }

    pub fn max_weight(&self) -> u128 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Whether deleting `z` leaves only components of weight `t`.
    pub fn is_solution(&self, z: &[EdgeId]) -> bool {
        let mut del = vec![false; self.graph.m()];
        for &e in z {
            if e >= self.graph.m() || del[e] || self.undeletable.contains(&e) {
                return false;
            }
            del[e] = true;
        }
        if z.len() > self.k {
            return false;
        }
        let mut uf = crate::graph::UnionFind::new(self.graph.n());
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            if !del[e] {
                uf.union(a, b);
            }
        }
        let mut sum = vec![0u128; self.graph.n()];
        for v in 0..self.graph.n() {
            let r = uf.find(v);
            sum[r] = sum[r].saturating_add(self.weights[v]);
        }
        (0..self.graph.n()).all(|v| uf.find(v) != v || sum[v] == self.t)
    }
}

/// `(a3, a2, a1, a0)` read in base `base`.
fn digits(base: u128, a3: u128, a2: u128, a1: u128, a0: u128) -> u128 {
    ((a3 * base + a2) * base + a1) * base + a0
}

/// Budget of the generated instance for an even grid size `k`.
pub fn ceec_budget(k: usize) -> usize {
    2 * k * (k + 1) + k * k
}

/// Target component weight for coordinate bound `n` and even grid size `k`.
pub fn ceec_target(n: usize, k: usize) -> u128 {
    let (base, n, k) = (n as u128 + 1, n as u128, k as u128);
    2 * (digits(base, n, n, n, n) + k * digits(base, n, n, 0, 0) + 2 * digits(base, 0, 0, n, n))
}

/// Exact vertex and edge counts of the gadget for coordinate bound `n ≥ 1`
/// and even grid size `k`.
pub fn ceec_size(n: usize, k: usize) -> (usize, usize) {
    let big = (n + 1) * (n + 1);
    let cells = (k / 2) * (k / 2);
    let vertices = 1 + k * k + 2 * k * (k + 1) * n + cells * (1 + 4 * (big - 1));
    let edges = 2 * k * (k + 1) * (n + 1) + cells * 4 * big;
    (vertices, edges)
}

struct Gadget {
    g: Graph,
    w: Vec<u128>,
    pos: Vec<(f64, f64)>,
    undeletable: Vec<EdgeId>,
    /// Direction, seen from the far end, of each edge into the hub vertex 0.
    port: Vec<Option<(f64, f64)>>,
}

impl Gadget {
    fn vertex(&mut self, weight: u128, at: (f64, f64)) -> Vertex {
        self.w.push(weight);
        self.pos.push(at);
        self.g.add_vertex()
    }

    fn edge(&mut self, a: Vertex, b: Vertex, port: Option<(f64, f64)>) -> Result<EdgeId> {
        let e = self.g.add_edge(a, b)?;
        self.port.push(port);
        Ok(e)
    }

    /// A path from `a` to `b` through fresh vertices; returns its edges.
    /// `ports` give the hub direction when the first or last end is the hub.
    fn path(
        &mut self,
        a: Vertex,
        b: Vertex,
        inner: &[(u128, (f64, f64))],
        ports: [(f64, f64); 2],
    ) -> Result<Vec<EdgeId>> {
        let mut prev = a;
        let mut out = Vec::with_capacity(inner.len() + 1);
        for (idx, &(weight, at)) in inner.iter().enumerate() {
            let x = self.vertex(weight, at);
            let port = (idx == 0 && a == HUB).then_some(ports[0]);
            out.push(self.edge(prev, x, port)?);
            prev = x;
        }
        let port = if b == HUB {
            Some(ports[1])
        } else if a == HUB && inner.is_empty() {
            Some(ports[0])
        } else {
            None
        };
        out.push(self.edge(prev, b, port)?);
        Ok(out)
    }

    /// Angle-sorted rotation at every vertex but the hub, whose order is given.
    fn rotation(&self, hub_order: &[EdgeId]) -> Result<RotationSystem> {
        let mut order = Vec::with_capacity(self.g.n());
        for v in 0..self.g.n() {
            let row: Vec<EdgeId> = if v == HUB {
                hub_order.to_vec()
            } else {
                let mut inc: Vec<(f64, EdgeId)> = self
                    .g
                    .incident(v)
                    .iter()
                    .map(|&(y, e)| {
                        let (dx, dy) = match self.port[e] {
                            Some(d) if y == HUB => d,
                            _ => (self.pos[y].0 - self.pos[v].0, self.pos[y].1 - self.pos[v].1),
                        };
                        (dy.atan2(dx), e)
                    })
                    .collect();
                inc.sort_by(|a, b| a.0.total_cmp(&b.0));
                inc.into_iter().map(|(_, e)| e).collect()
            };
            order.push(row);
        }
        RotationSystem::from_edge_lists(&self.g, order)
    }
}

const HUB: Vertex = 0;
const UP: (f64, f64) = (0.0, -1.0);
const DOWN: (f64, f64) = (0.0, 1.0);
const LEFT: (f64, f64) = (-1.0, 0.0);
const RIGHT: (f64, f64) = (1.0, 0.0);

/// Builds the planar weighted instance. Odd `k` is padded to even first, and
/// `n = 0` is treated as `n = 1`: with a single value the base-(n+1) weights
/// all vanish, while the instance read over `{0, 1}` has the same answer.
/// The instance has budget `2k(k+1) + k²` for the padded `k`.
///
/// Layout: a k×k grid of junction vertices joined by weighted paths of
/// length n+1, a hub vertex closing every boundary path, and in every cell
/// with odd row and column a centre with four diagonal arms of unit-weight
/// vertices. The arm edges that encode forbidden pairs are undeletable.
pub fn gridtiling_to_ceec(gt: &GridTilingInstance) -> Result<WeightedCeecInstance> {
    gt.validate()?;
    let gt = gt.padded_to_even();
    let (k, n) = (gt.k, gt.n.max(1));
    if k == 0 {
        let g = Graph::new(0);
        let rotation = RotationSystem { order: Vec::new() };
        return Ok(WeightedCeecInstance {
            graph: g,
            weights: Vec::new(),
            undeletable: Vec::new(),
            k: 0,
            t: 1,
            rotation,
        });
    }
    let base = n as u128 + 1;
    let nn = n as u128;
    let t = ceec_target(n, k);
    let big = (n + 1) * (n + 1);
    // Overflow guard: arm positions and weights must fit comfortably.
    if big.checked_mul(k * k).is_none() || t.checked_mul(16).is_none() {
        return Err(Error::Overflow("gadget size"));
    }
    let s = (n + 1) as f64;
    let mut gd = Gadget { g: Graph::new(0), w: Vec::new(), pos: Vec::new(), undeletable: Vec::new(), port: Vec::new() };
    let hub_weight = t - k as u128 * digits(base, nn, nn, 0, 0);
    gd.vertex(hub_weight, (f64::NAN, f64::NAN));
    let junction_weight = t - digits(base, nn, nn, nn, nn);
    // junction(i, j) for 1-based i, j in 1..=k.
    let first_junction = gd.g.n();
    for i in 1..=k {
        for j in 1..=k {
            gd.vertex(junction_weight, (j as f64 * s, i as f64 * s));
        }
    }
    let junction = |i: usize, j: usize| -> Vertex {
        if i == 0 || j == 0 || i > k || j > k {
            HUB
        } else {
            first_junction + (i - 1) * k + (j - 1)
        }
    };
    let (mut top, mut bottom) = (vec![0; k], vec![0; k]);
    let (mut left, mut right) = (vec![0; k], vec![0; k]);
    // Vertical paths between rows i and i+1 in column j.
    for i in 0..=k {
        let weight = if i % 2 == 1 { digits(base, 0, 1, 0, 1) } else { digits(base, 0, 1, 0, 0) };
        for j in 1..=k {
            let inner: Vec<(u128, (f64, f64))> =
                (1..=n).map(|p| (weight, (j as f64 * s, i as f64 * s + p as f64))).collect();
            let es = gd.path(junction(i, j), junction(i + 1, j), &inner, [UP, DOWN])?;
            if i == 0 {
                top[j - 1] = es[0];
            }
            if i == k {
                bottom[j - 1] = *es.last().expect("nonempty path");
            }
        }
    }
    // Horizontal paths between columns j and j+1 in row i.
    for i in 1..=k {
        for j in 0..=k {
            let weight = if j % 2 == 1 { digits(base, 1, 0, 1, 0) } else { digits(base, 1, 0, 0, 0) };
            let inner: Vec<(u128, (f64, f64))> =
                (1..=n).map(|p| (weight, (j as f64 * s + p as f64, i as f64 * s))).collect();
            let es = gd.path(junction(i, j), junction(i, j + 1), &inner, [LEFT, RIGHT])?;
            if j == 0 {
                left[i - 1] = es[0];
            }
            if j == k {
                right[i - 1] = *es.last().expect("nonempty path");
            }
        }
    }
    // Cell centres and arms. Arm position p encodes the pair (a, b) through
    // its base-(n+1) digits, mirrored per corner.
    let centre_weight = t - 2 * digits(base, 0, 0, nn, nn);
    for i in (1..=k).step_by(2) {
        for j in (1..=k).step_by(2) {
            let centre = gd.vertex(centre_weight, ((j as f64 + 0.5) * s, (i as f64 + 0.5) * s));
            // (corner row, corner column, whether a and b are mirrored)
            let corners =
                [(i, j, false, false), (i, j + 1, true, false), (i + 1, j + 1, true, true), (i + 1, j, false, true)];
            for (ci, cj, flip_a, flip_b) in corners {
                let from = gd.pos[centre];
                let to = gd.pos[junction(ci, cj)];
                let inner: Vec<(u128, (f64, f64))> = (1..big)
                    .map(|p| {
                        let f = p as f64 / big as f64;
                        (1, (from.0 + f * (to.0 - from.0), from.1 + f * (to.1 - from.1)))
                    })
                    .collect();
                let es = gd.path(centre, junction(ci, cj), &inner, [UP, UP])?;
                for a in 0..=n {
                    for b in 0..=n {
                        if !gt.allows(ci - 1, cj - 1, a, b) {
                            let da = if flip_a { n - a } else { a };
                            let db = if flip_b { n - b } else { b };
                            gd.undeletable.push(es[da * (n + 1) + db]);
                        }
                    }
                }
            }
        }
    }
    gd.undeletable.sort_unstable();
    let mut hub_order: Vec<EdgeId> = top.clone();
    hub_order.extend(&right);
    hub_order.extend(bottom.iter().rev());
    hub_order.extend(left.iter().rev());
    let mut last_err = None;
    for attempt in 0..2 {
        let order: Vec<EdgeId> =
            if attempt == 0 { hub_order.clone() } else { hub_order.iter().rev().copied().collect() };
        let rotation = gd.rotation(&order)?;
        match rotation.validate(&gd.g) {
            Ok(()) => {
                return Ok(WeightedCeecInstance {
                    graph: gd.g,
                    weights: gd.w,
                    undeletable: gd.undeletable,
                    k: ceec_budget(k),
                    t,
                    rotation,
                })
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("two attempts were made"))
}

/// Replaces undeletable edges and weights by plain structure, keeping the
/// budget. Each undeletable edge uv gains `k` parallel 2-paths through new
/// vertices of weight 2, every weight is scaled by `|V|·k` (minus `k` per
/// undeletable edge at the vertex) and the target becomes `|V|·k·t`; then
/// every vertex of weight w gets w − 1 pendant leaves. With `k = 0` nothing
/// can be deleted anyway, so only the pendant step runs.
pub fn remove_weights_undeletable(inst: &WeightedCeecInstance) -> Result<WeightedCeecInstance> {
    inst.validate()?;
    if let Some(v) = inst.weights.iter().position(|&w| w == 0) {
        return Err(Error::Precondition(format!("vertex {v} has weight 0")));
    }
    if inst.t == 1 && inst.max_weight() > 1 {
        // Some vertex is heavier than any allowed component.
        return Ok(trivial_no());
    }
    let n = inst.graph.n();
    let mut g = inst.graph.clone();
    let mut order: Vec<Vec<EdgeId>> =
        inst.rotation.order.iter().map(|row| row.iter().map(|ee| ee.edge).collect()).collect();
    let mut weights = inst.weights.clone();
    let mut t = inst.t;
    if inst.k > 0 {
        let scale = (n as u128).checked_mul(inst.k as u128).ok_or(Error::Overflow("weight scale"))?;
        t = t.checked_mul(scale).ok_or(Error::Overflow("target weight"))?;
        for w in &mut weights {
            *w = w.checked_mul(scale).ok_or(Error::Overflow("vertex weight"))?;
        }
        for &e in &inst.undeletable {
            let (u, v) = g.edge(e);
            // Nested 2-paths beside uv: after uv at u, before uv at v.
            let mut at_u = Vec::with_capacity(inst.k);
            let mut at_v = Vec::with_capacity(inst.k);
            for _ in 0..inst.k {
                let x = g.add_vertex();
                weights.push(2);
                let eu = g.add_edge(u, x)?;
                let ev = g.add_edge(x, v)?;
                order.push(vec![eu, ev]);
                at_u.push(eu);
                at_v.push(ev);
            }
            at_v.reverse();
            let iu = order[u].iter().position(|&f| f == e).expect("edge at its endpoint");
            order[u].splice(iu + 1..iu + 1, at_u);
            let iv = order[v].iter().position(|&f| f == e).expect("edge at its endpoint");
            order[v].splice(iv..iv, at_v);
            for end in [u, v] {
                weights[end] = weights[end].checked_sub(inst.k as u128).ok_or(Error::Overflow("weight correction"))?;
            }
        }
    }
    let total: u128 = weights.iter().sum();
    if total > 50_000_000 {
        return Err(Error::CapExceeded(format!("unweighted instance would have {total} vertices")));
    }
    for v in 0..weights.len() {
        for _ in 1..weights[v] {
            let leaf = g.add_vertex();
            let e = g.add_edge(v, leaf)?;
            order[v].push(e);
            order.push(vec![e]);
        }
    }
    let rotation = RotationSystem::from_edge_lists(&g, order)?;
    let out =
        WeightedCeecInstance { weights: vec![1; g.n()], graph: g, undeletable: Vec::new(), k: inst.k, t, rotation };
    out.rotation.validate(&out.graph)?;
    Ok(out)
}

/// A single unit vertex that must sit in a component of weight 2.
fn trivial_no() -> WeightedCeecInstance {
    let graph = Graph::new(1);
    let rotation = RotationSystem { order: vec![Vec::<EdgeEnd>::new()] };
    WeightedCeecInstance { graph, weights: vec![1], undeletable: Vec::new(), k: 0, t: 2, rotation }
}

/// Exhaustive search for a deletion set: edges are decided one at a time in
/// breadth-first order while a union-find with rollback tracks component
/// weights and the number of undecided edges still touching each component.
/// A branch dies when a component outgrows `t`, a component with no
/// undecided edges left has weight other than `t`, or the budget runs out.
/// `cap` bounds the number of search nodes.
pub fn brute_ceec(inst: &WeightedCeecInstance, cap: u64) -> Result<Option<Vec<EdgeId>>> {
    if inst.weights.len() != inst.graph.n() {
        return Err(Error::InvalidInstance("one weight per vertex is required".into()));
    }
    let g = &inst.graph;
    let mut locked = vec![false; g.m()];
    for &e in &inst.undeletable {
        *locked.get_mut(e).ok_or(Error::UnknownEdge(e))? = true;
    }
    let mut s = Search {
        parent: (0..g.n()).collect(),
        size: vec![1; g.n()],
        weight: inst.weights.clone(),
        open: (0..g.n()).map(|v| g.degree(v)).collect(),
        history: Vec::new(),
        nodes: 0,
        cap,
        t: inst.t,
    };
    if (0..g.n()).any(|v| s.open[v] == 0 && s.weight[v] != inst.t) {
        return Ok(None);
    }
    let order = bfs_edge_order(g);
    let mut deleted = Vec::new();
    if s.run(g, &order, &locked, 0, inst.k, &mut deleted)? {
        deleted.sort_unstable();
        Ok(Some(deleted))
    } else {
        Ok(None)
    }
}

fn bfs_edge_order(g: &Graph) -> Vec<EdgeId> {
    let mut seen_v = vec![false; g.n()];
    let mut seen_e = vec![false; g.m()];
    let mut out = Vec::with_capacity(g.m());
    for s in 0..g.n() {
        if seen_v[s] {
            continue;
        }
        seen_v[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &(y, e) in g.incident(v) {
                if !std::mem::replace(&mut seen_e[e], true) {
                    out.push(e);
                }
                if !std::mem::replace(&mut seen_v[y], true) {
                    queue.push_back(y);
                }
            }
        }
    }
    out
}

struct Search {
    parent: Vec<usize>,
    size: Vec<usize>,
    weight: Vec<u128>,
    open: Vec<usize>,
    /// Undo log, replayed backwards on backtrack.
    history: Vec<Undo>,
    nodes: u64,
    cap: u64,
    t: u128,
}

enum Undo {
    Open(usize),
    Union(usize, usize),
}

impl Search {
    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn rollback(&mut self, mark: usize) {
        while self.history.len() > mark {
            match self.history.pop().expect("nonempty") {
                Undo::Open(r) => self.open[r] += 1,
                Undo::Union(child, root) => {
                    self.parent[child] = child;
                    self.size[root] -= self.size[child];
                    self.weight[root] -= self.weight[child];
                    self.open[root] -= self.open[child];
                }
            }
        }
    }

    fn close_end(&mut self, r: usize) {
        self.open[r] -= 1;
        self.history.push(Undo::Open(r));
    }

    fn ok(&self, r: usize) -> bool {
        self.open[r] > 0 || self.weight[r] == self.t
    }

    fn run(
        &mut self,
        g: &Graph,
        order: &[EdgeId],
        locked: &[bool],
        idx: usize,
        budget: usize,
        deleted: &mut Vec<EdgeId>,
    ) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::CapExceeded(format!("edge deletion search exceeded {} nodes", self.cap)));
        }
        let Some(&e) = order.get(idx) else {
            return Ok(true);
        };
        let (a, b) = g.edge(e);
        let (ra, rb) = (self.find(a), self.find(b));
        let mark = self.history.len();
        // Keep the edge.
        if ra == rb || self.weight[ra] + self.weight[rb] <= self.t {
            self.close_end(ra);
            self.close_end(rb);
            let r = if ra != rb {
                let (child, root) = if self.size[ra] < self.size[rb] { (ra, rb) } else { (rb, ra) };
                self.parent[child] = root;
                self.size[root] += self.size[child];
                self.weight[root] += self.weight[child];
                self.open[root] += self.open[child];
                self.history.push(Undo::Union(child, root));
                root
            } else {
                ra
            };
            if self.ok(r) && self.run(g, order, locked, idx + 1, budget, deleted)? {
                return Ok(true);
            }
            self.rollback(mark);
        }
        // Delete it. Deleting an edge inside one component never helps.
        if ra != rb && !locked[e] && budget > 0 {
            self.close_end(ra);
            self.close_end(rb);
            if self.ok(ra) && self.ok(rb) {
                deleted.push(e);
                if self.run(g, order, locked, idx + 1, budget - 1, deleted)? {
                    return Ok(true);
                }
                deleted.pop();
            }
            self.rollback(mark);
        }
        Ok(false)
    }
}
