//! Max-flow (Dinic) and vertex-capacitated path packing with Menger separators.

use crate::graph::{Graph, Vertex};
use std::collections::VecDeque;

pub const INF: u64 = u64::MAX / 4;

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork { head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, c: u64) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    /// Maximum flow from `s` to `t`, stopping early once `limit` is reached.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: u64) -> u64 {
        let n = self.head.len();
        let mut total = 0;
        while total < limit {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &e in &self.head[x] {
                    if self.cap[e] > 0 && level[self.to[e]] == usize::MAX {
                        level[self.to[e]] = level[x] + 1;
                        q.push_back(self.to[e]);
                    }
                }
            }
            if level[t] == usize::MAX {
                break;
            }
            let mut it = vec![0usize; n];
            loop {
                let f = self.augment(s, t, limit - total, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
                if total >= limit {
                    break;
                }
            }
        }
        total
    }

    fn augment(&mut self, s: usize, t: usize, want: u64, level: &[usize], it: &mut [usize]) -> u64 {
        // Iterative DFS keeping the path of edge ids.
        let mut path: Vec<usize> = Vec::new();
        let mut x = s;
        loop {
            if x == t {
                let f = path.iter().map(|&e| self.cap[e]).min().unwrap_or(want).min(want);
                for &e in &path {
                    self.cap[e] -= f;
                    self.cap[e ^ 1] += f;
                }
                return f;
            }
            let mut advanced = false;
            while it[x] < self.head[x].len() {
                let e = self.head[x][it[x]];
                let y = self.to[e];
                if self.cap[e] > 0 && level[y] == level[x] + 1 {
                    path.push(e);
                    x = y;
                    advanced = true;
                    break;
                }
                it[x] += 1;
            }
            if !advanced {
                match path.pop() {
                    None => return 0,
                    Some(e) => {
                        x = self.to[e ^ 1];
                        it[x] += 1;
                    }
                }
            }
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &e in &self.head[x] {
                if self.cap[e] > 0 && !seen[self.to[e]] {
                    seen[self.to[e]] = true;
                    stack.push(self.to[e]);
                }
            }
        }
        seen
    }
}

/// Packing of paths from `sources` to `sinks` inside the vertices with
/// `allowed[v]`, where vertices with `unbounded[v]` may be shared and every
/// other vertex is used at most once. Sinks have capacity one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathPacking {
    pub value: u64,
    /// A minimum vertex separator (never containing unbounded vertices),
    /// present when the value is finite.
    pub separator: Vec<Vertex>,
}

pub fn vertex_path_packing(
    g: &Graph,
    allowed: &[bool],
    sources: &[Vertex],
    sinks: &[Vertex],
    unbounded: &[bool],
) -> PathPacking {
    let n = g.n();
    // v_in = 2v, v_out = 2v + 1, S = 2n, T = 2n + 1
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNetwork::new(2 * n + 2);
    for v in 0..n {
        if allowed[v] {
            net.add_edge(2 * v, 2 * v + 1, if unbounded[v] { INF } else { 1 });
        }
    }
    for &(u, v) in g.edges() {
        if allowed[u] && allowed[v] {
            net.add_edge(2 * u + 1, 2 * v, INF);
            net.add_edge(2 * v + 1, 2 * u, INF);
        }
    }
    for &x in sources {
        if allowed[x] {
            net.add_edge(s, 2 * x, INF);
        }
    }
    for &z in sinks {
        if allowed[z] {
            net.add_edge(2 * z + 1, t, 1);
        }
    }
    let value = net.max_flow(s, t, INF);
    let side = net.source_side(s);
    let mut separator: Vec<Vertex> = (0..n).filter(|&v| allowed[v] && side[2 * v] && !side[2 * v + 1]).collect();
    // A saturated sink arc means the sink itself is the cut vertex.
    for &z in sinks {
        if allowed[z] && side[2 * z + 1] && !separator.contains(&z) {
            separator.push(z);
        }
    }
    separator.sort_unstable();
    PathPacking { value, separator }
}
