//! 2-connected components (blocks) and the canonically rooted block-cut forest.
//!
//! A block is a maximal vertex set inducing a connected subgraph without a cut
//! vertex, so bridges give 2-vertex blocks and isolated vertices give 1-vertex
//! blocks.

use super::{Graph, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockNode {
    Block(usize),
    Cut(Vertex),
}

/// Rooted block-cut forest. Node ids `0..blocks.len()` are blocks, the rest are
/// cut vertices in ascending order.
#[derive(Clone, Debug)]
pub struct BlockCutForest {
    /// γ of each block, sorted ascending; blocks themselves sorted lexicographically.
    pub blocks: Vec<Vec<Vertex>>,
    /// Cut vertices, ascending.
    pub cuts: Vec<Vertex>,
    adj: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    tree: Vec<usize>,
    roots: Vec<usize>,
    blocks_of_vertex: Vec<Vec<usize>>,
    cut_node_of_vertex: Vec<Option<usize>>,
}

impl BlockCutForest {
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn kind(&self, node: usize) -> BlockNode {
        if node < self.blocks.len() {
            BlockNode::Block(node)
        } else {
            BlockNode::Cut(self.cuts[node - self.blocks.len()])
        }
    }

    pub fn is_block(&self, node: usize) -> bool {
        node < self.blocks.len()
    }

    /// γ(node): the block's vertex set, or the single cut vertex.
    pub fn gamma(&self, node: usize) -> &[Vertex] {
        if node < self.blocks.len() {
            &self.blocks[node]
        } else {
            std::slice::from_ref(&self.cuts[node - self.blocks.len()])
        }
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    pub fn tree_of(&self, node: usize) -> usize {
        self.tree[node]
    }

    /// Root block of every tree, indexed by tree id.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn children(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[node].iter().copied().filter(move |&c| self.parent[c] == Some(node))
    }

    /// Blocks containing `v`.
    pub fn blocks_of(&self, v: Vertex) -> &[usize] {
        &self.blocks_of_vertex[v]
    }

    pub fn cut_node(&self, v: Vertex) -> Option<usize> {
        self.cut_node_of_vertex[v]
    }

    pub fn is_cut_vertex(&self, v: Vertex) -> bool {
        self.cut_node_of_vertex[v].is_some()
    }

    /// Every node whose γ contains `v`: its blocks and, if any, its cut node.
    pub fn nodes_of(&self, v: Vertex) -> Vec<usize> {
        let mut out = self.blocks_of_vertex[v].clone();
        out.extend(self.cut_node_of_vertex[v]);
        out
    }

    /// The subtree rooted at `node` (including it).
    pub fn descendants(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut i = 0;
        while i < out.len() {
            let t = out[i];
            out.extend(self.children(t));
            i += 1;
        }
        out
    }

    /// Re-roots the tree containing block `root` at that block.
    pub fn reroot(&mut self, root: usize) {
        assert!(self.is_block(root), "roots must be block nodes");
        let t = self.tree[root];
        self.roots[t] = root;
        self.parent[root] = None;
        self.depth[root] = 0;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for i in 0..self.adj[x].len() {
                let y = self.adj[x][i];
                if Some(y) != self.parent[x] {
                    self.parent[y] = Some(x);
                    self.depth[y] = self.depth[x] + 1;
                    stack.push(y);
                }
            }
        }
    }

    /// Among nodes whose γ meets `set`, the one closest to the root. The
    /// caller must pass a set lying in one connected component.
    pub fn highest_node_meeting(&self, set: &[Vertex]) -> Option<usize> {
        set.iter().flat_map(|&v| self.nodes_of(v)).min_by_key(|&t| (self.depth[t], t))
    }
}

/// Computes the blocks of `g` and roots each tree at its lexicographically
/// smallest block.
pub fn biconnected_decomposition(g: &Graph) -> BlockCutForest {
    let mut blocks = raw_blocks(g);
    for b in &mut blocks {
        b.sort_unstable();
        b.dedup();
    }
    blocks.sort();

    let n = g.n();
    let mut blocks_of_vertex = vec![Vec::new(); n];
    for (i, b) in blocks.iter().enumerate() {
        for &v in b {
            blocks_of_vertex[v].push(i);
        }
    }
    let cuts: Vec<Vertex> = (0..n).filter(|&v| blocks_of_vertex[v].len() >= 2).collect();
    let nb = blocks.len();
    let mut cut_node_of_vertex = vec![None; n];
    for (j, &c) in cuts.iter().enumerate() {
        cut_node_of_vertex[c] = Some(nb + j);
    }
    let total = nb + cuts.len();
    let mut adj = vec![Vec::new(); total];
    for (j, &c) in cuts.iter().enumerate() {
        for &b in &blocks_of_vertex[c] {
            adj[nb + j].push(b);
            adj[b].push(nb + j);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }

    let mut forest = BlockCutForest {
        blocks,
        cuts,
        adj,
        parent: vec![None; total],
        depth: vec![0; total],
        tree: vec![usize::MAX; total],
        roots: Vec::new(),
        blocks_of_vertex,
        cut_node_of_vertex,
    };
    // Blocks are sorted, so the first unvisited block of a tree is its smallest.
    for b in 0..nb {
        if forest.tree[b] != usize::MAX {
            continue;
        }
        let t = forest.roots.len();
        forest.roots.push(b);
        let mut stack = vec![b];
        forest.tree[b] = t;
        while let Some(x) = stack.pop() {
            for i in 0..forest.adj[x].len() {
                let y = forest.adj[x][i];
                if forest.tree[y] == usize::MAX {
                    forest.tree[y] = t;
                    forest.parent[y] = Some(x);
                    forest.depth[y] = forest.depth[x] + 1;
                    stack.push(y);
                }
            }
        }
    }
    forest
}

/// Hopcroft–Tarjan with an explicit stack; works on multigraphs by tracking
/// the entering edge id instead of the parent vertex.
fn raw_blocks(g: &Graph) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    let mut edge_stack: Vec<(Vertex, Vertex)> = Vec::new();
    let mut out = Vec::new();
    for s in 0..n {
        if disc[s] != usize::MAX {
            continue;
        }
        if g.degree(s) == 0 {
            disc[s] = time;
            time += 1;
            out.push(vec![s]);
            continue;
        }
        disc[s] = time;
        low[s] = time;
        time += 1;
        // (vertex, entering edge, next incidence index)
        let mut stack: Vec<(Vertex, usize, usize)> = vec![(s, usize::MAX, 0)];
        while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
            if *idx < g.incident(v).len() {
                let (w, e) = g.incident(v)[*idx];
                *idx += 1;
                if e == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push((v, w));
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, e, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut comp = Vec::new();
                        while let Some((a, b)) = edge_stack.pop() {
                            comp.push(a);
                            comp.push(b);
                            if (a, b) == (p, v) {
                                break;
                            }
                        }
                        out.push(comp);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force: maximal vertex sets inducing a connected subgraph without
    /// a cut vertex.
    fn brute_blocks(g: &Graph) -> Vec<Vec<Vertex>> {
        let n = g.n();
        let good = |mask: u32| -> bool {
            let set: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            if !g.induces_connected(&set) {
                return false;
            }
            if set.len() <= 2 {
                return true;
            }
            set.iter().all(|&x| {
                let rest: Vec<usize> = set.iter().copied().filter(|&y| y != x).collect();
                g.induces_connected(&rest)
            })
        };
        let cands: Vec<u32> = (1u32..1 << n).filter(|&m| good(m)).collect();
        let mut out: Vec<Vec<usize>> = cands
            .iter()
            .filter(|&&m| !cands.iter().any(|&o| o != m && o & m == m))
            .map(|&m| (0..n).filter(|&v| m >> v & 1 == 1).collect())
            .collect();
        out.sort();
        out
    }

    #[test]
    fn two_triangles_share_cut() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
        let f = biconnected_decomposition(&g);
        assert_eq!(f.blocks, vec![vec![0, 1, 2], vec![2, 3, 4]]);
        assert_eq!(f.cuts, vec![2]);
        assert_eq!(f.roots(), &[0]);
        assert_eq!(f.parent(1), Some(2));
        assert_eq!(f.parent(2), Some(0));
    }

    #[test]
    fn tree_has_edge_blocks() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let f = biconnected_decomposition(&g);
        assert_eq!(f.blocks.len(), 4);
        assert!(f.blocks.iter().all(|b| b.len() == 2));
    }

    #[test]
    fn isolated_vertices_are_blocks() {
        let g = Graph::new(2);
        let f = biconnected_decomposition(&g);
        assert_eq!(f.blocks, vec![vec![0], vec![1]]);
        assert_eq!(f.roots().len(), 2);
    }

    #[test]
    fn reroot_moves_depths() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut f = biconnected_decomposition(&g);
        let last = f.blocks.iter().position(|b| b == &vec![2, 3]).unwrap();
        f.reroot(last);
        assert_eq!(f.depth(last), 0);
        let mid = f.blocks.iter().position(|b| b == &vec![1, 2]).unwrap();
        assert_eq!(f.highest_node_meeting(&[0, 1]), Some(mid));
        assert_eq!(f.depth(f.blocks.iter().position(|b| b == &vec![0, 1]).unwrap()), 4);
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 1usize..=9, bits in proptest::collection::vec(any::<bool>(), 36)) {
            let mut g = Graph::new(n);
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k % bits.len()] && (k * 7 + u) % 3 != 0 {
                        g.add_edge(u, v).unwrap();
                    }
                    k += 1;
                }
            }
            let f = biconnected_decomposition(&g);
            prop_assert_eq!(f.blocks.clone(), brute_blocks(&g));
            for b in 0..f.blocks.len() {
                if let Some(p) = f.parent(b) {
                    let BlockNode::Cut(c) = f.kind(p) else { panic!() };
                    prop_assert!(f.blocks[b].contains(&c));
                }
            }
        }
    }
}
