//! Partitions of a bag, stored as one block label per bag position with
//! labels numbered by first occurrence.

use crate::graph::UnionFind;

pub type Labels = Vec<u8>;

/// Relabels so the first position gets 0, the next new block 1, and so on.
pub fn canonical(labels: &[u8]) -> Labels {
    let mut map = [u8::MAX; 256];
    let mut next = 0u8;
    labels
        .iter()
        .map(|&l| {
            if map[l as usize] == u8::MAX {
                map[l as usize] = next;
                next += 1;
            }
            map[l as usize]
        })
        .collect()
}

pub fn block_count(labels: &[u8]) -> usize {
    labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
}

/// Finest common coarsening of two partitions of the same positions.
/// Returns the joined labels and, for each input, old label → new label.
pub fn join(p1: &[u8], p2: &[u8]) -> (Labels, Vec<u8>, Vec<u8>) {
    let (k1, k2) = (block_count(p1), block_count(p2));
    let mut uf = UnionFind::new(k1 + k2);
    for (&a, &b) in p1.iter().zip(p2) {
        uf.union(a as usize, k1 + b as usize);
    }
    let raw: Vec<u8> = p1.iter().map(|&a| uf.find(a as usize) as u8).collect();
    let out = canonical(&raw);
    let mut m1 = vec![0u8; k1];
    let mut m2 = vec![0u8; k2];
    for i in 0..p1.len() {
        m1[p1[i] as usize] = out[i];
        m2[p2[i] as usize] = out[i];
    }
    (out, m1, m2)
}
