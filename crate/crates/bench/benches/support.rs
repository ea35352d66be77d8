//! Instance shapes shared by the benches. Kept free of `pcsp-core` types so
//! the helper library builds without the bench-only dependencies.

/// Edges of an `rows × cols` grid, numbered row by row.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    edges
}

/// Pairs of distinct values over `0..d`, i.e. the colouring relation.
pub fn distinct_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|a| (0..d).filter(move |&b| b != a).map(move |b| (a, b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_edge_count() {
        assert_eq!(grid_edges(3, 4).len(), 3 * 3 + 2 * 4);
        assert_eq!(distinct_pairs(3).len(), 6);
    }
}
