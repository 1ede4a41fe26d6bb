//! Fixed indexing conventions for the vertices and edges of a tetrahedron.
//!
//! Every six-component quantity (edge lengths, dihedral angles) is stored in
//! the pair order (12, 13, 14, 23, 24, 34); every four-component quantity
//! (radii, solid angles) is ordered by vertex. Vertices are zero-based in
//! code, one-based in labels.

pub const VERTEX_COUNT: usize = 4;
pub const EDGE_COUNT: usize = 6;

/// Unordered vertex pairs in the fixed order (12, 13, 14, 23, 24, 34).
pub const EDGE_PAIRS: [(usize, usize); EDGE_COUNT] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// One-based labels matching [`EDGE_PAIRS`], used in reports and messages.
pub const EDGE_LABELS: [&str; EDGE_COUNT] = ["12", "13", "14", "23", "24", "34"];

/// Index of the unordered pair {i, j} in the fixed edge order.
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < VERTEX_COUNT && j < VERTEX_COUNT && i != j);
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => unreachable!("not a vertex pair: ({a}, {b})"),
    }
}

/// The edge sharing no vertex with `edge`: (12, 34), (13, 24), (14, 23).
pub fn opposite_edge(edge: usize) -> usize {
    EDGE_COUNT - 1 - edge
}

/// Indices of the three edges incident to vertex `v`, in pair order.
pub fn edges_at_vertex(v: usize) -> [usize; 3] {
    debug_assert!(v < VERTEX_COUNT);
    let mut out = [0; 3];
    let mut k = 0;
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        if i == v || j == v {
            out[k] = e;
            k += 1;
        }
    }
    out
}

/// Edge index after relabeling vertices by `perm` (old index -> new index).
pub fn permuted_edge(perm: &[usize; 4], edge: usize) -> usize {
    let (i, j) = EDGE_PAIRS[edge];
    pair_index(perm[i], perm[j])
}
