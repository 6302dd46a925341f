//! Networks, node covariates, pair matrices and dyadic designs.
//!
//! All per-dyad vectors in the crate share one canonical ordering: row-major
//! over unordered pairs `i < j`, see [`pair_index`] and [`pairs`].

mod design;
mod graph;
mod nodes;

pub use design::{build_dyad_design, load_pair_matrix, DyadDesign, PairMatrix};
pub use graph::{
    degree_sequence, geodesic_distance_matrix, load_network, load_network_path, EdgeOptions,
    HopMatrix, Network, UNREACHABLE,
};
pub use nodes::{ColumnKind, NodeColumn, NodeTable, UnitScales};

/// Number of unordered pairs among `n` nodes.
pub fn n_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in the canonical ordering.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Iterator over all pairs `(i, j)`, `i < j`, in canonical order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}
