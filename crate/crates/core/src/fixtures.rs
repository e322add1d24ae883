//! Small named graphs and matrices used by tests, the CLI self-checks and
//! the FFI examples.

use crate::bimodule::ConjugacyPair;
use crate::com::com_from_elementary_sse;
use crate::graph::{Graph, NonNegMatrix};
use crate::scalar::Field;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// One vertex `v` with loops `e1`, `e2`.
pub fn two_loops() -> Graph {
    Graph::new(names(&["v"]), &[("e1", "v", "v"), ("e2", "v", "v")]).expect("valid graph")
}

/// Vertices `x`, `y`; loops `f1` at `x`, `f2` at `y`; `g1: x→y`, `g2: y→x`.
pub fn full_two_vertex() -> Graph {
    Graph::new(
        names(&["x", "y"]),
        &[("f1", "x", "x"), ("f2", "y", "y"), ("g1", "x", "y"), ("g2", "y", "x")],
    )
    .expect("valid graph")
}

/// `R = (1 1)` over rows `{v}` and columns `{x, y}`.
pub fn row_factor() -> NonNegMatrix {
    NonNegMatrix::from_u64(names(&["v"]), names(&["x", "y"]), &[vec![1, 1]]).expect("1x2")
}

/// `S = (1; 1)` over rows `{x, y}` and columns `{v}`.
pub fn column_factor() -> NonNegMatrix {
    NonNegMatrix::from_u64(names(&["x", "y"]), names(&["v"]), &[vec![1], vec![1]]).expect("2x1")
}

/// A single vertex with one loop; its adjacency matrix is the identity.
pub fn one_loop() -> Graph {
    Graph::new(names(&["v"]), &[("e", "v", "v")]).expect("valid graph")
}

/// The worked pairs `(kG^1, σ_R)` from `two_loops` to `full_two_vertex` and
/// `(kH^1, σ_S)` back, built from `row_factor` and `column_factor`.
pub fn example_pairs() -> (ConjugacyPair, ConjugacyPair) {
    let w = com_from_elementary_sse(
        &two_loops(),
        &full_two_vertex(),
        &row_factor(),
        &column_factor(),
        Field::Rational,
    )
    .expect("elementary factorization");
    (w.pair_m().expect("shapes match"), w.pair_n().expect("shapes match"))
}
