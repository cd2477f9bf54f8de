//! Benchmark inputs shared by the criterion targets.

use cavity_core::graph::generate;
use cavity_core::{Graph, GraphKind, NamedGraph};

pub fn named(name: NamedGraph) -> Graph {
    generate(&GraphKind::Named(name)).expect("named graphs are valid")
}

/// Cubic graph on `n` nodes with a fixed seed.
pub fn cubic(n: usize) -> Graph {
    generate(&GraphKind::RandomRegular { n, r: 3, seed: 1 }).expect("n is even")
}
