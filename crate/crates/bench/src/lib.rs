//! Fixtures shared by the benchmarks.

use large_core::dgp::{sample_mvn, Family};
use large_core::rng::stream;
use large_core::{center_columns, DataMatrix};

/// Centered sample of `n` rows from a freshly drawn `family` graph on `p` nodes.
pub fn fixture(family: Family, n: usize, p: usize, seed: u64) -> DataMatrix {
    let graph = family.generate(p, &mut stream(seed, 0)).expect("graph");
    let x = sample_mvn(&graph, n, &mut stream(seed, 1)).expect("sample");
    center_columns(&x)
}
