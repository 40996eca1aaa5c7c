#![allow(dead_code)]

use large_core::dgp::{sample_mvn, GraphSpec};
use large_core::rng::{stream, Rng};
use large_core::{center_columns, DMatrix, DVector, DataMatrix};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub fn normals(rng: &mut Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn normal_vec(rng: &mut Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn centered(x: DMatrix<f64>) -> DataMatrix {
    center_columns(&DataMatrix::new(x).unwrap())
}

pub fn center_vec(v: &DVector<f64>) -> DVector<f64> {
    let m = v.mean();
    v.map(|x| x - m)
}

/// Columns with squared norm `n`, orthogonal to each other and to the
/// constant vector (rows of a Sylvester-Hadamard matrix without the first).
pub fn orthonormal_design(n: usize, m: usize) -> DMatrix<f64> {
    assert!(n.is_power_of_two() && m < n);
    DMatrix::from_fn(n, m, |i, k| {
        if ((i & (k + 1)).count_ones() % 2) == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// Centered sample from a graph.
pub fn sample(graph: &GraphSpec, n: usize, seed: u64) -> DataMatrix {
    center_columns(&sample_mvn(graph, n, &mut stream(seed, 1)).unwrap())
}

/// Fraction of correctly ordered (edge, non-edge) pairs, ties counting one half.
pub fn mann_whitney(scores: &[(f64, bool)]) -> f64 {
    let pos: Vec<f64> = scores.iter().filter(|s| s.1).map(|s| s.0).collect();
    let neg: Vec<f64> = scores.iter().filter(|s| !s.1).map(|s| s.0).collect();
    let mut acc = 0.0;
    for &a in &pos {
        for &b in &neg {
            acc += if a > b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            };
        }
    }
    acc / (pos.len() * neg.len()) as f64
}
