//! Shared numerical primitives and domain types.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{LargeError, Result};

/// Relative tolerance used to decide whether a column is mean-zero.
const CENTER_TOL: f64 = 1e-10;

/// `sign(z) * max(|z| - lam, 0)`.
#[inline]
pub fn soft_threshold(z: f64, lam: f64) -> f64 {
    debug_assert!(lam >= 0.0);
    if z > lam {
        z - lam
    } else if z < -lam {
        z + lam
    } else {
        0.0
    }
}

/// An `n x p` observation matrix: rows are samples, columns are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    centered: bool,
}

impl DataMatrix {
    /// Wraps an `n x p` matrix. Requires `n >= 2`, `p >= 2` and finite entries.
    /// The centered flag is detected from the column means.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let (n, p) = values.shape();
        if n < 2 || p < 2 {
            return Err(LargeError::Dimension(format!(
                "data matrix needs n >= 2 and p >= 2, got {n} x {p}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LargeError::NonFinite("data matrix".into()));
        }
        let centered = columns_centered(&values);
        Ok(DataMatrix { values, centered })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(LargeError::Dimension("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Errors with [`LargeError::DegenerateColumn`] on the first zero-variance column.
    pub fn check_nondegenerate(&self) -> Result<()> {
        let n = self.n() as f64;
        for (j, col) in self.values.column_iter().enumerate() {
            let mean = col.sum() / n;
            let scale = col.amax();
            let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if var == 0.0 || var.sqrt() <= 1e-12 * scale {
                return Err(LargeError::DegenerateColumn(j));
            }
        }
        Ok(())
    }

    /// Copy of the data with the given column removed.
    pub fn without_column(&self, j: usize) -> DMatrix<f64> {
        self.values.clone().remove_column(j)
    }

    /// Rows selected by index, re-centered if the source is centered.
    pub fn select_rows(&self, rows: &[usize]) -> Result<DataMatrix> {
        let sub = self.values.select_rows(rows.iter());
        let sub = DataMatrix::new(sub)?;
        Ok(if self.centered {
            center_columns(&sub)
        } else {
            sub
        })
    }
}

fn columns_centered(values: &DMatrix<f64>) -> bool {
    let n = values.nrows() as f64;
    values.column_iter().all(|c| {
        let mean = c.sum() / n;
        mean.abs() <= CENTER_TOL * c.amax().max(f64::MIN_POSITIVE)
    })
}

/// Subtracts each column's mean. Constant columns become exactly zero.
pub fn center_columns(x: &DataMatrix) -> DataMatrix {
    let n = x.n() as f64;
    let mut values = x.values.clone();
    for mut col in values.column_iter_mut() {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            col.fill(0.0);
            continue;
        }
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    let centered = columns_centered(&values);
    DataMatrix { values, centered }
}

/// Symmetric `p x p` sample covariance `S = X'X / n` of centered data.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    values: DMatrix<f64>,
    n: usize,
}

impl CovarianceMatrix {
    /// Wraps an existing matrix; it must be square, finite and exactly symmetric.
    pub fn from_matrix(values: DMatrix<f64>, n: usize) -> Result<Self> {
        if !values.is_square() {
            return Err(LargeError::Dimension("covariance must be square".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LargeError::NonFinite("covariance".into()));
        }
        let p = values.nrows();
        for i in 0..p {
            if values[(i, i)] < 0.0 {
                return Err(LargeError::param("S", "negative diagonal entry"));
            }
            for j in 0..i {
                if values[(i, j)] != values[(j, i)] {
                    return Err(LargeError::param("S", "matrix is not symmetric"));
                }
            }
        }
        Ok(CovarianceMatrix { values, n })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn diag(&self) -> DVector<f64> {
        self.values.diagonal()
    }
}

/// `S = X'X / n`. Rejects data that is not column-centered.
pub fn sample_covariance(x: &DataMatrix) -> Result<CovarianceMatrix> {
    if !x.is_centered() {
        return Err(LargeError::NotCentered);
    }
    let n = x.n();
    let p = x.p();
    let xv = &x.values;
    let mut s = DMatrix::zeros(p, p);
    for j in 0..p {
        let cj = xv.column(j);
        for k in 0..=j {
            let v = cj.dot(&xv.column(k)) / n as f64;
            s[(j, k)] = v;
            s[(k, j)] = v;
        }
    }
    Ok(CovarianceMatrix { values: s, n })
}

/// Blocks of a symmetric matrix after moving row/column `target` to the last
/// position; the remaining indices keep their relative order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub w11: DMatrix<f64>,
    pub w12: DVector<f64>,
    pub w22: f64,
    pub target: usize,
}

impl BlockPartition {
    /// Inverse of [`partition`].
    pub fn reassemble(&self) -> DMatrix<f64> {
        let p = self.w11.nrows() + 1;
        let j = self.target;
        let mut m = DMatrix::zeros(p, p);
        for a in 0..p - 1 {
            let ia = skip_index(a, j);
            for b in 0..p - 1 {
                m[(ia, skip_index(b, j))] = self.w11[(a, b)];
            }
            m[(ia, j)] = self.w12[a];
            m[(j, ia)] = self.w12[a];
        }
        m[(j, j)] = self.w22;
        m
    }
}

/// Maps a position in the reduced `(p-1)` index space back to the full space.
#[inline]
pub(crate) fn skip_index(a: usize, j: usize) -> usize {
    if a < j {
        a
    } else {
        a + 1
    }
}

pub fn partition(m: &DMatrix<f64>, j: usize) -> Result<BlockPartition> {
    let p = m.nrows();
    if !m.is_square() {
        return Err(LargeError::Dimension(
            "partition needs a square matrix".into(),
        ));
    }
    if j >= p {
        return Err(LargeError::IndexOutOfRange { index: j, dim: p });
    }
    let w11 = m.clone().remove_row(j).remove_column(j);
    let w12 = DVector::from_fn(p - 1, |a, _| m[(skip_index(a, j), j)]);
    Ok(BlockPartition {
        w11,
        w12,
        w22: m[(j, j)],
        target: j,
    })
}

/// `<X_j, X_k> / (|X_j| |X_k|)` on centered data.
pub fn marginal_correlation(x: &DataMatrix, j: usize, k: usize) -> Result<f64> {
    let p = x.p();
    for idx in [j, k] {
        if idx >= p {
            return Err(LargeError::IndexOutOfRange { index: idx, dim: p });
        }
    }
    if !x.is_centered() {
        return Err(LargeError::NotCentered);
    }
    let a = x.values.column(j);
    let b = x.values.column(k);
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 {
        return Err(LargeError::DegenerateColumn(j));
    }
    if nb == 0.0 {
        return Err(LargeError::DegenerateColumn(k));
    }
    Ok((a.dot(&b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `(M + M') / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = m.nrows();
    let mut out = m.clone();
    for i in 0..p {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) / 2.0;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Unordered node pair with `i < j`.
pub type NodePair = (usize, usize);

/// Upper-triangle pairs `(i, j)`, `i < j`, with a nonzero entry.
pub fn support_of(theta: &DMatrix<f64>) -> BTreeSet<NodePair> {
    let p = theta.nrows();
    let mut out = BTreeSet::new();
    for j in 1..p {
        for i in 0..j {
            if theta[(i, j)] != 0.0 {
                out.insert((i, j));
            }
        }
    }
    out
}

/// A fitted precision matrix together with per-node diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionEstimate {
    #[serde(skip)]
    pub theta: DMatrix<f64>,
    /// Final working covariance (estimate of the inverse of `theta`).
    #[serde(skip)]
    pub w: DMatrix<f64>,
    /// Per-node noise variance estimates.
    pub sigma2: Vec<f64>,
    /// Per-node noise variance from the first selected model of the first
    /// sweep (LARGE only; empty otherwise).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigma2_initial: Vec<f64>,
    /// Per-node penalty levels.
    pub lambda: Vec<f64>,
    pub support: BTreeSet<NodePair>,
    pub converged: bool,
    pub sweeps: usize,
    pub positive_definite: bool,
    /// Ridge added to the diagonal of `S` before fitting (0 when none).
    pub ridge: f64,
    /// Relative Frobenius change of `W` after each outer sweep.
    pub history: Vec<f64>,
}

impl PrecisionEstimate {
    pub fn p(&self) -> usize {
        self.theta.nrows()
    }

    /// `-theta_ij / sqrt(theta_ii theta_jj)`.
    pub fn partial_correlation(&self, i: usize, j: usize) -> f64 {
        let t = &self.theta;
        -t[(i, j)] / (t[(i, i)] * t[(j, j)]).sqrt()
    }

    /// Fraction of off-diagonal pairs in the support.
    pub fn density(&self) -> f64 {
        let p = self.p();
        self.support.len() as f64 / (p * (p - 1) / 2) as f64
    }
}
