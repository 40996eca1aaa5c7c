use nalgebra::{DMatrix, DVector};

use crate::error::{LargeError, Result};

/// Relative singular-value floor below which a design is treated as singular.
pub(crate) const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub rss: f64,
    pub fitted: DVector<f64>,
}

/// Least squares fit of `y` on the columns of `z` (no intercept).
pub fn ols_fit(z: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, m) = z.shape();
    if y.len() != n {
        return Err(LargeError::Dimension(format!(
            "design has {n} rows but response has {}",
            y.len()
        )));
    }
    if m == 0 {
        return Ok(OlsFit {
            coefficients: DVector::zeros(0),
            rss: y.norm_squared(),
            fitted: DVector::zeros(n),
        });
    }
    if m >= n {
        return Err(LargeError::Dimension(format!(
            "need m < n, got m={m}, n={n}"
        )));
    }
    let sv = z.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 || sv.min() < RANK_TOL * smax {
        return Err(LargeError::SingularDesign);
    }
    let qr = z.clone().qr();
    let qty = qr.q().transpose() * y;
    let coefficients = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or(LargeError::SingularDesign)?;
    let fitted = z * &coefficients;
    let rss = (y - &fitted).norm_squared();
    Ok(OlsFit {
        coefficients,
        rss,
        fitted,
    })
}

/// Least squares with a growing design, kept as an orthonormal basis of the
/// accepted columns. Evaluating a candidate costs `O(n * k)` for `k` accepted
/// columns.
#[derive(Debug, Clone)]
pub struct IncrementalOls {
    y: DVector<f64>,
    basis: Vec<DVector<f64>>,
    residual: DVector<f64>,
    rss: f64,
}

/// Outcome of orthogonalizing a candidate column against the current basis.
#[derive(Debug, Clone)]
pub struct Candidate {
    q: DVector<f64>,
    pub rss: f64,
}

impl IncrementalOls {
    pub fn new(y: DVector<f64>) -> Self {
        let rss = y.norm_squared();
        IncrementalOls {
            residual: y.clone(),
            y,
            basis: Vec::new(),
            rss,
        }
    }

    pub fn rss(&self) -> f64 {
        self.rss
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn residual(&self) -> &DVector<f64> {
        &self.residual
    }

    pub fn fitted(&self) -> DVector<f64> {
        &self.y - &self.residual
    }

    /// Orthogonalizes `column` (two Gram-Schmidt passes). Errors with
    /// [`LargeError::SingularDesign`] if it is numerically in the span of the basis.
    pub fn evaluate<'a, I>(&self, column: I) -> Result<Candidate>
    where
        I: Into<nalgebra::DVectorView<'a, f64>>,
    {
        let column = column.into();
        let norm0 = column.norm();
        if norm0 == 0.0 {
            return Err(LargeError::SingularDesign);
        }
        let mut v = column.clone_owned();
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm < RANK_TOL * norm0 {
            return Err(LargeError::SingularDesign);
        }
        v /= norm;
        let c = v.dot(&self.residual);
        let rss = (self.rss - c * c).max(0.0);
        Ok(Candidate { q: v, rss })
    }

    pub fn accept(&mut self, cand: Candidate) {
        let c = cand.q.dot(&self.residual);
        self.residual.axpy(-c, &cand.q, 1.0);
        self.rss = self.residual.norm_squared().min(cand.rss.max(0.0)).max(0.0);
        self.basis.push(cand.q);
    }
}
