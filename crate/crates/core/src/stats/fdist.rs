use crate::error::{LargeError, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Upper tail `P(F(d1, d2) > x)`.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))
}

/// `P(F(d1, d2) <= x)`.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))
}

/// Upper-`alpha` quantile `q` of `F(d1, d2)`: `P(F > q) = alpha`.
///
/// Brackets the root by doubling and then bisects the survival function
/// until the bracket is relatively narrower than `1e-13`.
pub fn f_quantile(alpha: f64, d1: usize, d2: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LargeError::param(
            "alpha",
            format!("must lie in (0, 1), got {alpha}"),
        ));
    }
    if d1 == 0 || d2 == 0 {
        return Err(LargeError::param(
            "df",
            "degrees of freedom must be positive",
        ));
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f_sf(hi, d1, d2) > alpha {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(LargeError::NonFinite("F quantile bracket".into()));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if f_sf(mid, d1, d2) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Memoized `F(alpha; d1, d2)` cutoffs for a fixed `alpha` and `d1`.
#[derive(Debug, Clone)]
pub struct FCutoffTable {
    alpha: f64,
    d1: usize,
    cache: Vec<f64>,
}

impl FCutoffTable {
    pub fn new(alpha: f64, d1: usize) -> Result<Self> {
        // validate once up front
        f_quantile(alpha, d1.max(1), 1)?;
        if d1 == 0 {
            return Err(LargeError::param(
                "df",
                "degrees of freedom must be positive",
            ));
        }
        Ok(FCutoffTable {
            alpha,
            d1,
            cache: Vec::new(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn get(&mut self, d2: usize) -> f64 {
        if d2 >= self.cache.len() {
            self.cache.resize(d2 + 1, f64::NAN);
        }
        if self.cache[d2].is_nan() {
            self.cache[d2] = f_quantile(self.alpha, self.d1, d2.max(1))
                .expect("parameters validated at construction");
        }
        self.cache[d2]
    }
}
