//! Checks of the statistical building blocks against independently computed
//! reference values.

mod common;

use common::*;
use large_core::autotune::{
    autotune_lasso, cd_sweep, lambda0_init, normalize_columns, AutotuneOptions, AutotuneState,
};
use large_core::rng::stream;
use large_core::stats::{f_quantile, ols_fit, sequential_f_select, variance};
use large_core::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;

/// Upper `alpha` quantile of F(1, d2) by bisection on statrs' regularized
/// incomplete beta: `P(F <= x) = I_{x / (x + d2)}(1/2, d2/2)`.
fn oracle_f1(alpha: f64, d2: f64) -> f64 {
    let cdf = |x: f64| beta_reg(0.5, d2 / 2.0, x / (x + d2));
    let (mut lo, mut hi) = (0.0, 1.0);
    while cdf(hi) < 1.0 - alpha {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < 1.0 - alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn f_quantile_matches_beta_oracle_on_grid() {
    let alphas = [0.001, 0.01, 0.02, 0.05, 0.1, 0.5];
    let d2s = [1usize, 5, 20, 100, 1000];
    for &a in &alphas {
        for &d2 in &d2s {
            let ours = f_quantile(a, 1, d2).unwrap();
            let oracle = oracle_f1(a, d2 as f64);
            assert!(
                ((ours - oracle) / oracle).abs() < 1e-4,
                "alpha {a} d2 {d2}: {ours} vs {oracle}"
            );
        }
    }
}

#[test]
fn f_quantile_is_squared_t_quantile() {
    // F(1, d) is the square of a t(d) variable.
    for &d2 in &[3usize, 10, 48, 250] {
        for &a in &[0.02, 0.05] {
            let t = StudentsT::new(0.0, 1.0, d2 as f64)
                .unwrap()
                .inverse_cdf(1.0 - a / 2.0);
            let ours = f_quantile(a, 1, d2).unwrap();
            assert!(((ours - t * t) / ours).abs() < 1e-6, "d2 {d2} alpha {a}");
        }
    }
}

#[test]
fn f_quantile_tabulated_values() {
    assert!((f_quantile(0.05, 1, 10).unwrap() - 4.9646).abs() < 1e-4);
    assert!((f_quantile(0.01, 1, 20).unwrap() - 8.0960).abs() < 1e-4);
    assert!((f_quantile(0.05, 1, 100_000).unwrap() - 3.8415).abs() < 1e-3);
}

#[test]
fn ols_matches_normal_equations() {
    let mut rng = stream(11, 0);
    for m in [1usize, 3, 7] {
        let z = normals(&mut rng, 40, m);
        let y = normal_vec(&mut rng, 40);
        let fit = ols_fit(&z, &y).unwrap();
        let zt = z.transpose();
        let beta = (&zt * &z).try_inverse().unwrap() * (&zt * &y);
        assert!((&fit.coefficients - &beta).amax() < 1e-10);
        let rss = (&y - &z * &beta).norm_squared();
        assert!((fit.rss - rss).abs() < 1e-9 * rss.max(1.0));
        assert!((&fit.fitted - &z * &beta).amax() < 1e-10);
    }
}

#[test]
fn f_select_exact_multiple() {
    let mut rng = stream(3, 0);
    let z = normals(&mut rng, 30, 4);
    let y: DVector<f64> = z.column(0) * 3.0;
    let r = sequential_f_select(&y, &z, &[0, 1, 2, 3], 0.02).unwrap();
    assert_eq!(r.support, vec![0]);
    assert_eq!(r.sigma2_hat, 0.0);
}

#[test]
fn f_select_orthonormal_two_signals() {
    let n = 128;
    let z = orthonormal_design(n, 8) / (n as f64).sqrt();
    let mut rng = stream(5, 0);
    let ranking: Vec<usize> = (0..8).collect();
    let mut hits = 0;
    for _ in 0..20 {
        let noise = center_vec(&normal_vec(&mut rng, n)) * 0.1;
        let y = z.column(0) * 2.0 + z.column(1) * 1.0 + noise;
        let r = sequential_f_select(&y, &z, &ranking, 0.02).unwrap();
        if r.support.len() >= 2 && r.support[..2] == [0, 1] {
            hits += 1;
            assert!(
                r.sigma2_hat > 0.005 && r.sigma2_hat < 0.02,
                "{}",
                r.sigma2_hat
            );
        }
    }
    // Both true predictors come first in the ranking and dominate the noise.
    assert_eq!(hits, 20);
}

#[test]
fn f_select_noise_rejection_rate() {
    // Under pure noise the first test rejects with probability alpha.
    let n = 200;
    let mut rng = stream(17, 0);
    let reps = 1000;
    let mut empty = 0;
    for _ in 0..reps {
        let z = DMatrix::from_fn(n, 1, |_, _| {
            rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng)
        });
        let y = normal_vec(&mut rng, n);
        let r = sequential_f_select(&y, &z, &[0], 0.02).unwrap();
        if r.support.is_empty() {
            assert!((r.sigma2_hat - y.norm_squared() / n as f64).abs() < 1e-12);
            empty += 1;
        }
    }
    let rate = empty as f64 / reps as f64;
    assert!((rate - 0.98).abs() <= 0.02, "empty-support rate {rate}");
}

#[test]
fn f_select_sigma2_is_consistent() {
    // The spread of sigma2_hat around the truth shrinks like 1/sqrt(n):
    // doubling n twice should roughly halve it.
    let spread = |n: usize| {
        let mut rng = stream(23, n as u64);
        let reps = 300;
        let mut acc = 0.0;
        for _ in 0..reps {
            let z = normals(&mut rng, n, 3);
            let y = z.column(0) * 1.5 - z.column(1) * 1.0 + normal_vec(&mut rng, n);
            let r = sequential_f_select(&y, &z, &[0, 1, 2], 0.02).unwrap();
            acc += (r.sigma2_hat - 1.0).abs();
        }
        acc / reps as f64
    };
    let (s100, s400) = (spread(100), spread(400));
    let ratio = s100 / s400;
    assert!(ratio > 1.6 && ratio < 2.5, "spread ratio {ratio}");
}

#[test]
fn cd_sweep_orthonormal_closed_form() {
    // With orthonormal columns one sweep from zero is the exact lasso:
    // beta_k = soft(z_k' y / n, lambda).
    let n = 64;
    let z = orthonormal_design(n, 5);
    let mut rng = stream(8, 0);
    let y = center_vec(
        &(&z * DVector::from_vec(vec![1.5, -0.2, 0.0, 0.8, -1.1]) + normal_vec(&mut rng, n) * 0.3),
    );
    let mut st = AutotuneState::new(&y, &z, &AutotuneOptions::default()).unwrap();
    st.sigma2 = 0.7;
    cd_sweep(&mut st, &z, &[0, 1, 2, 3, 4]);
    let lam = st.lambda();
    for k in 0..5 {
        let c = z.column(k).dot(&y) / n as f64;
        let expect = c.signum() * (c.abs() - lam).max(0.0);
        assert!((st.beta[k] - expect).abs() < 1e-10, "coordinate {k}");
    }
    assert!((&st.residual - (&y - &z * &st.beta)).amax() < 1e-10);
}

/// Proximal gradient lasso on `(1/2n)|y - Z b|^2 + lam |b|_1`.
fn ista(y: &DVector<f64>, z: &DMatrix<f64>, lam: f64) -> DVector<f64> {
    let n = y.len() as f64;
    let g = z.transpose() * z / n;
    let step = 1.0 / g.symmetric_eigenvalues().max();
    let zy = z.transpose() * y / n;
    let mut b = DVector::zeros(z.ncols());
    for _ in 0..200_000 {
        let grad = &g * &b - &zy;
        let next = (&b - grad * step).map(|v| v.signum() * (v.abs() - step * lam).max(0.0));
        let done = (&next - &b).amax() < 1e-15;
        b = next;
        if done {
            break;
        }
    }
    b
}

#[test]
fn pinned_sigma_reproduces_plain_lasso() {
    let mut rng = stream(31, 0);
    let raw = normals(&mut rng, 50, 10);
    let zc = centered(raw);
    let (z, _) = normalize_columns(zc.values()).unwrap();
    let y = center_vec(&(z.column(0) * 1.0 - z.column(3) * 0.5 + normal_vec(&mut rng, 50)));
    let c = 0.8;
    let opts = AutotuneOptions {
        sigma_update: false,
        sigma2_init: Some(c),
        tol: 1e-14,
        max_iter: 100_000,
        ..AutotuneOptions::default()
    };
    let fit = autotune_lasso(&y, &z, &opts).unwrap();
    let lam0 = lambda0_init(&y, &z).unwrap();
    assert_eq!(fit.lambda, lam0 * c);
    let reference = ista(&y, &z, lam0 * c);
    let ours = DVector::from_vec(fit.beta.clone());
    assert!((&ours - &reference).amax() < 1e-8, "{ours} vs {reference}");
}

#[test]
fn noiseless_target_drives_lambda_to_zero() {
    let n = 64;
    let z = orthonormal_design(n, 6);
    let y: DVector<f64> = z.column(0) * 5.0;
    let fit = autotune_lasso(&y, &z, &AutotuneOptions::default()).unwrap();
    assert!(fit.sigma2 < 1e-12);
    assert!(fit.lambda < 1e-12);
    assert!((fit.beta[0] - 5.0).abs() < 1e-4);
}

/// With the penalty scaled as printed, `lambda = lambda0 * Var(y)` equals half
/// the largest covariance, so the first sweep always admits the most
/// correlated noise predictor and beta is not exactly zero.
#[test]
#[ignore = "not attainable with lambda0 = |Z'y/(2n)|_inf / Var(y); see notes"]
fn pure_noise_keeps_beta_zero() {
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = stream(seed, 0);
        let zc = centered(normals(&mut rng, 200, 49));
        let (z, _) = normalize_columns(zc.values()).unwrap();
        let y = center_vec(&normal_vec(&mut rng, 200));
        let fit = autotune_lasso(&y, &z, &AutotuneOptions::default()).unwrap();
        let var = variance(y.as_slice());
        if fit.beta.iter().all(|&b| b == 0.0) && ((fit.sigma2 - var) / var).abs() < 0.1 {
            hits += 1;
        }
    }
    assert!(hits >= 90, "{hits}/100");
}

#[test]
fn pure_noise_sigma2_near_variance() {
    // The part of the noise example that does hold: the F-test finds no
    // predictor and sigma2 stays near Var(y).
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = stream(seed, 0);
        let zc = centered(normals(&mut rng, 200, 49));
        let (z, _) = normalize_columns(zc.values()).unwrap();
        let y = center_vec(&normal_vec(&mut rng, 200));
        let fit = autotune_lasso(&y, &z, &AutotuneOptions::default()).unwrap();
        let var = variance(y.as_slice());
        if ((fit.sigma2 - var) / var).abs() < 0.1 {
            hits += 1;
        }
    }
    assert!(hits >= 90, "{hits}/100");
}
