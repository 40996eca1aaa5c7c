mod common;

use common::*;
use large_core::dgp::{
    block_bounds, make_band, make_block, make_hub, make_random, sample_mvn, Family, GraphSpec,
    DEFAULT_ALPHAS, PD_MARGIN,
};
use large_core::matrix::min_eigenvalue;
use large_core::metrics::{auroc, rmse_off, roc_curve, support_metrics};
use large_core::rng::stream;
use large_core::{sample_covariance, DMatrix};
use proptest::prelude::*;

fn graph_with_edges(p: usize, edges: &[(usize, usize)]) -> GraphSpec {
    let mut t = DMatrix::identity(p, p);
    for &(i, j) in edges {
        t[(i, j)] = 0.1;
        t[(j, i)] = 0.1;
    }
    GraphSpec::from_theta(Family::Custom, t, [1.0; 3]).unwrap()
}

fn scores_matrix(p: usize, entries: &[((usize, usize), f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::identity(p, p);
    for &((i, j), v) in entries {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    m
}

fn upper_pairs(theta_hat: &DMatrix<f64>, truth: &GraphSpec) -> Vec<(f64, bool)> {
    let p = truth.p();
    let mut v = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            v.push((theta_hat[(i, j)].abs(), truth.is_edge(i, j)));
        }
    }
    v
}

#[test]
fn block_edge_count_within_binomial_band() {
    let mean = 3.0 * (100.0 * 99.0 / 2.0) * 0.01;
    let sd = (3.0 * (100.0 * 99.0 / 2.0) * 0.01 * 0.99f64).sqrt();
    for seed in 0..5 {
        let g = make_block(300, 0.01, 0.4, DEFAULT_ALPHAS, &mut stream(seed, 0)).unwrap();
        let k = g.edges.len() as f64;
        assert!((k - mean).abs() <= 3.0 * sd, "seed {seed}: {k} edges");
        for e in &g.edges {
            assert_eq!(g.block_of(e.0), g.block_of(e.1));
        }
    }
}

#[test]
fn block_and_hub_positive_definite_over_seeds() {
    for seed in 0..50 {
        let b = make_block(100, 0.01, 0.4, DEFAULT_ALPHAS, &mut stream(seed, 0)).unwrap();
        assert!(min_eigenvalue(&b.theta) > 0.0, "block seed {seed}");
        let h = make_hub(90, DEFAULT_ALPHAS, 0.3, &mut stream(seed, 0)).unwrap();
        assert!(min_eigenvalue(&h.theta) > 0.0, "hub seed {seed}");
    }
}

#[test]
fn random_edge_values_follow_block_scaling() {
    let mut unrepaired = 0;
    for seed in 0..40 {
        let g = make_random(100, 0.01, 0.4, DEFAULT_ALPHAS, &mut stream(seed, 0)).unwrap();
        // The PD repair scales every edge by one common factor.
        let mut factors = Vec::new();
        for e in &g.edges {
            let base = match (g.block_of(e.0), g.block_of(e.1)) {
                (0, 0) => 4.0,
                (0, 1) | (1, 0) => 0.4 * 10f64.sqrt(),
                (a, b) => 0.4 * (DEFAULT_ALPHAS[a] * DEFAULT_ALPHAS[b]).sqrt(),
            };
            factors.push(g.theta[(e.0, e.1)] / base);
        }
        if factors.is_empty() {
            continue;
        }
        let c = factors[0];
        assert!(c > 0.0 && c <= 1.0);
        assert!(factors.iter().all(|f| (f - c).abs() < 1e-12), "seed {seed}");
        if c == 1.0 {
            unrepaired += 1;
            let has = |a: usize, b: usize| {
                g.edges.iter().any(|e| {
                    let (x, y) = (g.block_of(e.0), g.block_of(e.1));
                    (x, y) == (a, b) || (x, y) == (b, a)
                })
            };
            if has(0, 0) {
                let e = g
                    .edges
                    .iter()
                    .find(|e| g.block_of(e.0) == 0 && g.block_of(e.1) == 0)
                    .unwrap();
                assert_eq!(g.theta[(e.0, e.1)], 4.0);
            }
            if has(0, 1) {
                let e = g
                    .edges
                    .iter()
                    .find(|e| {
                        g.block_of(e.0).min(g.block_of(e.1)) == 0
                            && g.block_of(e.0).max(g.block_of(e.1)) == 1
                    })
                    .unwrap();
                assert!((g.theta[(e.0, e.1)] - 1.2649110640673518).abs() < 1e-12);
            }
        }
    }
    assert!(unrepaired > 0, "no seed left the raw values in place");
}

#[test]
fn ensure_pd_margin_holds() {
    for seed in 0..20 {
        let g = make_random(60, 0.1, 0.4, DEFAULT_ALPHAS, &mut stream(seed, 0)).unwrap();
        let min_diag = g.theta.diagonal().min();
        assert!(min_eigenvalue(&g.theta) >= PD_MARGIN * min_diag - 1e-8);
    }
}

#[test]
fn identity_sample_covariance() {
    let g = GraphSpec::from_theta(Family::Custom, DMatrix::identity(3, 3), [1.0; 3]).unwrap();
    let x = sample(&g, 100_000, 7);
    let s = sample_covariance(&x).unwrap();
    assert!((s.values() - DMatrix::<f64>::identity(3, 3)).amax() < 0.03);
}

#[test]
fn band_partial_correlations_recovered() {
    let g = make_band(6, 1, DEFAULT_ALPHAS).unwrap();
    let x = sample(&g, 100_000, 9);
    let inv = sample_covariance(&x)
        .unwrap()
        .values()
        .clone()
        .try_inverse()
        .unwrap();
    for i in 0..6 {
        for j in 0..6 {
            if i == j {
                continue;
            }
            let t = &g.theta;
            let truth = -t[(i, j)] / (t[(i, i)] * t[(j, j)]).sqrt();
            let est = -inv[(i, j)] / (inv[(i, i)] * inv[(j, j)]).sqrt();
            assert!((truth - est).abs() < 0.02, "({i},{j}): {est} vs {truth}");
        }
    }
}

#[test]
fn column_means_shrink_with_n() {
    for fam in [Family::Band1, Family::Hub, Family::Random] {
        let g = fam.generate(30, &mut stream(3, 0)).unwrap();
        let sigma = g.theta.clone().try_inverse().unwrap();
        for seed in 0..10 {
            for n in [100, 1000, 10_000] {
                let x = sample_mvn(&g, n, &mut stream(seed, 1)).unwrap();
                for j in 0..30 {
                    let m = x.values().column(j).mean();
                    assert!(
                        m.abs() < 4.0 * (sigma[(j, j)] / n as f64).sqrt(),
                        "{fam} seed {seed} n {n} col {j}"
                    );
                }
            }
        }
    }
}

#[test]
fn graph_invariants_over_seeds() {
    for p in [30, 100] {
        let bounds = block_bounds(p);
        for seed in 0..100 {
            for fam in Family::ALL {
                let g = fam.generate(p, &mut stream(seed, 0)).unwrap();
                assert!(min_eigenvalue(&g.theta) > 0.0, "{fam} p {p} seed {seed}");
                assert_eq!(g.theta, g.theta.transpose());
                for (k, r) in bounds.iter().enumerate() {
                    for i in r.clone() {
                        assert_eq!(g.theta[(i, i)], DEFAULT_ALPHAS[k]);
                        assert_eq!(g.block_of(i), k);
                    }
                }
                if fam != Family::Random {
                    assert!(g.edges.iter().all(|e| g.block_of(e.0) == g.block_of(e.1)));
                }
                let again = fam.generate(p, &mut stream(seed, 0)).unwrap();
                assert_eq!(g.theta, again.theta);
            }
        }
    }
}

#[test]
fn hand_enumerated_roc() {
    // scores e01 .9, e02 .2, e03 0, e12 .5, e13 0, e23 .1; truth {01, 12, 23}
    let truth = graph_with_edges(4, &[(0, 1), (1, 2), (2, 3)]);
    let hat = scores_matrix(
        4,
        &[((0, 1), 0.9), ((0, 2), 0.2), ((1, 2), 0.5), ((2, 3), 0.1)],
    );
    let curve = roc_curve(&hat, &truth).unwrap();
    let third = 1.0 / 3.0;
    let expected = [
        (0.0, 0.0),
        (0.0, third),
        (0.0, 2.0 * third),
        (third, 2.0 * third),
        (third, 1.0),
        (1.0, 1.0),
        (1.0, 1.0),
    ];
    assert_eq!(curve.points.len(), 7);
    for (a, b) in curve.points.iter().zip(expected) {
        assert!(
            (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15,
            "{a:?} vs {b:?}"
        );
    }
    assert_eq!(&curve.thresholds[1..6], &[0.9, 0.5, 0.2, 0.1, 0.0]);
    // 8 of 9 (edge, non-edge) pairs ordered correctly
    let a = auroc(&curve);
    assert!((a - 8.0 / 9.0).abs() < 1e-15);
    assert!((a - mann_whitney(&upper_pairs(&hat, &truth))).abs() < 1e-15);
}

#[test]
fn support_count_by_hand() {
    let truth = make_band(6, 1, DEFAULT_ALPHAS).unwrap();
    let hat = scores_matrix(6, &[((0, 1), 0.5), ((0, 2), 0.5)]);
    let m = support_metrics(&hat, &truth).unwrap();
    assert_eq!((m.tp, m.fp, m.fn_, m.tn), (1, 1, 2, 11));
}

fn instance() -> impl Strategy<Value = (usize, Vec<bool>, Vec<f64>)> {
    (3usize..=8).prop_flat_map(|p| {
        let m = p * (p - 1) / 2;
        (
            Just(p),
            prop::collection::vec(any::<bool>(), m),
            prop::collection::vec(0.0f64..1.0, m),
        )
    })
}

fn build(p: usize, edges: &[bool], scores: &[f64]) -> Option<(GraphSpec, DMatrix<f64>)> {
    if edges.iter().all(|&e| e) || edges.iter().all(|&e| !e) {
        return None;
    }
    let mut pairs = Vec::new();
    let mut entries = Vec::new();
    let mut k = 0;
    for i in 0..p {
        for j in i + 1..p {
            if edges[k] {
                pairs.push((i, j));
            }
            // quantize so ties occur
            entries.push(((i, j), (scores[k] * 8.0).floor() / 8.0));
            k += 1;
        }
    }
    Some((graph_with_edges(p, &pairs), scores_matrix(p, &entries)))
}

proptest! {
    #[test]
    fn auroc_is_mann_whitney((p, edges, scores) in instance()) {
        if let Some((truth, hat)) = build(p, &edges, &scores) {
            let a = auroc(&roc_curve(&hat, &truth).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a - mann_whitney(&upper_pairs(&hat, &truth))).abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_scores_flip_auroc((p, edges, scores) in instance()) {
        let mut distinct = scores.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        // tie-free instances only; scores are kept away from zero
        if distinct.len() == scores.len() {
            let mut pairs = Vec::new();
            let mut fwd = Vec::new();
            let mut rev = Vec::new();
            let mut k = 0;
            for i in 0..p {
                for j in i + 1..p {
                    if edges[k] {
                        pairs.push((i, j));
                    }
                    fwd.push(((i, j), 1.0 + scores[k]));
                    rev.push(((i, j), 2.0 - scores[k]));
                    k += 1;
                }
            }
            if !pairs.is_empty() && pairs.len() < edges.len() {
                let truth = graph_with_edges(p, &pairs);
                let a = auroc(&roc_curve(&scores_matrix(p, &fwd), &truth).unwrap());
                let b = auroc(&roc_curve(&scores_matrix(p, &rev), &truth).unwrap());
                prop_assert!((a + b - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn roc_invariant_to_monotone_transform((p, edges, scores) in instance()) {
        if let Some((truth, hat)) = build(p, &edges, &scores) {
            let transformed = hat.map(|v| v.signum() * (v.abs().powi(3) + 2.0 * v.abs()));
            let a = roc_curve(&hat, &truth).unwrap();
            let b = roc_curve(&transformed, &truth).unwrap();
            prop_assert_eq!(a.points, b.points);
        }
    }

    #[test]
    fn rmse_invariant_to_permutation(seed in 0u64..1000, shift in 1usize..9) {
        let g = make_random(10, 0.3, 0.4, DEFAULT_ALPHAS, &mut stream(seed, 0)).unwrap();
        prop_assume!(!g.edges.is_empty());
        let hat = g.theta.map(|v| v * 0.8 + 0.01);
        let perm: Vec<usize> = (0..10).map(|i| (i + shift) % 10).collect();
        let pm = |m: &DMatrix<f64>| DMatrix::from_fn(10, 10, |i, j| m[(perm[i], perm[j])]);
        let a = rmse_off(&hat, &g.theta).unwrap();
        let b = rmse_off(&pm(&hat), &pm(&g.theta)).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }
}
