//! Ground-truth precision matrices and a seeded Gaussian sampler.
//!
//! Every family splits the nodes into three contiguous blocks whose diagonal
//! entries are `alphas[0]`, `alphas[1]`, `alphas[2]` (10, 1 and 0.5 by
//! default). Edge magnitudes scale with the diagonal of their block.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LargeError, Result};
use crate::matrix::{min_eigenvalue, support_of, DataMatrix, NodePair};
use crate::rng::Rng;

pub const DEFAULT_ALPHAS: [f64; 3] = [10.0, 1.0, 0.5];
/// Eigenvalue margin, relative to the smallest diagonal entry, kept by
/// [`ensure_pd`] in the random families.
pub const PD_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Band1,
    Band2,
    Block,
    Hub,
    Random,
    /// A user-supplied matrix.
    Custom,
}

impl Family {
    /// The five generated families.
    pub const ALL: [Family; 5] = [
        Family::Band1,
        Family::Band2,
        Family::Block,
        Family::Hub,
        Family::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Band1 => "band1",
            Family::Band2 => "band2",
            Family::Block => "block",
            Family::Hub => "hub",
            Family::Random => "random",
            Family::Custom => "custom",
        }
    }

    /// Builds a graph of this family with default parameters.
    pub fn generate(self, p: usize, rng: &mut Rng) -> Result<GraphSpec> {
        let a = DEFAULT_ALPHAS;
        match self {
            Family::Band1 => make_band(p, 1, a),
            Family::Band2 => make_band(p, 2, a),
            Family::Block => make_block(p, 0.01, 0.4, a, rng),
            Family::Hub => make_hub(p, a, 0.3, rng),
            Family::Random => make_random(p, 0.01, 0.4, a, rng),
            Family::Custom => Err(LargeError::param(
                "family",
                "custom graphs are not generated",
            )),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = LargeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "band1" => Ok(Family::Band1),
            "band2" => Ok(Family::Band2),
            "block" => Ok(Family::Block),
            "hub" => Ok(Family::Hub),
            "random" => Ok(Family::Random),
            "custom" => Ok(Family::Custom),
            _ => Err(LargeError::param(
                "family",
                format!("unknown family {s:?}; expected band1, band2, block, hub or random"),
            )),
        }
    }
}

/// A ground-truth precision matrix with its edge set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GraphRecord", try_from = "GraphRecord")]
pub struct GraphSpec {
    pub family: Family,
    pub theta: DMatrix<f64>,
    /// Upper-triangle pairs with a nonzero entry.
    pub edges: BTreeSet<NodePair>,
    pub alphas: [f64; 3],
    pub block_bounds: [Range<usize>; 3],
}

impl GraphSpec {
    /// Wraps an arbitrary symmetric positive definite matrix.
    pub fn from_theta(family: Family, theta: DMatrix<f64>, alphas: [f64; 3]) -> Result<Self> {
        let p = theta.nrows();
        if !theta.is_square() || p < 3 {
            return Err(LargeError::Dimension(
                "theta must be square with p >= 3".into(),
            ));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(LargeError::NonFinite("theta".into()));
        }
        if theta != theta.transpose() {
            return Err(LargeError::param("theta", "must be symmetric"));
        }
        if !(min_eigenvalue(&theta) > 0.0) {
            return Err(LargeError::param("theta", "must be positive definite"));
        }
        Ok(GraphSpec {
            family,
            edges: support_of(&theta),
            theta,
            alphas,
            block_bounds: block_bounds(p),
        })
    }

    pub fn p(&self) -> usize {
        self.theta.nrows()
    }

    /// Block index of node `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_bounds
            .iter()
            .position(|r| r.contains(&i))
            .expect("node in range")
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    family: Family,
    p: usize,
    alphas: [f64; 3],
    edges: Vec<(usize, usize, f64)>,
    diag: Vec<f64>,
}

impl From<GraphSpec> for GraphRecord {
    fn from(g: GraphSpec) -> Self {
        GraphRecord {
            family: g.family,
            p: g.p(),
            alphas: g.alphas,
            edges: g
                .edges
                .iter()
                .map(|&(i, j)| (i, j, g.theta[(i, j)]))
                .collect(),
            diag: g.theta.diagonal().iter().copied().collect(),
        }
    }
}

impl TryFrom<GraphRecord> for GraphSpec {
    type Error = LargeError;

    fn try_from(r: GraphRecord) -> Result<Self> {
        if r.diag.len() != r.p {
            return Err(LargeError::Dimension("diag length differs from p".into()));
        }
        let mut theta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(r.diag));
        for (i, j, v) in r.edges {
            if i >= r.p || j >= r.p || i == j {
                return Err(LargeError::param(
                    "edges",
                    format!("invalid pair ({i}, {j})"),
                ));
            }
            theta[(i, j)] = v;
            theta[(j, i)] = v;
        }
        GraphSpec::from_theta(r.family, theta, r.alphas)
    }
}

/// Three contiguous blocks whose sizes differ by at most one, larger last.
pub fn block_bounds(p: usize) -> [Range<usize>; 3] {
    let base = p / 3;
    let rem = p % 3;
    let sizes = [
        base,
        base + usize::from(rem >= 2),
        base + usize::from(rem >= 1),
    ];
    let b1 = sizes[0];
    let b2 = b1 + sizes[1];
    [0..b1, b1..b2, b2..p]
}

fn check_common(p: usize, min_p: usize, alphas: [f64; 3]) -> Result<()> {
    if p < min_p {
        return Err(LargeError::param("p", format!("must be >= {min_p}")));
    }
    if alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(LargeError::param("alphas", "must be positive"));
    }
    Ok(())
}

fn check_prob(sparsity: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(LargeError::param("sparsity", "must lie in [0, 1]"));
    }
    Ok(())
}

fn block_diagonal(p: usize, alphas: [f64; 3]) -> DMatrix<f64> {
    let mut theta = DMatrix::zeros(p, p);
    for (k, r) in block_bounds(p).iter().enumerate() {
        for i in r.clone() {
            theta[(i, i)] = alphas[k];
        }
    }
    theta
}

fn set_pair(theta: &mut DMatrix<f64>, i: usize, j: usize, v: f64) {
    theta[(i, j)] = v;
    theta[(j, i)] = v;
}

/// Banded blocks: first off-diagonal `0.3 alpha_k`, and for `order = 2` also a
/// second off-diagonal `0.2 alpha_k`. No cross-block edges.
pub fn make_band(p: usize, order: usize, alphas: [f64; 3]) -> Result<GraphSpec> {
    check_common(p, 6, alphas)?;
    if !(1..=2).contains(&order) {
        return Err(LargeError::param("order", "must be 1 or 2"));
    }
    let family = if order == 1 {
        Family::Band1
    } else {
        Family::Band2
    };
    let mut theta = block_diagonal(p, alphas);
    for (k, r) in block_bounds(p).iter().enumerate() {
        for i in r.clone() {
            if i + 1 < r.end {
                set_pair(&mut theta, i, i + 1, 0.3 * alphas[k]);
            }
            if order == 2 && i + 2 < r.end {
                set_pair(&mut theta, i, i + 2, 0.2 * alphas[k]);
            }
        }
    }
    GraphSpec::from_theta(family, theta, alphas)
}

/// Independent Erdos-Renyi graphs inside each block; edge value `value * alpha_k`.
pub fn make_block(
    p: usize,
    sparsity: f64,
    value: f64,
    alphas: [f64; 3],
    rng: &mut Rng,
) -> Result<GraphSpec> {
    check_common(p, 6, alphas)?;
    check_prob(sparsity)?;
    let mut theta = block_diagonal(p, alphas);
    for (k, r) in block_bounds(p).iter().enumerate() {
        for i in r.clone() {
            for j in i + 1..r.end {
                if rng.random_bool(sparsity) {
                    set_pair(&mut theta, i, j, value * alphas[k]);
                }
            }
        }
    }
    GraphSpec::from_theta(Family::Block, ensure_pd(&theta, PD_MARGIN), alphas)
}

/// `floor(p / 15)` hubs dealt round-robin to the blocks; within a block the
/// non-hub nodes are split into contiguous groups, one per hub, and each node
/// links to its group's hub with value `hub_value * alpha_k`. Blocks that
/// receive no hub stay edgeless.
pub fn make_hub(p: usize, alphas: [f64; 3], hub_value: f64, rng: &mut Rng) -> Result<GraphSpec> {
    check_common(p, 15, alphas)?;
    let n_hubs = p / 15;
    let mut theta = block_diagonal(p, alphas);
    for (k, r) in block_bounds(p).iter().enumerate() {
        let hubs_here = (0..n_hubs).filter(|h| h % 3 == k).count();
        if hubs_here == 0 {
            continue;
        }
        let nodes: Vec<usize> = r.clone().collect();
        let mut hubs: Vec<usize> = rand::seq::index::sample(rng, nodes.len(), hubs_here)
            .into_iter()
            .map(|a| nodes[a])
            .collect();
        hubs.sort_unstable();
        let others: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|i| !hubs.contains(i))
            .collect();
        for (g, &node) in others.iter().enumerate() {
            let hub = hubs[g * hubs_here / others.len()];
            set_pair(
                &mut theta,
                node.min(hub),
                node.max(hub),
                hub_value * alphas[k],
            );
        }
    }
    GraphSpec::from_theta(Family::Hub, ensure_pd(&theta, PD_MARGIN), alphas)
}

/// Erdos-Renyi graph over all pairs; edge `(i, j)` gets
/// `value * sqrt(alpha_{b(i)} alpha_{b(j)})`.
pub fn make_random(
    p: usize,
    sparsity: f64,
    value: f64,
    alphas: [f64; 3],
    rng: &mut Rng,
) -> Result<GraphSpec> {
    check_common(p, 6, alphas)?;
    check_prob(sparsity)?;
    let mut theta = block_diagonal(p, alphas);
    for i in 0..p {
        for j in i + 1..p {
            if rng.random_bool(sparsity) {
                let v = value * (theta[(i, i)] * theta[(j, j)]).sqrt();
                set_pair(&mut theta, i, j, v);
            }
        }
    }
    GraphSpec::from_theta(Family::Random, ensure_pd(&theta, PD_MARGIN), alphas)
}

/// Shrinks all off-diagonal entries by a common factor `c` in `(0, 1]` until
/// the smallest eigenvalue is at least `margin * min(diag)`. The factor is the
/// largest feasible value found by 20 bisection steps; the diagonal and the
/// support are unchanged.
pub fn ensure_pd(theta: &DMatrix<f64>, margin: f64) -> DMatrix<f64> {
    let p = theta.nrows();
    let min_diag = theta.diagonal().min();
    let target = margin * min_diag;
    let scaled = |c: f64| {
        let mut m = theta * c;
        for i in 0..p {
            m[(i, i)] = theta[(i, i)];
        }
        m
    };
    if min_eigenvalue(theta) >= target {
        return theta.clone();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if min_eigenvalue(&scaled(mid)) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    scaled(lo)
}

/// `n` draws from `N(0, theta^{-1})` as `G L'` with `L L' = theta^{-1}` and
/// `G` filled row by row with standard normals. The result is not centered.
pub fn sample_mvn(spec: &GraphSpec, n: usize, rng: &mut Rng) -> Result<DataMatrix> {
    let p = spec.p();
    let sigma = Cholesky::new(spec.theta.clone())
        .ok_or(LargeError::SingularMatrix)?
        .inverse();
    let l = Cholesky::new(sigma)
        .ok_or(LargeError::SingularMatrix)?
        .unpack();
    let mut g = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            g[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    DataMatrix::new(g * l.transpose())
}
