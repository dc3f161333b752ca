//! Shared model state and the nodewise-regression update kernels used by
//! both samplers.
//!
//! Each node `j` carries a horseshoe regression of column `j` of the latent
//! matrix on the remaining columns. The precision matrix is reconstructed
//! from the per-node states through `omega_jj = 1/sigma_j^2` and
//! `omega_{-j,j} = -theta_j / sigma_j^2`, then symmetrized by averaging the
//! two triangles.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::{Distribution, StandardNormal};

use crate::data::LatentMatrix;
use crate::dist::sample_inverse_gamma;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Keeps rates and scales inside the positive finite range regardless of
/// how extreme the shrinkage state gets.
#[inline]
pub(crate) fn clamp_positive(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, 1e300)
}

/// Sampler configuration shared by both samplers.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SamplerConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub a0: f64,
    pub b0: f64,
    pub seed: u64,
    /// Eigenvalue floor applied when a positive definite matrix is required.
    pub pd_floor: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_iter: 5000,
            burn_in: 1000,
            thin: 1,
            a0: 0.01,
            b0: 0.01,
            seed: 0,
            pd_floor: 1e-8,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..SamplerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidParameter("n_iter must be positive".into()));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::InvalidParameter(format!(
                "burn_in ({}) must be below n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be positive".into()));
        }
        if !(self.a0 > 0.0 && self.a0.is_finite()) || !(self.b0 > 0.0 && self.b0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "a0/b0 must be positive finite, got ({}, {})",
                self.a0, self.b0
            )));
        }
        if !(self.pd_floor > 0.0 && self.pd_floor.is_finite()) {
            return Err(Error::InvalidParameter(
                "pd_floor must be positive finite".into(),
            ));
        }
        Ok(())
    }

    /// Number of retained draws: floor((n_iter - burn_in) / thin).
    pub fn retained(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    /// Whether 1-based sweep `t` is kept after burn-in and thinning.
    pub fn keeps(&self, t: usize) -> bool {
        t > self.burn_in && (t - self.burn_in).is_multiple_of(self.thin)
    }
}

/// Per-node horseshoe regression state.
#[derive(Debug, Clone)]
pub struct NodeState {
    /// Regression coefficients of this node on the other p-1 columns.
    pub theta: DVector<f64>,
    /// Residual variance.
    pub sigma2: f64,
    /// Local shrinkage scales (squared).
    pub lambda2: DVector<f64>,
    /// Auxiliaries for the local scales.
    pub nu: DVector<f64>,
    /// Global shrinkage scale (squared).
    pub tau2: f64,
    /// Auxiliary for the global scale.
    pub xi: f64,
}

impl NodeState {
    /// Neutral initialization: zero coefficients, all variances at one.
    pub fn init(p: usize) -> Self {
        let m = p - 1;
        NodeState {
            theta: DVector::zeros(m),
            sigma2: 1.0,
            lambda2: DVector::from_element(m, 1.0),
            nu: DVector::from_element(m, 1.0),
            tau2: 1.0,
            xi: 1.0,
        }
    }
}

/// One symmetric precision-matrix draw.
#[derive(Debug, Clone)]
pub struct PrecisionDraw {
    pub omega: DMatrix<f64>,
}

impl PrecisionDraw {
    pub fn p(&self) -> usize {
        self.omega.nrows()
    }

    /// Bit-exact symmetry check.
    pub fn is_symmetric(&self) -> bool {
        let p = self.p();
        (0..p).all(|i| (i + 1..p).all(|j| self.omega[(i, j)].to_bits() == self.omega[(j, i)].to_bits()))
    }
}

/// Cross-product matrix `Z^T Z` of the latent data, accumulated in a fixed
/// order so runs are bit-reproducible.
pub fn gram(z: &LatentMatrix) -> DMatrix<f64> {
    let zm = DMatrix::from_row_slice(z.n_rows(), z.n_cols(), z.as_slice());
    zm.transpose() * zm
}

/// Gram blocks for node `j`: `X^T X`, `X^T y`, and `y^T y` where `y` is
/// column `j` and `X` is the latent matrix without column `j`.
pub(crate) fn node_blocks(gram: &DMatrix<f64>, j: usize) -> (DMatrix<f64>, DVector<f64>, f64) {
    let p = gram.nrows();
    let m = p - 1;
    let col = |a: usize| if a < j { a } else { a + 1 };
    let gxx = DMatrix::from_fn(m, m, |a, b| gram[(col(a), col(b))]);
    let gxy = DVector::from_fn(m, |a, _| gram[(col(a), j)]);
    (gxx, gxy, gram[(j, j)])
}

/// Draws the regression coefficients of node `j` from their Gaussian full
/// conditional, through one triangular factorization.
///
/// The factored system is the prior-scaled `I + D^{1/2} X^T X D^{1/2}` with
/// `D = diag(tau^2 lambda_k^2)`; it is always positive definite, also when
/// p exceeds n, and yields the same conditional as `X^T X + D^{-1}`.
pub fn update_theta(
    j: usize,
    latent: &LatentMatrix,
    state: &mut NodeState,
    rng: &mut RngStream,
) -> Result<()> {
    let g = gram(latent);
    update_theta_gram(j, &g, state, rng)
}

pub(crate) fn update_theta_gram(
    j: usize,
    gram: &DMatrix<f64>,
    state: &mut NodeState,
    rng: &mut RngStream,
) -> Result<()> {
    let (gxx, gxy, _) = node_blocks(gram, j);
    let m = gxy.len();
    let d_sqrt = DVector::from_fn(m, |k, _| {
        clamp_positive(state.tau2 * state.lambda2[k]).sqrt()
    });
    let mut sys = DMatrix::from_fn(m, m, |a, b| d_sqrt[a] * gxx[(a, b)] * d_sqrt[b]);
    for a in 0..m {
        sys[(a, a)] += 1.0;
    }
    let chol = Cholesky::new(sys)
        .ok_or_else(|| Error::Numerical(format!("theta factorization failed at node {j}")))?;
    let rhs = DVector::from_fn(m, |k, _| d_sqrt[k] * gxy[k]);
    let mean = chol.solve(&rhs);
    let u = DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
    let white = solve_upper_triangular(chol.l().transpose(), u, j)?;
    let sigma = state.sigma2.sqrt();
    state.theta = DVector::from_fn(m, |k, _| d_sqrt[k] * (mean[k] + sigma * white[k]));
    if state.theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "theta update produced non-finite coefficients at node {j}"
        )));
    }
    Ok(())
}

fn solve_upper_triangular(
    upper: nalgebra::OMatrix<f64, Dyn, Dyn>,
    rhs: DVector<f64>,
    j: usize,
) -> Result<DVector<f64>> {
    upper
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Numerical(format!("triangular solve failed at node {j}")))
}

/// Exact posterior mean of node `j`'s coefficients under the current
/// shrinkage scales (the Gaussian full conditional's location).
pub fn theta_posterior_mean(
    j: usize,
    latent: &LatentMatrix,
    state: &NodeState,
) -> Result<DVector<f64>> {
    let g = gram(latent);
    let (gxx, gxy, _) = node_blocks(&g, j);
    let m = gxy.len();
    let d_sqrt = DVector::from_fn(m, |k, _| {
        clamp_positive(state.tau2 * state.lambda2[k]).sqrt()
    });
    let mut sys = DMatrix::from_fn(m, m, |a, b| d_sqrt[a] * gxx[(a, b)] * d_sqrt[b]);
    for a in 0..m {
        sys[(a, a)] += 1.0;
    }
    let chol = Cholesky::new(sys)
        .ok_or_else(|| Error::Numerical(format!("theta factorization failed at node {j}")))?;
    let rhs = DVector::from_fn(m, |k, _| d_sqrt[k] * gxy[k]);
    let w = chol.solve(&rhs);
    Ok(DVector::from_fn(m, |k, _| d_sqrt[k] * w[k]))
}

/// Posterior shape and rate of the residual variance given `n` rows and a
/// residual sum of squares.
pub fn sigma2_posterior(rss: f64, n: usize, a0: f64, b0: f64) -> (f64, f64) {
    (a0 + n as f64 / 2.0, b0 + rss.max(0.0) / 2.0)
}

/// Residual sum of squares of node `j` computed from Gram blocks.
pub(crate) fn node_rss(
    gxx: &DMatrix<f64>,
    gxy: &DVector<f64>,
    yty: f64,
    theta: &DVector<f64>,
) -> f64 {
    let quad = (gxx * theta).dot(theta);
    (yty - 2.0 * gxy.dot(theta) + quad).max(0.0)
}

/// Draws the residual variance of node `j` from its inverse-gamma
/// conditional.
pub fn update_sigma2(
    j: usize,
    latent: &LatentMatrix,
    state: &mut NodeState,
    cfg: &SamplerConfig,
    rng: &mut RngStream,
) -> Result<()> {
    let g = gram(latent);
    let (gxx, gxy, yty) = node_blocks(&g, j);
    let rss = node_rss(&gxx, &gxy, yty, &state.theta);
    update_sigma2_rss(rss, latent.n_rows(), state, cfg, rng)
}

pub(crate) fn update_sigma2_rss(
    rss: f64,
    n: usize,
    state: &mut NodeState,
    cfg: &SamplerConfig,
    rng: &mut RngStream,
) -> Result<()> {
    let (shape, rate) = sigma2_posterior(rss, n, cfg.a0, cfg.b0);
    state.sigma2 = sample_inverse_gamma(shape, clamp_positive(rate), rng)?;
    Ok(())
}

/// Conditional inverse-gamma rate of a local scale.
pub fn local_scale_rate(theta_k: f64, sigma2: f64, tau2: f64, nu_k: f64) -> f64 {
    clamp_positive(1.0 / nu_k + theta_k * theta_k / (2.0 * sigma2 * tau2))
}

/// Conditional inverse-gamma rate of a local-scale auxiliary.
pub fn nu_rate(lambda2_k: f64) -> f64 {
    clamp_positive(1.0 + 1.0 / lambda2_k)
}

/// Redraws all local shrinkage scales and their auxiliaries.
pub fn update_local_scales(state: &mut NodeState, rng: &mut RngStream) -> Result<()> {
    for k in 0..state.lambda2.len() {
        let rate = local_scale_rate(state.theta[k], state.sigma2, state.tau2, state.nu[k]);
        state.lambda2[k] = sample_inverse_gamma(1.0, rate, rng)?;
        state.nu[k] = sample_inverse_gamma(1.0, nu_rate(state.lambda2[k]), rng)?;
    }
    Ok(())
}

/// Conditional shape and rate of the global scale; `m = p - 1` coefficients.
pub fn global_scale_params(
    theta: &DVector<f64>,
    sigma2: f64,
    lambda2: &DVector<f64>,
    xi: f64,
) -> (f64, f64) {
    let m = theta.len() as f64;
    let mut rate = 1.0 / xi;
    for k in 0..theta.len() {
        rate += theta[k] * theta[k] / (2.0 * sigma2 * lambda2[k]);
    }
    ((m + 1.0) / 2.0, clamp_positive(rate))
}

/// Conditional inverse-gamma rate of the global-scale auxiliary.
pub fn xi_rate(tau2: f64) -> f64 {
    clamp_positive(1.0 + 1.0 / tau2)
}

/// Redraws the global shrinkage scale and its auxiliary.
pub fn update_global_scale(state: &mut NodeState, rng: &mut RngStream) -> Result<()> {
    let (shape, rate) = global_scale_params(&state.theta, state.sigma2, &state.lambda2, state.xi);
    state.tau2 = sample_inverse_gamma(shape, rate, rng)?;
    state.xi = sample_inverse_gamma(1.0, xi_rate(state.tau2), rng)?;
    Ok(())
}

/// Runs the four conditional updates of one node against precomputed Gram
/// blocks, in the fixed order theta, sigma2, local scales, global scale.
pub(crate) fn update_node(
    j: usize,
    gram: &DMatrix<f64>,
    n: usize,
    state: &mut NodeState,
    cfg: &SamplerConfig,
    rng: &mut RngStream,
) -> Result<()> {
    update_theta_gram(j, gram, state, rng)?;
    let (gxx, gxy, yty) = node_blocks(gram, j);
    let rss = node_rss(&gxx, &gxy, yty, &state.theta);
    update_sigma2_rss(rss, n, state, cfg, rng)?;
    update_local_scales(state, rng)?;
    update_global_scale(state, rng)?;
    Ok(())
}

/// Rebuilds the precision matrix from the node states column by column and
/// returns the symmetrized draw (triangle averaging; diagonal untouched).
pub fn reconstruct_precision(states: &[NodeState]) -> Result<PrecisionDraw> {
    let p = states.len();
    for (j, s) in states.iter().enumerate() {
        if !(s.sigma2 > 0.0 && s.sigma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "node {j} has non-positive residual variance {}",
                s.sigma2
            )));
        }
        if s.theta.len() != p - 1 {
            return Err(Error::InvalidInput(format!(
                "node {j} has {} coefficients, expected {}",
                s.theta.len(),
                p - 1
            )));
        }
    }
    let mut raw = DMatrix::zeros(p, p);
    for (j, s) in states.iter().enumerate() {
        let inv_s2 = 1.0 / s.sigma2;
        raw[(j, j)] = inv_s2;
        for i in 0..p {
            if i != j {
                let k = if i < j { i } else { i - 1 };
                raw[(i, j)] = -s.theta[k] * inv_s2;
            }
        }
    }
    let mut omega = raw.clone();
    for i in 0..p {
        for j in i + 1..p {
            let avg = 0.5 * (raw[(i, j)] + raw[(j, i)]);
            omega[(i, j)] = avg;
            omega[(j, i)] = avg;
        }
    }
    Ok(PrecisionDraw { omega })
}

/// Clips eigenvalues below `pd_floor` up to `pd_floor`. Inputs already
/// positive definite with `lambda_min >= pd_floor` are returned unchanged.
pub fn project_pd(draw: &PrecisionDraw, pd_floor: f64) -> Result<PrecisionDraw> {
    let eigen = draw
        .omega
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("eigendecomposition did not converge".into()))?;
    if eigen.eigenvalues.iter().all(|&l| l >= pd_floor) {
        return Ok(draw.clone());
    }
    let clipped = DVector::from_fn(eigen.eigenvalues.len(), |k, _| {
        eigen.eigenvalues[k].max(pd_floor)
    });
    let q = &eigen.eigenvectors;
    let rebuilt = q * DMatrix::from_diagonal(&clipped) * q.transpose();
    // The reassembled product is symmetric only up to rounding; restore
    // exact symmetry.
    let p = rebuilt.nrows();
    let mut omega = rebuilt.clone();
    for i in 0..p {
        for j in i + 1..p {
            let avg = 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)]);
            omega[(i, j)] = avg;
            omega[(j, i)] = avg;
        }
    }
    Ok(PrecisionDraw { omega })
}

/// Inverts a symmetrized draw after flooring its spectrum, returning the
/// covariance used for conditional-Gaussian imputation.
pub(crate) fn covariance_from_draw(draw: &PrecisionDraw, pd_floor: f64) -> Result<DMatrix<f64>> {
    let projected = project_pd(draw, pd_floor)?;
    debug_assert!(projected.is_symmetric());
    let chol = Cholesky::new(projected.omega.clone())
        .ok_or_else(|| Error::Numerical("projected precision is not positive definite".into()))?;
    let sigma = chol.inverse();
    // Exact symmetry for downstream Schur blocks.
    let p = sigma.nrows();
    let mut out = sigma.clone();
    for i in 0..p {
        for j in i + 1..p {
            let avg = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    Ok(out)
}
