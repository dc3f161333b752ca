//! Posterior summarization, credible-interval edge selection, recovery
//! metrics, and chain diagnostics.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fit::PosteriorDraws;
use crate::sim::TruthSpec;

/// Entrywise posterior summary of the retained precision draws.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub mean: DMatrix<f64>,
    pub median: DMatrix<f64>,
    pub ci_lower: DMatrix<f64>,
    pub ci_upper: DMatrix<f64>,
    pub level: f64,
    /// Unordered pairs (j < k) whose credible interval excludes zero.
    pub edges: Vec<(usize, usize)>,
}

/// Linear-interpolation sample quantile (R type 7) of a sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = lo + 1;
    if hi >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Entrywise mean, median, and equal-tailed credible intervals over the
/// retained draws; selects the edges whose interval excludes zero.
pub fn summarize(draws: &PosteriorDraws, level: f64) -> Result<PosteriorSummary> {
    draws.require_nonempty()?;
    if draws.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 retained draws to summarize".into(),
        ));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!(
            "credible level must be in [0, 1], got {level}"
        )));
    }
    let p = draws.p();
    let keep = draws.len() as f64;
    let q_lo = (1.0 - level) / 2.0;
    let q_hi = 1.0 - q_lo;

    let mut mean = DMatrix::zeros(p, p);
    let mut median = DMatrix::zeros(p, p);
    let mut ci_lower = DMatrix::zeros(p, p);
    let mut ci_upper = DMatrix::zeros(p, p);
    let mut edges = Vec::new();

    for i in 0..p {
        for j in i..p {
            let mut chain = draws.entry_chain(i, j);
            let m = chain.iter().sum::<f64>() / keep;
            chain.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let med = quantile_sorted(&chain, 0.5);
            let lo = quantile_sorted(&chain, q_lo);
            let hi = quantile_sorted(&chain, q_hi);
            for &(a, b) in &[(i, j), (j, i)] {
                mean[(a, b)] = m;
                median[(a, b)] = med;
                ci_lower[(a, b)] = lo;
                ci_upper[(a, b)] = hi;
            }
            if i != j && (lo > 0.0 || hi < 0.0) {
                edges.push((i, j));
            }
        }
    }
    Ok(PosteriorSummary {
        mean,
        median,
        ci_lower,
        ci_upper,
        level,
        edges,
    })
}

/// Sum of squared entrywise differences (squared Frobenius norm).
pub fn frob_sq_error(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    if estimate.shape() != truth.shape() {
        return Err(Error::InvalidInput(format!(
            "shape mismatch: {:?} vs {:?}",
            estimate.shape(),
            truth.shape()
        )));
    }
    Ok(estimate
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// True positive rate and false discovery rate of a selected edge set
/// against the truth. The FDR of an empty selection is zero.
pub fn tpr_fdr(selected: &[(usize, usize)], truth: &TruthSpec) -> Result<(f64, f64)> {
    let true_edges = truth.true_edges();
    if true_edges.is_empty() {
        return Err(Error::InvalidInput(
            "truth has no edges; TPR is undefined".into(),
        ));
    }
    let norm = |&(a, b): &(usize, usize)| if a <= b { (a, b) } else { (b, a) };
    let truth_set: std::collections::HashSet<(usize, usize)> =
        true_edges.iter().map(norm).collect();
    let selected_set: std::collections::HashSet<(usize, usize)> = selected.iter().map(norm).collect();
    let hits = selected_set.intersection(&truth_set).count();
    let tpr = hits as f64 / truth_set.len() as f64;
    let fdr = (selected_set.len() - hits) as f64 / selected_set.len().max(1) as f64;
    Ok((tpr, fdr))
}

/// False positive rate: selected null pairs over all null pairs. This is
/// the specificity-style rate the benchmark tables report alongside TPR.
pub fn false_positive_rate(selected: &[(usize, usize)], truth: &TruthSpec) -> Result<f64> {
    let p = truth.p;
    let norm = |&(a, b): &(usize, usize)| if a <= b { (a, b) } else { (b, a) };
    let truth_set: std::collections::HashSet<(usize, usize)> =
        truth.true_edges().iter().map(norm).collect();
    let nulls = p * (p - 1) / 2 - truth_set.len();
    if nulls == 0 {
        return Err(Error::InvalidInput(
            "truth has no null pairs; FPR is undefined".into(),
        ));
    }
    let selected_set: std::collections::HashSet<(usize, usize)> = selected.iter().map(norm).collect();
    let false_pos = selected_set.difference(&truth_set).count();
    Ok(false_pos as f64 / nulls as f64)
}

/// Sample autocorrelation at lags `0..=max_lag`, normalized to one at lag
/// zero.
pub fn acf(chain: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = chain.len();
    if n <= max_lag {
        return Err(Error::InvalidInput(format!(
            "chain length {n} must exceed max_lag {max_lag}"
        )));
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let c0: f64 = chain.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return Err(Error::InvalidInput(
            "chain is constant; autocorrelation is undefined".into(),
        ));
    }
    let mut rho = Vec::with_capacity(max_lag + 1);
    rho.push(1.0);
    for lag in 1..=max_lag {
        let c: f64 = (0..n - lag)
            .map(|t| (chain[t] - mean) * (chain[t + lag] - mean))
            .sum::<f64>()
            / n as f64;
        rho.push(c / c0);
    }
    Ok(rho)
}

/// Effective sample size `N / (1 + 2 sum rho(l))`, with the sum truncated
/// by Geyer's initial-positive-sequence rule (stop at the first
/// consecutive-lag pair whose autocorrelations sum to a non-positive
/// value). Clamped to at most `N`.
pub fn ess(chain: &[f64]) -> Result<f64> {
    let n = chain.len();
    if n < 4 {
        return Err(Error::InvalidInput(
            "need at least 4 samples to estimate ESS".into(),
        ));
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let c0: f64 = chain.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return Err(Error::InvalidInput(
            "chain is constant; ESS is undefined".into(),
        ));
    }
    let rho_at = |lag: usize| -> f64 {
        let c: f64 = (0..n - lag)
            .map(|t| (chain[t] - mean) * (chain[t + lag] - mean))
            .sum::<f64>()
            / n as f64;
        c / c0
    };
    // Pair-sums Gamma_k = rho(2k) + rho(2k+1); keep while positive.
    let mut sum_gamma = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let gamma = rho_at(2 * k) + rho_at(2 * k + 1);
        if gamma <= 0.0 {
            break;
        }
        sum_gamma += gamma;
        k += 1;
    }
    let tau = (2.0 * sum_gamma - 1.0).max(1.0);
    Ok(n as f64 / tau)
}
