//! Gibbs sampler for data that are missing at random.
//!
//! Each sweep inverts the current (PD-projected) precision draw into a
//! covariance, redraws the missing block of every row jointly from its
//! conditional Gaussian, then runs the shared nodewise horseshoe updates.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use std::time::{Duration, Instant};

use crate::data::{CellStatus, LatentMatrix, ObservedData};
use crate::dist::sample_gaussian_vector;
use crate::error::{Error, Result};
use crate::fit::PosteriorDraws;
use crate::model::{
    covariance_from_draw, gram, reconstruct_precision, update_node, NodeState, SamplerConfig,
};
use crate::rng::RngStream;

/// Retained draws and run metadata from the missing-data sampler.
#[derive(Debug, Clone)]
pub struct MissingFit {
    pub draws: PosteriorDraws,
    pub config: SamplerConfig,
    pub elapsed: Duration,
}

/// Initializes the latent matrix with observed cells copied and missing
/// cells set to the column mean of the observed cells.
pub fn init_latent_missing(data: &ObservedData) -> Result<LatentMatrix> {
    let (n, p) = (data.n_rows(), data.n_cols());
    let mut col_mean = vec![0.0; p];
    for j in 0..p {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            if data.status(i, j) == CellStatus::Observed {
                sum += data.value(i, j);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::UnsupportedData(format!(
                "column {j} has no observed cells"
            )));
        }
        col_mean[j] = sum / count as f64;
    }
    let mut z = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            z[i * p + j] = match data.status(i, j) {
                CellStatus::Missing => col_mean[j],
                _ => data.value(i, j),
            };
        }
    }
    Ok(LatentMatrix::from_vec(n, p, z))
}

/// Conditional mean and covariance of the `missing` coordinates given the
/// `observed` coordinates of a row, under covariance `sigma`
/// (`mu = S_mo S_oo^{-1} z_o`, `S = S_mm - S_mo S_oo^{-1} S_om`).
pub fn conditional_gaussian(
    sigma: &DMatrix<f64>,
    observed: &[usize],
    missing: &[usize],
    z_obs: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let no = observed.len();
    let nm = missing.len();
    let s_oo = DMatrix::from_fn(no, no, |a, b| sigma[(observed[a], observed[b])]);
    let s_mo = DMatrix::from_fn(nm, no, |a, b| sigma[(missing[a], observed[b])]);
    let s_mm = DMatrix::from_fn(nm, nm, |a, b| sigma[(missing[a], missing[b])]);
    let chol = Cholesky::new(s_oo)
        .ok_or_else(|| Error::Numerical("observed block is not positive definite".into()))?;
    let mu = &s_mo * chol.solve(z_obs);
    let b = chol.solve(&s_mo.transpose());
    let raw = &s_mm - &s_mo * b;
    // Exact symmetry for the downstream factorization.
    let mut cov = raw.clone();
    for a in 0..nm {
        for c in a + 1..nm {
            let avg = 0.5 * (raw[(a, c)] + raw[(c, a)]);
            cov[(a, c)] = avg;
            cov[(c, a)] = avg;
        }
    }
    Ok((mu, cov))
}

fn impute_row_joint(
    row: &mut [f64],
    observed: &[usize],
    missing: &[usize],
    sigma: &DMatrix<f64>,
    rng: &mut RngStream,
) -> Result<()> {
    if missing.is_empty() {
        return Ok(());
    }
    let (mu, cov) = if observed.is_empty() {
        // Fully missing row: the Schur formulas degenerate to the marginal.
        (DVector::zeros(missing.len()), sigma.clone())
    } else {
        let z_obs = DVector::from_fn(observed.len(), |a, _| row[observed[a]]);
        conditional_gaussian(sigma, observed, missing, &z_obs)?
    };
    let chol = Cholesky::new(cov).ok_or_else(|| {
        Error::Numerical("conditional covariance is not positive definite".into())
    })?;
    let draw = sample_gaussian_vector(&mu, &chol.l(), rng)?;
    for (a, &j) in missing.iter().enumerate() {
        row[j] = draw[a];
    }
    Ok(())
}

/// Redraws the missing coordinates of row `i` jointly given `sigma`.
pub fn impute_missing_row(
    i: usize,
    latent: &mut LatentMatrix,
    sigma: &DMatrix<f64>,
    data: &ObservedData,
    rng: &mut RngStream,
) -> Result<()> {
    let p = data.n_cols();
    let mut observed = Vec::with_capacity(p);
    let mut missing = Vec::new();
    for j in 0..p {
        match data.status(i, j) {
            CellStatus::Missing => missing.push(j),
            _ => observed.push(j),
        }
    }
    let start = i * p;
    let row = &mut latent.as_mut_slice()[start..start + p];
    impute_row_joint(row, &observed, &missing, sigma, rng)
        .map_err(|e| Error::Numerical(format!("row {i}: {e}")))
}

/// Runs the full missing-data Gibbs sampler. Censored statuses are not
/// accepted here; use the censored sampler for those.
pub fn run_missing_ghs(data: &ObservedData, cfg: &SamplerConfig) -> Result<MissingFit> {
    cfg.validate()?;
    if data.any_censored() {
        return Err(Error::InvalidInput(
            "data contains censored cells; the missing-data sampler only handles \
             observed/missing statuses — use the censored sampler"
                .into(),
        ));
    }
    let start = Instant::now();
    let (n, p) = (data.n_rows(), data.n_cols());
    let seed = cfg.seed;

    // Fixed missingness pattern: precompute per-row index sets.
    let masks: Vec<(Vec<usize>, Vec<usize>)> = (0..n)
        .map(|i| {
            let mut obs = Vec::new();
            let mut mis = Vec::new();
            for j in 0..p {
                match data.status(i, j) {
                    CellStatus::Missing => mis.push(j),
                    _ => obs.push(j),
                }
            }
            (obs, mis)
        })
        .collect();

    let mut z = init_latent_missing(data)?;
    let mut states: Vec<NodeState> = (0..p).map(|_| NodeState::init(p)).collect();
    let mut draws = PosteriorDraws::with_capacity(p, cfg.retained());
    let mut omega = reconstruct_precision(&states)?; // identity at neutral init

    for t in 1..=cfg.n_iter {
        let sweep = t as u64;
        let sigma = covariance_from_draw(&omega, cfg.pd_floor)
            .map_err(|e| Error::Numerical(format!("sweep {t}: {e}")))?;

        z.as_mut_slice()
            .par_chunks_mut(p)
            .enumerate()
            .try_for_each(|(i, row)| {
                let (obs, mis) = &masks[i];
                if mis.is_empty() {
                    return Ok(());
                }
                let mut rng = RngStream::new(seed, sweep, i as u64);
                impute_row_joint(row, obs, mis, &sigma, &mut rng)
                    .map_err(|e| Error::Numerical(format!("sweep {t}, row {i}: {e}")))
            })?;

        if cfg!(debug_assertions) {
            z.check_invariants(data)
                .map_err(|e| Error::Numerical(format!("sweep {t}: {e}")))?;
        }

        let g = gram(&z);
        states.par_iter_mut().enumerate().try_for_each(|(j, st)| {
            let mut rng = RngStream::new(seed, sweep, (n + j) as u64);
            update_node(j, &g, n, st, cfg, &mut rng)
                .map_err(|e| Error::Numerical(format!("sweep {t}, node {j}: {e}")))
        })?;

        omega = reconstruct_precision(&states)
            .map_err(|e| Error::Numerical(format!("sweep {t}: {e}")))?;
        if cfg.keeps(t) {
            draws.push(&omega);
        }
    }

    debug_assert_eq!(draws.len(), cfg.retained());
    Ok(MissingFit {
        draws,
        config: cfg.clone(),
        elapsed: start.elapsed(),
    })
}
