//! Gibbs sampler for left/right-censored (and optionally missing) data.
//!
//! Each sweep first redraws every censored latent cell from a one-sided
//! truncated normal with mean `z_{i,-j}' theta_j` and variance `sigma_j^2`
//! (missing cells are drawn untruncated), then runs the nodewise horseshoe
//! updates against the frozen latent matrix, then reconstructs a symmetric
//! precision draw. Rows are imputed with per-row random substreams and node
//! updates use per-node substreams, so serial and parallel schedules give
//! bit-identical chains.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::time::{Duration, Instant};

use crate::data::{CellStatus, LatentMatrix, ObservedData};
use crate::dist::{sample_trunc_normal_lower, sample_trunc_normal_upper};
use crate::error::{Error, Result};
use crate::fit::PosteriorDraws;
use crate::model::{gram, reconstruct_precision, update_node, NodeState, SamplerConfig};
use crate::rng::RngStream;

/// Retained draws and run metadata from the censored-data sampler.
#[derive(Debug, Clone)]
pub struct CensoredFit {
    pub draws: PosteriorDraws,
    pub config: SamplerConfig,
    pub elapsed: Duration,
}

/// Initializes the latent matrix: observed cells are copied, censored cells
/// start a half-normal step inside their feasible region, missing cells
/// start at zero.
pub fn init_latent_censored(data: &ObservedData, seed: u64) -> LatentMatrix {
    let (n, p) = (data.n_rows(), data.n_cols());
    let mut z = vec![0.0; n * p];
    for (i, row) in z.chunks_mut(p).enumerate() {
        let mut rng = RngStream::new(seed, 0, i as u64);
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = match data.status(i, j) {
                CellStatus::Observed => data.value(i, j),
                CellStatus::CensoredLeft => {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    data.threshold(j).unwrap() - e.abs()
                }
                CellStatus::CensoredRight => {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    data.threshold(j).unwrap() + e.abs()
                }
                CellStatus::Missing => 0.0,
            };
        }
    }
    LatentMatrix::from_vec(n, p, z)
}

/// Conditional mean of cell `(i, j)` given the rest of its row under node
/// `j`'s regression state.
#[inline]
fn conditional_mean(row: &[f64], j: usize, state: &NodeState) -> f64 {
    let mut mu = 0.0;
    for (k, &z) in row.iter().enumerate() {
        if k != j {
            let idx = if k < j { k } else { k - 1 };
            mu += z * state.theta[idx];
        }
    }
    mu
}

fn impute_row_cells(
    row: &mut [f64],
    i: usize,
    data: &ObservedData,
    states: &[NodeState],
    rng: &mut RngStream,
) -> Result<()> {
    for j in 0..row.len() {
        let status = data.status(i, j);
        if status == CellStatus::Observed {
            continue;
        }
        let state = &states[j];
        let mu = conditional_mean(row, j, state);
        let sigma = state.sigma2.sqrt();
        row[j] = match status {
            CellStatus::CensoredLeft => {
                sample_trunc_normal_upper(mu, sigma, data.threshold(j).unwrap(), rng)?
            }
            CellStatus::CensoredRight => {
                sample_trunc_normal_lower(mu, sigma, data.threshold(j).unwrap(), rng)?
            }
            CellStatus::Missing => sample_trunc_normal_upper(mu, sigma, f64::INFINITY, rng)?,
            CellStatus::Observed => unreachable!(),
        };
    }
    Ok(())
}

/// Redraws a single latent cell from its conditional law. Observed cells
/// are never touched.
pub fn impute_censored_cell(
    i: usize,
    j: usize,
    latent: &mut LatentMatrix,
    state_j: &NodeState,
    data: &ObservedData,
    rng: &mut RngStream,
) -> Result<()> {
    let status = data.status(i, j);
    if status == CellStatus::Observed {
        return Ok(());
    }
    let row: Vec<f64> = latent.row(i).to_vec();
    let mu = conditional_mean(&row, j, state_j);
    let sigma = state_j.sigma2.sqrt();
    let v = match status {
        CellStatus::CensoredLeft => {
            sample_trunc_normal_upper(mu, sigma, data.threshold(j).unwrap(), rng)?
        }
        CellStatus::CensoredRight => {
            sample_trunc_normal_lower(mu, sigma, data.threshold(j).unwrap(), rng)?
        }
        CellStatus::Missing => sample_trunc_normal_upper(mu, sigma, f64::INFINITY, rng)?,
        CellStatus::Observed => unreachable!(),
    };
    latent.set(i, j, v);
    Ok(())
}

/// Runs the full censored-data Gibbs sampler.
pub fn run_censored_ghs(data: &ObservedData, cfg: &SamplerConfig) -> Result<CensoredFit> {
    cfg.validate()?;
    let start = Instant::now();
    let (n, p) = (data.n_rows(), data.n_cols());
    let seed = cfg.seed;

    let mut z = init_latent_censored(data, seed);
    let mut states: Vec<NodeState> = (0..p).map(|_| NodeState::init(p)).collect();
    let mut draws = PosteriorDraws::with_capacity(p, cfg.retained());

    for t in 1..=cfg.n_iter {
        let sweep = t as u64;
        z.as_mut_slice()
            .par_chunks_mut(p)
            .enumerate()
            .try_for_each(|(i, row)| {
                let mut rng = RngStream::new(seed, sweep, i as u64);
                impute_row_cells(row, i, data, &states, &mut rng)
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

        if cfg.keeps(t) {
            let draw = reconstruct_precision(&states)
                .map_err(|e| Error::Numerical(format!("sweep {t}: {e}")))?;
            draws.push(&draw);
        }
    }

    debug_assert_eq!(draws.len(), cfg.retained());
    Ok(CensoredFit {
        draws,
        config: cfg.clone(),
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests;
