//! Simulation-study designs and their replication runner.
//!
//! Each design row fixes a truth setting, dimensions, and an
//! incompleteness mechanism. Replication seeds are derived from the master
//! seed and the replication index only, so rows sharing `(setting, p, n)`
//! see common random numbers — the generated data for replication `r` is
//! identical across incompleteness levels, which sharpens comparisons
//! across levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censored::run_censored_ghs;
use crate::data::ObservedData;
use crate::diagnostics::{false_positive_rate, frob_sq_error, summarize, tpr_fdr};
use crate::error::{Error, Result};
use crate::fit::PosteriorDraws;
use crate::model::SamplerConfig;
use crate::rng::{derive_seed, RngStream, DETACHED_SWEEP};
use crate::sim::{
    alternating_thresholds, apply_fixed_censoring, apply_mcar, apply_quantile_censoring,
    gen_setting1, gen_setting2, CensorSide, GraphSetting, TruthSpec,
};

/// The six benchmark tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchTable {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl std::str::FromStr for BenchTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(BenchTable::T1),
            "T2" => Ok(BenchTable::T2),
            "T3" => Ok(BenchTable::T3),
            "T4" => Ok(BenchTable::T4),
            "T5" => Ok(BenchTable::T5),
            "T6" => Ok(BenchTable::T6),
            other => Err(Error::InvalidParameter(format!(
                "unknown table '{other}', expected T1..T6"
            ))),
        }
    }
}

/// Incompleteness mechanism of a design row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mechanism {
    /// Left censoring at the fixed alternating vector (-0.5, 0.5, ...).
    FixedCensorAlternating,
    /// Left censoring at per-column empirical quantiles.
    QuantileCensorLeft { q: f64 },
    /// Cells missing completely at random, exact count.
    Mcar { q: f64 },
}

/// One benchmark design cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignRow {
    pub label: String,
    pub setting: GraphSetting,
    pub p: usize,
    pub n: usize,
    pub mechanism: Mechanism,
}

fn setting_name(s: GraphSetting) -> &'static str {
    match s {
        GraphSetting::Tridiagonal => "Setting I",
        GraphSetting::EquicorrelatedBlock => "Setting II",
    }
}

/// The design rows of one table.
pub fn table_rows(table: BenchTable) -> Vec<DesignRow> {
    let settings = [GraphSetting::Tridiagonal, GraphSetting::EquicorrelatedBlock];
    let mut rows = Vec::new();
    match table {
        BenchTable::T1 => {
            for &setting in &settings {
                for p in [10, 20, 30] {
                    rows.push(DesignRow {
                        label: format!("{}, p = {p}", setting_name(setting)),
                        setting,
                        p,
                        n: 200,
                        mechanism: Mechanism::FixedCensorAlternating,
                    });
                }
            }
        }
        BenchTable::T2 => {
            for &setting in &settings {
                for q in [0.1, 0.2, 0.3] {
                    rows.push(DesignRow {
                        label: format!("{}, {:.0}% censored", setting_name(setting), q * 100.0),
                        setting,
                        p: 10,
                        n: 200,
                        mechanism: Mechanism::QuantileCensorLeft { q },
                    });
                }
            }
        }
        BenchTable::T3 => {
            for &setting in &settings {
                for n in [200, 500, 1000] {
                    rows.push(DesignRow {
                        label: format!("{}, n = {n}", setting_name(setting)),
                        setting,
                        p: 10,
                        n,
                        mechanism: Mechanism::FixedCensorAlternating,
                    });
                }
            }
        }
        BenchTable::T4 => {
            for &setting in &settings {
                for p in [10, 20, 30] {
                    rows.push(DesignRow {
                        label: format!("{}, p = {p}", setting_name(setting)),
                        setting,
                        p,
                        n: 200,
                        mechanism: Mechanism::Mcar { q: 0.1 },
                    });
                }
            }
        }
        BenchTable::T5 => {
            for &setting in &settings {
                for n in [200, 500, 1000] {
                    rows.push(DesignRow {
                        label: format!("{}, n = {n}", setting_name(setting)),
                        setting,
                        p: 10,
                        n,
                        mechanism: Mechanism::Mcar { q: 0.1 },
                    });
                }
            }
        }
        BenchTable::T6 => {
            for &setting in &settings {
                for q in [0.1, 0.2, 0.3] {
                    rows.push(DesignRow {
                        label: format!("{}, {:.0}% missing", setting_name(setting), q * 100.0),
                        setting,
                        p: 20,
                        n: 200,
                        mechanism: Mechanism::Mcar { q },
                    });
                }
            }
        }
    }
    rows
}

/// Per-replication recovery metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepMetrics {
    pub rep: usize,
    /// Squared Frobenius error of the posterior-mean estimator.
    pub err_mean: f64,
    /// Squared Frobenius error of the posterior-median estimator.
    pub err_median: f64,
    pub tpr: f64,
    /// False discovery rate: selected false edges over selected edges.
    pub fdr: f64,
    /// False positive rate: selected null pairs over all null pairs.
    pub fpr: f64,
    pub seconds: f64,
}

fn truth_for(row: &DesignRow) -> Result<TruthSpec> {
    match row.setting {
        GraphSetting::Tridiagonal => gen_setting1(row.p),
        GraphSetting::EquicorrelatedBlock => gen_setting2(row.p),
    }
}

/// Generates one replication's data set for a row under the shared-seed
/// scheme.
pub fn replication_data(row: &DesignRow, rep_seed: u64) -> Result<(TruthSpec, ObservedData)> {
    let truth = truth_for(row)?;
    let values = sample(&truth, row.n, rep_seed)?;
    let complete = ObservedData::from_complete(row.n, row.p, values)?;
    let data = match row.mechanism {
        Mechanism::FixedCensorAlternating => apply_fixed_censoring(
            &complete,
            &alternating_thresholds(row.p),
            &vec![CensorSide::Left; row.p],
        )?,
        Mechanism::QuantileCensorLeft { q } => {
            apply_quantile_censoring(&complete, q, CensorSide::Left)?
        }
        Mechanism::Mcar { q } => {
            let mut rng = RngStream::new(rep_seed, DETACHED_SWEEP, 1);
            apply_mcar(&complete, q, &mut rng)?
        }
    };
    Ok((truth, data))
}

fn sample(truth: &TruthSpec, n: usize, rep_seed: u64) -> Result<Vec<f64>> {
    let mut rng = RngStream::new(rep_seed, DETACHED_SWEEP, 0);
    crate::sim::sample_data(n, truth, &mut rng)
}

/// Fits one replication and computes its metrics.
fn run_replication(
    row: &DesignRow,
    rep: usize,
    master_seed: u64,
    cfg_template: &SamplerConfig,
) -> Result<RepMetrics> {
    let rep_seed = derive_seed(master_seed, &[rep as u64]);
    let (truth, data) = replication_data(row, rep_seed)?;
    let cfg = SamplerConfig {
        seed: rep_seed,
        ..cfg_template.clone()
    };
    let start = std::time::Instant::now();
    let draws: PosteriorDraws = match row.mechanism {
        Mechanism::Mcar { .. } => crate::missing::run_missing_ghs(&data, &cfg)?.draws,
        _ => run_censored_ghs(&data, &cfg)?.draws,
    };
    let seconds = start.elapsed().as_secs_f64();
    let summary = summarize(&draws, 0.95)?;
    let err_mean = frob_sq_error(&summary.mean, &truth.omega_true)?;
    let err_median = frob_sq_error(&summary.median, &truth.omega_true)?;
    let (tpr, fdr) = tpr_fdr(&summary.edges, &truth)?;
    let fpr = false_positive_rate(&summary.edges, &truth)?;
    Ok(RepMetrics {
        rep,
        err_mean,
        err_median,
        tpr,
        fdr,
        fpr,
        seconds,
    })
}

/// Runs `reps` replications of one design row in parallel.
pub fn run_design_row(
    row: &DesignRow,
    reps: usize,
    master_seed: u64,
    cfg_template: &SamplerConfig,
) -> Result<Vec<RepMetrics>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least 1 replication".into()));
    }
    let mut out: Vec<RepMetrics> = (0..reps)
        .into_par_iter()
        .map(|rep| run_replication(row, rep, master_seed, cfg_template))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|m| m.rep);
    Ok(out)
}

/// Mean and standard deviation pairs over replications, in the table
/// layout of the study this mirrors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub reps: usize,
    pub err_mean: (f64, f64),
    pub err_median: (f64, f64),
    pub tpr: (f64, f64),
    pub fdr: (f64, f64),
    pub fpr: (f64, f64),
}

pub fn aggregate(metrics: &[RepMetrics]) -> Aggregate {
    fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
        let n = xs.clone().count() as f64;
        let mean = xs.clone().sum::<f64>() / n;
        if n < 2.0 {
            return (mean, 0.0);
        }
        let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }
    Aggregate {
        reps: metrics.len(),
        err_mean: mean_sd(metrics.iter().map(|m| m.err_mean)),
        err_median: mean_sd(metrics.iter().map(|m| m.err_median)),
        tpr: mean_sd(metrics.iter().map(|m| m.tpr)),
        fdr: mean_sd(metrics.iter().map(|m| m.fdr)),
        fpr: mean_sd(metrics.iter().map(|m| m.fpr)),
    }
}
