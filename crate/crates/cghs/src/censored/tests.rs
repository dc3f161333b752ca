use super::*;
use crate::dist::special::{normal_cdf, normal_pdf};
use crate::sim::{apply_fixed_censoring, apply_mcar, gen_setting1, sample_data, CensorSide};
use nalgebra::DVector;

fn observed(n: usize, p: usize, values: Vec<f64>) -> ObservedData {
    ObservedData::from_complete(n, p, values).unwrap()
}

#[test]
fn init_copies_fully_observed_data() {
    let data = observed(3, 2, vec![1.0, -2.0, 0.5, 0.25, -1.5, 3.0]);
    let z = init_latent_censored(&data, 42);
    assert_eq!(z.as_slice(), data.values());
}

#[test]
fn init_respects_censoring_bounds() {
    let data = ObservedData::new(
        3,
        2,
        vec![-0.5, 40.0, 0.3, 40.0, -0.5, 12.0],
        vec![
            CellStatus::CensoredLeft,
            CellStatus::CensoredRight,
            CellStatus::Observed,
            CellStatus::CensoredRight,
            CellStatus::CensoredLeft,
            CellStatus::Observed,
        ],
        vec![Some(-0.5), Some(40.0)],
    )
    .unwrap();
    for seed in 0..20 {
        let z = init_latent_censored(&data, seed);
        assert!(z.value(0, 0) <= -0.5);
        assert!(z.value(2, 0) <= -0.5);
        assert!(z.value(0, 1) >= 40.0);
        assert!(z.value(1, 1) >= 40.0);
        assert_eq!(z.value(1, 0), 0.3);
        assert!(z.check_invariants(&data).is_ok());
    }
}

#[test]
fn init_sets_missing_to_zero() {
    let data = ObservedData::new(
        2,
        2,
        vec![1.0, f64::NAN, 2.0, 3.0],
        vec![
            CellStatus::Observed,
            CellStatus::Missing,
            CellStatus::Observed,
            CellStatus::Observed,
        ],
        vec![None, None],
    )
    .unwrap();
    let z = init_latent_censored(&data, 1);
    assert_eq!(z.value(0, 1), 0.0);
}

/// Mean of N(mu, sigma^2) truncated above at c.
fn truncated_mean_upper(mu: f64, sigma: f64, c: f64) -> f64 {
    let alpha = (c - mu) / sigma;
    mu - sigma * normal_pdf(alpha) / normal_cdf(alpha)
}

#[test]
fn cell_imputation_marginal_case() {
    // Zero coefficients: the conditional is the marginal N(0, 1) truncated
    // above at 0; mean -sqrt(2/pi).
    let data = ObservedData::new(
        2,
        2,
        vec![0.0, 1.0, 0.0, 1.0],
        vec![
            CellStatus::CensoredLeft,
            CellStatus::Observed,
            CellStatus::CensoredLeft,
            CellStatus::Observed,
        ],
        vec![Some(0.0), None],
    )
    .unwrap();
    let state = NodeState::init(2);
    let mut latent = init_latent_censored(&data, 3);
    let mut rng = RngStream::new(4, 1, 0);
    let reps = 40_000;
    let mut sum = 0.0;
    for _ in 0..reps {
        impute_censored_cell(0, 0, &mut latent, &state, &data, &mut rng).unwrap();
        let v = latent.value(0, 0);
        assert!(v <= 0.0);
        sum += v;
    }
    let mean = sum / reps as f64;
    let expect = truncated_mean_upper(0.0, 1.0, 0.0);
    assert!((mean - expect).abs() < 0.01, "mean {mean} expect {expect}");
}

#[test]
fn cell_imputation_uses_regression_state() {
    // One neighbor at z = 2 with coefficient 0.5 and sigma^2 = 0.25:
    // truncated N(1, 0.25) above at 0.9.
    let data = ObservedData::new(
        2,
        2,
        vec![0.9, 2.0, 0.0, 2.0],
        vec![
            CellStatus::CensoredLeft,
            CellStatus::Observed,
            CellStatus::Observed,
            CellStatus::Observed,
        ],
        vec![Some(0.9), None],
    )
    .unwrap();
    let mut state = NodeState::init(2);
    state.theta = DVector::from_element(1, 0.5);
    state.sigma2 = 0.25;
    let mut latent = init_latent_censored(&data, 5);
    let mut rng = RngStream::new(6, 1, 0);
    let reps = 40_000;
    let mut sum = 0.0;
    for _ in 0..reps {
        impute_censored_cell(0, 0, &mut latent, &state, &data, &mut rng).unwrap();
        sum += latent.value(0, 0);
    }
    let mean = sum / reps as f64;
    let expect = truncated_mean_upper(1.0, 0.5, 0.9);
    assert!((mean - expect).abs() < 0.01, "mean {mean} expect {expect}");
}

#[test]
fn missing_cell_gets_untruncated_draw() {
    let data = ObservedData::new(
        2,
        2,
        vec![f64::NAN, 1.0, 0.0, 1.0],
        vec![
            CellStatus::Missing,
            CellStatus::Observed,
            CellStatus::Observed,
            CellStatus::Observed,
        ],
        vec![None, None],
    )
    .unwrap();
    let mut state = NodeState::init(2);
    state.sigma2 = 4.0;
    let mut latent = init_latent_censored(&data, 7);
    let mut rng = RngStream::new(8, 1, 0);
    let reps = 40_000;
    let (mut sum, mut sumsq) = (0.0, 0.0);
    for _ in 0..reps {
        impute_censored_cell(0, 0, &mut latent, &state, &data, &mut rng).unwrap();
        let v = latent.value(0, 0);
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / reps as f64;
    let var = sumsq / reps as f64 - mean * mean;
    assert!(mean.abs() < 0.05, "mean {mean}");
    assert!((var - 4.0).abs() < 0.15, "var {var}");
}

#[test]
fn observed_cells_are_never_touched() {
    let data = observed(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
    let mut latent = init_latent_censored(&data, 9);
    let state = NodeState::init(2);
    let mut rng = RngStream::new(10, 1, 0);
    impute_censored_cell(0, 0, &mut latent, &state, &data, &mut rng).unwrap();
    assert_eq!(latent.value(0, 0), 1.0);
}

fn censored_setting1(n: usize, p: usize, seed: u64) -> ObservedData {
    let truth = gen_setting1(p).unwrap();
    let values = sample_data(n, &truth, &mut RngStream::new(seed, u64::MAX, 0)).unwrap();
    let data = ObservedData::from_complete(n, p, values).unwrap();
    apply_fixed_censoring(
        &data,
        &crate::sim::alternating_thresholds(p),
        &vec![CensorSide::Left; p],
    )
    .unwrap()
}

#[test]
fn run_rejects_invalid_config() {
    let data = censored_setting1(20, 3, 1);
    let cfg = SamplerConfig {
        burn_in: 10,
        n_iter: 10,
        ..SamplerConfig::default()
    };
    assert!(run_censored_ghs(&data, &cfg).is_err());
}

#[test]
fn retention_arithmetic_and_invariants() {
    let data = censored_setting1(40, 4, 2);
    let cfg = SamplerConfig {
        n_iter: 57,
        burn_in: 13,
        thin: 3,
        seed: 11,
        ..SamplerConfig::default()
    };
    let fit = run_censored_ghs(&data, &cfg).unwrap();
    assert_eq!(fit.draws.len(), (57 - 13) / 3);
    for t in 0..fit.draws.len() {
        let m = fit.draws.matrix(t);
        for j in 0..4 {
            assert!(m[(j, j)] > 0.0);
        }
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)].to_bits(), m[(j, i)].to_bits());
            }
        }
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let data = censored_setting1(30, 4, 3);
    let cfg = SamplerConfig {
        n_iter: 40,
        burn_in: 10,
        seed: 123,
        ..SamplerConfig::default()
    };
    let a = run_censored_ghs(&data, &cfg).unwrap();
    let b = run_censored_ghs(&data, &cfg).unwrap();
    for t in 0..a.draws.len() {
        assert_eq!(a.draws.matrix(t), b.draws.matrix(t));
    }
}

#[test]
fn infinite_thresholds_reduce_to_complete_data_run() {
    let truth = gen_setting1(4).unwrap();
    let values = sample_data(50, &truth, &mut RngStream::new(21, u64::MAX, 0)).unwrap();
    let complete = ObservedData::from_complete(50, 4, values).unwrap();
    let no_censoring = apply_fixed_censoring(
        &complete,
        &[f64::NEG_INFINITY; 4],
        &vec![CensorSide::Left; 4],
    )
    .unwrap();
    let cfg = SamplerConfig {
        n_iter: 60,
        burn_in: 20,
        seed: 5,
        ..SamplerConfig::default()
    };
    let a = run_censored_ghs(&complete, &cfg).unwrap();
    let b = run_censored_ghs(&no_censoring, &cfg).unwrap();
    for t in 0..a.draws.len() {
        assert_eq!(a.draws.matrix(t), b.draws.matrix(t));
    }
}

#[test]
fn complete_data_posterior_mean_recovers_truth() {
    // Law-of-large-numbers sanity check on a fully observed problem; the
    // acceptance suite repeats this at the full default iteration count.
    let truth = gen_setting1(5).unwrap();
    let values = sample_data(2000, &truth, &mut RngStream::new(31, u64::MAX, 0)).unwrap();
    let data = ObservedData::from_complete(2000, 5, values).unwrap();
    let cfg = SamplerConfig {
        n_iter: 1200,
        burn_in: 400,
        seed: 7,
        ..SamplerConfig::default()
    };
    let fit = run_censored_ghs(&data, &cfg).unwrap();
    let summary = crate::diagnostics::summarize(&fit.draws, 0.95).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let err = (summary.mean[(i, j)] - truth.omega_true[(i, j)]).abs();
            assert!(
                err < 0.1,
                "entry ({i},{j}): {} vs {}",
                summary.mean[(i, j)],
                truth.omega_true[(i, j)]
            );
        }
    }
}

#[test]
fn mixed_censored_and_missing_data_runs() {
    let data = censored_setting1(40, 4, 8);
    let mixed = apply_mcar(&data, 0.1, &mut RngStream::new(9, u64::MAX, 1)).unwrap();
    assert!(mixed.any_censored() && mixed.any_missing());
    let cfg = SamplerConfig {
        n_iter: 50,
        burn_in: 10,
        seed: 3,
        ..SamplerConfig::default()
    };
    let fit = run_censored_ghs(&mixed, &cfg).unwrap();
    assert_eq!(fit.draws.len(), 40);
}
