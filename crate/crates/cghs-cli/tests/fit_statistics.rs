//! Statistical behavior of the fit pipeline on designs that exercise the
//! empty-graph case and a real-data-shaped censored problem.

use std::path::PathBuf;

use cghs::diagnostics::summarize;
use cghs::io;
use cghs::model::SamplerConfig;
use cghs::rng::{derive_seed, RngStream, DETACHED_SWEEP};
use cghs::run_censored_ghs;
use cghs::sim::{apply_fixed_censoring, gen_setting1, sample_data, CensorSide};
use cghs::ObservedData;
use cghs_cli::{cmd_fit, FitArgs};

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("cghs_fit_stats").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Under an identity-precision truth the edge list is usually empty and
/// never contains more than a couple of the 45 null pairs; the falsely
/// selected share stays at or below 5% over 20 replications.
#[test]
fn identity_truth_keeps_edge_list_empty() {
    use cghs::dist::sample_trunc_normal_upper;
    let (n, p) = (200, 10);
    let null_pairs = (p * (p - 1) / 2) as f64;
    let reps = 20;
    let mut empty = 0;
    let mut worst = 0usize;
    let mut rate_sum = 0.0;
    for rep in 0..reps {
        let seed = derive_seed(5150, &[rep]);
        let mut rng = RngStream::new(seed, DETACHED_SWEEP, 0);
        let values: Vec<f64> = (0..n * p)
            .map(|_| sample_trunc_normal_upper(0.0, 1.0, f64::INFINITY, &mut rng).unwrap())
            .collect();
        let data = ObservedData::from_complete(n, p, values).unwrap();
        let fit = run_censored_ghs(&data, &SamplerConfig::with_seed(seed)).unwrap();
        let summary = summarize(&fit.draws, 0.95).unwrap();
        // Every pair is null, so every selection is false.
        if summary.edges.is_empty() {
            empty += 1;
        }
        worst = worst.max(summary.edges.len());
        rate_sum += summary.edges.len() as f64 / null_pairs;
    }
    let mean_rate = rate_sum / reps as f64;
    assert!(
        empty >= reps / 2,
        "only {empty} of {reps} replications gave an empty edge list"
    );
    assert!(worst <= 3, "a replication selected {worst} false edges");
    assert!(mean_rate <= 0.05, "false selection rate {mean_rate}");
}

/// A 48 x 63 right-censored problem (detection limit 40) fitted for 10000
/// iterations completes and emits an edge list through the CLI path.
#[test]
fn real_data_shaped_fit_completes() {
    let dir = tmp("mkmep_shape");
    let (n, p) = (48, 63);
    let truth = gen_setting1(p).unwrap();
    let mut rng = RngStream::new(63, DETACHED_SWEEP, 0);
    let values: Vec<f64> = sample_data(n, &truth, &mut rng)
        .unwrap()
        .into_iter()
        .map(|v| 15.0 * v)
        .collect();
    let complete = ObservedData::from_complete(n, p, values).unwrap();
    let data = apply_fixed_censoring(&complete, &vec![40.0; p], &vec![CensorSide::Right; p])
        .unwrap();
    assert!(data.any_censored(), "the detection limit should bind");

    io::write_string(&dir.join("data.csv"), &io::values_csv(n, p, data.values())).unwrap();
    io::write_string(&dir.join("status.csv"), &io::status_csv(&data)).unwrap();
    io::write_string(
        &dir.join("thresholds.csv"),
        &io::thresholds_csv(data.thresholds()),
    )
    .unwrap();

    let out = dir.join("fit");
    let args = FitArgs {
        data: dir.join("data.csv"),
        status: dir.join("status.csv"),
        thresholds: Some(dir.join("thresholds.csv")),
        mode: "auto".into(),
        iters: 10_000,
        burnin: 1000,
        thin: 1,
        a0: 0.01,
        b0: 0.01,
        seed: 2016,
        ci_level: 0.95,
        track: None,
        out: out.clone(),
    };
    cmd_fit(&args, vec!["test".into()]).unwrap();
    let edges = std::fs::read_to_string(out.join("edges.csv")).unwrap();
    assert!(edges.starts_with("j,k,mean,ci_lower,ci_upper"));
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(parsed["p"], 63);
}
