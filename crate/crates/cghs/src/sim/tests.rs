use super::*;
use approx::assert_abs_diff_eq;

#[test]
fn setting1_small_cases() {
    let t = gen_setting1(3).unwrap();
    let expect = DMatrix::from_row_slice(
        3,
        3,
        &[1.0, 0.3, 0.0, 0.3, 1.0, 0.3, 0.0, 0.3, 1.0],
    );
    assert_eq!(t.omega_true, expect);
    let t2 = gen_setting1(2).unwrap();
    assert_eq!(
        t2.omega_true,
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0])
    );
    assert!(gen_setting1(1).is_err());
}

#[test]
fn setting1_sigma_matches_dense_inverse() {
    let t = gen_setting1(3).unwrap();
    // Independent dense route: LU-based inversion.
    let inv = t.omega_true.clone().try_inverse().unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_abs_diff_eq!(t.sigma_true[(i, j)], inv[(i, j)], epsilon = 1e-12);
        }
    }
    let prod = &t.omega_true * &t.sigma_true;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(prod[(i, j)], target, epsilon = 1e-10);
        }
    }
}

#[test]
fn setting2_leading_block_and_identity_remainder() {
    let t = gen_setting2(5).unwrap();
    for (i, j, v) in [
        (0usize, 0usize, 1.5),
        (1, 1, 1.5),
        (2, 2, 1.5),
        (0, 1, -0.5),
        (0, 2, -0.5),
        (1, 2, -0.5),
        (3, 3, 1.0),
        (4, 4, 1.0),
    ] {
        assert_abs_diff_eq!(t.omega_true[(i, j)], v);
    }
    // Everything outside the leading block and diagonal is exactly zero.
    for i in 0..5 {
        for j in 0..5 {
            if i != j && (i >= 3 || j >= 3) {
                assert_eq!(t.omega_true[(i, j)], 0.0);
                assert_eq!(t.sigma_true[(i, j)], 0.0);
            }
        }
    }
    // Cross-check against a dense inverse of the covariance.
    let inv = t.sigma_true.clone().try_inverse().unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert_abs_diff_eq!(t.omega_true[(i, j)], inv[(i, j)], epsilon = 1e-12);
        }
    }
    let t3 = gen_setting2(3).unwrap();
    assert_abs_diff_eq!(t3.omega_true[(0, 1)], -0.5);
    assert_abs_diff_eq!(t3.omega_true[(0, 2)], -0.5);
    assert_abs_diff_eq!(t3.omega_true[(1, 2)], -0.5);
    assert!(gen_setting2(2).is_err());
}

#[test]
fn true_edge_sets() {
    assert_eq!(
        gen_setting1(10).unwrap().true_edges().len(),
        9,
        "chain graph on 10 nodes has 9 edges"
    );
    assert_eq!(gen_setting2(10).unwrap().true_edges().len(), 3);
}

#[test]
fn sampled_data_covariance_matches_truth() {
    let t = gen_setting1(3).unwrap();
    let n = 100_000;
    let mut rng = RngStream::new(5, 0, 0);
    let data = sample_data(n, &t, &mut rng).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let cov =
                (0..n).map(|i| data[i * 3 + a] * data[i * 3 + b]).sum::<f64>() / n as f64;
            assert_abs_diff_eq!(cov, t.sigma_true[(a, b)], epsilon = 0.02);
        }
    }
}

#[test]
fn sampled_data_is_deterministic() {
    let t = gen_setting1(4).unwrap();
    let mut r1 = RngStream::new(9, 0, 0);
    let mut r2 = RngStream::new(9, 0, 0);
    let a = sample_data(50, &t, &mut r1).unwrap();
    let b = sample_data(50, &t, &mut r2).unwrap();
    assert_eq!(a, b);
}

#[test]
fn independent_block_has_zero_cross_correlation() {
    // Columns 3 and 4 of the equicorrelated-block truth are independent.
    let t = gen_setting2(5).unwrap();
    let n = 100_000;
    let mut rng = RngStream::new(6, 0, 0);
    let data = sample_data(n, &t, &mut rng).unwrap();
    let cross: Vec<f64> = (0..n).map(|i| data[i * 5 + 3] * data[i * 5 + 4]).collect();
    let m = cross.iter().sum::<f64>() / n as f64;
    let var = cross.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    assert!(m.abs() < 3.0 * (var / n as f64).sqrt());
}

fn complete(n: usize, p: usize, values: Vec<f64>) -> ObservedData {
    ObservedData::from_complete(n, p, values).unwrap()
}

#[test]
fn fixed_censoring_records_threshold_and_status() {
    let data = complete(2, 2, vec![-1.0, 0.2, 0.0, 0.7]);
    let out = apply_fixed_censoring(
        &data,
        &[-0.5, 0.5],
        &[CensorSide::Left, CensorSide::Left],
    )
    .unwrap();
    assert_eq!(out.status(0, 0), CellStatus::CensoredLeft);
    assert_eq!(out.value(0, 0), -0.5);
    assert_eq!(out.status(1, 0), CellStatus::Observed);
    assert_eq!(out.value(1, 0), 0.0);
    assert_eq!(out.status(0, 1), CellStatus::CensoredLeft); // 0.2 <= 0.5
    assert_eq!(out.status(1, 1), CellStatus::Observed); // 0.7 > 0.5
    assert_eq!(out.threshold(0), Some(-0.5));
}

#[test]
fn boundary_value_is_censored() {
    let data = complete(2, 2, vec![-0.5, 1.0, 0.3, 1.0]);
    let out = apply_fixed_censoring(
        &data,
        &[-0.5, f64::NEG_INFINITY],
        &[CensorSide::Left, CensorSide::Left],
    )
    .unwrap();
    assert_eq!(out.status(0, 0), CellStatus::CensoredLeft);
}

#[test]
fn infinite_thresholds_censor_nothing() {
    let data = complete(3, 2, vec![-1.0, 0.2, 0.0, 0.7, 2.0, -3.0]);
    let out = apply_fixed_censoring(
        &data,
        &[f64::NEG_INFINITY, f64::NEG_INFINITY],
        &[CensorSide::Left, CensorSide::Left],
    )
    .unwrap();
    assert!(!out.any_censored());
    assert_eq!(out.values(), data.values());
    let out = apply_fixed_censoring(
        &data,
        &[f64::INFINITY, f64::INFINITY],
        &[CensorSide::Right, CensorSide::Right],
    )
    .unwrap();
    assert!(!out.any_censored());
}

#[test]
fn right_censoring_mirrors_left() {
    let data = complete(2, 2, vec![41.0, 1.0, 39.0, 1.0]);
    let out = apply_fixed_censoring(
        &data,
        &[40.0, f64::INFINITY],
        &[CensorSide::Right, CensorSide::Right],
    )
    .unwrap();
    assert_eq!(out.status(0, 0), CellStatus::CensoredRight);
    assert_eq!(out.value(0, 0), 40.0);
    assert_eq!(out.status(1, 0), CellStatus::Observed);
}

#[test]
fn quantile_censoring_hits_exact_counts() {
    let t = gen_setting1(10).unwrap();
    let mut rng = RngStream::new(7, 0, 0);
    let n = 200;
    let values = sample_data(n, &t, &mut rng).unwrap();
    let data = complete(n, 10, values);
    for q in [0.1, 0.3] {
        let out = apply_quantile_censoring(&data, q, CensorSide::Left).unwrap();
        let expect = (q * n as f64).ceil() as usize;
        for j in 0..10 {
            let censored = (0..n)
                .filter(|&i| out.status(i, j) == CellStatus::CensoredLeft)
                .count();
            assert_eq!(censored, expect, "column {j} at q={q}");
            // Counting oracle: censored count equals the cells at or below
            // the realized threshold.
            let c = out.threshold(j).unwrap();
            let at_or_below = (0..n).filter(|&i| data.value(i, j) <= c).count();
            assert_eq!(censored, at_or_below);
        }
    }
    // Right censoring leaves exactly q*n cells at or above its threshold.
    let out = apply_quantile_censoring(&data, 0.1, CensorSide::Right).unwrap();
    for j in 0..10 {
        let censored = (0..n)
            .filter(|&i| out.status(i, j) == CellStatus::CensoredRight)
            .count();
        assert_eq!(censored, 20, "column {j}");
    }
}

#[test]
fn quantile_zero_censors_nothing() {
    let data = complete(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
    let out = apply_quantile_censoring(&data, 0.0, CensorSide::Left).unwrap();
    assert!(!out.any_censored());
}

#[test]
fn mcar_exact_count_and_determinism() {
    let t = gen_setting1(10).unwrap();
    let mut rng = RngStream::new(8, 0, 0);
    let values = sample_data(200, &t, &mut rng).unwrap();
    let data = complete(200, 10, values);

    let out = apply_mcar(&data, 0.0, &mut RngStream::new(1, 0, 0)).unwrap();
    assert!(!out.any_missing());

    let out1 = apply_mcar(&data, 0.1, &mut RngStream::new(2, 0, 0)).unwrap();
    assert_eq!(out1.count(CellStatus::Missing), 200);
    let out2 = apply_mcar(&data, 0.1, &mut RngStream::new(2, 0, 0)).unwrap();
    assert_eq!(out1.statuses(), out2.statuses());
}

#[test]
fn mechanisms_preserve_observed_values_and_compose() {
    let t = gen_setting1(6).unwrap();
    let mut rng = RngStream::new(9, 0, 0);
    let values = sample_data(50, &t, &mut rng).unwrap();
    let data = complete(50, 6, values);
    let censored = apply_fixed_censoring(
        &data,
        &alternating_thresholds(6),
        &vec![CensorSide::Left; 6],
    )
    .unwrap();
    let mixed = apply_mcar(&censored, 0.1, &mut RngStream::new(10, 0, 0)).unwrap();
    assert_eq!(mixed.count(CellStatus::Missing), 30);
    for i in 0..50 {
        for j in 0..6 {
            match mixed.status(i, j) {
                CellStatus::Observed => {
                    assert_eq!(mixed.value(i, j).to_bits(), data.value(i, j).to_bits());
                }
                CellStatus::CensoredLeft => {
                    assert_eq!(mixed.value(i, j), mixed.threshold(j).unwrap());
                }
                CellStatus::Missing => assert!(mixed.value(i, j).is_nan()),
                CellStatus::CensoredRight => panic!("no right censoring applied"),
            }
        }
    }
}

#[test]
fn alternating_threshold_vector_shape() {
    assert_eq!(alternating_thresholds(4), vec![-0.5, 0.5, -0.5, 0.5]);
    let t = gen_setting1(10).unwrap();
    let mut rng = RngStream::new(11, 0, 0);
    let values = sample_data(100, &t, &mut rng).unwrap();
    let data = complete(100, 10, values);
    let out = apply_fixed_censoring(
        &data,
        &alternating_thresholds(10),
        &vec![CensorSide::Left; 10],
    )
    .unwrap();
    assert!(out.any_censored());
}
