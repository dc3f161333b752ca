//! Truth generators, Gaussian data sampling, and the censoring/missingness
//! mechanisms used by the simulation designs.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::data::{CellStatus, ObservedData};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Which ground-truth precision structure a design uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GraphSetting {
    /// Chain graph: unit diagonal with 0.3 on the first off-diagonals.
    Tridiagonal,
    /// Identity covariance with a 0.5-equicorrelated leading 3x3 block.
    EquicorrelatedBlock,
}

/// A ground-truth precision/covariance pair.
#[derive(Debug, Clone)]
pub struct TruthSpec {
    pub setting: GraphSetting,
    pub p: usize,
    pub omega_true: DMatrix<f64>,
    pub sigma_true: DMatrix<f64>,
}

impl TruthSpec {
    fn validated(self) -> Result<TruthSpec> {
        let p = self.p;
        let prod = &self.omega_true * &self.sigma_true;
        for i in 0..p {
            for j in 0..p {
                let target = if i == j { 1.0 } else { 0.0 };
                if (prod[(i, j)] - target).abs() > 1e-10 {
                    return Err(Error::Numerical(format!(
                        "truth check failed: (Omega Sigma)[{i},{j}] = {}",
                        prod[(i, j)]
                    )));
                }
            }
        }
        Ok(self)
    }

    /// Unordered index pairs of the nonzero off-diagonal entries.
    pub fn true_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..self.p {
            for j in i + 1..self.p {
                if self.omega_true[(i, j)] != 0.0 {
                    edges.push((i, j));
                }
            }
        }
        edges
    }
}

/// Tridiagonal truth: precision is identity plus 0.3 on |i-j| = 1.
pub fn gen_setting1(p: usize) -> Result<TruthSpec> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!(
            "tridiagonal truth needs p >= 2, got {p}"
        )));
    }
    let omega = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if i.abs_diff(j) == 1 {
            0.3
        } else {
            0.0
        }
    });
    let chol = Cholesky::new(omega.clone())
        .ok_or_else(|| Error::Numerical("tridiagonal truth is not positive definite".into()))?;
    let sigma = chol.inverse();
    TruthSpec {
        setting: GraphSetting::Tridiagonal,
        p,
        omega_true: omega,
        sigma_true: sigma,
    }
    .validated()
}

/// Equicorrelated-block truth: covariance is identity with 0.5 among the
/// first three variables. Both matrices are assembled in closed form.
pub fn gen_setting2(p: usize) -> Result<TruthSpec> {
    if p < 3 {
        return Err(Error::InvalidParameter(format!(
            "equicorrelated-block truth needs p >= 3, got {p}"
        )));
    }
    let sigma = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if i < 3 && j < 3 {
            0.5
        } else {
            0.0
        }
    });
    // Inverse of the 3x3 equicorrelation block with rho = 0.5:
    // diagonal 1.5, off-diagonal -0.5; the rest stays identity.
    let omega = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            if i < 3 {
                1.5
            } else {
                1.0
            }
        } else if i < 3 && j < 3 {
            -0.5
        } else {
            0.0
        }
    });
    TruthSpec {
        setting: GraphSetting::EquicorrelatedBlock,
        p,
        omega_true: omega,
        sigma_true: sigma,
    }
    .validated()
}

/// Draws `n` i.i.d. rows from `N(0, Sigma_true)`, row-major.
pub fn sample_data(n: usize, truth: &TruthSpec, rng: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1 rows".into()));
    }
    let p = truth.p;
    let chol = Cholesky::new(truth.sigma_true.clone())
        .ok_or_else(|| Error::Numerical("truth covariance is not positive definite".into()))?;
    let l = chol.l();
    let mut out = vec![0.0; n * p];
    let mut u = DVector::zeros(p);
    for i in 0..n {
        for k in 0..p {
            u[k] = StandardNormal.sample(rng);
        }
        let row = &l * &u;
        out[i * p..(i + 1) * p].copy_from_slice(row.as_slice());
    }
    Ok(out)
}

/// Which side of the threshold gets censored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CensorSide {
    Left,
    Right,
}

/// Applies fixed-threshold censoring per column to the observed cells of
/// `data`. A threshold of -inf (left) or +inf (right) censors nothing in
/// that column. Left censoring records cells `<= c_j` as `c_j`; right
/// censoring records cells `>= c_j`.
pub fn apply_fixed_censoring(
    data: &ObservedData,
    thresholds: &[f64],
    sides: &[CensorSide],
) -> Result<ObservedData> {
    let (n, p) = (data.n_rows(), data.n_cols());
    if thresholds.len() != p || sides.len() != p {
        return Err(Error::InvalidInput(format!(
            "expected {p} thresholds/sides, got {}/{}",
            thresholds.len(),
            sides.len()
        )));
    }
    let mut values = data.values().to_vec();
    let mut status = data.statuses().to_vec();
    let mut out_thresholds: Vec<Option<f64>> = data.thresholds().to_vec();
    for j in 0..p {
        let c = thresholds[j];
        if c.is_nan() {
            return Err(Error::InvalidInput(format!("threshold {j} is NaN")));
        }
        let mut hit = false;
        for i in 0..n {
            let idx = i * p + j;
            if status[idx] != CellStatus::Observed {
                continue;
            }
            let censor = match sides[j] {
                CensorSide::Left => values[idx] <= c,
                CensorSide::Right => values[idx] >= c,
            };
            if censor {
                values[idx] = c;
                status[idx] = match sides[j] {
                    CensorSide::Left => CellStatus::CensoredLeft,
                    CensorSide::Right => CellStatus::CensoredRight,
                };
                hit = true;
            }
        }
        if hit {
            out_thresholds[j] = Some(c);
        }
    }
    ObservedData::new(n, p, values, status, out_thresholds)
}

/// The alternating fixed-threshold vector `(-0.5, 0.5, -0.5, ...)`.
pub fn alternating_thresholds(p: usize) -> Vec<f64> {
    (0..p).map(|j| if j % 2 == 0 { -0.5 } else { 0.5 }).collect()
}

/// Nearest-rank empirical quantile: the `ceil(q n)`-th order statistic.
fn nearest_rank_quantile(column: &[f64], q: f64) -> f64 {
    let mut xs = column.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (q * xs.len() as f64).ceil() as usize;
    xs[rank.clamp(1, xs.len()) - 1]
}

/// Censors roughly a proportion `q` of each column at its empirical
/// quantile: the `q`-quantile for left censoring, or (by mirror symmetry)
/// the threshold that leaves `q n` cells at or above it for right
/// censoring.
pub fn apply_quantile_censoring(
    data: &ObservedData,
    q: f64,
    side: CensorSide,
) -> Result<ObservedData> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "censoring proportion must be in [0, 1), got {q}"
        )));
    }
    if q == 0.0 {
        return Ok(data.clone());
    }
    let (n, p) = (data.n_rows(), data.n_cols());
    let mut thresholds = Vec::with_capacity(p);
    for j in 0..p {
        let col: Vec<f64> = (0..n).map(|i| data.value(i, j)).collect();
        let c = match side {
            CensorSide::Left => nearest_rank_quantile(&col, q),
            CensorSide::Right => {
                let neg: Vec<f64> = col.iter().map(|v| -v).collect();
                -nearest_rank_quantile(&neg, q)
            }
        };
        thresholds.push(c);
    }
    apply_fixed_censoring(data, &thresholds, &vec![side; p])
}

/// Marks exactly `round(q n p)` cells, chosen uniformly without
/// replacement, as missing. A mask that would empty a column is redrawn
/// (bounded retries).
pub fn apply_mcar(data: &ObservedData, q: f64, rng: &mut RngStream) -> Result<ObservedData> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "missing proportion must be in [0, 1), got {q}"
        )));
    }
    let (n, p) = (data.n_rows(), data.n_cols());
    let total = n * p;
    let k = (q * total as f64).round() as usize;
    if k == 0 {
        return Ok(data.clone());
    }
    const MAX_RETRIES: usize = 100;
    for _ in 0..MAX_RETRIES {
        let mask = sample_without_replacement(total, k, rng);
        let mut observed_per_col = vec![0usize; p];
        for i in 0..n {
            for j in 0..p {
                if data.status(i, j) == CellStatus::Observed && !mask[i * p + j] {
                    observed_per_col[j] += 1;
                }
            }
        }
        if observed_per_col.iter().any(|&c| c == 0) {
            continue;
        }
        let mut values = data.values().to_vec();
        let mut status = data.statuses().to_vec();
        for (idx, &hit) in mask.iter().enumerate() {
            if hit {
                values[idx] = f64::NAN;
                status[idx] = CellStatus::Missing;
            }
        }
        return ObservedData::new(n, p, values, status, data.thresholds().to_vec());
    }
    Err(Error::UnsupportedData(format!(
        "could not draw a missingness mask leaving every column observed \
         (q = {q}, n = {n}, p = {p})"
    )))
}

/// Exact-count uniform mask via partial Fisher-Yates on cell indices.
fn sample_without_replacement(total: usize, k: usize, rng: &mut RngStream) -> Vec<bool> {
    use rand::Rng;
    let mut idx: Vec<usize> = (0..total).collect();
    let mut mask = vec![false; total];
    for step in 0..k.min(total) {
        let pick = step + rng.random_range(0..total - step);
        idx.swap(step, pick);
        mask[idx[step]] = true;
    }
    mask
}

#[cfg(test)]
mod tests;
