//! Observed-data container and the latent Gaussian matrix the samplers
//! update in place.

use crate::error::{Error, Result};

/// Per-cell observation status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Observed,
    CensoredLeft,
    CensoredRight,
    Missing,
}

impl CellStatus {
    pub fn code(self) -> char {
        match self {
            CellStatus::Observed => 'O',
            CellStatus::CensoredLeft => 'L',
            CellStatus::CensoredRight => 'R',
            CellStatus::Missing => 'M',
        }
    }

    pub fn from_code(c: char) -> Option<CellStatus> {
        match c {
            'O' => Some(CellStatus::Observed),
            'L' => Some(CellStatus::CensoredLeft),
            'R' => Some(CellStatus::CensoredRight),
            'M' => Some(CellStatus::Missing),
            _ => None,
        }
    }
}

/// An `n x p` data matrix with per-cell status and per-column censoring
/// thresholds.
///
/// Censored cells hold their column threshold in `values`; missing cells
/// hold NaN and must never reach arithmetic — `status` is the source of
/// truth. A column never mixes left and right censoring.
#[derive(Debug, Clone)]
pub struct ObservedData {
    n: usize,
    p: usize,
    values: Vec<f64>,
    status: Vec<CellStatus>,
    thresholds: Vec<Option<f64>>,
}

impl ObservedData {
    /// Validates and assembles an observation set. `values` and `status`
    /// are row-major `n x p`; `thresholds` has one entry per column, `None`
    /// for columns with no censored cells.
    pub fn new(
        n: usize,
        p: usize,
        values: Vec<f64>,
        status: Vec<CellStatus>,
        thresholds: Vec<Option<f64>>,
    ) -> Result<Self> {
        if n < 2 || p < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 rows and 2 columns, got {n} x {p}"
            )));
        }
        if values.len() != n * p || status.len() != n * p {
            return Err(Error::InvalidInput(format!(
                "values/status have lengths {}/{}, expected {}",
                values.len(),
                status.len(),
                n * p
            )));
        }
        if thresholds.len() != p {
            return Err(Error::InvalidInput(format!(
                "thresholds has length {}, expected {p}",
                thresholds.len()
            )));
        }
        let mut values = values;
        for j in 0..p {
            let mut left = false;
            let mut right = false;
            for i in 0..n {
                let idx = i * p + j;
                match status[idx] {
                    CellStatus::Observed => {
                        if !values[idx].is_finite() {
                            return Err(Error::InvalidInput(format!(
                                "observed cell ({i}, {j}) holds non-finite value {}",
                                values[idx]
                            )));
                        }
                    }
                    CellStatus::Missing => {
                        // Enforce the sentinel so stray values cannot leak
                        // into arithmetic.
                        values[idx] = f64::NAN;
                    }
                    CellStatus::CensoredLeft | CellStatus::CensoredRight => {
                        if status[idx] == CellStatus::CensoredLeft {
                            left = true;
                        } else {
                            right = true;
                        }
                        let c = thresholds[j].ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "column {j} has censored cells but no threshold"
                            ))
                        })?;
                        if values[idx] != c {
                            return Err(Error::InvalidInput(format!(
                                "censored cell ({i}, {j}) holds {} but threshold is {c}",
                                values[idx]
                            )));
                        }
                    }
                }
            }
            if left && right {
                return Err(Error::InvalidInput(format!(
                    "column {j} mixes left- and right-censored cells"
                )));
            }
        }
        Ok(ObservedData {
            n,
            p,
            values,
            status,
            thresholds,
        })
    }

    /// Wraps a fully observed row-major matrix.
    pub fn from_complete(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        let status = vec![CellStatus::Observed; n * p];
        ObservedData::new(n, p, values, status, vec![None; p])
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    #[inline]
    pub fn status(&self, i: usize, j: usize) -> CellStatus {
        self.status[i * self.p + j]
    }

    pub fn threshold(&self, j: usize) -> Option<f64> {
        self.thresholds[j]
    }

    pub fn thresholds(&self) -> &[Option<f64>] {
        &self.thresholds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn statuses(&self) -> &[CellStatus] {
        &self.status
    }

    pub fn any_censored(&self) -> bool {
        self.status
            .iter()
            .any(|s| matches!(s, CellStatus::CensoredLeft | CellStatus::CensoredRight))
    }

    pub fn any_missing(&self) -> bool {
        self.status.iter().any(|s| *s == CellStatus::Missing)
    }

    pub fn count(&self, which: CellStatus) -> usize {
        self.status.iter().filter(|s| **s == which).count()
    }
}

/// The fully imputed `n x p` Gaussian matrix updated each sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentMatrix {
    n: usize,
    p: usize,
    z: Vec<f64>,
}

impl LatentMatrix {
    pub fn from_vec(n: usize, p: usize, z: Vec<f64>) -> Self {
        assert_eq!(z.len(), n * p);
        LatentMatrix { n, p, z }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.p + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.z[i * self.p + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.z
    }

    /// Mutable row views for parallel per-row imputation.
    pub fn rows_mut(&mut self) -> std::slice::ChunksMut<'_, f64> {
        self.z.chunks_mut(self.p)
    }

    /// Checks the latent invariants against the observation set: observed
    /// cells are bit-identical to the input and censored cells respect
    /// their bounds. Used as a hard assertion in debug builds.
    ///
    /// Bounds use negated comparisons so a NaN latent value fails them.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check_invariants(&self, data: &ObservedData) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.p {
                let z = self.value(i, j);
                match data.status(i, j) {
                    CellStatus::Observed => {
                        if z.to_bits() != data.value(i, j).to_bits() {
                            return Err(Error::Numerical(format!(
                                "observed cell ({i}, {j}) was modified: {} vs {}",
                                z,
                                data.value(i, j)
                            )));
                        }
                    }
                    CellStatus::CensoredLeft => {
                        let c = data.threshold(j).unwrap();
                        if !(z <= c) {
                            return Err(Error::Numerical(format!(
                                "left-censored cell ({i}, {j}) = {z} above threshold {c}"
                            )));
                        }
                    }
                    CellStatus::CensoredRight => {
                        let c = data.threshold(j).unwrap();
                        if !(z >= c) {
                            return Err(Error::Numerical(format!(
                                "right-censored cell ({i}, {j}) = {z} below threshold {c}"
                            )));
                        }
                    }
                    CellStatus::Missing => {
                        if !z.is_finite() {
                            return Err(Error::Numerical(format!(
                                "missing cell ({i}, {j}) imputed to non-finite {z}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
