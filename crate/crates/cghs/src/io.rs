//! File formats: plain numeric CSV for data/status/threshold/truth
//! matrices (missing cells as the literal token `NA`), JSON posterior
//! summaries, and edge-list CSV.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! file re-reads to bit-identical values.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{CellStatus, ObservedData};
use crate::diagnostics::PosteriorSummary;
use crate::error::{Error, Result};

pub const NA_TOKEN: &str = "NA";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

pub fn write_string(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        NA_TOKEN.to_string()
    } else {
        format!("{v}")
    }
}

/// Renders a row-major value matrix as CSV, NaN cells as `NA`.
pub fn values_csv(n: usize, p: usize, values: &[f64]) -> String {
    let mut out = String::new();
    for i in 0..n {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_cell(values[i * p + j]));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn status_csv(data: &ObservedData) -> String {
    let (n, p) = (data.n_rows(), data.n_cols());
    let mut out = String::new();
    for i in 0..n {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push(data.status(i, j).code());
        }
        out.push('\n');
    }
    out
}

pub fn thresholds_csv(thresholds: &[Option<f64>]) -> String {
    let mut out = String::new();
    for (j, t) in thresholds.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        match t {
            Some(v) => {
                let _ = write!(out, "{v}");
            }
            None => out.push_str(NA_TOKEN),
        }
    }
    out.push('\n');
    out
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let body = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(body
        .lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .filter(|l| !l.trim().is_empty())
        .collect())
}

/// Reads a numeric CSV with optional `NA` cells (returned as NaN).
pub fn read_values_csv(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(parse_err(path, "file is empty"));
    }
    let mut values = Vec::new();
    let mut p = 0usize;
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if i == 0 {
            p = cells.len();
        } else if cells.len() != p {
            return Err(parse_err(
                path,
                format!("row {i} has {} cells, expected {p}", cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            if cell == NA_TOKEN {
                values.push(f64::NAN);
            } else {
                values.push(cell.parse::<f64>().map_err(|_| {
                    parse_err(path, format!("row {i}, column {j}: cannot parse '{cell}'"))
                })?);
            }
        }
    }
    Ok((lines.len(), p, values))
}

pub fn read_status_csv(path: &Path) -> Result<(usize, usize, Vec<CellStatus>)> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(parse_err(path, "file is empty"));
    }
    let mut status = Vec::new();
    let mut p = 0usize;
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if i == 0 {
            p = cells.len();
        } else if cells.len() != p {
            return Err(parse_err(
                path,
                format!("row {i} has {} cells, expected {p}", cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            let code = cell
                .chars()
                .next()
                .filter(|_| cell.len() == 1)
                .and_then(CellStatus::from_code)
                .ok_or_else(|| {
                    parse_err(
                        path,
                        format!("row {i}, column {j}: status must be one of O/L/R/M, got '{cell}'"),
                    )
                })?;
            status.push(code);
        }
    }
    Ok((lines.len(), p, status))
}

pub fn read_thresholds_csv(path: &Path) -> Result<Vec<Option<f64>>> {
    let lines = read_lines(path)?;
    if lines.len() != 1 {
        return Err(parse_err(
            path,
            format!("expected a single row of thresholds, got {} rows", lines.len()),
        ));
    }
    lines[0]
        .split(',')
        .enumerate()
        .map(|(j, cell)| {
            let cell = cell.trim();
            if cell == NA_TOKEN {
                Ok(None)
            } else {
                cell.parse::<f64>()
                    .map(Some)
                    .map_err(|_| parse_err(path, format!("column {j}: cannot parse '{cell}'")))
            }
        })
        .collect()
}

/// Assembles and validates an observation set from the three CSV files.
pub fn read_observed_data(
    data_path: &Path,
    status_path: &Path,
    thresholds_path: Option<&Path>,
) -> Result<ObservedData> {
    let (n, p, values) = read_values_csv(data_path)?;
    let (ns, ps, status) = read_status_csv(status_path)?;
    if (n, p) != (ns, ps) {
        return Err(Error::InvalidInput(format!(
            "data is {n}x{p} but status is {ns}x{ps}"
        )));
    }
    let thresholds = match thresholds_path {
        Some(tp) => {
            let t = read_thresholds_csv(tp)?;
            if t.len() != p {
                return Err(Error::InvalidInput(format!(
                    "thresholds file has {} columns, data has {p}",
                    t.len()
                )));
            }
            t
        }
        None => vec![None; p],
    };
    ObservedData::new(n, p, values, status, thresholds)
}

/// JSON layout of a posterior summary: row-major matrices with explicit
/// dimensions.
#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryJson {
    pub p: usize,
    pub ci_level: f64,
    pub mean: MatrixJson,
    pub median: MatrixJson,
    pub ci_lower: MatrixJson,
    pub ci_upper: MatrixJson,
    /// 1-based unordered pairs (j, k) with j < k.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidInput(format!(
                "matrix payload has {} entries for {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

pub fn summary_to_json(summary: &PosteriorSummary) -> SummaryJson {
    SummaryJson {
        p: summary.mean.nrows(),
        ci_level: summary.level,
        mean: MatrixJson::from_matrix(&summary.mean),
        median: MatrixJson::from_matrix(&summary.median),
        ci_lower: MatrixJson::from_matrix(&summary.ci_lower),
        ci_upper: MatrixJson::from_matrix(&summary.ci_upper),
        edges: summary.edges.iter().map(|&(j, k)| (j + 1, k + 1)).collect(),
    }
}

/// Edge list CSV: 1-based indices with posterior mean and interval bounds.
pub fn edges_csv(summary: &PosteriorSummary) -> String {
    let mut out = String::from("j,k,mean,ci_lower,ci_upper\n");
    for &(j, k) in &summary.edges {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            j + 1,
            k + 1,
            summary.mean[(j, k)],
            summary.ci_lower[(j, k)],
            summary.ci_upper[(j, k)]
        );
    }
    out
}

/// Chain CSV for one tracked entry: iteration index and value.
pub fn chain_csv(chain: &[f64]) -> String {
    let mut out = String::from("iteration,value\n");
    for (t, v) in chain.iter().enumerate() {
        let _ = writeln!(out, "{},{}", t + 1, v);
    }
    out
}

pub fn read_chain_csv(path: &Path) -> Result<Vec<f64>> {
    let lines = read_lines(path)?;
    if lines.len() < 2 || !lines[0].starts_with("iteration") {
        return Err(parse_err(path, "expected an 'iteration,value' chain CSV"));
    }
    lines[1..]
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let cell = line
                .split(',')
                .nth(1)
                .ok_or_else(|| parse_err(path, format!("row {}: missing value", i + 1)))?;
            cell.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(path, format!("row {}: cannot parse '{cell}'", i + 1)))
        })
        .collect()
}
