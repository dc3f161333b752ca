//! Command implementations behind the `cghs` binary.
//!
//! Every command is a pure function of its inputs, flags, and seed; a run
//! manifest with input digests and output digests is written next to every
//! output set so reruns can be checked byte for byte. Worker threads are
//! controlled by the `RAYON_NUM_THREADS` environment variable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use cghs::bench::{aggregate, run_design_row, table_rows, BenchTable};
use cghs::diagnostics::{acf, ess, summarize};
use cghs::error::Error;
use cghs::io;
use cghs::model::SamplerConfig;
use cghs::sim::{
    apply_fixed_censoring, apply_mcar, apply_quantile_censoring, gen_setting1, gen_setting2,
    CensorSide, TruthSpec,
};
use cghs::rng::{RngStream, DETACHED_SWEEP};
use cghs::{ObservedData, PosteriorDraws, Result};

#[derive(Debug, Parser)]
#[command(
    name = "cghs",
    about = "Sparse precision-matrix estimation for censored and missing Gaussian data",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic data set under one of the study designs.
    Simulate(SimulateArgs),
    /// Fit a sampler to CSV data and export posterior summaries.
    Fit(FitArgs),
    /// Run a benchmark table at a chosen replication count.
    Benchmark(BenchmarkArgs),
    /// Export trace/ACF/ESS diagnostics for tracked entries of a fit.
    Diagnostics(DiagnosticsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Truth setting: 1 (tridiagonal chain) or 2 (equicorrelated block).
    #[arg(long)]
    pub setting: u8,
    /// Number of variables.
    #[arg(long)]
    pub p: usize,
    /// Number of rows.
    #[arg(long)]
    pub n: usize,
    /// Incompleteness mechanism.
    #[arg(long, value_parser = ["fixed-censor", "quantile-censor", "mcar"])]
    pub mechanism: String,
    /// Proportion for quantile-censor or mcar mechanisms.
    #[arg(long)]
    pub q: Option<f64>,
    /// Comma-separated per-column thresholds for fixed-censor, or the word
    /// "alternating" for (-0.5, 0.5, ...).
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Censoring side for the censor mechanisms.
    #[arg(long, default_value = "left", value_parser = ["left", "right"])]
    pub side: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Data CSV (numeric, NA for missing cells).
    #[arg(long)]
    pub data: PathBuf,
    /// Status CSV (cells O/L/R/M).
    #[arg(long)]
    pub status: PathBuf,
    /// Thresholds CSV (one row, NA where a column has no censoring).
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Which sampler to run.
    #[arg(long, default_value = "auto", value_parser = ["censored", "missing", "auto"])]
    pub mode: String,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 0.01)]
    pub a0: f64,
    #[arg(long, default_value_t = 0.01)]
    pub b0: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Credible level for interval-based edge selection.
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// Entries whose chains are exported, as 1-based `j,k` pairs separated
    /// by semicolons, e.g. "1,2;2,3".
    #[arg(long)]
    pub track: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Table identifier T1..T6.
    #[arg(long)]
    pub table: String,
    #[arg(long, default_value_t = 20)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnosticsArgs {
    /// Directory produced by `cghs fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// 1-based `j,k` pairs separated by semicolons; must have been tracked
    /// at fit time.
    #[arg(long)]
    pub entries: String,
    #[arg(long, default_value_t = 50)]
    pub max_lag: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Run manifest serialized alongside every output set.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub input_digests: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_ms: u128,
}

/// FNV-1a over the file bytes, hex encoded.
pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(digest_bytes(&bytes))
}

fn digest_bytes(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

struct OutputSet {
    dir: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutputSet {
    fn new(dir: &Path) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            written: BTreeMap::new(),
        }
    }

    fn write(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        io::write_string(&path, body)?;
        self.written
            .insert(name.to_string(), digest_bytes(body.as_bytes()));
        Ok(path)
    }

    fn finish(
        self,
        command: Vec<String>,
        config: serde_json::Value,
        seed: u64,
        input_digests: BTreeMap<String, String>,
        started: Instant,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command,
            config,
            seed,
            input_digests,
            outputs: self.written.clone(),
            wall_ms: started.elapsed().as_millis(),
        };
        let body = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::InvalidInput(format!("manifest serialization: {e}")))?;
        io::write_string(&self.dir.join("manifest.json"), &body)?;
        Ok(manifest)
    }
}

fn truth_for(setting: u8, p: usize) -> Result<TruthSpec> {
    match setting {
        1 => gen_setting1(p),
        2 => gen_setting2(p),
        other => Err(Error::InvalidParameter(format!(
            "setting must be 1 or 2, got {other}"
        ))),
    }
}

fn parse_thresholds(spec: &str, p: usize) -> Result<Vec<f64>> {
    if spec == "alternating" {
        return Ok(cghs::sim::alternating_thresholds(p));
    }
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != p {
        return Err(Error::InvalidParameter(format!(
            "expected {p} thresholds, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|s| {
            let s = s.trim();
            match s {
                "-inf" => Ok(f64::NEG_INFINITY),
                "inf" => Ok(f64::INFINITY),
                _ => s
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad threshold '{s}'"))),
            }
        })
        .collect()
}

pub fn cmd_simulate(args: &SimulateArgs, argv: Vec<String>) -> Result<RunManifest> {
    let started = Instant::now();
    let truth = truth_for(args.setting, args.p)?;
    let mut rng = RngStream::new(args.seed, DETACHED_SWEEP, 0);
    let values = cghs::sim::sample_data(args.n, &truth, &mut rng)?;
    let complete = ObservedData::from_complete(args.n, args.p, values)?;
    let side = match args.side.as_str() {
        "left" => CensorSide::Left,
        _ => CensorSide::Right,
    };
    let data = match args.mechanism.as_str() {
        "fixed-censor" => {
            let spec = args.thresholds.as_deref().ok_or_else(|| {
                Error::InvalidParameter("fixed-censor needs --thresholds".into())
            })?;
            let thresholds = parse_thresholds(spec, args.p)?;
            apply_fixed_censoring(&complete, &thresholds, &vec![side; args.p])?
        }
        "quantile-censor" => {
            let q = args.q.ok_or_else(|| {
                Error::InvalidParameter("quantile-censor needs --q".into())
            })?;
            apply_quantile_censoring(&complete, q, side)?
        }
        "mcar" => {
            let q = args
                .q
                .ok_or_else(|| Error::InvalidParameter("mcar needs --q".into()))?;
            let mut mask_rng = RngStream::new(args.seed, DETACHED_SWEEP, 1);
            apply_mcar(&complete, q, &mut mask_rng)?
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown mechanism '{other}'"
            )))
        }
    };

    let mut out = OutputSet::new(&args.out);
    out.write(
        "data.csv",
        &io::values_csv(data.n_rows(), data.n_cols(), data.values()),
    )?;
    out.write("status.csv", &io::status_csv(&data))?;
    out.write("thresholds.csv", &io::thresholds_csv(data.thresholds()))?;
    out.write("omega_true.csv", &io::matrix_csv(&truth.omega_true))?;
    out.write("sigma_true.csv", &io::matrix_csv(&truth.sigma_true))?;
    let config = serde_json::json!({
        "setting": args.setting,
        "p": args.p,
        "n": args.n,
        "mechanism": args.mechanism,
        "q": args.q,
        "thresholds": args.thresholds,
        "side": args.side,
    });
    out.finish(argv, config, args.seed, BTreeMap::new(), started)
}

fn parse_entry_pairs(spec: &str, p: usize) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for part in spec.split(';').filter(|s| !s.trim().is_empty()) {
        let mut it = part.split(',');
        let (a, b) = (it.next(), it.next());
        let (a, b) = match (a, b, it.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "entry '{part}' must be 'j,k'"
                )))
            }
        };
        let j: usize = a
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad index '{a}'")))?;
        let k: usize = b
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad index '{b}'")))?;
        if j == 0 || k == 0 || j > p || k > p {
            return Err(Error::InvalidParameter(format!(
                "entry ({j}, {k}) out of range for p = {p} (indices are 1-based)"
            )));
        }
        let (j, k) = (j - 1, k - 1);
        pairs.push(if j <= k { (j, k) } else { (k, j) });
    }
    Ok(pairs)
}

pub fn cmd_fit(args: &FitArgs, argv: Vec<String>) -> Result<RunManifest> {
    let started = Instant::now();
    let mut input_digests = BTreeMap::new();
    input_digests.insert(args.data.display().to_string(), digest_file(&args.data)?);
    input_digests.insert(args.status.display().to_string(), digest_file(&args.status)?);
    if let Some(tp) = &args.thresholds {
        input_digests.insert(tp.display().to_string(), digest_file(tp)?);
    }
    let data = io::read_observed_data(&args.data, &args.status, args.thresholds.as_deref())?;

    let cfg = SamplerConfig {
        n_iter: args.iters,
        burn_in: args.burnin,
        thin: args.thin,
        a0: args.a0,
        b0: args.b0,
        seed: args.seed,
        ..SamplerConfig::default()
    };
    cfg.validate()?;

    let draws: PosteriorDraws = match args.mode.as_str() {
        "censored" => cghs::run_censored_ghs(&data, &cfg)?.draws,
        "missing" => cghs::run_missing_ghs(&data, &cfg)?.draws,
        "auto" => {
            if data.any_censored() {
                cghs::run_censored_ghs(&data, &cfg)?.draws
            } else if data.any_missing() {
                cghs::run_missing_ghs(&data, &cfg)?.draws
            } else {
                cghs::run_censored_ghs(&data, &cfg)?.draws
            }
        }
        other => {
            return Err(Error::InvalidParameter(format!("unknown mode '{other}'")))
        }
    };

    let summary = summarize(&draws, args.ci_level)?;
    let mut out = OutputSet::new(&args.out);
    let json = serde_json::to_string_pretty(&io::summary_to_json(&summary))
        .map_err(|e| Error::InvalidInput(format!("summary serialization: {e}")))?;
    out.write("summary.json", &json)?;
    out.write("edges.csv", &io::edges_csv(&summary))?;
    if let Some(spec) = &args.track {
        for (j, k) in parse_entry_pairs(spec, data.n_cols())? {
            let chain = draws.entry_chain(j, k);
            out.write(&format!("chain_{}_{}.csv", j + 1, k + 1), &io::chain_csv(&chain))?;
        }
    }
    let config = serde_json::json!({
        "mode": args.mode,
        "iters": args.iters,
        "burnin": args.burnin,
        "thin": args.thin,
        "a0": args.a0,
        "b0": args.b0,
        "ci_level": args.ci_level,
        "track": args.track,
        "n": data.n_rows(),
        "p": data.n_cols(),
    });
    out.finish(argv, config, args.seed, input_digests, started)
}

pub fn cmd_benchmark(args: &BenchmarkArgs, argv: Vec<String>) -> Result<RunManifest> {
    let started = Instant::now();
    let table: BenchTable = args.table.parse()?;
    let cfg = SamplerConfig {
        n_iter: args.iters,
        burn_in: args.burnin,
        thin: args.thin,
        ..SamplerConfig::default()
    };
    cfg.validate()?;

    // Wall-clock timings stay out of the CSVs so reruns are byte-identical;
    // the manifest carries the run's timing.
    let mut reps_csv = String::from("label,rep,err_mean,err_median,tpr,fdr,fpr\n");
    let mut agg_csv = String::from(
        "label,reps,err_mean,err_mean_sd,err_median,err_median_sd,tpr,tpr_sd,fdr,fdr_sd,fpr,fpr_sd\n",
    );
    for row in table_rows(table) {
        let metrics = run_design_row(&row, args.replications, args.seed, &cfg)?;
        for m in &metrics {
            reps_csv.push_str(&format!(
                "\"{}\",{},{},{},{},{},{}\n",
                row.label, m.rep, m.err_mean, m.err_median, m.tpr, m.fdr, m.fpr
            ));
        }
        let a = aggregate(&metrics);
        agg_csv.push_str(&format!(
            "\"{}\",{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
            row.label,
            a.reps,
            a.err_mean.0,
            a.err_mean.1,
            a.err_median.0,
            a.err_median.1,
            a.tpr.0,
            a.tpr.1,
            a.fdr.0,
            a.fdr.1,
            a.fpr.0,
            a.fpr.1
        ));
    }
    let mut out = OutputSet::new(&args.out);
    out.write("replications.csv", &reps_csv)?;
    out.write("aggregate.csv", &agg_csv)?;
    let config = serde_json::json!({
        "table": args.table,
        "replications": args.replications,
        "iters": args.iters,
        "burnin": args.burnin,
        "thin": args.thin,
    });
    out.finish(argv, config, args.seed, BTreeMap::new(), started)
}

pub fn cmd_diagnostics(args: &DiagnosticsArgs, argv: Vec<String>) -> Result<RunManifest> {
    let started = Instant::now();
    // Discover tracked chains in the fit directory.
    let mut tracked: Vec<String> = Vec::new();
    let entries_dir = std::fs::read_dir(&args.fit).map_err(|e| Error::Io {
        path: args.fit.display().to_string(),
        source: e,
    })?;
    for entry in entries_dir.flatten() {
        let name = entry.file_name().to_string_lossy().to_string();
        if name.starts_with("chain_") && name.ends_with(".csv") {
            tracked.push(name);
        }
    }
    tracked.sort();

    // Requested entries must have been tracked at fit time.
    let mut requested: Vec<(usize, usize)> = Vec::new();
    for part in args.entries.split(';').filter(|s| !s.trim().is_empty()) {
        let pair = parse_entry_pairs(part, usize::MAX)?;
        requested.extend(pair);
    }
    if requested.is_empty() {
        return Err(Error::InvalidParameter("no entries requested".into()));
    }

    let mut input_digests = BTreeMap::new();
    let mut out = OutputSet::new(&args.out);
    let mut ess_csv = String::from("j,k,ess,retained\n");
    for &(j, k) in &requested {
        let file = format!("chain_{}_{}.csv", j + 1, k + 1);
        let path = args.fit.join(&file);
        if !path.exists() {
            return Err(Error::InvalidInput(format!(
                "entry ({}, {}) was not tracked at fit time; tracked chains: [{}]",
                j + 1,
                k + 1,
                tracked.join(", ")
            )));
        }
        input_digests.insert(path.display().to_string(), digest_file(&path)?);
        let chain = io::read_chain_csv(&path)?;
        if args.max_lag >= chain.len() {
            return Err(Error::InvalidInput(format!(
                "max_lag {} must be below the retained chain length {}",
                args.max_lag,
                chain.len()
            )));
        }
        out.write(&format!("trace_{}_{}.csv", j + 1, k + 1), &io::chain_csv(&chain))?;
        let rho = acf(&chain, args.max_lag)?;
        let mut acf_body = String::from("lag,acf\n");
        for (lag, r) in rho.iter().enumerate() {
            acf_body.push_str(&format!("{lag},{r}\n"));
        }
        out.write(&format!("acf_{}_{}.csv", j + 1, k + 1), &acf_body)?;
        let e = ess(&chain)?;
        ess_csv.push_str(&format!("{},{},{},{}\n", j + 1, k + 1, e, chain.len()));
    }
    out.write("ess.csv", &ess_csv)?;
    let config = serde_json::json!({
        "entries": args.entries,
        "max_lag": args.max_lag,
        "fit": args.fit.display().to_string(),
    });
    out.finish(argv, config, 0, input_digests, started)
}

/// Dispatches a parsed command; returns the manifest on success.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<RunManifest> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, argv),
        Command::Fit(a) => cmd_fit(a, argv),
        Command::Benchmark(a) => cmd_benchmark(a, argv),
        Command::Diagnostics(a) => cmd_diagnostics(a, argv),
    }
}

/// Exit code policy: 0 success, 2 validation problems, 3 numerical
/// failures.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}
