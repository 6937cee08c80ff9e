use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use trm_core::diagnostics::{check_bounds, compute_scales, instantaneous_scales, BoundReport, EnergyRecord, ScaleStats};
use trm_core::planner::{range_general_n, range_mesh_dependent, ChiRange, ChiRangeQuery};
use trm_core::solver::{read_checkpoint, write_checkpoint, CheckpointError, Solver, SolverError, SolverState};
use trm_core::verify::{run_verification, VerifyOptions};
use trm_core::ConfigError;

use crate::config::{config_hash, to_toml, validate_sweep, RunManifest};
use crate::output::{csv_preamble, csv_row, summary, sweep_table, SummaryInput, SweepRow};

pub const CSV_FILE: &str = "energy.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CHECKPOINT_FILE: &str = "final.ckpt";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("run failed: {0}")]
    Solver(#[from] SolverError),
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Solver(SolverError::Config(_)) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Clone)]
pub struct RunOutcome {
    pub config_hash: String,
    /// Includes the record of the starting state.
    pub records: Vec<EnergyRecord<f64>>,
    pub stats: ScaleStats<f64>,
    pub report: BoundReport<f64>,
    pub final_state: SolverState<f64>,
    pub csv: String,
    pub summary: String,
}

/// Runs one trajectory in memory. If the solver fails, the partial CSV is
/// returned alongside the error.
pub fn simulate(manifest: &RunManifest, resume: Option<SolverState<f64>>) -> Result<RunOutcome, (CliError, String)> {
    let hash = config_hash(manifest);
    let mut csv = csv_preamble(&hash);
    let solver = Solver::new(manifest.config.clone()).map_err(|e| (e.into(), String::new()))?;
    let start = resume.unwrap_or_else(|| solver.init_state(&manifest.initial));
    let first = EnergyRecord::measure(&solver, &start, 0.0, 0.0, None);
    csv.push_str(&csv_row(&first));
    let mut records = vec![first];
    let result = solver.run(start, |record, _| {
        csv.push_str(&csv_row(record));
        records.push(record.clone());
    });
    let final_state = match result {
        Ok(s) => s,
        Err(e) => return Err((e.into(), csv)),
    };

    let stats = if records.len() > 1 {
        compute_scales(&records, solver.forcing(), &manifest.config, manifest.burn_in)
            .map_err(|e| (e.into(), csv.clone()))?
    } else {
        instantaneous_scales(&records[0], solver.forcing(), &manifest.config)
    };
    let report = check_bounds(&stats);
    let text = summary(&SummaryInput {
        config_hash: &hash,
        config_toml: &to_toml(manifest),
        stats: &stats,
        report: &report,
        records: &records,
    });
    Ok(RunOutcome {
        config_hash: hash,
        records,
        stats,
        report,
        final_state,
        csv,
        summary: text,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<SolverState<f64>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(read_checkpoint(BufReader::new(file))?)
}

/// Runs and writes `energy.csv`, `summary.txt` and optionally `final.ckpt`
/// into `manifest.output_dir`.
pub fn cmd_run(manifest: &RunManifest, resume: Option<&Path>) -> Result<RunOutcome, CliError> {
    let dir = &manifest.output_dir;
    let start = resume.map(load_checkpoint).transpose()?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let outcome = match simulate(manifest, start) {
        Ok(o) => o,
        Err((err, partial)) => {
            if !partial.is_empty() {
                write_file(&dir.join(CSV_FILE), &partial)?;
            }
            return Err(err);
        }
    };
    write_file(&dir.join(CSV_FILE), &outcome.csv)?;
    write_file(&dir.join(SUMMARY_FILE), &outcome.summary)?;
    if manifest.checkpoint {
        let path = dir.join(CHECKPOINT_FILE);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_checkpoint(BufWriter::new(file), &outcome.final_state)?;
    }
    Ok(outcome)
}

/// One run per `chi`, in parallel, each in `<dir>/chi_<i>`; the comparison
/// table goes to `<dir>/sweep.csv`.
pub fn cmd_sweep(manifest: &RunManifest, chis: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    validate_sweep(chis)?;
    let mut base = manifest.clone();
    base.sweep = Some(chis.to_vec());
    let members: Vec<RunManifest> = chis
        .iter()
        .enumerate()
        .map(|(i, &chi)| {
            let mut m = manifest.clone();
            m.config.chi = chi;
            m.sweep = None;
            m.output_dir = manifest.output_dir.join(format!("chi_{i:02}"));
            m
        })
        .collect();
    let outcomes: Vec<Result<RunOutcome, CliError>> = members.par_iter().map(|m| cmd_run(m, None)).collect();
    let mut rows = Vec::with_capacity(chis.len());
    for (chi, outcome) in chis.iter().zip(outcomes) {
        let o = outcome?;
        rows.push(SweepRow {
            chi: *chi,
            eps_avg: o.stats.eps_avg,
            fluctuation_avg: o.stats.fluctuation_avg,
            bound_margin: o.report.bound_margin,
            r_n: o.stats.r_n,
            within_bound: o.report.within_bound && o.report.within_first_bound,
            converged: o.stats.converged(),
        });
    }
    let dir = &manifest.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_file(&dir.join(SWEEP_FILE), &sweep_table(&config_hash(&base), &rows))?;
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChiRangeRequest {
    Delta(f64),
    MeshDependent { h: Option<f64> },
}

pub fn chi_ranges(u: f64, l: f64, re: f64, order: usize, request: ChiRangeRequest) -> Result<Vec<ChiRange<f64>>, CliError> {
    Ok(match request {
        ChiRangeRequest::Delta(delta) => vec![range_general_n(&ChiRangeQuery::with_delta(u, l, re, delta, order))?],
        ChiRangeRequest::MeshDependent { h } => {
            let (published, derived) = range_mesh_dependent(&ChiRangeQuery::mesh_dependent(u, l, re, h, order))?;
            vec![published, derived]
        }
    })
}

pub fn cmd_chi_range(u: f64, l: f64, re: f64, order: usize, request: ChiRangeRequest) -> Result<String, CliError> {
    let ranges = chi_ranges(u, l, re, order, request)?;
    let mut out = String::new();
    let _ = writeln!(out, "U={u:e} L={l:e} Re={re:e} N={order}");
    match request {
        ChiRangeRequest::Delta(delta) => {
            let _ = writeln!(out, "delta={delta:e}");
        }
        ChiRangeRequest::MeshDependent { h } => {
            let h = h.unwrap_or_else(|| trm_core::planner::kolmogorov_mesh(re, l).unwrap_or(f64::NAN));
            let _ = writeln!(out, "h={h:e}");
        }
    }
    for r in &ranges {
        let _ = writeln!(out, "{r}");
        let _ = writeln!(out, "  chi_mid={:e}", r.geometric_mid());
    }
    if ranges.len() == 2 {
        let (published, derived) = (&ranges[0], &ranges[1]);
        let _ = writeln!(
            out,
            "discrepancy: published lower exponent {} vs substituted {}; published range consistent={}, substituted range consistent={}",
            published.lower_exponent(),
            derived.lower_exponent(),
            published.is_consistent(),
            derived.is_consistent()
        );
    }
    Ok(out)
}

/// Runs the operator suite; returns the listing and whether all checks passed.
pub fn cmd_verify(quick: bool) -> Result<(String, bool), CliError> {
    let options = if quick { VerifyOptions::quick() } else { VerifyOptions::full() };
    let report = run_verification(options)?;
    let mut out = String::new();
    let _ = writeln!(out, "grid={}^3 fields={}", options.n, options.fields);
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {} value={:e} tolerance={:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    let _ = writeln!(
        out,
        "{} of {} checks passed in {:.2} s",
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len(),
        report.elapsed.as_secs_f64()
    );
    Ok((out, report.passed()))
}
