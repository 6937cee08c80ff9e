//! CSV time series, summary report and sweep table.

use std::fmt::Write as _;

use trm_core::diagnostics::{BoundReport, EnergyRecord, LengthScale, ScaleStats};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_COLUMNS: [&str; 8] = [
    "t",
    "kinetic_energy",
    "eps0",
    "epsM",
    "eps_total",
    "work_rate",
    "budget_residual",
    "div_max",
];

/// First line of every output file.
pub fn header(config_hash: &str) -> String {
    format!("# trm {VERSION} config_hash={config_hash} units=box\n")
}

/// 17 significant digits, enough to reproduce any `f64`.
pub fn full(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_row(r: &EnergyRecord<f64>) -> String {
    let values = [
        r.t,
        r.kinetic_energy,
        r.eps0,
        r.eps_m,
        r.eps_total(),
        r.work_rate,
        r.budget_residual,
        r.div_max,
    ];
    let mut line = values.iter().map(|v| full(*v)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

pub fn csv_preamble(config_hash: &str) -> String {
    let mut s = header(config_hash);
    s.push_str(&CSV_COLUMNS.join(","));
    s.push('\n');
    s
}

pub struct SummaryInput<'a> {
    pub config_hash: &'a str,
    pub config_toml: &'a str,
    pub stats: &'a ScaleStats<f64>,
    pub report: &'a BoundReport<f64>,
    pub records: &'a [EnergyRecord<f64>],
}

pub fn summary(input: &SummaryInput<'_>) -> String {
    let s = input.stats;
    let r = input.report;
    let mut out = header(input.config_hash);
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    let (t_start, t_end) = match (input.records.first(), input.records.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => (f64::NAN, f64::NAN),
    };
    kv("version", VERSION.into());
    kv("config_hash", input.config_hash.into());
    kv("units", "box".into());
    kv("t_start", full(t_start));
    kv("t_end", full(t_end));
    kv("records", input.records.len().to_string());
    kv("window_samples", s.window_samples.to_string());
    kv("U", full(s.u));
    kv("F", full(s.f));
    kv("L", full(s.l));
    kv("L_source", s.l_source.name().into());
    for (kind, value) in LengthScale::ALL.iter().zip(s.l_candidates) {
        kv(&format!("L_{}", kind.name()), full(value));
    }
    kv("Re", full(s.re));
    kv("R_N", full(s.r_n));
    kv("inv_R_N", full(s.inv_r_n));
    kv("eps_avg", full(s.eps_avg));
    kv("eps0_avg", full(s.eps0_avg));
    kv("epsM_avg", full(s.eps_m_avg));
    kv("work_avg", full(s.work_avg));
    kv("fluctuation_avg", full(s.fluctuation_avg));
    kv("bound_value", full(r.bound_value));
    kv("first_bound_value", full(r.first_bound_value));
    kv("within_bound", r.within_bound.to_string());
    kv("within_first_bound", r.within_first_bound.to_string());
    kv("bound_margin", full(r.bound_margin));
    kv("first_bound_margin", full(r.first_bound_margin));
    kv("eps_L_over_U3", full(r.dimensionless_dissipation));
    kv("U_converged", s.u_converged.to_string());
    kv("eps_converged", s.eps_converged.to_string());
    kv("converged", s.converged().to_string());
    let max_of = |f: fn(&EnergyRecord<f64>) -> f64| input.records.iter().map(f).fold(0.0, f64::max);
    kv("max_budget_residual", full(max_of(|r| r.budget_residual)));
    kv("max_div", full(max_of(|r| r.div_max)));
    out.push_str("# config\n");
    for line in input.config_toml.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub chi: f64,
    pub eps_avg: f64,
    pub fluctuation_avg: f64,
    pub bound_margin: f64,
    pub r_n: f64,
    pub within_bound: bool,
    pub converged: bool,
}

pub fn sweep_table(config_hash: &str, rows: &[SweepRow]) -> String {
    let mut out = header(config_hash);
    out.push_str("chi,eps_avg,fluctuation_avg,bound_margin,R_N,within_bound,converged\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            full(r.chi),
            full(r.eps_avg),
            full(r.fluctuation_avg),
            full(r.bound_margin),
            full(r.r_n),
            r.within_bound,
            r.converged
        );
    }
    out
}

/// Parses `key=value` lines of a summary, skipping comments.
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = full(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let v = std::f64::consts::PI * 1e-7;
        assert_eq!(full(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn csv_has_eight_columns() {
        let r = EnergyRecord {
            t: 1.0,
            kinetic_energy: 2.0,
            eps0: 3.0,
            eps_m: 4.0,
            work_rate: 5.0,
            budget_residual: 6.0,
            div_max: 7.0,
            fluctuation_energy: 0.0,
            dissipated: 0.0,
            injected: 0.0,
        };
        let row = csv_row(&r);
        let fields: Vec<f64> = row.trim().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(fields, vec![1.0, 2.0, 3.0, 4.0, 7.0, 5.0, 6.0, 7.0]);
        assert!(csv_preamble("abc").starts_with("# trm "));
    }
}
