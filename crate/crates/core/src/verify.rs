//! Operator self-test suite: filter and deconvolution identities, the
//! deconvolution error order, and the Leray projector.

use std::time::{Duration, Instant};

use crate::error::ConfigError;
use crate::filter::{
    b_apply, deconvolve, filter, log_spaced, measure_deconvolution_order, relaxation_apply, van_cittert_iterate,
    FilterSpec,
};
use crate::spectral::ops::{gradient, leray_project, relative_divergence};
use crate::spectral::{dealias, divergence, random_field, Fft3, GridSpec, SpectralField};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub n: usize,
    /// Random fields per identity check.
    pub fields: usize,
    pub seed: u64,
}

impl VerifyOptions {
    pub fn full() -> Self {
        Self {
            n: 32,
            fields: 100,
            seed: 20_240_601,
        }
    }

    pub fn quick() -> Self {
        Self {
            n: 16,
            fields: 10,
            seed: 20_240_601,
        }
    }
}

const FILTER_WIDTHS: [f64; 3] = [0.05, 0.2, 1.0];

fn relative_diff(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    let scale = b.max_coefficient().max(f64::MIN_POSITIVE);
    a.max_abs_diff(b) / scale
}

fn check_max(name: impl Into<String>, values: impl IntoIterator<Item = f64>, tolerance: f64) -> Check {
    let value = values.into_iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) });
    Check {
        name: name.into(),
        passed: value <= tolerance,
        value,
        tolerance,
    }
}

/// `-delta^2 div grad phi_bar + phi_bar = phi`, with the Laplacian built from
/// the spectral gradient and divergence rather than the filter multiplier.
/// Fields are dealiased first so no Nyquist mode is present.
fn filter_equation(fields: &[SpectralField<f64>]) -> Check {
    let values = fields.iter().map(dealias).flat_map(|phi| {
        FILTER_WIDTHS.iter().map(move |&delta| {
            let spec = FilterSpec::new(delta, 0).expect("valid filter");
            let bar = filter(&phi, &spec);
            let mut lhs = divergence(&gradient(&bar));
            lhs.multiply_in_place(|_| -delta * delta);
            lhs.axpy(1.0, &bar);
            relative_diff(&lhs, &phi)
        })
    });
    check_max("filter solves -delta^2 lap + I", values, 1e-12)
}

fn iterate_matches_closed_form(fields: &[SpectralField<f64>]) -> Vec<Check> {
    (0..=5)
        .map(|order| {
            let values = fields.iter().flat_map(|phi| {
                FILTER_WIDTHS.iter().map(move |&delta| {
                    let spec = FilterSpec::new(delta, order).expect("valid filter");
                    let bar = filter(phi, &spec);
                    relative_diff(&van_cittert_iterate(&bar, &spec), &deconvolve(&bar, &spec))
                })
            });
            check_max(format!("van Cittert iterate equals closed form, N={order}"), values, 1e-14)
        })
        .collect()
}

fn relaxation_norm_identity(fields: &[SpectralField<f64>]) -> Vec<Check> {
    (0..=3)
        .map(|order| {
            let values = fields.iter().flat_map(|phi| {
                FILTER_WIDTHS.iter().map(move |&delta| {
                    let spec = FilterSpec::new(delta, order).expect("valid filter");
                    let lhs = relaxation_apply(phi, &spec).inner(phi);
                    let rhs = spec.relaxation_scale() * b_apply(phi, &spec).norm_sqr();
                    (lhs - rhs).abs() / rhs.abs()
                })
            });
            check_max(format!("(phi - G_N G phi, phi) = delta^(2N+2) |B phi|^2, N={order}"), values, 1e-12)
        })
        .collect()
}

fn positivity(fields: &[SpectralField<f64>]) -> Check {
    // smallest value of (m_N phi, phi) / |phi|^2 over mean-free fields
    let worst = fields
        .iter()
        .flat_map(|phi| {
            (0..=3).flat_map(move |order| {
                FILTER_WIDTHS.iter().map(move |&delta| {
                    let spec = FilterSpec::new(delta, order).expect("valid filter");
                    relaxation_apply(phi, &spec).inner(phi) / phi.norm_sqr()
                })
            })
        })
        .fold(f64::INFINITY, f64::min);
    Check {
        name: "I - G_N G positive definite on mean-free fields".into(),
        passed: worst > 0.0,
        value: worst,
        tolerance: 0.0,
    }
}

fn projection(fft: &Fft3<f64>, fields: &[SpectralField<f64>], seed: u64) -> Vec<Check> {
    let vectors: Vec<SpectralField<f64>> = (0..fields.len().min(20))
        .map(|i| random_field(fft, 3, seed.wrapping_add(1000 + i as u64), None))
        .collect();
    let idempotence = vectors.iter().map(|v| {
        let once = leray_project(v);
        relative_diff(&leray_project(&once), &once)
    });
    let solenoidal = vectors.iter().map(|v| relative_divergence(&leray_project(v)));
    vec![
        check_max("Leray projection idempotent", idempotence.collect::<Vec<_>>(), 1e-14),
        check_max("Leray projection divergence free", solenoidal.collect::<Vec<_>>(), 1e-14),
    ]
}

fn deconvolution_orders(fft: &Fft3<f64>, seed: u64) -> Result<Vec<Check>, ConfigError> {
    let phi = random_field(fft, 1, seed ^ 0x5eed, Some(1));
    let deltas = log_spaced(1e-3, 1e-1, 9);
    (0..=2)
        .map(|order| {
            let slope = measure_deconvolution_order(&phi, order, &deltas)?;
            let expect = (2 * order + 2) as f64;
            Ok(Check {
                name: format!("deconvolution error order 2N+2, N={order}"),
                passed: (slope - expect).abs() <= 0.1,
                value: slope,
                tolerance: 0.1,
            })
        })
        .collect()
}

/// Runs every check; individual failures are reported, not raised.
pub fn run_verification(options: VerifyOptions) -> Result<VerifyReport, ConfigError> {
    let started = Instant::now();
    let grid = GridSpec::periodic_2pi(options.n)?;
    let fft = Fft3::new(grid);
    let fields: Vec<SpectralField<f64>> = (0..options.fields)
        .map(|i| random_field(&fft, 1, options.seed.wrapping_add(i as u64), None))
        .collect();

    let mut checks = vec![filter_equation(&fields)];
    checks.extend(iterate_matches_closed_form(&fields));
    checks.extend(relaxation_norm_identity(&fields));
    checks.push(positivity(&fields));
    checks.extend(projection(&fft, &fields, options.seed));
    checks.extend(deconvolution_orders(&fft, options.seed)?);
    Ok(VerifyReport {
        checks,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = run_verification(VerifyOptions::quick()).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(report.checks.len() >= 14);
    }
}
