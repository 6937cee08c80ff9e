//! Energy budget, dissipation statistics and the dissipation-bound check.
//!
//! Units follow the solver: box units throughout. `kinetic_energy`,
//! `dissipated` and `injected` are totals over the box; `eps0`, `eps_m` and
//! `work_rate` are per unit volume.

use crate::error::ConfigError;
use crate::filter::{b_apply, relaxation_apply};
use crate::scalar::Real;
use crate::solver::{FlowConfig, Solver, SolverState};
use crate::spectral::ops::gradient_norm_sqr;
use crate::spectral::{gradient, relative_divergence, Fft3, SpectralField};

/// Default fraction of a trajectory discarded before averaging.
pub const DEFAULT_BURN_IN: f64 = 0.2;
/// Relative gap between half-window averages below which an average counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;
/// Minimum number of samples inside the averaging window.
pub const MIN_WINDOW_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipationRates<T> {
    /// `nu ||grad u||^2 / |Omega|`.
    pub eps0: T,
    /// `chi ((I - G_N G) u, u) / |Omega|`.
    pub eps_m: T,
    /// `chi delta^(2N+2) ||B u||^2 / |Omega|`; equal to `eps_m` up to rounding.
    pub eps_m_norm: T,
}

pub fn instantaneous_dissipation<T: Real>(u: &SpectralField<T>, config: &FlowConfig<T>) -> DissipationRates<T> {
    let volume = u.grid().volume();
    let eps0 = config.nu * gradient_norm_sqr(u) / volume;
    let eps_m = config.chi * relaxation_apply(u, &config.filter).inner(u) / volume;
    let eps_m_norm = config.chi * config.filter.relaxation_scale() * b_apply(u, &config.filter).norm_sqr() / volume;
    DissipationRates { eps0, eps_m, eps_m_norm }
}

/// Snapshot written at every output time.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyRecord<T> {
    pub t: T,
    /// `||u||^2 / 2`.
    pub kinetic_energy: T,
    pub eps0: T,
    pub eps_m: T,
    /// `(f, u) / |Omega|`.
    pub work_rate: T,
    /// Energy-equality defect over the interval since the previous record.
    pub budget_residual: T,
    pub div_max: T,
    /// `||(I - G_N G) u||^2`.
    pub fluctuation_energy: T,
    /// Time integral of `(eps0 + eps_m) |Omega|` since the start of the run.
    pub dissipated: T,
    /// Time integral of `(f, u)` since the start of the run.
    pub injected: T,
}

impl<T: Real> EnergyRecord<T> {
    pub fn measure(
        solver: &Solver<T>,
        state: &SolverState<T>,
        dissipated: T,
        injected: T,
        previous: Option<&EnergyRecord<T>>,
    ) -> Self {
        let config = solver.config();
        let u = &state.u;
        let volume = config.grid.volume();
        let rates = instantaneous_dissipation(u, config);
        let mut record = Self {
            t: state.t,
            kinetic_energy: u.norm_sqr() / (T::one() + T::one()),
            eps0: rates.eps0,
            eps_m: rates.eps_m,
            work_rate: solver.forcing().inner(u) / volume,
            budget_residual: T::zero(),
            div_max: relative_divergence(u),
            fluctuation_energy: relaxation_apply(u, &config.filter).norm_sqr(),
            dissipated,
            injected,
        };
        if let Some(prev) = previous {
            record.budget_residual = budget_residual(prev, &record);
        }
        record
    }

    pub fn eps_total(&self) -> T {
        self.eps0 + self.eps_m
    }
}

/// `|Delta E + Delta D - Delta W| / Delta t` between two records, where `D`
/// and `W` are the dissipated and injected energy integrated with the same
/// Runge-Kutta weights as the velocity. Zero for a vanishing interval.
pub fn budget_residual<T: Real>(previous: &EnergyRecord<T>, current: &EnergyRecord<T>) -> T {
    let span = current.t - previous.t;
    if span == T::zero() {
        return T::zero();
    }
    let defect = (current.kinetic_energy - previous.kinetic_energy) + (current.dissipated - previous.dissipated)
        - (current.injected - previous.injected);
    defect.magnitude() / span.magnitude()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Average<T> {
    pub value: T,
    /// Both half-window averages agree within [`CONVERGENCE_TOLERANCE`] and
    /// the window holds at least [`MIN_WINDOW_SAMPLES`] samples.
    pub converged: bool,
    pub samples: usize,
}

fn trapezoid_mean<T: Real>(samples: &[(T, T)]) -> T {
    match samples {
        [] => T::nan(),
        [(_, v)] => *v,
        _ => {
            let span = samples[samples.len() - 1].0 - samples[0].0;
            let area = samples
                .windows(2)
                .fold(T::zero(), |acc, w| acc + (w[1].0 - w[0].0) * (w[0].1 + w[1].1));
            area / (span + span)
        }
    }
}

/// Finite-horizon stand-in for `limsup (1/T) int_0^T psi dt`: the trapezoid
/// mean of `(t, value)` samples over `[t0 + burn_in (t1 - t0), t1]`.
pub fn running_average<T: Real>(series: &[(T, T)], burn_in: T) -> Result<Average<T>, ConfigError> {
    let (first, last) = match (series.first(), series.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(ConfigError::Degenerate("time average of an empty series".into())),
    };
    if !(burn_in >= T::zero() && burn_in < T::one()) {
        return Err(ConfigError::invalid("time.burn_in", "must lie in [0, 1)"));
    }
    let start = first + burn_in * (last - first);
    let window: Vec<(T, T)> = series.iter().copied().filter(|(t, _)| *t >= start).collect();
    let value = trapezoid_mean(&window);
    let samples = window.len();
    let converged = if samples >= MIN_WINDOW_SAMPLES {
        let mid = samples / 2;
        let a = trapezoid_mean(&window[..=mid]);
        let b = trapezoid_mean(&window[mid..]);
        let scale = a.magnitude().max(b.magnitude());
        scale == T::zero() || (a - b).magnitude() / scale < T::of(CONVERGENCE_TOLERANCE)
    } else {
        false
    };
    Ok(Average { value, converged, samples })
}

/// Which candidate attains the minimum in the length scale `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LengthScale {
    /// `|Omega|^(1/3)`.
    Box,
    /// `F / <||grad f||^2 / |Omega|>^(1/2)`.
    GradientRms,
    /// `F / ||grad f||_inf`.
    GradientMax,
    /// `F^(1/(N+1)) / <||B f||^2 / |Omega|>^(1/(2N+2))`.
    Relaxation,
}

impl LengthScale {
    pub const ALL: [LengthScale; 4] = [
        LengthScale::Box,
        LengthScale::GradientRms,
        LengthScale::GradientMax,
        LengthScale::Relaxation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LengthScale::Box => "box",
            LengthScale::GradientRms => "grad_f_rms",
            LengthScale::GradientMax => "grad_f_max",
            LengthScale::Relaxation => "b_f_rms",
        }
    }
}

/// Norms of a steady body force entering the length scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingNorms<T> {
    /// `(||f||^2 / |Omega|)^(1/2)`.
    pub f_rms: T,
    pub grad_rms: T,
    /// Grid maximum of the pointwise Frobenius norm of `grad f`.
    pub grad_max: T,
    /// `(||B f||^2 / |Omega|)^(1/2)`.
    pub b_rms: T,
}

impl<T: Real> ForcingNorms<T> {
    pub fn of(forcing: &SpectralField<T>, config: &FlowConfig<T>) -> Self {
        let grid = *forcing.grid();
        let volume = grid.volume();
        let fft = Fft3::new(grid);
        let mut frob = vec![T::zero(); grid.real_len()];
        for j in 0..3 {
            let comp = SpectralField::from_coefficients(grid, 1, forcing.component(j).to_vec())
                .expect("component has grid size");
            let grad = fft.inverse(&gradient(&comp));
            for i in 0..3 {
                for (acc, v) in frob.iter_mut().zip(grad.component(i)) {
                    *acc = *acc + *v * *v;
                }
            }
        }
        Self {
            f_rms: (forcing.norm_sqr() / volume).sqrt(),
            grad_rms: (gradient_norm_sqr(forcing) / volume).sqrt(),
            grad_max: frob.iter().fold(T::zero(), |m, v| m.max(v.sqrt())),
            b_rms: (b_apply(forcing, &config.filter).norm_sqr() / volume).sqrt(),
        }
    }

    /// The four length-scale candidates, in [`LengthScale::ALL`] order.
    /// Candidates with a vanishing denominator are reported as infinite.
    pub fn length_candidates(&self, config: &FlowConfig<T>) -> [T; 4] {
        let guard = |v: T| if v.is_finite() { v } else { T::infinity() };
        let n1 = T::of_usize(config.filter.order() + 1);
        let b_term = self.b_rms.powf(T::one() / n1);
        [
            config.grid.volume().cbrt(),
            guard(self.f_rms / self.grad_rms),
            guard(self.f_rms / self.grad_max),
            guard(self.f_rms.powf(T::one() / n1) / b_term),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleStats<T> {
    pub u: T,
    pub f: T,
    pub l: T,
    pub l_source: LengthScale,
    pub l_candidates: [T; 4],
    pub re: T,
    /// `+inf` when `chi = 0`.
    pub r_n: T,
    pub inv_r_n: T,
    pub eps_avg: T,
    pub eps0_avg: T,
    pub eps_m_avg: T,
    pub work_avg: T,
    pub fluctuation_avg: T,
    /// `(2 + 1/Re + 1/R_N) U^3 / L`.
    pub bound_value: T,
    /// `U F`.
    pub first_bound_value: T,
    pub u_converged: bool,
    pub eps_converged: bool,
    pub window_samples: usize,
}

impl<T: Real> ScaleStats<T> {
    pub fn converged(&self) -> bool {
        self.u_converged && self.eps_converged
    }
}

/// Time-averaged scales from a record history past `burn_in`.
pub fn compute_scales<T: Real>(
    records: &[EnergyRecord<T>],
    forcing: &SpectralField<T>,
    config: &FlowConfig<T>,
    burn_in: T,
) -> Result<ScaleStats<T>, ConfigError> {
    let volume = config.grid.volume();
    let series = |f: &dyn Fn(&EnergyRecord<T>) -> T| -> Vec<(T, T)> { records.iter().map(|r| (r.t, f(r))).collect() };
    let two = T::one() + T::one();
    let u2 = running_average(&series(&|r| two * r.kinetic_energy / volume), burn_in)?;
    let eps = running_average(&series(&|r| r.eps_total()), burn_in)?;
    let eps0 = running_average(&series(&|r| r.eps0), burn_in)?;
    let eps_m = running_average(&series(&|r| r.eps_m), burn_in)?;
    let work = running_average(&series(&|r| r.work_rate), burn_in)?;
    let fluct = running_average(&series(&|r| r.fluctuation_energy), burn_in)?;
    Ok(assemble_scales(u2, eps, eps0.value, eps_m.value, work.value, fluct.value, forcing, config))
}

/// Scales from a single instant, for runs with no records yet.
pub fn instantaneous_scales<T: Real>(
    record: &EnergyRecord<T>,
    forcing: &SpectralField<T>,
    config: &FlowConfig<T>,
) -> ScaleStats<T> {
    let volume = config.grid.volume();
    let one = |v: T| Average {
        value: v,
        converged: false,
        samples: 1,
    };
    let u2 = one((record.kinetic_energy + record.kinetic_energy) / volume);
    assemble_scales(
        u2,
        one(record.eps_total()),
        record.eps0,
        record.eps_m,
        record.work_rate,
        record.fluctuation_energy,
        forcing,
        config,
    )
}

#[allow(clippy::too_many_arguments)]
fn assemble_scales<T: Real>(
    u2: Average<T>,
    eps: Average<T>,
    eps0_avg: T,
    eps_m_avg: T,
    work_avg: T,
    fluctuation_avg: T,
    forcing: &SpectralField<T>,
    config: &FlowConfig<T>,
) -> ScaleStats<T> {
    let norms = ForcingNorms::of(forcing, config);
    let candidates = norms.length_candidates(config);
    let (pos, l) = candidates
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::infinity()), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    let u = u2.value.max(T::zero()).sqrt();
    let two = T::one() + T::one();
    let n = config.filter.order() as i32;
    let relax = config.chi * config.filter.relaxation_scale();
    let re = u * l / config.nu;
    let inv_r_n = relax / (u * l.powi(2 * n + 1));
    let r_n = if config.chi == T::zero() {
        T::infinity()
    } else {
        u * l.powi(2 * n + 1) / relax
    };
    // (2 + 1/Re + 1/R_N) U^3/L, expanded so that U = 0 gives 0
    let bound_value = two * u * u * u / l + config.nu * u * u / (l * l) + relax * u * u / l.powi(2 * n + 2);
    ScaleStats {
        u,
        f: norms.f_rms,
        l,
        l_source: LengthScale::ALL[pos],
        l_candidates: candidates,
        re,
        r_n,
        inv_r_n: if config.chi == T::zero() { T::zero() } else { inv_r_n },
        eps_avg: eps.value,
        eps0_avg,
        eps_m_avg,
        work_avg,
        fluctuation_avg,
        bound_value,
        first_bound_value: u * norms.f_rms,
        u_converged: u2.converged,
        eps_converged: eps.converged,
        window_samples: eps.samples,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport<T> {
    pub eps_avg: T,
    pub bound_value: T,
    pub first_bound_value: T,
    pub within_bound: bool,
    pub within_first_bound: bool,
    /// `eps_avg / bound_value` (zero when both vanish).
    pub bound_margin: T,
    /// `eps_avg / (U F)` (zero when both vanish).
    pub first_bound_margin: T,
    /// `eps_avg L / U^3`.
    pub dimensionless_dissipation: T,
}

pub fn check_bounds<T: Real>(stats: &ScaleStats<T>) -> BoundReport<T> {
    let ratio = |num: T, den: T| if num == T::zero() { T::zero() } else { num / den };
    BoundReport {
        eps_avg: stats.eps_avg,
        bound_value: stats.bound_value,
        first_bound_value: stats.first_bound_value,
        within_bound: stats.eps_avg <= stats.bound_value,
        within_first_bound: stats.eps_avg <= stats.first_bound_value,
        bound_margin: ratio(stats.eps_avg, stats.bound_value),
        first_bound_margin: ratio(stats.eps_avg, stats.first_bound_value),
        dimensionless_dissipation: ratio(stats.eps_avg * stats.l, stats.u * stats.u * stats.u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::FilterSpec;
    use crate::solver::{ForcingKind, ForcingSpec, TimeControl};
    use crate::spectral::GridSpec;
    use num_complex::Complex;

    fn config(chi: f64, delta: f64, order: usize) -> FlowConfig<f64> {
        FlowConfig {
            grid: GridSpec::periodic_2pi(8).unwrap(),
            filter: FilterSpec::new(delta, order).unwrap(),
            nu: 0.1,
            chi,
            forcing: ForcingSpec {
                kind: ForcingKind::TaylorGreen,
                amplitude: 1.0,
            },
            time: TimeControl::Fixed { dt: 0.01 },
            t_end: 1.0,
            output_interval: 0.1,
            seed: 0,
        }
    }

    #[test]
    fn zero_flow_has_zero_dissipation() {
        let c = config(1.0, 0.5, 1);
        let u = SpectralField::zeros(c.grid, 3);
        let r = instantaneous_dissipation(&u, &c);
        assert_eq!((r.eps0, r.eps_m, r.eps_m_norm), (0.0, 0.0, 0.0));
    }

    #[test]
    fn unit_mode_model_dissipation() {
        // single mode with |k|^2 = 1, delta = 1, N = 0: a = 1/2
        let c = config(1.0, 1.0, 0);
        let mut u = SpectralField::zeros(c.grid, 3);
        u.set_mode(1, [1, 0, 0], Complex::new(0.3, 0.4));
        let energy = u.norm_sqr();
        let r = instantaneous_dissipation(&u, &c);
        let volume = c.grid.volume();
        assert!((r.eps_m - 0.5 * energy / volume).abs() < 1e-15);
        assert!((r.eps_m_norm - r.eps_m).abs() < 1e-15);
        assert!((r.eps0 - 0.1 * energy / volume).abs() < 1e-15);
    }

    #[test]
    fn averages_of_simple_series() {
        let constant: Vec<(f64, f64)> = (0..=50).map(|i| (i as f64 * 0.1, 3.0)).collect();
        let avg = running_average(&constant, 0.2).unwrap();
        assert!((avg.value - 3.0).abs() < 1e-14);
        assert!(avg.converged);

        let ramp: Vec<(f64, f64)> = (0..=50).map(|i| (i as f64 * 0.1, i as f64 * 0.1)).collect();
        assert!(!running_average(&ramp, 0.2).unwrap().converged);

        // c + exp(-t) over t in [0, 100]: window mean is c + (e^-20 - e^-100)/80
        let decay: Vec<(f64, f64)> = (0..=10_000).map(|i| {
            let t = i as f64 * 0.01;
            (t, 2.0 + (-t).exp())
        }).collect();
        let avg = running_average(&decay, 0.2).unwrap();
        let exact = 2.0 + ((-20.0f64).exp() - (-100.0f64).exp()) / 80.0;
        assert!((avg.value - exact).abs() < 1e-6);
        assert!((avg.value - 2.0).abs() / 2.0 < 0.05 && avg.converged);

        assert!(running_average::<f64>(&[], 0.2).is_err());
        let short: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 1.0)).collect();
        let avg = running_average(&short, 0.2).unwrap();
        assert_eq!(avg.value, 1.0);
        assert!(!avg.converged);
    }

    #[test]
    fn unit_rms_forcing_has_unit_force_scale() {
        let c = config(0.0, 0.5, 0);
        let solver = Solver::new(c.clone()).unwrap();
        let norms = ForcingNorms::of(solver.forcing(), &c);
        assert!((norms.f_rms - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_flow_satisfies_bounds_trivially() {
        let c = config(2.0, 0.5, 1);
        let solver = Solver::new(c.clone()).unwrap();
        let state = SolverState {
            t: 0.0,
            u: SpectralField::zeros(c.grid, 3),
            step_index: 0,
        };
        let rec = EnergyRecord::measure(&solver, &state, 0.0, 0.0, None);
        let stats = instantaneous_scales(&rec, solver.forcing(), &c);
        let report = check_bounds(&stats);
        assert_eq!(stats.bound_value, 0.0);
        assert!(report.within_bound && report.within_first_bound);
    }

    #[test]
    fn nse_limit_drops_relaxation_term() {
        let c = config(0.0, 0.5, 1);
        let solver = Solver::new(c.clone()).unwrap();
        let records: Vec<EnergyRecord<f64>> = (0..=20)
            .map(|i| EnergyRecord {
                t: i as f64 * 0.1,
                kinetic_energy: 0.5 * c.grid.volume(),
                eps0: 0.3,
                eps_m: 0.0,
                work_rate: 0.3,
                budget_residual: 0.0,
                div_max: 0.0,
                fluctuation_energy: 0.0,
                dissipated: 0.0,
                injected: 0.0,
            })
            .collect();
        let s = compute_scales(&records, solver.forcing(), &c, 0.2).unwrap();
        assert!(s.r_n.is_infinite());
        assert_eq!(s.inv_r_n, 0.0);
        let expect = (2.0 + 1.0 / s.re) * s.u.powi(3) / s.l;
        assert!((s.bound_value - expect).abs() < 1e-12 * expect);
    }
}
