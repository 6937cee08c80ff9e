//! Time integration of the time relaxation model on the periodic box.
//!
//! In Fourier space the model reads
//!
//! ```text
//! du/dt = -(nu |k|^2 + chi m_N(k)) u + P[-div(u (x) u)] + f
//! ```
//!
//! where `P` is the Leray projector (it absorbs the pressure gradient) and
//! `m_N` the multiplier of `I - G_N G`. Both linear terms are diagonal, so
//! they are integrated exactly with an integrating factor; the nonlinear and
//! forcing terms are advanced by Williamson's three-stage, third-order,
//! two-register Runge-Kutta scheme.

mod checkpoint;
mod config;
mod initial;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointError};
pub use config::{FlowConfig, ForcingKind, ForcingSpec, InitialCondition, TimeControl, DEFAULT_CFL};
pub use initial::{build_forcing, build_initial, taylor_green_profile};

use std::sync::Mutex;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::diagnostics::EnergyRecord;
use crate::error::ConfigError;
use crate::scalar::Real;
use crate::spectral::{Fft3, PhysicalField, SpectralField};

/// A fixed `dt` is rejected when `dt max|u| / h` exceeds this value.
pub const FIXED_DT_CFL_LIMIT: f64 = 1.0;

const RK_A: [f64; 3] = [0.0, -5.0 / 9.0, -153.0 / 128.0];
const RK_B: [f64; 3] = [1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0];
const RK_C: [f64; 4] = [0.0, 1.0 / 3.0, 3.0 / 4.0, 1.0];

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("CFL number {cfl:.3} exceeds {limit} with fixed dt at step {step} (t = {t})")]
    CflViolation { cfl: f64, limit: f64, step: u64, t: f64 },
    #[error("non-finite velocity at step {step} (t = {t})")]
    NonFinite { step: u64, t: f64 },
}

/// Velocity at one instant: divergence free, mean zero, dealiased.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState<T> {
    pub t: T,
    pub u: SpectralField<T>,
    pub step_index: u64,
}

/// Result of one Runge-Kutta step, with the energy drained and injected over
/// the step integrated by the same scheme as the velocity.
#[derive(Clone, Debug)]
pub struct StepOutput<T> {
    pub state: SolverState<T>,
    pub dissipated: T,
    pub injected: T,
}

pub struct Solver<T: Real> {
    config: FlowConfig<T>,
    fft: Fft3<T>,
    modes: ModeTable<T>,
    /// `nu |k|^2 + chi m_N(k)` per stored wavevector.
    linear: Vec<T>,
    forcing: SpectralField<T>,
    nonlinear: bool,
    /// Integrating factors of the last step size used.
    decay_cache: Mutex<Option<(T, [Vec<T>; 3])>>,
}

/// Per-mode data for the nonlinear term.
struct ModeTable<T> {
    wavevector: Vec<[T; 3]>,
    /// Kept by the two-thirds rule.
    resolved: Vec<bool>,
}

impl<T: Real> ModeTable<T> {
    fn new(grid: &crate::spectral::GridSpec<T>) -> Self {
        let len = grid.spectral_len();
        Self {
            wavevector: (0..len).map(|idx| grid.wavevector_at(idx)).collect(),
            resolved: (0..len).map(|idx| grid.is_resolved_at(idx)).collect(),
        }
    }
}

impl<T: Real> Solver<T> {
    pub fn new(config: FlowConfig<T>) -> Result<Self, ConfigError> {
        config.validate()?;
        let grid = config.grid;
        let fft = Fft3::new(grid);
        let linear = (0..grid.spectral_len())
            .map(|idx| {
                let k2 = grid.wavenumber_sqr_at(idx);
                config.nu * k2 + config.chi * config.filter.relaxation_multiplier(k2)
            })
            .collect();
        let forcing = build_forcing(&fft, &config.forcing, config.seed);
        Ok(Self {
            modes: ModeTable::new(&grid),
            config,
            fft,
            linear,
            forcing,
            nonlinear: true,
            decay_cache: Mutex::new(None),
        })
    }

    /// Drops the advective term; the remaining system is linear and decoupled
    /// per mode. Used to check the integrator against closed-form decay.
    pub fn without_nonlinearity(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn config(&self) -> &FlowConfig<T> {
        &self.config
    }

    pub fn fft(&self) -> &Fft3<T> {
        &self.fft
    }

    pub fn forcing(&self) -> &SpectralField<T> {
        &self.forcing
    }

    pub fn init_state(&self, ic: &InitialCondition<T>) -> SolverState<T> {
        SolverState {
            t: T::zero(),
            u: build_initial(&self.fft, ic, self.config.seed),
            step_index: 0,
        }
    }

    /// `-P[div(u (x) u)]`, dealiased by the two-thirds rule.
    pub fn nonlinear_term(&self, u: &SpectralField<T>) -> SpectralField<T> {
        nonlinear_with(&self.fft, &self.modes, u).0
    }

    /// Explicit right-hand side and the grid maximum of `|u|`.
    fn explicit_rhs(&self, u: &SpectralField<T>) -> (SpectralField<T>, Option<T>) {
        let (mut rhs, speed) = if self.nonlinear {
            let (nl, speed) = nonlinear_with(&self.fft, &self.modes, u);
            (nl, Some(speed))
        } else {
            (SpectralField::zeros(*u.grid(), 3), None)
        };
        rhs.axpy(T::one(), &self.forcing);
        (rhs, speed)
    }

    /// Total energy drain `nu ||grad u||^2 + chi ((I - G_N G) u, u)` for a
    /// dealiased field.
    pub fn dissipation(&self, u: &SpectralField<T>) -> T {
        u.weighted_sum(|idx, c| self.linear[idx] * c.norm_sqr())
    }

    fn decay_factors(&self, dt: T) -> [Vec<T>; 3] {
        let mut cache = self.decay_cache.lock().expect("cache lock");
        if let Some((cached_dt, factors)) = cache.as_ref() {
            if *cached_dt == dt {
                return factors.clone();
            }
        }
        let factors: [Vec<T>; 3] = std::array::from_fn(|s| {
            let h = dt * T::of(RK_C[s + 1] - RK_C[s]);
            self.linear.iter().map(|&l| (-(l * h)).exp()).collect()
        });
        *cache = Some((dt, factors.clone()));
        factors
    }

    /// Energy injection `(f, u)`.
    pub fn work(&self, u: &SpectralField<T>) -> T {
        self.forcing.inner(u)
    }

    pub fn max_speed(&self, u: &SpectralField<T>) -> T {
        self.fft.inverse(u).max_pointwise_norm()
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &SolverState<T>, dt: T) -> Result<StepOutput<T>, SolverError> {
        self.step_checked(state, dt, None)
    }

    /// Like [`Solver::step`], but fails with [`SolverError::CflViolation`]
    /// when `dt max|u| / h` at the start of the step exceeds `cfl_limit`.
    fn step_checked(&self, state: &SolverState<T>, dt: T, cfl_limit: Option<f64>) -> Result<StepOutput<T>, SolverError> {
        let decay = self.decay_factors(dt);

        let mut u = state.u.clone();
        let mut q = SpectralField::zeros(*u.grid(), 3);
        let (mut q_diss, mut q_work) = (T::zero(), T::zero());
        let (mut dissipated, mut injected) = (T::zero(), T::zero());

        for s in 0..3 {
            let a = T::of(RK_A[s]);
            let b = T::of(RK_B[s]);
            let (rhs, speed) = self.explicit_rhs(&u);
            if let (0, Some(limit)) = (s, cfl_limit) {
                let speed = speed.unwrap_or_else(|| self.max_speed(&u));
                let cfl = (dt * speed / self.config.grid.spacing()).to_f64_lossy();
                if cfl > limit {
                    return Err(SolverError::CflViolation {
                        cfl,
                        limit,
                        step: state.step_index,
                        t: state.t.to_f64_lossy(),
                    });
                }
            }
            q_diss = a * q_diss + dt * self.dissipation(&u);
            q_work = a * q_work + dt * self.work(&u);
            dissipated = dissipated + b * q_diss;
            injected = injected + b * q_work;

            let factor = &decay[s];
            for c in 0..3 {
                for (qv, rv) in q.component_mut(c).iter_mut().zip(rhs.component(c)) {
                    *qv = *qv * a + *rv * dt;
                }
            }
            for c in 0..3 {
                let uc = u.component_mut(c);
                let qc = q.component_mut(c);
                for ((uv, qv), &f) in uc.iter_mut().zip(qc.iter_mut()).zip(factor) {
                    *uv = (*uv + *qv * b) * f;
                    *qv = *qv * f;
                }
            }
        }

        let next = SolverState {
            t: state.t + dt,
            u,
            step_index: state.step_index + 1,
        };
        if !next.u.is_finite() {
            return Err(SolverError::NonFinite {
                step: next.step_index,
                t: next.t.to_f64_lossy(),
            });
        }
        Ok(StepOutput {
            state: next,
            dissipated,
            injected,
        })
    }

    /// Integrates from `state` to `config.t_end`, handing an [`EnergyRecord`]
    /// to `observer` at every output time. Records already delivered stay
    /// delivered when a later step fails.
    pub fn run<F>(&self, state: SolverState<T>, mut observer: F) -> Result<SolverState<T>, SolverError>
    where
        F: FnMut(&EnergyRecord<T>, &SolverState<T>),
    {
        let t_end = self.config.t_end;
        let interval = self.config.output_interval;
        let mut previous = EnergyRecord::measure(self, &state, T::zero(), T::zero(), None);
        let (mut dissipated, mut injected) = (T::zero(), T::zero());
        let mut state = state;

        match self.config.time {
            TimeControl::Fixed { dt } => {
                let t0 = state.t;
                let total = steps_for(t_end - t0, dt);
                let per_output = steps_for(interval, dt).max(1);
                let first = state.step_index;
                for s in 1..=total {
                    let out = self.step_checked(&state, dt, Some(FIXED_DT_CFL_LIMIT))?;
                    dissipated = dissipated + out.dissipated;
                    injected = injected + out.injected;
                    state = out.state;
                    state.t = t0 + dt * T::of_usize(s as usize);
                    debug_assert_eq!(state.step_index, first + s);
                    if s % per_output == 0 || s == total {
                        let record = EnergyRecord::measure(self, &state, dissipated, injected, Some(&previous));
                        observer(&record, &state);
                        previous = record;
                    }
                }
            }
            TimeControl::Cfl { target, dt_max } => {
                let tiny = interval * T::of(1e-9);
                let h = self.config.grid.spacing();
                let t0 = state.t;
                let mut outputs = 1usize;
                let mut next_output = (t0 + interval).min(t_end);
                while t_end - state.t > tiny {
                    let speed = self.max_speed(&state.u);
                    let mut dt = if speed > T::zero() { target * h / speed } else { dt_max };
                    dt = dt.min(dt_max);
                    let remaining = next_output - state.t;
                    if dt >= remaining - tiny {
                        dt = remaining;
                    }
                    let out = self.step(&state, dt)?;
                    dissipated = dissipated + out.dissipated;
                    injected = injected + out.injected;
                    state = out.state;
                    if (next_output - state.t).magnitude() <= tiny {
                        state.t = next_output;
                        let record = EnergyRecord::measure(self, &state, dissipated, injected, Some(&previous));
                        observer(&record, &state);
                        previous = record;
                        outputs += 1;
                        next_output = (t0 + interval * T::of_usize(outputs)).min(t_end);
                    }
                }
            }
        }
        Ok(state)
    }

    /// [`Solver::run`] collecting the records.
    pub fn run_collect(&self, state: SolverState<T>) -> Result<(SolverState<T>, Vec<EnergyRecord<T>>), SolverError> {
        let mut records = Vec::new();
        let last = self.run(state, |r, _| records.push(r.clone()))?;
        Ok((last, records))
    }
}

fn steps_for<T: Real>(span: T, dt: T) -> u64 {
    let ratio = (span / dt).to_f64_lossy();
    if ratio <= 0.0 {
        0
    } else {
        ratio.round() as u64
    }
}

/// `-P[div(u (x) u)]` with products formed on the grid and truncated by the
/// two-thirds rule before differentiation.
pub fn nonlinear_term<T: Real>(fft: &Fft3<T>, u: &SpectralField<T>) -> SpectralField<T> {
    nonlinear_with(fft, &ModeTable::new(fft.grid()), u).0
}

/// The nonlinear term and the grid maximum of `|u|`. Truncation,
/// differentiation and projection happen in one pass over the kept modes.
fn nonlinear_with<T: Real>(fft: &Fft3<T>, modes: &ModeTable<T>, u: &SpectralField<T>) -> (SpectralField<T>, T) {
    assert_eq!(u.components(), 3, "velocity must be a vector field");
    let grid = *fft.grid();
    let phys = fft.inverse(u);
    let speed = phys.max_pointwise_norm();
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let products: Vec<SpectralField<T>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let prod: Vec<T> = phys
                .component(a)
                .iter()
                .zip(phys.component(b))
                .map(|(x, y)| *x * *y)
                .collect();
            fft.forward(&PhysicalField::from_samples(grid, 1, prod).expect("grid sized"))
        })
        .collect();
    let t = |a: usize, b: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        products[pairs.iter().position(|&p| p == (a, b)).expect("pair listed")].component(0)
    };
    let tensor = [
        [t(0, 0), t(0, 1), t(0, 2)],
        [t(1, 0), t(1, 1), t(1, 2)],
        [t(2, 0), t(2, 1), t(2, 2)],
    ];

    let mut out = SpectralField::zeros(grid, 3);
    let zero = Complex::new(T::zero(), T::zero());
    let len = grid.spectral_len();
    let mut value = vec![[zero; 3]; len];
    value.par_iter_mut().enumerate().for_each(|(idx, v)| {
        if !modes.resolved[idx] {
            return;
        }
        let k = modes.wavevector[idx];
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == T::zero() {
            return;
        }
        // -i k_j (u_i u_j)
        let mut s = [zero; 3];
        for (i, si) in s.iter_mut().enumerate() {
            let d = tensor[i][0][idx] * k[0] + tensor[i][1][idx] * k[1] + tensor[i][2][idx] * k[2];
            *si = Complex::new(d.im, -d.re);
        }
        let kdot = (s[0] * k[0] + s[1] * k[1] + s[2] * k[2]) / k2;
        for i in 0..3 {
            v[i] = s[i] - kdot * k[i];
        }
    });
    for i in 0..3 {
        for (d, v) in out.component_mut(i).iter_mut().zip(&value) {
            *d = v[i];
        }
    }
    (out, speed)
}
