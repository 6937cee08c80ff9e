use crate::error::ConfigError;
use crate::filter::FilterSpec;
use crate::scalar::Real;
use crate::spectral::GridSpec;

pub const DEFAULT_CFL: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForcingKind {
    /// Steady Taylor-Green body force on the corner modes `|m_j| = 1`.
    TaylorGreen,
    /// Seeded random divergence-free force on the modes `max_j |m_j| <= 2`.
    LowModeRandom,
}

/// Steady, mean-zero, divergence-free body force, scaled so that its
/// root-mean-square magnitude `(||f||^2 / |Omega|)^(1/2)` equals `amplitude`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingSpec<T> {
    pub kind: ForcingKind,
    pub amplitude: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeControl<T> {
    Fixed { dt: T },
    /// `dt = target * h / max|u|`, capped at `dt_max`.
    Cfl { target: T, dt_max: T },
}

/// Initial velocity; amplitudes are root-mean-square speeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition<T> {
    Zero,
    TaylorGreen { amplitude: T },
    /// Seeded random field on the modes `max_j |m_j| <= band`, projected.
    SeededRandomBand { amplitude: T, band: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig<T> {
    pub grid: GridSpec<T>,
    pub filter: FilterSpec<T>,
    pub nu: T,
    pub chi: T,
    pub forcing: ForcingSpec<T>,
    pub time: TimeControl<T>,
    pub t_end: T,
    pub output_interval: T,
    pub seed: u64,
}

impl<T: Real> FlowConfig<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.nu) {
            return Err(ConfigError::invalid("flow.nu", "must be positive"));
        }
        if !(self.chi >= T::zero()) || !self.chi.is_finite() {
            return Err(ConfigError::invalid("flow.chi", "must be non-negative"));
        }
        if !(self.forcing.amplitude >= T::zero()) || !self.forcing.amplitude.is_finite() {
            return Err(ConfigError::invalid("forcing.amplitude", "must be non-negative"));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(ConfigError::invalid("time.t_end", "must be non-negative"));
        }
        if !positive(self.output_interval) {
            return Err(ConfigError::invalid("output.interval", "must be positive"));
        }
        match self.time {
            TimeControl::Fixed { dt } => {
                if !positive(dt) {
                    return Err(ConfigError::invalid("time.dt", "must be positive"));
                }
                let steps = (self.output_interval / dt).to_f64_lossy();
                if steps.round() < 1.0 || (steps - steps.round()).abs() > 1e-6 {
                    return Err(ConfigError::invalid(
                        "output.interval",
                        "must be a whole multiple of time.dt",
                    ));
                }
            }
            TimeControl::Cfl { target, dt_max } => {
                if !(target > T::zero() && target < T::one()) {
                    return Err(ConfigError::invalid("time.cfl", "must lie in (0, 1)"));
                }
                if !positive(dt_max) {
                    return Err(ConfigError::invalid("time.dt_max", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// `F^(1/2) l^(3/2) / nu` from the forcing amplitude and box size.
    pub fn nominal_reynolds(&self) -> T {
        self.forcing.amplitude.sqrt() * self.grid.box_length().powf(T::of(1.5)) / self.nu
    }
}
