use super::config::{ForcingKind, ForcingSpec, InitialCondition};
use crate::scalar::Real;
use crate::spectral::ops::{dealias_in_place, leray_project_in_place};
use crate::spectral::{random_field, Fft3, GridSpec, PhysicalField, SpectralField};

const FORCING_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Taylor-Green cell `A (sin x cos y cos z, -cos x sin y cos z, 0)` in units
/// of the fundamental wavenumber, with `A = 2 rms` so the root-mean-square
/// magnitude is `rms`.
pub fn taylor_green_profile<T: Real>(grid: GridSpec<T>, rms: T) -> PhysicalField<T> {
    let k = grid.fundamental();
    let peak = rms + rms;
    PhysicalField::from_fn(grid, 3, |x, y, z| {
        let (sx, cx) = (k * x).sin_cos();
        let (sy, cy) = (k * y).sin_cos();
        let cz = (k * z).cos();
        [peak * sx * cy * cz, -peak * cx * sy * cz, T::zero()]
    })
}

fn scale_to_rms<T: Real>(field: &mut SpectralField<T>, rms: T) {
    let current = (field.norm_sqr() / field.grid().volume()).sqrt();
    if current > T::zero() {
        let s = rms / current;
        field.multiply_in_place(|_| s);
    }
}

fn admissible<T: Real>(mut field: SpectralField<T>) -> SpectralField<T> {
    field.remove_mean();
    dealias_in_place(&mut field);
    leray_project_in_place(&mut field);
    field
}

pub fn build_forcing<T: Real>(fft: &Fft3<T>, spec: &ForcingSpec<T>, seed: u64) -> SpectralField<T> {
    let grid = *fft.grid();
    let mut f = match spec.kind {
        ForcingKind::TaylorGreen => admissible(fft.forward(&taylor_green_profile(grid, T::one()))),
        ForcingKind::LowModeRandom => admissible(random_field(fft, 3, seed ^ FORCING_SEED_SALT, Some(2))),
    };
    scale_to_rms(&mut f, spec.amplitude);
    f
}

pub fn build_initial<T: Real>(fft: &Fft3<T>, ic: &InitialCondition<T>, seed: u64) -> SpectralField<T> {
    let grid = *fft.grid();
    match *ic {
        InitialCondition::Zero => SpectralField::zeros(grid, 3),
        InitialCondition::TaylorGreen { amplitude } => {
            let mut u = admissible(fft.forward(&taylor_green_profile(grid, T::one())));
            scale_to_rms(&mut u, amplitude);
            u
        }
        InitialCondition::SeededRandomBand { amplitude, band } => {
            let mut u = admissible(random_field(fft, 3, seed, Some(band.max(1))));
            scale_to_rms(&mut u, amplitude);
            u
        }
    }
}
