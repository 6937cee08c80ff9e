//! Periodic grid, transforms, wavenumber algebra, dealiasing and projection.

mod fft;
mod field;
mod grid;
pub mod ops;

pub use fft::{transform_to_physical, transform_to_spectral, Fft3};
pub use field::{PhysicalField, SpectralField};
pub use grid::GridSpec;
pub use ops::{dealias, divergence, gradient, leray_project, relative_divergence};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// Seeded random real field, optionally restricted to modes with
/// `max_j |m_j| <= band`. The mean is removed.
///
/// Values are drawn uniformly from `[-1, 1)` in physical space with a ChaCha8
/// stream, so the same seed yields the same field on every platform.
pub fn random_field<T: Real>(
    fft: &Fft3<T>,
    components: usize,
    seed: u64,
    band: Option<i64>,
) -> SpectralField<T> {
    let grid = *fft.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<T> = (0..components * grid.real_len())
        .map(|_| T::of(rng.gen_range(-1.0..1.0)))
        .collect();
    let phys = PhysicalField::from_samples(grid, components, samples).expect("sample count matches grid");
    let mut field = fft.forward(&phys);
    if let Some(band) = band {
        field.multiply_in_place(|idx| {
            let inside = grid.modes_at(idx).iter().all(|m| m.abs() <= band);
            if inside {
                T::one()
            } else {
                T::zero()
            }
        });
    }
    field.remove_mean();
    field
}
