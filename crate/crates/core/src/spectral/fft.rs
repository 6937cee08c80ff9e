use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::field::{PhysicalField, SpectralField};
use super::grid::GridSpec;
use crate::error::ConfigError;
use crate::scalar::Real;

/// Planned 3D real-to-complex transforms for one grid.
///
/// The last axis uses a real FFT, the other two full complex FFTs. Planes
/// along the first axis are processed in parallel; every line transform is
/// independent, so results do not depend on the thread count.
pub struct Fft3<T: Real> {
    grid: GridSpec<T>,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft3<T> {
    pub fn new(grid: GridSpec<T>) -> Self {
        let n = grid.n();
        let mut real_planner = RealFftPlanner::<T>::new();
        let mut planner = FftPlanner::<T>::new();
        Self {
            grid,
            r2c: real_planner.plan_fft_forward(n),
            c2r: real_planner.plan_fft_inverse(n),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn forward(&self, field: &PhysicalField<T>) -> SpectralField<T> {
        assert_eq!(field.grid().n(), self.grid.n(), "grid mismatch");
        let mut out = SpectralField::zeros(self.grid, field.components());
        for c in 0..field.components() {
            self.forward_component(field.component(c), out.component_mut(c));
        }
        out
    }

    pub fn inverse(&self, field: &SpectralField<T>) -> PhysicalField<T> {
        assert_eq!(field.grid().n(), self.grid.n(), "grid mismatch");
        let mut out = PhysicalField::zeros(self.grid, field.components());
        for c in 0..field.components() {
            self.inverse_component(field.component(c), out.component_mut(c));
        }
        out
    }

    /// Forward transform of one scalar component, normalised by `1/n^3`.
    pub fn forward_component(&self, input: &[T], output: &mut [Complex<T>]) {
        let n = self.grid.n();
        let nh = self.grid.half();
        assert_eq!(input.len(), self.grid.real_len());
        assert_eq!(output.len(), self.grid.spectral_len());

        output
            .par_chunks_mut(n * nh)
            .zip(input.par_chunks(n * n))
            .for_each(|(plane_out, plane_in)| {
                let mut row = self.r2c.make_input_vec();
                let mut scratch = self.r2c.make_scratch_vec();
                for j in 0..n {
                    row.copy_from_slice(&plane_in[j * n..(j + 1) * n]);
                    self.r2c
                        .process_with_scratch(&mut row, &mut plane_out[j * nh..(j + 1) * nh], &mut scratch)
                        .expect("buffer sizes are fixed by the plan");
                }
                transform_strided_lines(&*self.forward, plane_out, n, nh);
            });
        self.transform_first_axis(output, &*self.forward);

        let scale = T::one() / T::of_usize(self.grid.real_len());
        output.iter_mut().for_each(|z| *z = *z * scale);
    }

    /// Inverse transform (unnormalised synthesis) of one scalar component.
    pub fn inverse_component(&self, input: &[Complex<T>], output: &mut [T]) {
        let n = self.grid.n();
        let nh = self.grid.half();
        assert_eq!(input.len(), self.grid.spectral_len());
        assert_eq!(output.len(), self.grid.real_len());

        let mut work = input.to_vec();
        self.transform_first_axis(&mut work, &*self.inverse);
        work.par_chunks_mut(n * nh)
            .zip(output.par_chunks_mut(n * n))
            .for_each(|(plane, plane_out)| {
                transform_strided_lines(&*self.inverse, plane, n, nh);
                let mut scratch = self.c2r.make_scratch_vec();
                for j in 0..n {
                    let row = &mut plane[j * nh..(j + 1) * nh];
                    // self-conjugate entries are real for a real field
                    row[0].im = T::zero();
                    row[nh - 1].im = T::zero();
                    self.c2r
                        .process_with_scratch(row, &mut plane_out[j * n..(j + 1) * n], &mut scratch)
                        .expect("imaginary parts of self-conjugate entries were cleared");
                }
            });
    }

    /// Complex transform along the first (slowest) axis.
    fn transform_first_axis(&self, data: &mut [Complex<T>], fft: &dyn Fft<T>) {
        const LINES_PER_TASK: usize = 32;
        let n = self.grid.n();
        let stride = n * self.grid.half();
        let source: &[Complex<T>] = data;
        let blocks: Vec<Vec<Complex<T>>> = (0..stride.div_ceil(LINES_PER_TASK))
            .into_par_iter()
            .map(|task| {
                let p0 = task * LINES_PER_TASK;
                let count = LINES_PER_TASK.min(stride - p0);
                // block[q * n + i] = data[i * stride + p0 + q]
                let mut block = Vec::with_capacity(count * n);
                for q in 0..count {
                    block.extend((0..n).map(|i| source[i * stride + p0 + q]));
                }
                let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(&mut block, &mut scratch);
                block
            })
            .collect();
        for (task, block) in blocks.iter().enumerate() {
            let p0 = task * LINES_PER_TASK;
            for (q, line) in block.chunks(n).enumerate() {
                for (i, z) in line.iter().enumerate() {
                    data[i * stride + p0 + q] = *z;
                }
            }
        }
    }

    /// Pointwise product of two scalar fields, truncated by the two-thirds rule.
    pub fn dealiased_product(&self, a: &SpectralField<T>, b: &SpectralField<T>) -> SpectralField<T> {
        assert!(a.components() == 1 && b.components() == 1, "scalar fields expected");
        let pa = self.inverse(a);
        let pb = self.inverse(b);
        let prod: Vec<T> = pa.data().iter().zip(pb.data()).map(|(x, y)| *x * *y).collect();
        let phys = PhysicalField::from_samples(self.grid, 1, prod).expect("same grid");
        super::ops::dealias(&self.forward(&phys))
    }
}

/// Transforms the `nh` lines of length `n` with stride `nh` inside one plane.
fn transform_strided_lines<T: Real>(fft: &dyn Fft<T>, plane: &mut [Complex<T>], n: usize, nh: usize) {
    let mut line = vec![Complex::zero(); n];
    let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];
    for l in 0..nh {
        for j in 0..n {
            line[j] = plane[j * nh + l];
        }
        fft.process_with_scratch(&mut line, &mut scratch);
        for j in 0..n {
            plane[j * nh + l] = line[j];
        }
    }
}

/// One-shot forward transform of `components * n^3` physical samples.
pub fn transform_to_spectral<T: Real>(
    samples: &[T],
    components: usize,
    grid: GridSpec<T>,
) -> Result<SpectralField<T>, ConfigError> {
    let field = PhysicalField::from_samples(grid, components, samples.to_vec())?;
    Ok(Fft3::new(grid).forward(&field))
}

/// One-shot inverse transform.
pub fn transform_to_physical<T: Real>(field: &SpectralField<T>) -> PhysicalField<T> {
    Fft3::new(*field.grid()).inverse(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_samples(grid: &GridSpec<f64>, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..grid.real_len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn constant_field_maps_to_mean_mode() {
        let g = GridSpec::<f64>::new(8, 1.0).unwrap();
        let f = transform_to_spectral(&[2.5; 512], 1, g).unwrap();
        assert!((f.component(0)[0].re - 2.5).abs() < 1e-14);
        let rest = f.component(0)[1..].iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(rest < 1e-14);
    }

    #[test]
    fn single_sine_has_one_conjugate_pair() {
        let g = GridSpec::new(16, 3.0).unwrap();
        let phys = PhysicalField::from_fn(g, 1, |x, _, _| [(TAU * x / 3.0).sin(), 0.0, 0.0]);
        let f = Fft3::new(g).forward(&phys);
        let plus = f.coeff_at_mode(0, [1, 0, 0]);
        let minus = f.coeff_at_mode(0, [-1, 0, 0]);
        // sin = (e^{ix} - e^{-ix}) / 2i
        assert!((plus - Complex::new(0.0, -0.5)).norm() < 1e-14);
        assert!((minus - Complex::new(0.0, 0.5)).norm() < 1e-14);
        let nonzero = f.component(0).iter().filter(|z| z.norm() > 1e-12).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn round_trip_and_parseval_on_random_field() {
        let g = GridSpec::new(16, 2.0).unwrap();
        let samples = random_samples(&g, 7);
        let fft = Fft3::new(g);
        let phys = PhysicalField::from_samples(g, 1, samples.clone()).unwrap();
        let spec = fft.forward(&phys);
        let back = fft.inverse(&spec);
        let max = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = samples
            .iter()
            .zip(back.data())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12 * max, "round trip error {err}");

        let grid_norm = samples.iter().map(|v| v * v).sum::<f64>() * g.volume() / g.real_len() as f64;
        let rel = (grid_norm - spec.norm_sqr()).abs() / grid_norm;
        assert!(rel < 1e-12, "parseval mismatch {rel}");
        assert!(spec.hermitian_defect() < 1e-15);
    }

    #[test]
    fn transform_rejects_wrong_length() {
        let g = GridSpec::<f64>::new(8, 1.0).unwrap();
        assert!(matches!(
            transform_to_spectral(&[0.0; 100], 1, g),
            Err(ConfigError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_precision_round_trip() {
        let g = GridSpec::<f32>::new(8, 1.0).unwrap();
        let phys = PhysicalField::from_fn(g, 3, |x, y, z| [x.sin(), (y * z).cos(), x + y]);
        let fft = Fft3::new(g);
        let back = fft.inverse(&fft.forward(&phys));
        let err = phys.data().iter().zip(back.data()).fold(0.0f32, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-5);
    }
}
