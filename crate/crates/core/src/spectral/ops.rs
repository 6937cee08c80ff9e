//! Wavenumber algebra on spectral fields.

use num_complex::Complex;
use num_traits::Zero;

use super::field::SpectralField;
use crate::scalar::Real;

/// Spectral gradient `coeff_j(k) = i k_j coeff(k)` of a scalar field.
///
/// The derivative of a Nyquist mode along its own axis is set to zero, which
/// keeps the result real.
pub fn gradient<T: Real>(f: &SpectralField<T>) -> SpectralField<T> {
    assert_eq!(f.components(), 1, "gradient takes a scalar field");
    let grid = *f.grid();
    let mut out = SpectralField::zeros(grid, 3);
    let src = f.component(0);
    for dir in 0..3 {
        let dst = out.component_mut(dir);
        for (idx, z) in src.iter().enumerate() {
            let m = grid.modes_at(idx);
            if grid.is_nyquist(m[dir]) {
                continue;
            }
            let k = grid.wavevector_at(idx)[dir];
            dst[idx] = Complex::new(-z.im * k, z.re * k);
        }
    }
    out
}

/// Spectral divergence `sum_j i k_j coeff_j(k)`, with the same Nyquist rule
/// as [`gradient`].
pub fn divergence<T: Real>(v: &SpectralField<T>) -> SpectralField<T> {
    assert_eq!(v.components(), 3, "divergence takes a vector field");
    let grid = *v.grid();
    let mut out = SpectralField::zeros(grid, 1);
    let dst = out.component_mut(0);
    for dir in 0..3 {
        for (idx, z) in v.component(dir).iter().enumerate() {
            let m = grid.modes_at(idx);
            if grid.is_nyquist(m[dir]) {
                continue;
            }
            let k = grid.wavevector_at(idx)[dir];
            dst[idx] = dst[idx] + Complex::new(-z.im * k, z.re * k);
        }
    }
    out
}

/// Leray projection onto divergence-free fields:
/// `coeff(k) -= k (k . coeff(k)) / |k|^2`.
///
/// The mean mode is left untouched. Modes on a Nyquist plane are removed:
/// their wavevector is ambiguous in sign, and no projector for them is both
/// symmetric under `k -> -k` and consistent with the stored conjugate pair.
pub fn leray_project<T: Real>(v: &SpectralField<T>) -> SpectralField<T> {
    let mut out = v.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place<T: Real>(v: &mut SpectralField<T>) {
    assert_eq!(v.components(), 3, "projection takes a vector field");
    let grid = *v.grid();
    let len = grid.spectral_len();
    let data = v.data_mut();
    for idx in 1..len {
        if grid.touches_nyquist(idx) {
            for c in 0..3 {
                data[c * len + idx] = Complex::zero();
            }
            continue;
        }
        let k = grid.wavevector_at(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let c = [data[idx], data[len + idx], data[2 * len + idx]];
        let kc = c[0] * k[0] + c[1] * k[1] + c[2] * k[2];
        let s = kc / k2;
        for dir in 0..3 {
            data[dir * len + idx] = c[dir] - s * k[dir];
        }
    }
}

/// Two-thirds rule: zero every coefficient with `3 |m_j| >= n` in any direction.
pub fn dealias<T: Real>(v: &SpectralField<T>) -> SpectralField<T> {
    let mut out = v.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place<T: Real>(v: &mut SpectralField<T>) {
    let grid = *v.grid();
    v.multiply_in_place(|idx| if grid.is_resolved_at(idx) { T::one() } else { T::zero() });
}

/// `max_k |k.coeff(k)| / |k|`, relative to the coefficient norm of `v`.
///
/// Dimensionless: zero for a divergence-free field, at most one otherwise.
pub fn relative_divergence<T: Real>(v: &SpectralField<T>) -> T {
    assert_eq!(v.components(), 3, "divergence takes a vector field");
    let grid = *v.grid();
    let norm = v.coefficient_norm();
    if norm == T::zero() {
        return T::zero();
    }
    let (a, b, c) = (v.component(0), v.component(1), v.component(2));
    let mut worst = T::zero();
    for idx in 1..grid.spectral_len() {
        let k = grid.wavevector_at(idx);
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let kc = a[idx] * k[0] + b[idx] * k[1] + c[idx] * k[2];
        worst = worst.max(kc.norm() / kn);
    }
    worst / norm
}

/// `||grad u||^2 = |Omega| sum_k |k|^2 |coeff(k)|^2`, summed over components.
pub fn gradient_norm_sqr<T: Real>(u: &SpectralField<T>) -> T {
    let grid = *u.grid();
    u.weighted_sum(|idx, z| grid.wavenumber_sqr_at(idx) * z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Fft3, GridSpec, PhysicalField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_field(g: GridSpec<f64>, comps: usize, seed: u64) -> SpectralField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..comps * g.real_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Fft3::new(g).forward(&PhysicalField::from_samples(g, comps, data).unwrap())
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = GridSpec::new(8, 1.0).unwrap();
        let mut f = SpectralField::zeros(g, 1);
        f.component_mut(0)[0] = Complex::new(3.0, 0.0);
        assert_eq!(gradient(&f).max_coefficient(), 0.0);
    }

    #[test]
    fn gradient_of_sine_is_scaled_cosine() {
        let len = 2.5;
        let g = GridSpec::new(16, len).unwrap();
        let fft = Fft3::new(g);
        let f = fft.forward(&PhysicalField::from_fn(g, 1, |x, _, _| [(TAU * x / len).sin(), 0.0, 0.0]));
        let grad = fft.inverse(&gradient(&f));
        let expect = PhysicalField::from_fn(g, 3, |x, _, _| [TAU / len * (TAU * x / len).cos(), 0.0, 0.0]);
        let err = grad.data().iter().zip(expect.data()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn gradient_matches_centered_differences_at_second_order() {
        // smooth periodic scalar; error of the centred difference must drop ~4x per refinement
        let profile = |x: f64, y: f64, z: f64| (x.sin() * (2.0 * y).cos() + 0.3 * (x + z).cos()).exp();
        let mut errors = Vec::new();
        for n in [16usize, 32, 64] {
            let g = GridSpec::periodic_2pi(n).unwrap();
            let fft = Fft3::new(g);
            let phys = PhysicalField::from_fn(g, 1, |x, y, z| [profile(x, y, z), 0.0, 0.0]);
            let grad = fft.inverse(&gradient(&fft.forward(&phys)));
            let h = g.spacing();
            let s = phys.component(0);
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let fd = (s[g.real_index((i + 1) % n, j, l)] - s[g.real_index((i + n - 1) % n, j, l)]) / (2.0 * h);
                        worst = worst.max((fd - grad.component(0)[g.real_index(i, j, l)]).abs());
                    }
                }
            }
            errors.push(worst);
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "ratio {ratio} from {errors:?}");
        }
    }

    #[test]
    fn projection_is_idempotent_and_divergence_free() {
        let g = GridSpec::new(16, 1.0).unwrap();
        let v = random_field(g, 3, 11);
        let p1 = leray_project(&v);
        let p2 = leray_project(&p1);
        assert!(p1.max_abs_diff(&p2) <= 1e-14 * p1.max_coefficient());
        assert!(relative_divergence(&p1) <= 1e-12);
        assert!(p1.hermitian_defect() < 1e-15);
        assert_eq!(p1.component(0)[0], v.component(0)[0]);
    }

    #[test]
    fn projection_annihilates_gradients() {
        let g = GridSpec::new(16, 2.0).unwrap();
        let phi = random_field(g, 1, 5);
        let grad = gradient(&phi);
        let p = leray_project(&grad);
        assert!(p.max_coefficient() <= 1e-14 * grad.max_coefficient());
    }

    #[test]
    fn dealias_cuts_above_two_thirds() {
        let g = GridSpec::new(12, 1.0).unwrap();
        let mut f = SpectralField::zeros(g, 1);
        f.set_mode(0, [3, -2, 1], Complex::new(1.0, 0.5));
        assert_eq!(dealias(&f), f);
        let mut high = SpectralField::zeros(g, 1);
        high.set_mode(0, [4, 0, 0], Complex::new(1.0, 0.0));
        assert_eq!(dealias(&high).max_coefficient(), 0.0);
    }

    #[test]
    fn divergence_of_projected_field_is_zero() {
        let g = GridSpec::new(16, 1.0).unwrap();
        let v = leray_project(&random_field(g, 3, 3));
        assert!(divergence(&v).max_coefficient() < 1e-12 * v.max_coefficient() * g.fundamental() * 8.0);
    }
}
