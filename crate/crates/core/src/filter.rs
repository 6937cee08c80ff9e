//! Differential filter, van Cittert deconvolution and the relaxation operators.
//!
//! On the periodic box every operator here is diagonal in Fourier space.
//! With `a(k) = delta^2 |k|^2 / (1 + delta^2 |k|^2)`:
//!
//! | operator            | multiplier                                   |
//! |---------------------|----------------------------------------------|
//! | `G`                 | `g(k) = 1 / (1 + delta^2 |k|^2)`             |
//! | `G_N`               | `g_N(k) = sum_{n=0}^{N} a(k)^n`              |
//! | `I - G_N G`         | `m_N(k) = a(k)^(N+1)`                        |
//! | `B`                 | `b(k) = delta^-(N+1) a(k)^((N+1)/2)`         |
//!
//! `a` is evaluated directly rather than as `1 - g`, which would cancel
//! catastrophically for `delta |k| << 1`.

use crate::error::ConfigError;
use crate::scalar::Real;
use crate::spectral::SpectralField;

/// Largest deconvolution order accepted by [`FilterSpec::new`].
pub const MAX_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec<T> {
    delta: T,
    order: usize,
}

impl<T: Real> FilterSpec<T> {
    pub fn new(delta: T, order: usize) -> Result<Self, ConfigError> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(ConfigError::invalid("filter.delta", "must be positive"));
        }
        if order > MAX_ORDER {
            return Err(ConfigError::invalid(
                "filter.N",
                format!("must not exceed {MAX_ORDER}"),
            ));
        }
        Ok(Self { delta, order })
    }

    #[inline]
    pub fn delta(&self) -> T {
        self.delta
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// `delta^(2N+2)`, the scale factor between `(I - G_N G)` and `B^2`.
    pub fn relaxation_scale(&self) -> T {
        self.delta.powi(2 * self.order as i32 + 2)
    }

    #[inline]
    pub fn fluctuation_fraction(&self, k2: T) -> T {
        let d2k2 = self.delta * self.delta * k2;
        d2k2 / (T::one() + d2k2)
    }

    #[inline]
    pub fn filter_multiplier(&self, k2: T) -> T {
        T::one() / (T::one() + self.delta * self.delta * k2)
    }

    /// Closed-form partial geometric sum `sum_{n=0}^{N} a^n`.
    #[inline]
    pub fn deconvolution_multiplier(&self, k2: T) -> T {
        let a = self.fluctuation_fraction(k2);
        let mut term = T::one();
        let mut sum = T::one();
        for _ in 0..self.order {
            term = term * a;
            sum = sum + term;
        }
        sum
    }

    #[inline]
    pub fn relaxation_multiplier(&self, k2: T) -> T {
        self.fluctuation_fraction(k2).powi(self.order as i32 + 1)
    }

    #[inline]
    pub fn b_multiplier(&self, k2: T) -> T {
        let n1 = self.order as i32 + 1;
        self.fluctuation_fraction(k2).sqrt().powi(n1) / self.delta.powi(n1)
    }
}

fn apply<T: Real>(phi: &SpectralField<T>, m: impl Fn(T) -> T) -> SpectralField<T> {
    let grid = *phi.grid();
    phi.apply_multiplier(|idx| m(grid.wavenumber_sqr_at(idx)))
}

/// `G phi`: the periodic solution of `-delta^2 Lap(phi_bar) + phi_bar = phi`.
pub fn filter<T: Real>(phi: &SpectralField<T>, spec: &FilterSpec<T>) -> SpectralField<T> {
    apply(phi, |k2| spec.filter_multiplier(k2))
}

/// Runs the van Cittert fixed point `phi_{n+1} = phi_n + (phi_bar - G phi_n)`
/// for `N` steps from `phi_0 = phi_bar` and returns `phi_N`.
pub fn van_cittert_iterate<T: Real>(phi_bar: &SpectralField<T>, spec: &FilterSpec<T>) -> SpectralField<T> {
    let mut current = phi_bar.clone();
    for _ in 0..spec.order() {
        let filtered = filter(&current, spec);
        let mut next = current.clone();
        next.axpy(T::one(), phi_bar);
        next.axpy(-T::one(), &filtered);
        current = next;
    }
    current
}

/// `G_N phi_bar` through the closed-form multiplier.
pub fn deconvolve<T: Real>(phi_bar: &SpectralField<T>, spec: &FilterSpec<T>) -> SpectralField<T> {
    apply(phi_bar, |k2| spec.deconvolution_multiplier(k2))
}

/// Generalised fluctuation `(I - G_N G) phi`.
pub fn relaxation_apply<T: Real>(phi: &SpectralField<T>, spec: &FilterSpec<T>) -> SpectralField<T> {
    apply(phi, |k2| spec.relaxation_multiplier(k2))
}

/// `B phi` with `B = delta^-(N+1) sqrt(I - G_N G)`.
pub fn b_apply<T: Real>(phi: &SpectralField<T>, spec: &FilterSpec<T>) -> SpectralField<T> {
    apply(phi, |k2| spec.b_multiplier(k2))
}

/// Observed order `p` in `||phi - G_N G phi|| ~ delta^p`, from a least-squares
/// fit of `log ||(I - G_N G) phi||` against `log delta`.
pub fn measure_deconvolution_order<T: Real>(
    phi: &SpectralField<T>,
    order: usize,
    deltas: &[T],
) -> Result<T, ConfigError> {
    if deltas.len() < 3 {
        return Err(ConfigError::Degenerate(format!(
            "order fit needs at least 3 filter widths, got {}",
            deltas.len()
        )));
    }
    let mut points = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let spec = FilterSpec::new(delta, order)?;
        let err = relaxation_apply(phi, &spec).norm_sqr().sqrt();
        if !(err > T::zero()) {
            return Err(ConfigError::Degenerate(
                "deconvolution error vanished; test field has no nonzero modes".into(),
            ));
        }
        points.push((delta.ln(), err.ln()));
    }
    Ok(least_squares_slope(&points))
}

pub(crate) fn least_squares_slope<T: Real>(points: &[(T, T)]) -> T {
    let count = T::of_usize(points.len());
    let (sx, sy) = points
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / count, sy / count);
    let (num, den) = points.iter().fold((T::zero(), T::zero()), |(n, d), &(x, y)| {
        (n + (x - mx) * (y - my), d + (x - mx) * (x - mx))
    });
    num / den
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    assert!(count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * T::of_usize(i) / T::of_usize(count - 1)).exp())
        .collect()
}
