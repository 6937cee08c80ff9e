use num_complex::Complex;
use num_traits::Zero;

use super::grid::GridSpec;
use crate::error::ConfigError;
use crate::scalar::Real;

/// Real samples of a scalar (1 component) or vector (3 components) field,
/// stored component-major in row-major `(x, y, z)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField<T> {
    grid: GridSpec<T>,
    components: usize,
    data: Vec<T>,
}

impl<T: Real> PhysicalField<T> {
    pub fn zeros(grid: GridSpec<T>, components: usize) -> Self {
        assert!(components == 1 || components == 3, "fields have 1 or 3 components");
        Self {
            grid,
            components,
            data: vec![T::zero(); components * grid.real_len()],
        }
    }

    pub fn from_samples(grid: GridSpec<T>, components: usize, data: Vec<T>) -> Result<Self, ConfigError> {
        if components != 1 && components != 3 {
            return Err(ConfigError::invalid("components", "must be 1 or 3"));
        }
        let expected = components * grid.real_len();
        if data.len() != expected {
            return Err(ConfigError::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self { grid, components, data })
    }

    /// Samples `f(x, y, z)` at the grid points; `f` returns up to three components.
    pub fn from_fn<F>(grid: GridSpec<T>, components: usize, f: F) -> Self
    where
        F: Fn(T, T, T) -> [T; 3],
    {
        let mut out = Self::zeros(grid, components);
        let n = grid.n();
        let len = grid.real_len();
        for i in 0..n {
            let x = grid.coordinate(i);
            for j in 0..n {
                let y = grid.coordinate(j);
                for l in 0..n {
                    let z = grid.coordinate(l);
                    let v = f(x, y, z);
                    let idx = grid.real_index(i, j, l);
                    for (c, value) in v.iter().enumerate().take(components) {
                        out.data[c * len + idx] = *value;
                    }
                }
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn components(&self) -> usize {
        self.components
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[T] {
        let len = self.grid.real_len();
        &self.data[c * len..(c + 1) * len]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [T] {
        let len = self.grid.real_len();
        &mut self.data[c * len..(c + 1) * len]
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.magnitude()))
    }

    /// Largest pointwise Euclidean norm over the components.
    pub fn max_pointwise_norm(&self) -> T {
        let len = self.grid.real_len();
        (0..len)
            .map(|p| {
                (0..self.components)
                    .map(|c| {
                        let v = self.data[c * len + p];
                        v * v
                    })
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            })
            .fold(T::zero(), T::max)
    }
}

/// Fourier coefficients of a real field on a [`GridSpec`].
///
/// Normalisation: `coeff(k) = (1/n^3) * sum_x u(x) exp(-i k.x)`, so the mean
/// of the field is `coeff(0)` and `||u||^2 = |Omega| * sum_k |coeff(k)|^2`
/// with the sum over the full (not halved) spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T> {
    grid: GridSpec<T>,
    components: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: GridSpec<T>, components: usize) -> Self {
        assert!(components == 1 || components == 3, "fields have 1 or 3 components");
        Self {
            grid,
            components,
            data: vec![Complex::zero(); components * grid.spectral_len()],
        }
    }

    pub fn from_coefficients(
        grid: GridSpec<T>,
        components: usize,
        data: Vec<Complex<T>>,
    ) -> Result<Self, ConfigError> {
        if components != 1 && components != 3 {
            return Err(ConfigError::invalid("components", "must be 1 or 3"));
        }
        let expected = components * grid.spectral_len();
        if data.len() != expected {
            return Err(ConfigError::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self { grid, components, data })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn components(&self) -> usize {
        self.components
    }

    #[inline]
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[Complex<T>] {
        let len = self.grid.spectral_len();
        &self.data[c * len..(c + 1) * len]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        let len = self.grid.spectral_len();
        &mut self.data[c * len..(c + 1) * len]
    }

    /// Coefficient at signed mode `m` of component `c`, reconstructing the
    /// unstored half of the spectrum from Hermitian symmetry.
    pub fn coeff_at_mode(&self, c: usize, m: [i64; 3]) -> Complex<T> {
        let g = &self.grid;
        let n = g.n() as i64;
        let lz = m[2].rem_euclid(n);
        if lz <= n / 2 {
            let idx = g.spectral_index(g.index_of_mode(m[0]), g.index_of_mode(m[1]), lz as usize);
            self.component(c)[idx]
        } else {
            let idx = g.spectral_index(
                g.index_of_mode(-m[0]),
                g.index_of_mode(-m[1]),
                (-m[2]).rem_euclid(n) as usize,
            );
            self.component(c)[idx].conj()
        }
    }

    /// Sets the coefficient at mode `m` and its conjugate partner so the
    /// field stays real.
    pub fn set_mode(&mut self, c: usize, m: [i64; 3], value: Complex<T>) {
        let g = self.grid;
        let n = g.n() as i64;
        let stores = |m: [i64; 3]| {
            let lz = m[2].rem_euclid(n);
            (lz <= n / 2).then(|| g.spectral_index(g.index_of_mode(m[0]), g.index_of_mode(m[1]), lz as usize))
        };
        let neg = [-m[0], -m[1], -m[2]];
        if let Some(idx) = stores(m) {
            self.component_mut(c)[idx] = value;
        }
        if let Some(idx) = stores(neg) {
            self.component_mut(c)[idx] = value.conj();
        }
    }

    /// Squared `L^2(Omega)` norm, `|Omega| * sum_k |coeff|^2`.
    pub fn norm_sqr(&self) -> T {
        self.weighted_sum(|_, c| c.norm_sqr())
    }

    /// `L^2(Omega)` inner product `(self, other)`; both fields must be real.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.components, other.components, "component count mismatch");
        assert_eq!(self.data.len(), other.data.len(), "grid mismatch");
        let len = self.grid.spectral_len();
        let nh = self.grid.half();
        let mut total = T::zero();
        for c in 0..self.components {
            let a = &self.data[c * len..(c + 1) * len];
            let b = &other.data[c * len..(c + 1) * len];
            for (idx, (x, y)) in a.iter().zip(b).enumerate() {
                let w = self.grid.plane_weight(idx % nh);
                total = total + w * (x.re * y.re + x.im * y.im);
            }
        }
        total * self.grid.volume()
    }

    /// `|Omega| * sum_k weight(k) * value(k, coeff)` over all components,
    /// with the sum taken over the full spectrum.
    pub fn weighted_sum<F>(&self, value: F) -> T
    where
        F: Fn(usize, &Complex<T>) -> T,
    {
        let len = self.grid.spectral_len();
        let nh = self.grid.half();
        let mut total = T::zero();
        for c in 0..self.components {
            for (idx, z) in self.data[c * len..(c + 1) * len].iter().enumerate() {
                total = total + self.grid.plane_weight(idx % nh) * value(idx, z);
            }
        }
        total * self.grid.volume()
    }

    /// Root of the plain coefficient sum `sum_k |coeff|^2` over the full spectrum.
    pub fn coefficient_norm(&self) -> T {
        (self.norm_sqr() / self.grid.volume()).sqrt()
    }

    pub fn max_coefficient(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Applies a real multiplier `w(idx)`, the same for every component.
    pub fn apply_multiplier<F>(&self, w: F) -> Self
    where
        F: Fn(usize) -> T,
    {
        let mut out = self.clone();
        out.multiply_in_place(w);
        out
    }

    pub fn multiply_in_place<F>(&mut self, w: F)
    where
        F: Fn(usize) -> T,
    {
        let len = self.grid.spectral_len();
        for c in 0..self.components {
            for (idx, z) in self.data[c * len..(c + 1) * len].iter_mut().enumerate() {
                *z = *z * w(idx);
            }
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = *z * s);
        out
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        assert_eq!(self.data.len(), other.data.len(), "field shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + *b * s;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        out
    }

    /// Largest coefficient-wise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.data.len(), other.data.len(), "field shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    pub fn mean(&self, c: usize) -> Complex<T> {
        self.component(c)[0]
    }

    pub fn is_mean_zero(&self, tol: T) -> bool {
        (0..self.components).all(|c| self.mean(c).norm() <= tol)
    }

    pub fn remove_mean(&mut self) {
        for c in 0..self.components {
            self.component_mut(c)[0] = Complex::zero();
        }
    }

    /// Largest violation of `coeff(-k) = conj(coeff(k))` among the stored
    /// self-conjugate planes (`l = 0` and `l = n/2`).
    pub fn hermitian_defect(&self) -> T {
        let g = &self.grid;
        let n = g.n();
        let mut worst = T::zero();
        for c in 0..self.components {
            let comp = self.component(c);
            for l in [0, n / 2] {
                for i in 0..n {
                    for j in 0..n {
                        let a = comp[g.spectral_index(i, j, l)];
                        let b = comp[g.spectral_index((n - i) % n, (n - j) % n, l)];
                        worst = worst.max((a - b.conj()).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}
