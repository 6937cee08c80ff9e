use crate::error::ConfigError;
use crate::scalar::Real;

/// Uniform periodic grid on the cube `(0, length)^3` with `n` points per direction.
///
/// Spectral storage follows the real-to-complex layout: indices `(i, j, l)`
/// with `i, j in 0..n` and `l in 0..=n/2`, linearised as `(i * n + j) * (n/2 + 1) + l`.
/// Index `i` maps to the signed mode `m = i` for `i <= n/2` and `m = i - n` otherwise,
/// so the Nyquist mode is reported as `+n/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    box_length: T,
    points: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(points: usize, box_length: T) -> Result<Self, ConfigError> {
        if points < 8 || points % 2 != 0 {
            return Err(ConfigError::invalid("grid.n", "must be even and at least 8"));
        }
        if !(box_length > T::zero()) || !box_length.is_finite() {
            return Err(ConfigError::invalid("grid.length", "must be positive"));
        }
        Ok(Self { box_length, points })
    }

    /// Grid with the conventional `2*pi` box, so wavenumbers are integers.
    pub fn periodic_2pi(points: usize) -> Result<Self, ConfigError> {
        Self::new(points, T::TAU())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn box_length(&self) -> T {
        self.box_length
    }

    pub fn volume(&self) -> T {
        self.box_length * self.box_length * self.box_length
    }

    /// Grid spacing `h = length / n`.
    pub fn spacing(&self) -> T {
        self.box_length / T::of_usize(self.points)
    }

    /// Smallest nonzero wavenumber `2*pi / length`.
    pub fn fundamental(&self) -> T {
        T::TAU() / self.box_length
    }

    /// Length of the last (halved) spectral axis.
    #[inline]
    pub fn half(&self) -> usize {
        self.points / 2 + 1
    }

    #[inline]
    pub fn real_len(&self) -> usize {
        self.points * self.points * self.points
    }

    #[inline]
    pub fn spectral_len(&self) -> usize {
        self.points * self.points * self.half()
    }

    #[inline]
    pub fn spectral_index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.points + j) * self.half() + l
    }

    #[inline]
    pub fn real_index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.points + j) * self.points + l
    }

    /// Inverse of [`GridSpec::spectral_index`].
    #[inline]
    pub fn spectral_coords(&self, idx: usize) -> [usize; 3] {
        let nh = self.half();
        let l = idx % nh;
        let ij = idx / nh;
        [ij / self.points, ij % self.points, l]
    }

    /// Signed mode number of an index along a full axis.
    #[inline]
    pub fn mode(&self, index: usize) -> i64 {
        let n = self.points as i64;
        let i = index as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Index along a full axis for a signed mode (inverse of [`GridSpec::mode`]).
    #[inline]
    pub fn index_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.points as i64) as usize
    }

    #[inline]
    pub fn modes_at(&self, idx: usize) -> [i64; 3] {
        let [i, j, l] = self.spectral_coords(idx);
        [self.mode(i), self.mode(j), l as i64]
    }

    #[inline]
    pub fn wavevector_at(&self, idx: usize) -> [T; 3] {
        let k0 = self.fundamental();
        let m = self.modes_at(idx);
        [
            k0 * T::of(m[0] as f64),
            k0 * T::of(m[1] as f64),
            k0 * T::of(m[2] as f64),
        ]
    }

    #[inline]
    pub fn wavenumber_sqr_at(&self, idx: usize) -> T {
        let k = self.wavevector_at(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    #[inline]
    pub fn is_nyquist(&self, m: i64) -> bool {
        m == self.points as i64 / 2
    }

    /// True when any component of the mode sits on the Nyquist frequency.
    #[inline]
    pub fn touches_nyquist(&self, idx: usize) -> bool {
        self.modes_at(idx).iter().any(|&m| self.is_nyquist(m))
    }

    /// Modes kept by the two-thirds rule: `3 |m| < n` in every direction.
    #[inline]
    pub fn is_resolved(&self, m: i64) -> bool {
        3 * m.unsigned_abs() < self.points as u64
    }

    #[inline]
    pub fn is_resolved_at(&self, idx: usize) -> bool {
        self.modes_at(idx).iter().all(|&m| self.is_resolved(m))
    }

    /// Multiplicity of a stored coefficient in sums over the full spectrum:
    /// planes `l = 0` and `l = n/2` are self-conjugate, every other plane
    /// stands for itself and its mirror image.
    #[inline]
    pub fn plane_weight(&self, l: usize) -> T {
        if l == 0 || l == self.points / 2 {
            T::one()
        } else {
            T::one() + T::one()
        }
    }

    /// Physical coordinate of grid point `index` along any axis.
    #[inline]
    pub fn coordinate(&self, index: usize) -> T {
        self.spacing() * T::of_usize(index)
    }
}
