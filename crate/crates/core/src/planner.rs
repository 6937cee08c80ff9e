//! Admissible ranges for the relaxation coefficient `chi`.
//!
//! For filter radius `delta` the model stays consistent with the resolved
//! flow while keeping the extra dissipation no larger than the physical one
//! when
//!
//! ```text
//! Re^-1 (U/L)(L/delta)^(2N+2) <= chi <= 2 (U/L)(L/delta)^(2N+2)
//! ```
//!
//! On a mesh that resolves the Kolmogorov scale one takes
//! `delta = h = Re^(-3/4) L`. Two versions of that substitution are reported:
//! the published one, whose lower exponent `2N + 10/3` exceeds the upper
//! exponent and therefore describes an empty range, and the one obtained by
//! carrying out the substitution, whose lower exponent is `2N + 2/3`.

use std::fmt;

use crate::error::ConfigError;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChiMode {
    MeshIndependent,
    /// Exponents as published for the mesh-dependent case.
    MeshDependentPublished,
    /// Exponents from substituting `delta = Re^(-3/4) L`.
    MeshDependentDerived,
}

impl ChiMode {
    pub fn name(self) -> &'static str {
        match self {
            ChiMode::MeshIndependent => "mesh_independent",
            ChiMode::MeshDependentPublished => "mesh_dependent_published",
            ChiMode::MeshDependentDerived => "mesh_dependent_derived",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiRangeQuery<T> {
    pub u: T,
    pub l: T,
    pub re: T,
    pub delta: Option<T>,
    pub h: Option<T>,
    pub order: usize,
}

impl<T: Real> ChiRangeQuery<T> {
    pub fn with_delta(u: T, l: T, re: T, delta: T, order: usize) -> Self {
        Self {
            u,
            l,
            re,
            delta: Some(delta),
            h: None,
            order,
        }
    }

    /// Mesh-dependent query; `h` defaults to the Kolmogorov mesh.
    pub fn mesh_dependent(u: T, l: T, re: T, h: Option<T>, order: usize) -> Self {
        Self {
            u,
            l,
            re,
            delta: None,
            h,
            order,
        }
    }

    fn check(&self) -> Result<(), ConfigError> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        for (key, v) in [("planner.U", self.u), ("planner.L", self.l), ("planner.Re", self.re)] {
            if !positive(v) {
                return Err(ConfigError::invalid(key, "must be positive"));
            }
        }
        if let Some(d) = self.delta {
            if !positive(d) {
                return Err(ConfigError::invalid("planner.delta", "must be positive"));
            }
        }
        if let Some(h) = self.h {
            if !positive(h) {
                return Err(ConfigError::invalid("planner.h", "must be positive"));
            }
        }
        Ok(())
    }
}

/// `chi_lo <= chi <= chi_hi`, with
/// `chi_lo = c_lo (U/L) r^(lower/3)` and `chi_hi = 2 (U/L) r^(upper/3)`,
/// where `r` is `L/delta` or `L/h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiRange<T> {
    pub chi_lo: T,
    pub chi_hi: T,
    pub mode: ChiMode,
    /// Exponent of the length ratio in `chi_lo`, in thirds.
    pub lower_exponent_thirds: i64,
    /// Exponent of the length ratio in `chi_hi`, in thirds.
    pub upper_exponent_thirds: i64,
    pub order: usize,
}

impl<T: Real> ChiRange<T> {
    /// `chi_lo <= chi_hi`.
    pub fn is_consistent(&self) -> bool {
        self.chi_lo <= self.chi_hi
    }

    pub fn geometric_mid(&self) -> T {
        (self.chi_lo * self.chi_hi).sqrt()
    }

    pub fn lower_exponent(&self) -> T {
        T::of(self.lower_exponent_thirds as f64 / 3.0)
    }

    pub fn upper_exponent(&self) -> T {
        T::of(self.upper_exponent_thirds as f64 / 3.0)
    }

    /// Symbolic form of the range with `N` substituted,
    /// e.g. `(U/L)(L/h)^(2/3) <= chi <= 2 (U/L)(L/h)^2`.
    pub fn formula(&self) -> String {
        let (ratio, lo_prefix) = match self.mode {
            ChiMode::MeshIndependent => ("(L/delta)", "Re^-1 "),
            _ => ("(L/h)", ""),
        };
        format!(
            "{lo_prefix}(U/L){ratio}^{} <= chi <= 2 (U/L){ratio}^{}",
            thirds(self.lower_exponent_thirds),
            thirds(self.upper_exponent_thirds)
        )
    }
}

impl<T: Real> fmt::Display for ChiRange<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mode={} chi_lo={:e} chi_hi={:e} consistent={} formula=\"{}\"",
            self.mode.name(),
            self.chi_lo,
            self.chi_hi,
            self.is_consistent(),
            self.formula()
        )
    }
}

fn thirds(v: i64) -> String {
    if v % 3 == 0 {
        format!("{}", v / 3)
    } else {
        format!("({}/3)", v)
    }
}

/// `Re^(-3/4) L`.
pub fn kolmogorov_mesh<T: Real>(re: T, l: T) -> Result<T, ConfigError> {
    if !(re > T::zero()) {
        return Err(ConfigError::invalid("planner.Re", "must be positive"));
    }
    Ok(re.powf(T::of(-0.75)) * l)
}

pub fn range_general_n<T: Real>(q: &ChiRangeQuery<T>) -> Result<ChiRange<T>, ConfigError> {
    q.check()?;
    let delta = q.delta.ok_or_else(|| ConfigError::Missing("planner.delta".into()))?;
    let p = 2 * q.order as i32 + 2;
    let scale = q.u / q.l * (q.l / delta).powi(p);
    Ok(ChiRange {
        chi_lo: scale / q.re,
        chi_hi: (T::one() + T::one()) * scale,
        mode: ChiMode::MeshIndependent,
        lower_exponent_thirds: 3 * p as i64,
        upper_exponent_thirds: 3 * p as i64,
        order: q.order,
    })
}

/// Returns `(published, derived)`.
pub fn range_mesh_dependent<T: Real>(q: &ChiRangeQuery<T>) -> Result<(ChiRange<T>, ChiRange<T>), ConfigError> {
    q.check()?;
    if !(q.re > T::one()) {
        return Err(ConfigError::invalid("planner.Re", "must exceed 1 for the mesh-dependent range"));
    }
    let h = match q.h {
        Some(h) => h,
        None => kolmogorov_mesh(q.re, q.l)?,
    };
    let n = q.order as i64;
    let upper = 6 * n + 6;
    let ratio = q.l / h;
    let build = |lower: i64, mode| ChiRange {
        chi_lo: q.u / q.l * ratio.powf(T::of(lower as f64 / 3.0)),
        chi_hi: (T::one() + T::one()) * q.u / q.l * ratio.powi(upper as i32 / 3),
        mode,
        lower_exponent_thirds: lower,
        upper_exponent_thirds: upper,
        order: q.order,
    };
    Ok((
        build(6 * n + 10, ChiMode::MeshDependentPublished),
        build(6 * n + 2, ChiMode::MeshDependentDerived),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn general_range_direct_substitution() {
        let r = range_general_n(&ChiRangeQuery::with_delta(1.0, 1.0, 1e4, 1e-2, 0)).unwrap();
        assert!(close(r.chi_lo, 1.0, 1e-12));
        assert!(close(r.chi_hi, 2e4, 1e-12));
        assert!(r.is_consistent());
        assert_eq!(r.formula(), "Re^-1 (U/L)(L/delta)^2 <= chi <= 2 (U/L)(L/delta)^2");
    }

    #[test]
    fn unit_ratio_filter() {
        let (u, l, re) = (3.0, 2.0, 50.0);
        let r = range_general_n(&ChiRangeQuery::with_delta(u, l, re, l, 2)).unwrap();
        assert!(close(r.chi_lo, u / l / re, 1e-14));
        assert!(close(r.chi_hi, 2.0 * u / l, 1e-14));
    }

    #[test]
    fn kolmogorov_values() {
        assert_eq!(kolmogorov_mesh(1.0, 2.5).unwrap(), 2.5);
        assert!(close(kolmogorov_mesh(16.0, 1.0).unwrap(), 0.125, 1e-15));
        assert!(close(kolmogorov_mesh(1e4, 1.0).unwrap(), 1e-3, 1e-14));
    }

    #[test]
    fn mesh_dependent_zero_order() {
        let (published, derived) = range_mesh_dependent(&ChiRangeQuery::mesh_dependent(1.0, 1.0, 1e4, None, 0)).unwrap();
        assert_eq!(published.lower_exponent_thirds, 10);
        assert_eq!(derived.lower_exponent_thirds, 2);
        assert_eq!(derived.upper_exponent_thirds, 6);
        assert_eq!(derived.formula(), "(U/L)(L/h)^(2/3) <= chi <= 2 (U/L)(L/h)^2");
        assert_eq!(published.formula(), "(U/L)(L/h)^(10/3) <= chi <= 2 (U/L)(L/h)^2");
        assert!(!published.is_consistent());
        assert!(derived.is_consistent());
        // L/h = 1e3
        assert!(close(derived.chi_lo, 100.0, 1e-12));
        assert!(close(derived.chi_hi, 2e6, 1e-12));
    }

    #[test]
    fn unit_mesh_ratio() {
        let q = ChiRangeQuery::mesh_dependent(2.0, 4.0, 10.0, Some(4.0), 1);
        let (published, derived) = range_mesh_dependent(&q).unwrap();
        for r in [published, derived] {
            assert!(close(r.chi_lo, 0.5, 1e-15));
            assert!(close(r.chi_hi, 1.0, 1e-15));
        }
    }

    #[test]
    fn invalid_queries() {
        assert!(range_general_n(&ChiRangeQuery::mesh_dependent(1.0, 1.0, 10.0, None, 0)).is_err());
        assert!(range_mesh_dependent(&ChiRangeQuery::mesh_dependent(1.0, 1.0, 0.5, None, 0)).is_err());
        assert!(range_general_n(&ChiRangeQuery::with_delta(-1.0, 1.0, 10.0, 0.1, 0)).is_err());
    }
}
