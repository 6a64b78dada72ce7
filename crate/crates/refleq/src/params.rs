//! Problem data for the periodic problem with reflection
//!
//! ```text
//! u'(t) + ω u(−t) = σ(t),   t ∈ [−T, T],   u(−T) = u(T).
//! ```
//!
//! Everything downstream is parameterized by the half-period `T`, the
//! reflection coefficient `ω` and their product `ζ = ωT`.

use crate::error::{Error, Result};

/// |sin ζ| below this is treated as resonance: the linear problem is not
/// invertible and no Green's kernel exists.
pub const RESONANCE_TOLERANCE: f64 = 1e-12;

/// Validated parameters of the linear part. `zeta = omega * half_period` is
/// precomputed because every kernel formula is written in terms of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    half_period: f64,
    omega: f64,
    zeta: f64,
}

impl ProblemParams {
    /// Validates `T > 0`, `ω ≠ 0` and non-resonance (`|sin ωT| ≥ 1e−12`).
    pub fn new(half_period: f64, omega: f64) -> Result<Self> {
        if !half_period.is_finite() || half_period <= 0.0 {
            return Err(Error::Domain(format!(
                "half-period T must be positive and finite, got {half_period}"
            )));
        }
        if !omega.is_finite() || omega == 0.0 {
            return Err(Error::Domain(format!(
                "omega must be non-zero and finite, got {omega}"
            )));
        }
        let zeta = omega * half_period;
        let sine = zeta.sin();
        if sine.abs() < RESONANCE_TOLERANCE {
            return Err(Error::Resonant { zeta, sine });
        }
        Ok(Self {
            half_period,
            omega,
            zeta,
        })
    }

    /// The half-period `T`.
    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    /// The reflection coefficient `ω`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ζ = ωT`.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `sin ζ`, the kernel's global scale factor (guaranteed non-zero).
    pub fn sin_zeta(&self) -> f64 {
        self.zeta.sin()
    }
}
