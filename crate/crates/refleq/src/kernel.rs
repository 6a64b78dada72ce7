//! The Green's kernel of `u'(t) + ω u(−t) = σ(t)`, `u(−T) = u(T)`.
//!
//! Away from resonance the unique solution of the linear problem is
//! `u(t) = ∫_{−T}^{T} k(t, s) σ(s) ds`, where `k` is piecewise analytic on
//! the square `[−T, T]²` cut into four regions by the two diagonals
//! `s = t` and `s = −t`:
//!
//! ```text
//!        s
//!        ▲   LeftWedge │ RightWedge
//!        │        ╲    │    ╱
//!        │         ╲   │   ╱
//!        │  Below   ╲  │  ╱   Above
//!        │ Diagonals ╲ │ ╱  Diagonals
//!        └─────────────┼──────────────▶ t
//! ```
//!
//! (`AboveDiagonals` is `t > |s|`, the right-hand sector; names refer to the
//! position of the point relative to both diagonal lines.)
//!
//! Two algebraically identical closed forms are implemented:
//!
//! * [`kernel_eval`] — the "raw" four-branch form, a sum of a cosine and a
//!   sine divided by `2 sin ζ`;
//! * [`kernel_eval_normalized`] — the factored form on the unit square
//!   (`z = t/T`, `y = s/T`) in which every branch is a product of two
//!   cosines with `±π/4` phase shifts, divided by `sin ζ`.
//!
//! The factored form has fewer cancellations near `ζ = π/4` and is what the
//! rest of the crate evaluates internally; the raw form is kept as an
//! independent cross-check.
//!
//! `k` jumps by exactly `+1` when `t` crosses the diagonal `s = t` (and by
//! `−1` when `s` crosses it), and is continuous across `s = −t`.

use crate::error::{Error, Result};
use crate::params::{ProblemParams, RESONANCE_TOLERANCE};
use serde::Serialize;
use std::f64::consts::FRAC_PI_4;

/// One of the four open regions of the square cut by the diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionTag {
    /// `t > |s|`.
    AboveDiagonals,
    /// `|t| < s`.
    RightWedge,
    /// `|t| < −s`.
    LeftWedge,
    /// `t < −|s|`.
    BelowDiagonals,
}

/// Region classification of a point, with a flag for points that lie exactly
/// on one of the diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelRegion {
    pub tag: RegionTag,
    /// True exactly on `s = t` or `s = −t` (where the branch returned is the
    /// documented tie-break, see [`region_of`]).
    pub on_boundary: bool,
}

/// Sign behaviour of the kernel on the whole square, as a function of `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignClass {
    /// `ζ ∈ (0, π/4)`: `k > 0` everywhere.
    StrictlyPositive,
    /// `ζ ∈ (−π/4, 0)`: `k < 0` everywhere.
    StrictlyNegative,
    /// `ζ = π/4`: `k ≥ 0`, vanishing exactly on the four points returned by
    /// [`vanishing_points`].
    NonNegativeVanishing,
    /// `ζ = −π/4`: `k ≤ 0`, vanishing on the same four points.
    NonPositiveVanishing,
    /// Everything else (non-resonant): `k` takes both signs.
    ChangesSign,
}

/// The four points where the kernel vanishes in the `ζ = ±π/4` edge cases.
pub fn vanishing_points(half_period: f64) -> [(f64, f64); 4] {
    let t = half_period;
    [(-t, -t), (0.0, 0.0), (t, t), (t, -t)]
}

/// Classifies `(t, s)` into a kernel region. The test is scale-invariant, so
/// it accepts either time coordinates or normalized ones.
///
/// Tie-break on the diagonals: a boundary point is classified as the limit
/// from *decreasing t*. On `s = t` this is the `t < s` side (`RightWedge`
/// for `s > 0`, `BelowDiagonals` for `s ≤ 0`), which is the side the strip
/// minorant is built from; on `s = −t` the kernel is continuous and the
/// choice is immaterial.
pub fn region_of(t: f64, s: f64) -> KernelRegion {
    if t > s.abs() {
        KernelRegion {
            tag: RegionTag::AboveDiagonals,
            on_boundary: false,
        }
    } else if t.abs() < s {
        KernelRegion {
            tag: RegionTag::RightWedge,
            on_boundary: false,
        }
    } else if t.abs() < -s {
        KernelRegion {
            tag: RegionTag::LeftWedge,
            on_boundary: false,
        }
    } else if t < -s.abs() {
        KernelRegion {
            tag: RegionTag::BelowDiagonals,
            on_boundary: false,
        }
    } else {
        // On a diagonal. Classify as the limit from decreasing t.
        let tag = if s > 0.0 {
            if t == s {
                RegionTag::RightWedge
            } else {
                RegionTag::BelowDiagonals
            }
        } else if s < 0.0 {
            if t == s {
                RegionTag::BelowDiagonals
            } else {
                RegionTag::LeftWedge
            }
        } else {
            RegionTag::BelowDiagonals
        };
        KernelRegion {
            tag,
            on_boundary: true,
        }
    }
}

fn check_square(params: &ProblemParams, t: f64, s: f64) -> Result<()> {
    let half = params.half_period();
    if !t.is_finite() || !s.is_finite() || t.abs() > half || s.abs() > half {
        return Err(Error::Domain(format!(
            "kernel point ({t}, {s}) outside the square [-{half}, {half}]^2"
        )));
    }
    Ok(())
}

/// Raw four-branch closed form, `(cos ± sin) / (2 sin ζ)` in time
/// coordinates. Kept as the independent cross-check of
/// [`kernel_eval_normalized`]; both agree to round-off.
pub fn kernel_eval(params: &ProblemParams, t: f64, s: f64) -> Result<f64> {
    check_square(params, t, s)?;
    let w = params.omega();
    let half = params.half_period();
    let numerator = match region_of(t, s).tag {
        RegionTag::AboveDiagonals => (w * (half - s - t)).cos() + (w * (half + s - t)).sin(),
        RegionTag::RightWedge => (w * (half - s - t)).cos() - (w * (half - s + t)).sin(),
        RegionTag::LeftWedge => (w * (half + s + t)).cos() + (w * (half + s - t)).sin(),
        RegionTag::BelowDiagonals => (w * (half + s + t)).cos() - (w * (half - s + t)).sin(),
    };
    Ok(numerator / (2.0 * params.sin_zeta()))
}

/// Evaluates the branch belonging to `tag` of the factored form at the
/// normalized point `(z, y)`, regardless of which region the point actually
/// lies in. This is how one-sided limits on the diagonals are computed.
pub fn kernel_branch_normalized(params: &ProblemParams, z: f64, y: f64, tag: RegionTag) -> f64 {
    let zeta = params.zeta();
    let product = match tag {
        RegionTag::AboveDiagonals => {
            (zeta * (1.0 - z) - FRAC_PI_4).cos() * (zeta * y - FRAC_PI_4).cos()
        }
        RegionTag::RightWedge => {
            (zeta * z + FRAC_PI_4).cos() * (zeta * (y - 1.0) - FRAC_PI_4).cos()
        }
        RegionTag::LeftWedge => {
            (zeta * z + FRAC_PI_4).cos() * (zeta * (1.0 + y) - FRAC_PI_4).cos()
        }
        RegionTag::BelowDiagonals => {
            (zeta * (z + 1.0) + FRAC_PI_4).cos() * (zeta * y - FRAC_PI_4).cos()
        }
    };
    product / params.sin_zeta()
}

/// Partial derivative `∂k/∂s` of the branch `tag` at the normalized point
/// `(z, y)`, in *time* units (i.e. already divided by `T`). Used by the
/// quadrature corrections in the solver.
pub fn kernel_branch_ds(params: &ProblemParams, z: f64, y: f64, tag: RegionTag) -> f64 {
    let zeta = params.zeta();
    let d_product_dy = match tag {
        RegionTag::AboveDiagonals => {
            -zeta * (zeta * (1.0 - z) - FRAC_PI_4).cos() * (zeta * y - FRAC_PI_4).sin()
        }
        RegionTag::RightWedge => {
            -zeta * (zeta * z + FRAC_PI_4).cos() * (zeta * (y - 1.0) - FRAC_PI_4).sin()
        }
        RegionTag::LeftWedge => {
            -zeta * (zeta * z + FRAC_PI_4).cos() * (zeta * (1.0 + y) - FRAC_PI_4).sin()
        }
        RegionTag::BelowDiagonals => {
            -zeta * (zeta * (z + 1.0) + FRAC_PI_4).cos() * (zeta * y - FRAC_PI_4).sin()
        }
    };
    d_product_dy / (params.sin_zeta() * params.half_period())
}

/// Factored ("normalized") form on the unit square: `z = t/T`, `y = s/T`.
/// Same value as `kernel_eval(params, T z, T y)` up to round-off, but built
/// from products of phase-shifted cosines. This is the default evaluation
/// path inside the crate.
pub fn kernel_eval_normalized(params: &ProblemParams, z: f64, y: f64) -> Result<f64> {
    if !z.is_finite() || !y.is_finite() || z.abs() > 1.0 || y.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "normalized kernel point ({z}, {y}) outside the unit square"
        )));
    }
    Ok(kernel_branch_normalized(params, z, y, region_of(z, y).tag))
}

/// One-sided limits of `s ↦ k(t, s)` at the diagonal `s = t`, returned as
/// `(lim s→t⁻, lim s→t⁺)`. Their difference is exactly `−1`.
pub fn diagonal_s_limits(params: &ProblemParams, t: f64) -> Result<(f64, f64)> {
    check_square(params, t, t)?;
    let z = t / params.half_period();
    let (below, above) = if t >= 0.0 {
        (RegionTag::AboveDiagonals, RegionTag::RightWedge)
    } else {
        (RegionTag::LeftWedge, RegionTag::BelowDiagonals)
    };
    Ok((
        kernel_branch_normalized(params, z, z, below),
        kernel_branch_normalized(params, z, z, above),
    ))
}

/// The jump of `t ↦ k(t, s)` across the diagonal `t = s`, i.e.
/// `lim_{t→s⁺} k(t,s) − lim_{t→s⁻} k(t,s)`. Requires `|s| < T`; the Green's
/// function property forces the value to be exactly 1 for every such `s`,
/// which the closed forms reproduce to round-off.
pub fn kernel_jump(params: &ProblemParams, s: f64) -> Result<f64> {
    if !s.is_finite() || s.abs() >= params.half_period() {
        return Err(Error::Domain(format!(
            "jump is defined for |s| < T = {}, got s = {s}",
            params.half_period()
        )));
    }
    let y = s / params.half_period();
    let (upper, lower) = if s >= 0.0 {
        (RegionTag::AboveDiagonals, RegionTag::RightWedge)
    } else {
        (RegionTag::LeftWedge, RegionTag::BelowDiagonals)
    };
    Ok(kernel_branch_normalized(params, y, y, upper)
        - kernel_branch_normalized(params, y, y, lower))
}

/// Sign classification of the kernel as a function of `ζ = ωT` alone.
/// Resonant `ζ` (numerically a multiple of π) is rejected.
pub fn sign_class(zeta: f64) -> Result<SignClass> {
    if !zeta.is_finite() || zeta.sin().abs() < RESONANCE_TOLERANCE {
        return Err(Error::Resonant {
            zeta,
            sine: zeta.sin(),
        });
    }
    Ok(if zeta == FRAC_PI_4 {
        SignClass::NonNegativeVanishing
    } else if zeta == -FRAC_PI_4 {
        SignClass::NonPositiveVanishing
    } else if zeta > 0.0 && zeta < FRAC_PI_4 {
        SignClass::StrictlyPositive
    } else if zeta > -FRAC_PI_4 && zeta < 0.0 {
        SignClass::StrictlyNegative
    } else {
        SignClass::ChangesSign
    })
}
