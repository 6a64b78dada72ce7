//! Green's-kernel bounds, cone certification and a Nyström solver for the
//! periodic problem with a reflected argument
//!
//! ```text
//! u'(t) + ω u(−t) = g(t) · f(t, u(t), u(−t)),   t ∈ [−T, T],   u(−T) = u(T).
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] — validated problem parameters `(T, ω)` with the resonance
//!   guard on `ζ = ωT`;
//! * [`kernel`] — the piecewise closed form of the Green's kernel, its
//!   regions, jump and sign classification;
//! * [`quad`] — adaptive composite Gauss–Legendre quadrature used by the
//!   numeric oracles.

pub mod bounds;
pub mod certifier;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod kernel;
pub mod params;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
pub use params::ProblemParams;
