//! Adaptive composite Gauss–Legendre quadrature.
//!
//! The oracles in [`crate::bounds`] integrate kernel sections that are
//! analytic between a handful of known breakpoints (region edges and kernel
//! zeros) but only continuous or even discontinuous across them. The
//! integrator therefore takes the breakpoints explicitly, starts one panel
//! per smooth piece and subdivides each panel until a whole-vs-halves
//! comparison meets the requested tolerance.
//!
//! Integrands return `Result<f64>` so that domain errors (e.g. a weight
//! expression dividing by zero) propagate instead of turning into NaN.

use crate::error::{Error, Result};

/// 16-point Gauss–Legendre rule on [−1, 1]: positive abscissae (the rule is
/// symmetric) and matching weights.
const GL16_X: [f64; 8] = [
    0.0950125098376374401853193,
    0.2816035507792589132304605,
    0.4580167776572273863424194,
    0.6178762444026437484466718,
    0.7554044083550030338951012,
    0.8656312023878317438804679,
    0.9445750230732325760779884,
    0.9894009349916499325961542,
];
const GL16_W: [f64; 8] = [
    0.1894506104550684962853967,
    0.1826034150449235888667637,
    0.1691565193950025381893121,
    0.1495959888165767320815017,
    0.1246289712555338720524763,
    0.0951585116824927848099251,
    0.0622535239386478928628438,
    0.0271524594117540948517806,
];

/// Result of an adaptive integration: the value and the accumulated
/// whole-vs-halves error estimate of the accepted panels.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
}

fn gl16_panel<F>(f: &F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (&x, &w) in GL16_X.iter().zip(GL16_W.iter()) {
        acc += w * (f(mid + half * x)? + f(mid - half * x)?);
    }
    Ok(acc * half)
}

struct Adaptive<'a, F> {
    f: &'a F,
    evaluations: usize,
}

const MAX_DEPTH: u32 = 48;
const MAX_EVALUATIONS: usize = 4_000_000;

impl<F> Adaptive<'_, F>
where
    F: Fn(f64) -> Result<f64>,
{
    fn recurse(&mut self, lo: f64, hi: f64, whole: f64, tol: f64, depth: u32) -> Result<QuadResult> {
        self.evaluations += 32;
        if self.evaluations > MAX_EVALUATIONS {
            return Err(Error::Domain(format!(
                "quadrature exceeded {MAX_EVALUATIONS} evaluations on [{lo}, {hi}]"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let left = gl16_panel(self.f, lo, mid)?;
        let right = gl16_panel(self.f, mid, hi)?;
        let refined = left + right;
        let disagreement = (refined - whole).abs();
        if depth >= MAX_DEPTH || disagreement <= tol.max(f64::EPSILON * refined.abs()) {
            return Ok(QuadResult {
                value: refined,
                error_estimate: disagreement,
            });
        }
        let a = self.recurse(lo, mid, left, 0.5 * tol, depth + 1)?;
        let b = self.recurse(mid, hi, right, 0.5 * tol, depth + 1)?;
        Ok(QuadResult {
            value: a.value + b.value,
            error_estimate: a.error_estimate + b.error_estimate,
        })
    }
}

/// Integrates `f` over `[lo, hi]`, forcing panel edges at every breakpoint
/// that falls strictly inside the interval. `tol` is an absolute tolerance
/// shared across the pieces (each piece gets a proportional share).
pub fn integrate<F>(f: F, lo: f64, hi: f64, breakpoints: &[f64], tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::Domain(format!(
            "bad integration interval [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
        });
    }

    let mut edges = vec![lo];
    let mut interior: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b.is_finite() && b > lo && b < hi)
        .collect();
    interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for b in interior {
        if b > *edges.last().unwrap() + 1e-15 * (hi - lo) {
            edges.push(b);
        }
    }
    edges.push(hi);

    let per_piece = tol / (edges.len() - 1) as f64;
    let mut adaptive = Adaptive {
        f: &f,
        evaluations: 0,
    };
    let mut total = QuadResult {
        value: 0.0,
        error_estimate: 0.0,
    };
    for pair in edges.windows(2) {
        let whole = gl16_panel(&f, pair[0], pair[1])?;
        adaptive.evaluations += 32;
        let piece = adaptive.recurse(pair[0], pair[1], whole, per_piece, 0)?;
        total.value += piece.value;
        total.error_estimate += piece.error_estimate;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn exact_on_polynomials() {
        // GL16 integrates degree ≤ 31 exactly; x^20 over [0, 1] = 1/21.
        let r = integrate(|x| Ok(x.powi(20)), 0.0, 1.0, &[], 1e-14).unwrap();
        assert!((r.value - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_transcendental() {
        let r = integrate(|x| Ok((x).exp()), 0.0, 1.0, &[], 1e-13).unwrap();
        assert!((r.value - (E - 1.0)).abs() < 1e-13);
        let r = integrate(|x| Ok(x.sin()), 0.0, PI, &[], 1e-13).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn kink_with_declared_breakpoint() {
        // ∫_{-1}^{1} |x| dx = 1, with the kink declared.
        let r = integrate(|x| Ok(x.abs()), -1.0, 1.0, &[0.0], 1e-14).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kink_without_breakpoint_still_converges() {
        let r = integrate(|x| Ok(x.abs()), -1.0, 1.0, &[], 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn jump_discontinuity_with_breakpoint() {
        let f = |x: f64| Ok(if x < 0.25 { 1.0 } else { 3.0 });
        let r = integrate(f, 0.0, 1.0, &[0.25], 1e-14).unwrap();
        assert!((r.value - 2.5).abs() < 1e-14);
    }

    #[test]
    fn breakpoints_outside_interval_are_ignored() {
        let r = integrate(|x| Ok(x), 0.0, 1.0, &[-3.0, 7.0, f64::NAN], 1e-14).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn integrand_errors_propagate() {
        let f = |x: f64| {
            if x > 0.5 {
                Err(crate::error::Error::Eval("boom".into()))
            } else {
                Ok(x)
            }
        };
        assert!(integrate(f, 0.0, 1.0, &[], 1e-12).is_err());
    }

    #[test]
    fn empty_and_invalid_intervals() {
        let r = integrate(|_| Ok(1.0), 2.0, 2.0, &[], 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(integrate(|_| Ok(1.0), 1.0, 0.0, &[], 1e-12).is_err());
    }
}
