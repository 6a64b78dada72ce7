//! Prints the reference numbers that the test suite pins, each computed by
//! the slowest, most literal method available (dense Riemann sums and grid
//! scans), so the closed forms and the faster adaptive oracles can be
//! checked against something that has no shared code with either.
//!
//! Run with `cargo run --release -p refleq --example reference_values`.

use refleq::bounds::{
    beta_root, cone_constant, inf_strip_integral, inf_strip_integral_oracle, sup_abs_integral,
    sup_abs_integral_oracle, sup_abs_maximizer, StripInterval,
};
use refleq::kernel::kernel_eval;
use refleq::params::ProblemParams;

/// Midpoint Riemann sum of s ↦ |k(t,s)| over [−T, T], n panels.
fn riemann_abs_integral(params: &ProblemParams, t: f64, n: usize) -> f64 {
    let half = params.half_period();
    let h = 2.0 * half / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let s = -half + (i as f64 + 0.5) * h;
        acc += kernel_eval(params, t, s).unwrap().abs();
    }
    acc * h
}

/// Midpoint Riemann sum of s ↦ k(t,s) over [lo, hi], n panels.
fn riemann_integral(params: &ProblemParams, t: f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let s = lo + (i as f64 + 0.5) * h;
        acc += kernel_eval(params, t, s).unwrap();
    }
    acc * h
}

fn main() {
    println!("== sup_t int |k(t,s)| ds, large-angle regime ==");
    for omega in [0.9_f64, 1.2, 1.5] {
        let p = ProblemParams::new(1.0, omega).unwrap();
        let closed = sup_abs_integral(&p).unwrap();
        let oracle = sup_abs_integral_oracle(&p).unwrap();
        let z_star = sup_abs_maximizer(p.zeta()).unwrap();
        let brute_at_star = riemann_abs_integral(&p, z_star, 400_000);
        // Brute sup over a coarse t-grid.
        let mut brute_sup = f64::MIN;
        let mut brute_at = 0.0;
        for i in 0..=800 {
            let t = -1.0 + i as f64 / 400.0;
            let v = riemann_abs_integral(&p, t, 20_000);
            if v > brute_sup {
                brute_sup = v;
                brute_at = t;
            }
        }
        println!(
            "zeta {omega}: closed {closed:.12}  oracle {:.12} at {:.8}  brute(z*) {brute_at_star:.9}  brute sup {brute_sup:.9} at {brute_at:.6}  (z* = {z_star:.8})",
            oracle.value, oracle.at
        );
    }

    println!("\n== inf strip integral ==");
    for (omega, a) in [(0.7_f64, 0.25_f64), (1.5, 0.48), (1.2, 0.45)] {
        let p = ProblemParams::new(1.0, omega).unwrap();
        let strip = StripInterval::new(a).unwrap();
        let closed = inf_strip_integral(&p, &strip).unwrap();
        let oracle = inf_strip_integral_oracle(&p, &strip).unwrap();
        let brute_at_a = riemann_integral(&p, a, a, 1.0 - a, 400_000);
        println!(
            "zeta {omega}, a {a}: closed {closed:.12e}  oracle {:.12e} at {:.8}  brute(t=a) {brute_at_a:.9e}",
            oracle.value, oracle.at
        );
    }

    println!("\n== worked example pins (T=1, omega=1.5, a=0.48) ==");
    let p = ProblemParams::new(1.0, 1.5).unwrap();
    let strip = StripInterval::new(0.48).unwrap();
    println!("beta(1.5)        = {:.15}", beta_root(1.5).unwrap());
    println!("cone constant    = {:.15e}", cone_constant(&p, &strip).unwrap());
    let sup_oracle = sup_abs_integral_oracle(&p).unwrap();
    println!(
        "sup int |k|      = {:.15} at t = {:.12}   (m = {:.15})",
        sup_oracle.value,
        sup_oracle.at,
        1.0 / sup_oracle.value
    );
    let inf_oracle = inf_strip_integral_oracle(&p, &strip).unwrap();
    println!(
        "inf strip int    = {:.15e} at t = {:.12}   (M = {:.15})",
        inf_oracle.value,
        inf_oracle.at,
        1.0 / inf_oracle.value
    );
    println!(
        "closed sup/inf   = {:.15} / {:.15e}",
        sup_abs_integral(&p).unwrap(),
        inf_strip_integral(&p, &strip).unwrap()
    );
}
