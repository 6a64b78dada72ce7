use thiserror::Error;

/// Crate-wide error type.
///
/// Every fallible operation reports one of these variants; none of them are
/// ever silently converted into a NaN or an infinity.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// sin(ωT) is numerically zero, so the kernel does not exist.
    #[error("resonant parameters: sin(omega*T) = {sine:.3e} at omega*T = {zeta:.17}; no kernel exists")]
    Resonant { zeta: f64, sine: f64 },

    /// A nonlinearity or weight expression failed to parse.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// An expression hit a domain violation while being evaluated.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// A structural hypothesis of the certification machinery is violated
    /// (negative weight, weight vanishing on the strip, sign-changing f where
    /// a non-negative one is required, ...).
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// A configuration file is missing, malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// The fixed-point iteration blew past the divergence ceiling.
    #[error("solver diverged at iteration {iteration}: sup-norm {norm:.3e} exceeds ceiling {ceiling:.3e}")]
    Diverged {
        iteration: usize,
        norm: f64,
        ceiling: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
