//! Python bindings for the `refleq` library.
//!
//! The module mirrors the CLI's capabilities at two levels:
//!
//! * typed building blocks — [`Problem`], [`Strip`], [`Expression`] plus
//!   scalar helpers (`cone_constant`, `oracle_thresholds`, the envelope
//!   evaluators) for interactive exploration;
//! * TOML-driven runs — `bounds_toml`, `certify_toml`, `solve_toml`,
//!   `kernel_csv_toml` accept the same configuration text as the CLI and
//!   return the same reports, so Python callers get byte-identical JSON.
//!
//! Build with `cargo build -p refleq-py --release` and rename/copy the
//! produced `librefleq_py.so` to `refleq_py.so` somewhere on `sys.path`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use refleq::bounds::{self, StripInterval};
use refleq::certifier::{self, ThresholdSpec};
use refleq::cli;
use refleq::config::Config;
use refleq::expr::{parse as parse_expression, NonlinearityExpr};
use refleq::kernel;
use refleq::{Error, ProblemParams};

/// Domain/usage problems become `ValueError`; everything else (hypothesis
/// violations, divergence, numerical failures) becomes `RuntimeError`.
fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Domain(_) | Error::Syntax { .. } | Error::Config(_) | Error::Resonant { .. } => {
            PyValueError::new_err(err.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// The linear problem data: half-period `T` and reflection coefficient `ω`.
#[pyclass(frozen)]
struct Problem {
    params: ProblemParams,
}

#[pymethods]
impl Problem {
    #[new]
    fn new(half_period: f64, omega: f64) -> PyResult<Self> {
        Ok(Problem {
            params: ProblemParams::new(half_period, omega).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn half_period(&self) -> f64 {
        self.params.half_period()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.params.omega()
    }

    /// The angle `ζ = ω·T`.
    #[getter]
    fn zeta(&self) -> f64 {
        self.params.zeta()
    }

    /// Green's kernel `k(t, s)` on the square `[-T, T]²`.
    fn kernel(&self, t: f64, s: f64) -> PyResult<f64> {
        kernel::kernel_eval(&self.params, t, s).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(half_period={}, omega={})",
            self.params.half_period(),
            self.params.omega()
        )
    }
}

/// The positivity strip `[aT, bT]` with `b = 1 − a`.
#[pyclass(frozen)]
struct Strip {
    inner: StripInterval,
}

#[pymethods]
impl Strip {
    #[new]
    fn new(a: f64) -> PyResult<Self> {
        Ok(Strip {
            inner: StripInterval::new(a).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    fn __repr__(&self) -> String {
        format!("Strip(a={})", self.inner.a())
    }
}

/// A parsed nonlinearity/weight expression in the variables `t, u, v, s`.
#[pyclass(frozen)]
struct Expression {
    inner: NonlinearityExpr,
}

#[pymethods]
impl Expression {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Expression {
            inner: parse_expression(text).map_err(to_py_err)?,
        })
    }

    /// Evaluates at `(t, u, v)` (the weight variable `s` aliases `t`).
    fn eval(&self, t: f64, u: f64, v: f64) -> PyResult<f64> {
        self.inner.eval(t, u, v).map_err(to_py_err)
    }

    /// The reflection-shifted nonlinearity `f = h + ω·v`.
    fn shift(&self, omega: f64) -> Expression {
        Expression {
            inner: self.inner.shift_to_f(omega),
        }
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expression({:?})", self.inner.to_string())
    }
}

/// The sharp cone constant `c(a)` of the problem's positivity strip.
#[pyfunction]
fn cone_constant(problem: &Problem, strip: &Strip) -> PyResult<f64> {
    bounds::cone_constant(&problem.params, &strip.inner).map_err(to_py_err)
}

/// Upper envelope `Φ(y)` of the scaled kernel section at `y = s/T`.
#[pyfunction]
fn kernel_majorant(problem: &Problem, y: f64) -> PyResult<f64> {
    bounds::phi_upper(&problem.params, y).map_err(to_py_err)
}

/// Lower strip envelope `Ψ(y)` of the scaled kernel section at `y = s/T`.
#[pyfunction]
fn strip_minorant(problem: &Problem, strip: &Strip, y: f64) -> PyResult<f64> {
    bounds::psi_lower(&problem.params, &strip.inner, y).map_err(to_py_err)
}

/// Quadrature-oracle thresholds `(m, M)` for the given weight expression.
#[pyfunction]
#[pyo3(signature = (problem, strip, weight = "1"))]
fn oracle_thresholds(problem: &Problem, strip: &Strip, weight: &str) -> PyResult<(f64, f64)> {
    let g = parse_expression(weight).map_err(to_py_err)?;
    let resolved = certifier::resolve_thresholds(
        &problem.params,
        &strip.inner,
        &g,
        ThresholdSpec::Oracle,
    )
    .map_err(to_py_err)?;
    Ok((resolved.m, resolved.big_m))
}

fn load_config(text: &str) -> PyResult<Config> {
    Config::from_str(text).map_err(to_py_err)
}

/// Bounds report (JSON) for a TOML configuration; identical to the CLI's
/// `bounds --no-timestamp` output.
#[pyfunction]
fn bounds_toml(text: &str) -> PyResult<String> {
    cli::bounds_json(&load_config(text)?, None).map_err(to_py_err)
}

/// Certificate (JSON) for a TOML configuration; identical to the CLI's
/// `certify --no-timestamp` output. An empty certificate is still returned.
#[pyfunction]
fn certify_toml(text: &str) -> PyResult<String> {
    let (report, _exit) = cli::certify_json(&load_config(text)?, None).map_err(to_py_err)?;
    Ok(report)
}

/// Solver diagnostics (JSON) for a TOML configuration; identical to the
/// CLI's `solve --no-timestamp` stdout. Divergence is reported inside the
/// JSON rather than raised.
#[pyfunction]
fn solve_toml(text: &str) -> PyResult<String> {
    let run = cli::run_solve(&load_config(text)?, None).map_err(to_py_err)?;
    Ok(run.report)
}

/// Final nodal profile `(nodes, values)` of a converged solve; raises
/// `RuntimeError` when the iteration diverges or stalls.
#[pyfunction]
fn solve_profile_toml(text: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let run = cli::run_solve(&load_config(text)?, None).map_err(to_py_err)?;
    if run.exit != 0 {
        return Err(PyRuntimeError::new_err(
            run.note.unwrap_or_else(|| "solver did not converge".into()),
        ));
    }
    run.profile
        .ok_or_else(|| PyRuntimeError::new_err("solver produced no profile"))
}

/// Kernel sample CSV (`t,s,k`) for a TOML configuration; identical to the
/// CLI's `kernel` output file.
#[pyfunction]
fn kernel_csv_toml(text: &str) -> PyResult<String> {
    cli::kernel_csv(&load_config(text)?).map_err(to_py_err)
}

#[pymodule]
fn refleq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Strip>()?;
    m.add_class::<Expression>()?;
    m.add_function(wrap_pyfunction!(cone_constant, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_majorant, m)?)?;
    m.add_function(wrap_pyfunction!(strip_minorant, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_toml, m)?)?;
    m.add_function(wrap_pyfunction!(certify_toml, m)?)?;
    m.add_function(wrap_pyfunction!(solve_toml, m)?)?;
    m.add_function(wrap_pyfunction!(solve_profile_toml, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_csv_toml, m)?)?;
    Ok(())
}
