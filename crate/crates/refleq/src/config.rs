//! Problem configuration: a small TOML schema, validation, and a content
//! hash that the reports embed so results can be traced back to the exact
//! configuration that produced them.
//!
//! ```toml
//! [problem]
//! half_period = 1.0
//! omega = 1.5
//! h = "1/(2+(t-1)^2) + u^2/5 + 2*u + 1/(1+7*v^2) + 7"
//! g = "1"                      # optional, defaults to "1"
//!
//! [strip]
//! a = 0.48                     # the strip is [a*T, (1-a)*T]
//!
//! [cone]
//! variant = "non-negative"     # optional, defaults to "changing-sign"
//!
//! [[radii]]
//! rho = 1.0
//! kind = "index-1"
//!
//! [[radii]]
//! rho = 2.0
//! kind = "index-0"
//!
//! [thresholds]
//! source = "manual"            # "closed-form" | "oracle" | "manual";
//!                              # optional, defaults by weight
//! manual_m = 11.5009           # required for the manual source
//! manual_M = 6.58486
//! epsilon = 0.0                # optional marginality threshold
//!
//! [solver]
//! nodes = 401                  # optional, odd, >= 5
//! damping = 0.5                # optional, in (0, 1]
//! tol = 1e-10                  # optional, > 0
//! max_iter = 500               # optional, >= 1
//! initial = 0.5                # optional constant initial profile
//!
//! [output]
//! grid = 101                   # optional kernel CSV grid density
//! ```

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::bounds::StripInterval;
use crate::certifier::{ConeVariant, RadiusKind, ThresholdSpec};
use crate::error::{Error, Result};
use crate::expr::{parse, NonlinearityExpr};
use crate::params::ProblemParams;
use crate::solver::PicardOptions;

/// Default number of solver grid nodes.
pub const DEFAULT_SOLVER_NODES: usize = 401;
/// Default kernel CSV grid density (points per axis).
pub const DEFAULT_OUTPUT_GRID: usize = 101;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    strip: RawStrip,
    #[serde(default)]
    cone: RawCone,
    #[serde(default)]
    radii: Vec<RawRadius>,
    #[serde(default)]
    thresholds: RawThresholds,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    half_period: f64,
    omega: f64,
    h: String,
    g: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrip {
    a: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    variant: Option<ConeVariant>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadius {
    rho: f64,
    kind: RadiusKind,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    source: Option<String>,
    manual_m: Option<f64>,
    #[serde(rename = "manual_M")]
    manual_big_m: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    nodes: Option<usize>,
    damping: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    initial: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    grid: Option<usize>,
}

/// Requested threshold policy, before manual values are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdChoice {
    /// Pick closed forms for a unit weight, oracles otherwise.
    Auto,
    ClosedForm,
    Oracle,
    Manual,
}

impl ThresholdChoice {
    /// Parses a source name as used by the config file and the CLI.
    pub fn from_name(name: &str) -> Result<ThresholdChoice> {
        match name {
            "closed-form" => Ok(ThresholdChoice::ClosedForm),
            "oracle" => Ok(ThresholdChoice::Oracle),
            "manual" => Ok(ThresholdChoice::Manual),
            other => Err(Error::Config(format!(
                "unknown threshold source {other:?}; expected \"closed-form\", \
                 \"oracle\", or \"manual\""
            ))),
        }
    }
}

/// Solver settings resolved from the config.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    /// Grid nodes (odd, at least 5).
    pub nodes: usize,
    pub options: PicardOptions,
    /// Constant initial profile, when the config pins one.
    pub initial: Option<f64>,
}

/// A validated problem configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub params: ProblemParams,
    pub strip: StripInterval,
    pub cone: ConeVariant,
    /// The nonlinearity `h(t, u, v)`, as configured (unshifted).
    pub nonlinearity: NonlinearityExpr,
    /// The weight `g(s)`.
    pub weight: NonlinearityExpr,
    pub radii: Vec<(f64, RadiusKind)>,
    pub threshold_choice: ThresholdChoice,
    pub manual_m: Option<f64>,
    pub manual_big_m: Option<f64>,
    /// Margin below which a satisfied condition is flagged marginal.
    pub epsilon: f64,
    pub solver: SolverSettings,
    /// Kernel CSV grid density (points per axis).
    pub output_grid: usize,
    /// SHA-256 of the raw configuration bytes, lowercase hex.
    pub hash: String,
}

impl Config {
    /// Loads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Config> {
        let bytes = std::fs::read(path)?;
        let text = String::from_utf8(bytes).map_err(|err| {
            Error::Config(format!("config file is not valid UTF-8: {err}"))
        })?;
        Config::from_str(&text)
    }

    /// Parses and validates a configuration from its text.
    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Config> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|err| Error::Config(format!("config parse error: {err}")))?;
        let hash = sha256_hex(text.as_bytes());

        let params = ProblemParams::new(raw.problem.half_period, raw.problem.omega)?;

        let strip = StripInterval::new(raw.strip.a)?;
        strip.validate_for(&params)?;

        let nonlinearity = parse(&raw.problem.h)
            .map_err(|err| Error::Config(format!("invalid nonlinearity h: {err}")))?;
        if nonlinearity.uses_weight_var() {
            return Err(Error::Config(
                "the nonlinearity h may reference t, u, v only; it references s".into(),
            ));
        }

        let weight_src = raw.problem.g.as_deref().unwrap_or("1");
        let weight = parse(weight_src)
            .map_err(|err| Error::Config(format!("invalid weight g: {err}")))?;
        if weight.uses_state_vars() {
            return Err(Error::Config(
                "the weight g may reference s only; it references t, u, or v".into(),
            ));
        }

        let mut radii = Vec::with_capacity(raw.radii.len());
        for r in &raw.radii {
            if !(r.rho.is_finite() && r.rho > 0.0) {
                return Err(Error::Config(format!(
                    "condition radii must be positive and finite, got {}",
                    r.rho
                )));
            }
            radii.push((r.rho, r.kind));
        }

        let threshold_choice = match raw.thresholds.source.as_deref() {
            None => ThresholdChoice::Auto,
            Some(name) => ThresholdChoice::from_name(name)?,
        };
        if threshold_choice == ThresholdChoice::Manual {
            if raw.thresholds.manual_m.is_none() || raw.thresholds.manual_big_m.is_none() {
                return Err(Error::Config(
                    "the manual threshold source requires both manual_m and manual_M".into(),
                ));
            }
        }
        for (name, value) in [
            ("manual_m", raw.thresholds.manual_m),
            ("manual_M", raw.thresholds.manual_big_m),
        ] {
            if let Some(value) = value {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::Config(format!(
                        "{name} must be positive and finite, got {value}"
                    )));
                }
            }
        }
        let epsilon = raw.thresholds.epsilon.unwrap_or(0.0);
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be non-negative and finite, got {epsilon}"
            )));
        }

        let defaults = PicardOptions::default();
        let nodes = raw.solver.nodes.unwrap_or(DEFAULT_SOLVER_NODES);
        if nodes < 5 || nodes % 2 == 0 {
            return Err(Error::Config(format!(
                "solver nodes must be odd and at least 5, got {nodes}"
            )));
        }
        let damping = raw.solver.damping.unwrap_or(defaults.damping);
        if !(damping.is_finite() && damping > 0.0 && damping <= 1.0) {
            return Err(Error::Config(format!(
                "solver damping must lie in (0, 1], got {damping}"
            )));
        }
        let tol = raw.solver.tol.unwrap_or(defaults.tol);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Config(format!(
                "solver tolerance must be positive, got {tol}"
            )));
        }
        let max_iter = raw.solver.max_iter.unwrap_or(defaults.max_iter);
        if max_iter == 0 {
            return Err(Error::Config(
                "solver max_iter must be at least 1".into(),
            ));
        }
        if let Some(initial) = raw.solver.initial {
            if !initial.is_finite() {
                return Err(Error::Config(format!(
                    "solver initial profile must be finite, got {initial}"
                )));
            }
        }

        let output_grid = raw.output.grid.unwrap_or(DEFAULT_OUTPUT_GRID);
        if output_grid == 0 {
            return Err(Error::Config("output grid density must be at least 1".into()));
        }

        Ok(Config {
            params,
            strip,
            cone: raw.cone.variant.unwrap_or(ConeVariant::ChangingSign),
            nonlinearity,
            weight,
            radii,
            threshold_choice,
            manual_m: raw.thresholds.manual_m,
            manual_big_m: raw.thresholds.manual_big_m,
            epsilon,
            solver: SolverSettings {
                nodes,
                options: PicardOptions {
                    damping,
                    tol,
                    max_iter,
                    ..defaults
                },
                initial: raw.solver.initial,
            },
            output_grid,
            hash,
        })
    }

    /// Applies CLI threshold overrides on top of the config.
    pub fn override_thresholds(
        &mut self,
        source: Option<&str>,
        manual_m: Option<f64>,
        manual_big_m: Option<f64>,
    ) -> Result<()> {
        if let Some(name) = source {
            self.threshold_choice = ThresholdChoice::from_name(name)?;
        }
        for (name, slot, value) in [
            ("manual-m", &mut self.manual_m, manual_m),
            ("manual-M", &mut self.manual_big_m, manual_big_m),
        ] {
            if let Some(value) = value {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::Config(format!(
                        "{name} must be positive and finite, got {value}"
                    )));
                }
                *slot = Some(value);
            }
        }
        if self.threshold_choice == ThresholdChoice::Manual
            && (self.manual_m.is_none() || self.manual_big_m.is_none())
        {
            return Err(Error::Config(
                "the manual threshold source requires both manual_m and manual_M \
                 (in the config file or via --manual-m/--manual-M)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// The concrete threshold policy the certifier should run with.
    pub fn threshold_spec(&self) -> Result<ThresholdSpec> {
        match self.threshold_choice {
            ThresholdChoice::Auto => {
                if self.weight.is_literal_one() {
                    Ok(ThresholdSpec::ClosedForm)
                } else {
                    Ok(ThresholdSpec::Oracle)
                }
            }
            ThresholdChoice::ClosedForm => Ok(ThresholdSpec::ClosedForm),
            ThresholdChoice::Oracle => Ok(ThresholdSpec::Oracle),
            ThresholdChoice::Manual => match (self.manual_m, self.manual_big_m) {
                (Some(m), Some(big_m)) => Ok(ThresholdSpec::Manual { m, big_m }),
                _ => Err(Error::Config(
                    "the manual threshold source requires both manual_m and manual_M".into(),
                )),
            },
        }
    }
}

/// Lowercase hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        let _ = write!(out, "{byte:02x}");
    }
    out
}
