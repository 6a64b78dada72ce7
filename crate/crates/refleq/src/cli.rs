//! Command-line interface.
//!
//! Four subcommands share one configuration file:
//!
//! * `kernel`  — tabulate the reflection kernel on a square grid (CSV),
//! * `bounds`  — envelopes, cone constant, and thresholds (JSON),
//! * `certify` — run the multiplicity certification (JSON),
//! * `solve`   — damped Picard iteration on the discrete operator
//!               (CSV solution plus JSON diagnostics on stdout).
//!
//! Every JSON report embeds the SHA-256 of the configuration bytes and the
//! threshold source, and carries a Unix timestamp unless `--no-timestamp`
//! is given, so reruns of the same configuration are byte-identical
//! exactly when asked to be.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 hypothesis
//! violation, 4 certification produced an empty certificate, 5 the solver
//! failed to converge (or diverged).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{self, Regime};
use crate::certifier::{
    self, CertificationInput, ThresholdDiscrepancy, ThresholdSource, Thresholds,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernel;
use crate::solver::{self, SymmetricGrid};

/// Exit code for configuration, usage, and evaluation errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for violated mathematical hypotheses.
pub const EXIT_HYPOTHESIS: i32 = 3;
/// Exit code for a certification run that certifies nothing.
pub const EXIT_EMPTY_CERTIFICATE: i32 = 4;
/// Exit code for solver non-convergence or divergence.
pub const EXIT_NO_CONVERGENCE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "refleq",
    version,
    about = "Kernel tables, cone bounds, multiplicity certificates, and \
             solutions for a reflection boundary-value problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the kernel as CSV rows `t,s,k`.
    Kernel(CommonArgs),
    /// Report envelopes, the cone constant, and thresholds as JSON.
    Bounds(CommonArgs),
    /// Run the multiplicity certification and emit the certificate as JSON.
    Certify(CommonArgs),
    /// Solve the discrete fixed-point problem; writes the solution as CSV
    /// and prints JSON diagnostics to stdout.
    Solve(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Problem configuration file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output path. Defaults: stdout for JSON reports, `kernel.csv` /
    /// `solution.csv` for CSV outputs.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Grid density override (points per axis) for kernel tables and
    /// envelope tables.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,

    /// Solver grid nodes override (odd, at least 5).
    #[arg(long, value_name = "N")]
    nodes: Option<usize>,

    /// Threshold source override: closed-form | oracle | manual.
    #[arg(long, value_name = "SOURCE")]
    threshold_source: Option<String>,

    /// Manual index-1 threshold (use with `--threshold-source manual`).
    #[arg(long, value_name = "X")]
    manual_m: Option<f64>,

    /// Manual index-0 threshold (use with `--threshold-source manual`).
    #[arg(long = "manual-M", value_name = "Y")]
    manual_big_m: Option<f64>,

    /// Omit the timestamp so identical configurations produce
    /// byte-identical reports.
    #[arg(long)]
    no_timestamp: bool,
}

/// Parses the command line, runs the requested command, and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Command::Kernel(args) => (CommandKind::Kernel, args),
        Command::Bounds(args) => (CommandKind::Bounds, args),
        Command::Certify(args) => (CommandKind::Certify, args),
        Command::Solve(args) => (CommandKind::Solve, args),
    };
    match execute(command, args) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum CommandKind {
    Kernel,
    Bounds,
    Certify,
    Solve,
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Hypothesis(_) => EXIT_HYPOTHESIS,
        Error::Diverged { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

fn execute(command: CommandKind, args: &CommonArgs) -> Result<i32> {
    let mut config = Config::load(&args.config)?;
    config.override_thresholds(
        args.threshold_source.as_deref(),
        args.manual_m,
        args.manual_big_m,
    )?;
    if let Some(nodes) = args.nodes {
        if nodes < 5 || nodes % 2 == 0 {
            return Err(Error::Config(format!(
                "--nodes must be odd and at least 5, got {nodes}"
            )));
        }
        config.solver.nodes = nodes;
    }
    if let Some(grid) = args.grid {
        if grid == 0 {
            return Err(Error::Config("--grid must be at least 1".into()));
        }
        config.output_grid = grid;
    }
    let timestamp = if args.no_timestamp {
        None
    } else {
        Some(unix_timestamp())
    };

    match command {
        CommandKind::Kernel => cmd_kernel(&config, args.out.as_deref()),
        CommandKind::Bounds => cmd_bounds(&config, args.out.as_deref(), timestamp),
        CommandKind::Certify => cmd_certify(&config, args.out.as_deref(), timestamp),
        CommandKind::Solve => cmd_solve(&config, args.out.as_deref(), timestamp),
    }
}

fn unix_timestamp() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Common JSON envelope: configuration hash, optional timestamp, and the
/// threshold source, wrapped around the report body.
#[derive(Debug, Serialize)]
struct Report<T: Serialize> {
    config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    threshold_source: ThresholdSource,
    #[serde(flatten)]
    body: T,
}

fn render_json<T: Serialize>(report: &Report<T>) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|err| Error::Eval(format!("report serialization failed: {err}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes text to the given path, or to stdout when there is none.
fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Writes text to the given path, or to `default_name` in the working
/// directory.
fn emit_file(out: Option<&Path>, default_name: &str, text: &str) -> Result<()> {
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(default_name));
    std::fs::write(&path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// 17-significant-digit decimal rendering used by all CSV outputs.
fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        // Degenerate density: a single sample at the interval midpoint.
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// The kernel CSV artifact: `t,s,k` rows over an `output_grid`² lattice
/// covering the square `[-T, T]²` (a single midpoint sample for density 1).
pub fn kernel_csv(config: &Config) -> Result<String> {
    let params = &config.params;
    let half = params.half_period();
    let points = grid_points(-half, half, config.output_grid);
    let mut csv = String::with_capacity(points.len() * points.len() * 64);
    csv.push_str("t,s,k\n");
    for &t in &points {
        for &s in &points {
            let k = kernel::kernel_eval(params, t, s)?;
            let _ = writeln!(csv, "{},{},{}", csv_number(t), csv_number(s), csv_number(k));
        }
    }
    Ok(csv)
}

fn cmd_kernel(config: &Config, out: Option<&Path>) -> Result<i32> {
    emit_file(out, "kernel.csv", &kernel_csv(config)?)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct TablePoint {
    /// Position as a fraction of the half-period.
    y: f64,
    value: f64,
}

#[derive(Debug, Serialize)]
struct BoundsReport {
    half_period: f64,
    omega: f64,
    zeta: f64,
    /// Positivity root; absent in the small-angle regime where the upper
    /// envelope never vanishes.
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    cone_constant: f64,
    m_source: ThresholdSource,
    m: f64,
    #[serde(rename = "M_source")]
    big_m_source: ThresholdSource,
    #[serde(rename = "M")]
    big_m: f64,
    /// Oracle reference for a manual `m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_m: Option<f64>,
    /// Oracle reference for a manual `M`.
    #[serde(rename = "oracle_M", skip_serializing_if = "Option::is_none")]
    oracle_big_m: Option<f64>,
    /// Manual thresholds that disagree with their oracles.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    threshold_discrepancies: Vec<ThresholdDiscrepancy>,
    /// Upper envelope of the scaled kernel, sampled over `[-1, 1]`.
    phi_table: Vec<TablePoint>,
    /// Lower strip envelope of the scaled kernel, sampled over `[-1, 1]`.
    psi_table: Vec<TablePoint>,
}

fn resolved_thresholds(config: &Config) -> Result<Thresholds> {
    let mut thresholds = certifier::resolve_thresholds(
        &config.params,
        &config.strip,
        &config.weight,
        config.threshold_spec()?,
    )?;
    // When the configuration quotes manual values but another source is
    // selected, record how those quotes compare to the computed values.
    certifier::attach_reference_thresholds(&mut thresholds, config.manual_m, config.manual_big_m);
    Ok(thresholds)
}

/// The bounds report as rendered JSON: regime data, cone constant,
/// thresholds with provenance and cross-checks, and the envelope tables.
pub fn bounds_json(config: &Config, timestamp: Option<u64>) -> Result<String> {
    let params = &config.params;
    let strip = &config.strip;
    let zeta = params.zeta();

    let beta = match Regime::of(zeta)? {
        Regime::SmallAngle => None,
        Regime::LargeAngle => Some(bounds::beta_root(zeta)?),
    };
    let cone_constant = bounds::cone_constant(params, strip)?;
    let thresholds = resolved_thresholds(config)?;

    let ys = grid_points(-1.0, 1.0, config.output_grid);
    let mut phi_table = Vec::with_capacity(ys.len());
    let mut psi_table = Vec::with_capacity(ys.len());
    for &y in &ys {
        phi_table.push(TablePoint {
            y,
            value: bounds::phi_upper(params, y)?,
        });
        psi_table.push(TablePoint {
            y,
            value: bounds::psi_lower(params, strip, y)?,
        });
    }

    let report = Report {
        config_hash: config.hash.clone(),
        timestamp,
        threshold_source: thresholds.source,
        body: BoundsReport {
            half_period: params.half_period(),
            omega: params.omega(),
            zeta,
            beta,
            cone_constant,
            m_source: thresholds.source,
            m: thresholds.m,
            big_m_source: thresholds.source,
            big_m: thresholds.big_m,
            oracle_m: thresholds.oracle_m,
            oracle_big_m: thresholds.oracle_big_m,
            threshold_discrepancies: thresholds.discrepancies,
            phi_table,
            psi_table,
        },
    };
    render_json(&report)
}

fn cmd_bounds(config: &Config, out: Option<&Path>, timestamp: Option<u64>) -> Result<i32> {
    emit_text(out, &bounds_json(config, timestamp)?)?;
    Ok(0)
}

/// The certificate as rendered JSON, together with the process exit code
/// (0 for a non-empty certificate, the empty-certificate code otherwise).
pub fn certify_json(config: &Config, timestamp: Option<u64>) -> Result<(String, i32)> {
    let certificate = certifier::certify(&CertificationInput {
        params: &config.params,
        strip: &config.strip,
        cone: config.cone,
        weight: &config.weight,
        nonlinearity: &config.nonlinearity,
        radii: &config.radii,
        thresholds: config.threshold_spec()?,
        epsilon: config.epsilon,
        reference_m: config.manual_m,
        reference_big_m: config.manual_big_m,
    })?;
    let exit = if certificate.solution_count == 0 {
        EXIT_EMPTY_CERTIFICATE
    } else {
        0
    };
    let report = Report {
        config_hash: config.hash.clone(),
        timestamp,
        threshold_source: certificate.thresholds.source,
        body: certificate,
    };
    Ok((render_json(&report)?, exit))
}

fn cmd_certify(config: &Config, out: Option<&Path>, timestamp: Option<u64>) -> Result<i32> {
    let (json, exit) = certify_json(config, timestamp)?;
    emit_text(out, &json)?;
    if exit == EXIT_EMPTY_CERTIFICATE {
        eprintln!("certificate is empty: no ladder among the satisfied conditions");
    }
    Ok(exit)
}

#[derive(Debug, Serialize)]
struct SolveDiagnostics {
    nodes: usize,
    /// Constant initial profile the iteration started from.
    initial: f64,
    converged: bool,
    diverged: bool,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ode_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    periodicity_gap: Option<f64>,
    /// Cone margin of the solution (non-negative means inside the cone).
    #[serde(skip_serializing_if = "Option::is_none")]
    cone_margin: Option<f64>,
    /// Details when the iterate blew past the divergence ceiling.
    #[serde(skip_serializing_if = "Option::is_none")]
    divergence: Option<DivergenceInfo>,
}

#[derive(Debug, Serialize)]
struct DivergenceInfo {
    norm: f64,
    ceiling: f64,
}

/// Everything one solve run produces: the diagnostics report, the final
/// nodal profile when the iteration finished (divergence aborts without
/// one), a human-readable note for non-clean exits, and the exit code.
pub struct SolveRun {
    /// Rendered diagnostics JSON.
    pub report: String,
    /// `(nodes, values)` of the final iterate.
    pub profile: Option<(Vec<f64>, Vec<f64>)>,
    /// Stderr-bound explanation when the run did not converge.
    pub note: Option<String>,
    /// 0 on convergence, the no-convergence code otherwise.
    pub exit: i32,
}

/// Runs the configured Picard iteration and packages the outcome; only
/// errors other than divergence propagate as `Err`.
pub fn run_solve(config: &Config, timestamp: Option<u64>) -> Result<SolveRun> {
    let params = &config.params;
    let grid = SymmetricGrid::new(params, config.solver.nodes)?;
    let shifted = config.nonlinearity.shift_to_f(params.omega());
    let initial = config
        .solver
        .initial
        .unwrap_or_else(|| 1.0 / params.omega());
    let seed = vec![initial; grid.len()];
    let threshold_source = resolved_thresholds(config)?.source;

    match solver::picard_solve(
        params,
        &grid,
        &config.weight,
        &shifted,
        &seed,
        &config.solver.options,
    ) {
        Ok(solution) => {
            let cone_constant = bounds::cone_constant(params, &config.strip)?;
            let margin = solver::cone_membership(&solution, &config.strip, cone_constant);
            let n = solution.values.len();
            let periodicity_gap = (solution.values[0] - solution.values[n - 1]).abs();
            let report = Report {
                config_hash: config.hash.clone(),
                timestamp,
                threshold_source,
                body: SolveDiagnostics {
                    nodes: grid.len(),
                    initial,
                    converged: solution.converged,
                    diverged: false,
                    iterations: solution.iterations,
                    residual: Some(solution.residual),
                    ode_defect: Some(solution.ode_defect),
                    periodicity_gap: Some(periodicity_gap),
                    cone_margin: Some(margin),
                    divergence: None,
                },
            };
            let (note, exit) = if solution.converged {
                (None, 0)
            } else {
                (
                    Some(format!(
                        "solver did not converge within {} iterations (residual {})",
                        solution.iterations, solution.residual
                    )),
                    EXIT_NO_CONVERGENCE,
                )
            };
            Ok(SolveRun {
                report: render_json(&report)?,
                profile: Some((grid.nodes().to_vec(), solution.values)),
                note,
                exit,
            })
        }
        Err(Error::Diverged {
            iteration,
            norm,
            ceiling,
        }) => {
            let report = Report {
                config_hash: config.hash.clone(),
                timestamp,
                threshold_source,
                body: SolveDiagnostics {
                    nodes: grid.len(),
                    initial,
                    converged: false,
                    diverged: true,
                    iterations: iteration,
                    residual: None,
                    ode_defect: None,
                    periodicity_gap: None,
                    cone_margin: None,
                    divergence: Some(DivergenceInfo { norm, ceiling }),
                },
            };
            Ok(SolveRun {
                report: render_json(&report)?,
                profile: None,
                note: Some(format!(
                    "solver diverged at iteration {iteration}: sup-norm {norm} exceeded {ceiling}"
                )),
                exit: EXIT_NO_CONVERGENCE,
            })
        }
        Err(other) => Err(other),
    }
}

fn cmd_solve(config: &Config, out: Option<&Path>, timestamp: Option<u64>) -> Result<i32> {
    let run = run_solve(config, timestamp)?;
    if let Some((nodes, values)) = &run.profile {
        let mut csv = String::with_capacity(nodes.len() * 48);
        csv.push_str("t,u\n");
        for (t, u) in nodes.iter().zip(values) {
            let _ = writeln!(csv, "{},{}", csv_number(*t), csv_number(*u));
        }
        emit_file(out, "solution.csv", &csv)?;
    }
    emit_text(None, &run.report)?;
    if let Some(note) = &run.note {
        eprintln!("{note}");
    }
    Ok(run.exit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_numbers_carry_seventeen_significant_digits() {
        assert_eq!(csv_number(1.0), "1.0000000000000000e0");
        assert_eq!(csv_number(-0.25), "-2.5000000000000000e-1");
        let repr = csv_number(std::f64::consts::PI);
        assert_eq!(repr.parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn grid_points_cover_the_interval_and_degenerate_gracefully() {
        let points = grid_points(-2.0, 2.0, 5);
        assert_eq!(points, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(grid_points(-2.0, 2.0, 1), vec![0.0]);
    }

    #[test]
    fn error_exit_codes_follow_the_contract() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code_for(&Error::Domain("x".into())), EXIT_CONFIG);
        assert_eq!(
            exit_code_for(&Error::Hypothesis("x".into())),
            EXIT_HYPOTHESIS
        );
        assert_eq!(
            exit_code_for(&Error::Diverged {
                iteration: 3,
                norm: 1e9,
                ceiling: 1e8
            }),
            EXIT_NO_CONVERGENCE
        );
    }
}
