//! End-to-end tests of the `refleq` binary: exit-code contract, file
//! artifacts, and report envelopes, all driven through a real process.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const REFERENCE_H: &str = "1/(2+(t-1)^2) + u^2/5 + 2*u + 1/(1+7*v^2) + 7";

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_refleq"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("refleq-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// The reference problem; `thresholds` appends an optional section.
fn reference_toml(thresholds: &str) -> String {
    format!(
        r#"[problem]
half_period = 1.0
omega = 1.5
h = "{REFERENCE_H}"

[strip]
a = 0.48

[cone]
variant = "non-negative"

[[radii]]
rho = 1.0
kind = "index-1"

[[radii]]
rho = 2.0
kind = "index-0"
{thresholds}"#
    )
}

fn manual_thresholds() -> String {
    "\n[thresholds]\nsource = \"manual\"\nmanual_m = 11.5009\nmanual_M = 6.58486\n".into()
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn file_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// Parses rows of a CSV file emitted by the binary, checking the header.
fn csv_rows(path: &Path, header: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    lines
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().unwrap())
                .collect()
        })
        .collect()
}

#[test]
fn certify_reference_verdict_and_envelope() {
    let dir = scratch("certify-manual");
    let config = write_config(&dir, "reference.toml", &reference_toml(&manual_thresholds()));
    let out = dir.join("certificate.json");
    let output = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let report = file_json(&out);
    assert_eq!(report["ladder"], "S2");
    assert_eq!(report["solution_count"], 1);
    assert_eq!(report["threshold_source"], "manual-override");
    let hash = report["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(report["timestamp"].is_u64(), "timestamp present by default");
    let flags: Vec<&str> = report["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert!(flags.contains(&"non-rigorous-f-bounds"));
    assert!(flags.contains(&"not-self-contained"));
    let conditions = report["conditions"].as_array().unwrap();
    assert_eq!(conditions.len(), 2);
    assert_eq!(conditions[0]["kind"], "index-1");
    assert_eq!(conditions[1]["kind"], "index-0");
    assert!(conditions[1]["strip_edge_bounds"]["at_strip_end"]["value"]
        .as_f64()
        .unwrap()
        .is_finite());
}

#[test]
fn certify_thresholds_supplied_by_flags() {
    let dir = scratch("certify-flags");
    let config = write_config(&dir, "bare.toml", &reference_toml(""));
    let out = dir.join("certificate.json");
    let output = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threshold-source",
        "manual",
        "--manual-m",
        "11.5009",
        "--manual-M",
        "6.58486",
    ]);
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report = file_json(&out);
    assert_eq!(report["ladder"], "S2");
    assert_eq!(report["thresholds"]["m"], 11.5009);
    assert_eq!(report["thresholds"]["M"], 6.58486);
}

#[test]
fn certify_oracle_thresholds_exit_four_with_report() {
    let dir = scratch("certify-oracle");
    let config = write_config(&dir, "reference.toml", &reference_toml(&manual_thresholds()));
    let out = dir.join("certificate.json");
    let output = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threshold-source",
        "oracle",
    ]);
    assert_eq!(output.status.code(), Some(4), "empty certificate exit code");
    let report = file_json(&out);
    assert_eq!(report["solution_count"], 0);
    assert!(report["ladder"].is_null());
    assert_eq!(report["threshold_source"], "quadrature-oracle");
    // The config-quoted manual pair is cross-checked against the oracles.
    let discrepancies = report["thresholds"]["discrepancies"].as_array().unwrap();
    assert_eq!(discrepancies.len(), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("no ladder"),
        "stderr should explain the empty certificate: {stderr}"
    );
}

#[test]
fn bounds_report_envelopes_and_tables() {
    let dir = scratch("bounds");
    let config = write_config(&dir, "reference.toml", &reference_toml(&manual_thresholds()));
    let out = dir.join("bounds.json");
    let output = run(&[
        "bounds",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--grid",
        "11",
        "--no-timestamp",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let report = file_json(&out);
    assert!(report.get("timestamp").is_none());
    assert_eq!(report["omega"], 1.5);
    assert_eq!(report["zeta"], 1.5);
    let beta = report["beta"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&beta));
    let c = report["cone_constant"].as_f64().unwrap();
    assert!((c - 3.53538e-4).abs() <= 1e-8);
    assert_eq!(report["m_source"], "manual-override");
    assert_eq!(report["m"], 11.5009);
    assert_eq!(report["M"], 6.58486);
    // Manual thresholds always carry their oracle references, and here they
    // disagree, so the discrepancy records must be present.
    assert!(report["oracle_m"].as_f64().unwrap() > 1.0);
    assert!(report["oracle_M"].as_f64().unwrap() > 1e3);
    assert_eq!(
        report["threshold_discrepancies"].as_array().unwrap().len(),
        2
    );
    let phi = report["phi_table"].as_array().unwrap();
    let psi = report["psi_table"].as_array().unwrap();
    assert_eq!(phi.len(), 11);
    assert_eq!(psi.len(), 11);
    // Φ(±1) = cos(π/4) at these parameters.
    let first = phi[0]["value"].as_f64().unwrap();
    let last = phi[10]["value"].as_f64().unwrap();
    assert!((first - 0.7071067811865476).abs() <= 1e-12);
    assert!((last - 0.7071067811865476).abs() <= 1e-12);
}

#[test]
fn solve_constant_problem_csv_and_diagnostics() {
    let dir = scratch("solve-constant");
    // Shifting h = 1 − ωv by ωv gives f ≡ 1, so the solution is 1/ω.
    let config = write_config(
        &dir,
        "constant.toml",
        r#"[problem]
half_period = 1.0
omega = 1.5
h = "1 - 1.5*v"

[strip]
a = 0.48
"#,
    );
    let out = dir.join("solution.csv");
    let output = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--nodes",
        "101",
        "--no-timestamp",
    ]);
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let diagnostics = stdout_json(&output);
    assert_eq!(diagnostics["nodes"], 101);
    assert_eq!(diagnostics["converged"], true);
    assert_eq!(diagnostics["diverged"], false);
    assert!(diagnostics["residual"].as_f64().unwrap() <= 1e-9);
    assert!(diagnostics["periodicity_gap"].as_f64().unwrap() <= 1e-9);
    assert!(diagnostics["cone_margin"].as_f64().unwrap() > 0.0);
    let rows = csv_rows(&out, "t,u");
    assert_eq!(rows.len(), 101);
    assert!((rows[0][0] + 1.0).abs() <= 1e-15, "first node at -T");
    assert!((rows[100][0] - 1.0).abs() <= 1e-15, "last node at +T");
    for row in &rows {
        assert!((row[1] - 1.0 / 1.5).abs() <= 1e-8, "u({}) = {}", row[0], row[1]);
    }
}

#[test]
fn solve_reference_problem_diverges_with_diagnostics() {
    let dir = scratch("solve-diverging");
    let config = write_config(&dir, "reference.toml", &reference_toml(&manual_thresholds()));
    let out = dir.join("solution.csv");
    let output = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(output.status.code(), Some(5), "divergence exit code");
    let diagnostics = stdout_json(&output);
    assert_eq!(diagnostics["diverged"], true);
    assert_eq!(diagnostics["converged"], false);
    let norm = diagnostics["divergence"]["norm"].as_f64().unwrap();
    let ceiling = diagnostics["divergence"]["ceiling"].as_f64().unwrap();
    assert!(norm > ceiling);
    assert!(!out.exists(), "no solution file on divergence");
    assert!(String::from_utf8_lossy(&output.stderr).contains("diverged"));
}

#[test]
fn kernel_degenerate_grid_emits_single_midpoint_row() {
    let dir = scratch("kernel-one");
    let config = write_config(&dir, "reference.toml", &reference_toml(&manual_thresholds()));
    let out = dir.join("kernel.csv");
    let output = run(&[
        "kernel",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--grid",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let rows = csv_rows(&out, "t,s,k");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][1], 0.0);
    assert!(rows[0][2].is_finite());
}

#[test]
fn kernel_sign_patterns_follow_the_regime() {
    let dir = scratch("kernel-signs");
    let small = write_config(
        &dir,
        "small.toml",
        r#"[problem]
half_period = 1.0
omega = 0.5
h = "1"

[strip]
a = 0.25
"#,
    );
    let out_small = dir.join("kernel-small.csv");
    let output = run(&[
        "kernel",
        "--config",
        small.to_str().unwrap(),
        "--out",
        out_small.to_str().unwrap(),
        "--grid",
        "51",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let rows = csv_rows(&out_small, "t,s,k");
    assert_eq!(rows.len(), 51 * 51);
    assert!(
        rows.iter().all(|row| row[2] > 0.0),
        "small-angle kernel must be positive everywhere"
    );

    let large = write_config(&dir, "large.toml", &reference_toml(&manual_thresholds()));
    let out_large = dir.join("kernel-large.csv");
    let output = run(&[
        "kernel",
        "--config",
        large.to_str().unwrap(),
        "--out",
        out_large.to_str().unwrap(),
        "--grid",
        "51",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let rows = csv_rows(&out_large, "t,s,k");
    assert!(rows.iter().any(|row| row[2] > 0.0));
    assert!(
        rows.iter().any(|row| row[2] < 0.0),
        "large-angle kernel must change sign"
    );
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let output = run(&["bounds", "--config", "/nonexistent/refleq.toml"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&output.stderr).is_empty());
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = scratch("bad-toml");
    let config = write_config(&dir, "broken.toml", "[problem\nomega = ");
    let output = run(&["bounds", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("config"));
}

#[test]
fn unknown_threshold_source_is_a_usage_error() {
    let dir = scratch("bad-source");
    let config = write_config(&dir, "reference.toml", &reference_toml(&manual_thresholds()));
    let output = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--threshold-source",
        "sorcery",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("sorcery"));
}

#[test]
fn signed_weight_is_a_hypothesis_error() {
    let dir = scratch("signed-weight");
    let config = write_config(
        &dir,
        "signed.toml",
        r#"[problem]
half_period = 1.0
omega = 1.5
h = "1"
g = "s"

[strip]
a = 0.48
"#,
    );
    let output = run(&["bounds", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3), "hypothesis exit code");
    assert!(String::from_utf8_lossy(&output.stderr).contains("hypothesis"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let output = run(&[]);
    assert_eq!(output.status.code(), Some(2));
}
