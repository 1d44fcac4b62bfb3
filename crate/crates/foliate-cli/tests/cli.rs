//! End-to-end tests that drive the compiled binary: exit codes, artifact
//! determinism, and the documented failure modes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foliate"))
        .args(args)
        .arg("--out")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn bundled_scenarios_verify_clean() {
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "forced_oscillator.toml",
        "quadratic.toml",
        "giacomini.toml",
        "inverse_quartic.toml",
    ] {
        let out = run(&["verify", scenario(name).to_str().unwrap()], dir.path());
        assert_eq!(code(&out), 0, "{name}: {}{}", stdout(&out), stderr(&out));
    }
}

#[test]
fn printed_variant_is_the_documented_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["verify", scenario("sarlet_printed.toml").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 1, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn rejected_clock_shift_names_the_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        r#"
name = "bad-clock-shift"
window = [0.0, 2.0]

[family]
kind = "abel"
rho = { kind = "constant", value = 1.0 }
k = 0.0
u = { kind = "constant", value = 0.0 }

[checks.residual_scan]
threshold = 1e-6
"#,
    )
    .unwrap();
    let out = run(&["verify", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 2, "{}{}", stdout(&out), stderr(&out));
    assert!(stderr(&out).contains('k'), "stderr: {}", stderr(&out));
}

#[test]
fn unreachable_threshold_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    fs::write(
        &cfg,
        r#"
name = "impossibly-strict"
window = [0.0, 2.0]

[family]
kind = "quadratic"
rho = { kind = "trigonometric", a = 2.0, b = 1.0, omega = 1.0, phi = 0.0 }
sigma = { kind = "constant", value = 0.0 }
u = { kind = "polynomial", coeffs = [0.0, 0.0, 0.5] }

[checks.residual_scan]
threshold = 1e-17
"#,
    )
    .unwrap();
    let out = run(&["verify", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 1, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("residual_scan: FAIL"));
}

#[test]
fn guarded_start_is_a_hard_error() {
    // The singular family's domain is q > sigma; starting below it cannot
    // even evaluate the right-hand side.
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "trajectory",
            scenario("sarlet.toml").to_str().unwrap(),
            "--q0",
            "-1.0",
            "--p0",
            "0.0",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2, "{}{}", stdout(&out), stderr(&out));
}

#[test]
fn fully_guarded_lattice_exits_one() {
    // A time-varying gamma restricts the domain to q > sigma, and every
    // lattice point sits below that line: the scan has no evaluatable
    // samples — a verdict about the scenario, reported as failure.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(
        &cfg,
        r#"
name = "empty-lattice"
window = [0.0, 2.0]

[family]
kind = "sarlet"
rho = { kind = "trigonometric", a = 2.0, b = 1.0, omega = 1.0, phi = 0.0 }
sigma = { kind = "trigonometric", a = 0.0, b = 1.0, omega = 1.0, phi = -1.5707963267948966 }
gamma = { kind = "trigonometric", a = 1.0, b = 0.5, omega = 1.0, phi = 0.0 }

[checks.residual_scan]
threshold = 1e-8
q = [-2.0, -1.0, 5]
"#,
    )
    .unwrap();
    let out = run(&["scan", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 1, "{}{}", stdout(&out), stderr(&out));
}

#[test]
fn missing_initial_condition_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nodefaults.toml");
    fs::write(
        &cfg,
        r#"
name = "no-defaults"
window = [0.0, 2.0]

[family]
kind = "forced_oscillator"
rho = { kind = "constant", value = 1.0 }
force = { kind = "constant", value = 0.0 }

[checks.residual_scan]
threshold = 1e-8
"#,
    )
    .unwrap();
    let out = run(&["trajectory", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 2, "{}{}", stdout(&out), stderr(&out));
    assert!(stderr(&out).contains("--q0"), "stderr: {}", stderr(&out));
}

#[test]
fn bare_scenario_runs_default_checks() {
    // With no [checks] table the residual scan still runs on the standard
    // lattice, and conservation is checked because the family carries a
    // closed-form invariant.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nochecks.toml");
    fs::write(
        &cfg,
        r#"
name = "no-checks"
window = [0.0, 2.0]

[family]
kind = "forced_oscillator"
rho = { kind = "constant", value = 1.0 }
force = { kind = "constant", value = 0.0 }
"#,
    )
    .unwrap();
    let out = run(&["verify", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("residual_scan: PASS"), "stdout: {text}");
    assert!(text.contains("drift: PASS"), "stdout: {text}");
}

#[test]
fn free_particle_reaches_the_linear_solution() {
    // Unit width and zero force make the potential vanish identically, so
    // the trajectory from (0, 1) is q = t exactly.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("free.toml");
    fs::write(
        &cfg,
        r#"
name = "free-particle"
window = [0.0, 2.0]

[family]
kind = "forced_oscillator"
rho = { kind = "constant", value = 1.0 }
force = { kind = "constant", value = 0.0 }
"#,
    )
    .unwrap();
    let out = run(
        &[
            "trajectory",
            cfg.to_str().unwrap(),
            "--q0",
            "0.0",
            "--p0",
            "1.0",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let csv = fs::read_to_string(dir.path().join("free_particle.trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,q,p,invariant,drift_rel");
    let last: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((last[0] - 2.0).abs() < 1e-12, "t = {}", last[0]);
    assert!((last[1] - 2.0).abs() < 1e-9, "q = {}", last[1]);
    assert!((last[2] - 1.0).abs() < 1e-12, "p = {}", last[2]);
}

#[test]
fn fixed_seed_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = scenario("forced_oscillator.toml");
    for dir in [a.path(), b.path()] {
        let out = run(&["verify", cfg.to_str().unwrap(), "--seed", "7"], dir);
        assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    }
    // The JSON summary records wall-clock duration, so only the CSV
    // artifacts are expected to match bit for bit.
    for artifact in [
        "forced_oscillator_breathing.residuals.csv",
        "forced_oscillator_breathing.drift.csv",
    ] {
        let bytes_a = fs::read(a.path().join(artifact)).unwrap();
        let bytes_b = fs::read(b.path().join(artifact)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{artifact} differs between runs");
    }
}

/// Width cos t with no force over [0, 1]: the potential is the unit
/// harmonic well and the invariant is p cos t + q sin t.
fn cosine_width_config(dir: &Path) -> PathBuf {
    let cfg = dir.join("cosine.toml");
    fs::write(
        &cfg,
        r#"
name = "cosine-width"
window = [0.0, 1.0]

[family]
kind = "forced_oscillator"
rho = { kind = "trigonometric", a = 0.0, b = 1.0, omega = 1.0, phi = 0.0 }
force = { kind = "constant", value = 0.0 }
"#,
    )
    .unwrap();
    cfg
}

#[test]
fn cosine_width_drift_is_below_a_hundredth_of_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cosine_width_config(dir.path());
    let out = run(&["verify", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let csv = fs::read_to_string(dir.path().join("cosine_width.drift.csv")).unwrap();
    let max_drift = csv
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(0.0_f64, f64::max);
    assert!(max_drift < 1e-8, "max drift {max_drift}");
}

#[test]
fn unit_start_annihilates_the_cosine_width_invariant() {
    // From (q, p) = (1, 0) the motion is q = cos t, p = -sin t, and
    // p cos t + q sin t vanishes on the whole trajectory.
    let dir = tempfile::tempdir().unwrap();
    let cfg = cosine_width_config(dir.path());
    let out = run(
        &[
            "trajectory",
            cfg.to_str().unwrap(),
            "--q0",
            "1.0",
            "--p0",
            "0.0",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let csv = fs::read_to_string(dir.path().join("cosine_width.trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,q,p,invariant,drift_rel");
    for line in lines {
        let invariant: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(invariant.abs() < 1e-9, "row {line}");
    }
}

#[test]
fn flat_potential_scan_is_exactly_zero() {
    // Unit width and zero force give a vanishing potential and coefficient,
    // so every lattice residual is zero to the last bit.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("flat.toml");
    fs::write(
        &cfg,
        r#"
name = "flat-potential"
window = [0.0, 2.0]

[family]
kind = "forced_oscillator"
rho = { kind = "constant", value = 1.0 }
force = { kind = "constant", value = 0.0 }
"#,
    )
    .unwrap();
    let out = run(&["scan", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let csv = fs::read_to_string(dir.path().join("flat_potential.residuals.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[4], "1", "row {line}");
        assert_eq!(cells[3].parse::<f64>().unwrap(), 0.0, "row {line}");
        rows += 1;
    }
    assert_eq!(rows, 1000);
}

#[test]
fn straddling_lattice_flags_excluded_points() {
    // A time-varying gamma restricts the domain to q > sigma; a lattice
    // straddling that line keeps the legal half and flags the rest.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("straddle.toml");
    fs::write(
        &cfg,
        r#"
name = "straddling-lattice"
window = [0.0, 2.0]

[family]
kind = "sarlet"
rho = { kind = "trigonometric", a = 2.0, b = 1.0, omega = 1.0, phi = 0.0 }
sigma = { kind = "constant", value = 0.0 }
gamma = { kind = "trigonometric", a = 1.0, b = 0.5, omega = 1.0, phi = 0.0 }

[checks.residual_scan]
threshold = 1e-8
"#,
    )
    .unwrap();
    let out = run(&["scan", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(
        stdout(&out).contains("500 included / 500 excluded"),
        "stdout: {}",
        stdout(&out)
    );
    let csv = fs::read_to_string(dir.path().join("straddling_lattice.residuals.csv")).unwrap();
    let (mut kept, mut flagged) = (0, 0);
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        match cells[4] {
            "1" => {
                assert!(cells[3].parse::<f64>().unwrap().is_finite(), "row {line}");
                kept += 1;
            }
            "0" => {
                assert_eq!(cells[3], "NaN", "row {line}");
                flagged += 1;
            }
            other => panic!("unexpected flag {other} in row {line}"),
        }
    }
    assert_eq!((kept, flagged), (500, 500));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_foliate"))
        .args(["scan", scenario("harmonic.toml").to_str().unwrap()])
        .env("FOLIATE_OUT", dir.path())
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(dir.path().join("harmonic_period.scan.json").exists());
    assert!(dir.path().join("harmonic_period.residuals.csv").exists());
}
