//! Command-line front end: construct a potential family from a scenario
//! file, then verify it, trace a trajectory, or scan its defining residual.
//!
//! `verify` always scans the defining residual; conservation is checked
//! whenever the family carries a closed-form invariant, the reduced
//! evolution law whenever the family carries one and an initial state is
//! known, and the remaining checks when the scenario requests them.
//!
//! Exit codes: 0 — all checks passed; 1 — a check failed or the scan had
//! no evaluatable points; 2 — bad configuration or a hard numerical error.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};

use foliate::{
    abel_characteristic_check, drift_check, integrate, inverse_roundtrip, residual_scan,
    riccati_consistency, sample_states, Error, GridSpec, PhaseState,
};

use crate::config::{Built, ScenarioConfig};
use crate::output::{
    fmt_f64, residual_csv, slug, write_json, CheckSummary, Csv, ResidualStats, ScanSummary,
    TrajectorySummary, VerifySummary,
};

#[derive(Parser)]
#[command(
    name = "foliate",
    version,
    about = "Construct and verify compatible vector fields for one-dimensional time-dependent systems"
)]
struct Cli {
    /// Seed for sampled initial conditions and random states
    /// (default: the scenario's `seed`, then 42).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for CSV/JSON artifacts (default: the scenario's `out_dir`,
    /// then $FOLIATE_OUT, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's verification checks.
    Verify { config: PathBuf },

    /// Integrate one trajectory and write it as CSV.
    Trajectory {
        config: PathBuf,
        /// Initial position (overrides the scenario's [trajectory] table).
        #[arg(long)]
        q0: Option<f64>,
        /// Initial momentum (overrides the scenario's [trajectory] table).
        #[arg(long)]
        p0: Option<f64>,
        /// Start time (default: scenario value, then the window start).
        #[arg(long)]
        t0: Option<f64>,
        /// End time (default: scenario value, then the window end).
        #[arg(long)]
        t_end: Option<f64>,
    },

    /// Evaluate the defining residual on a lattice and report percentiles.
    Scan { config: PathBuf },
}

fn main() {
    match run() {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            // A scan whose every point fell outside the domain is a verdict
            // about the scenario, not a tooling fault.
            let code = match err.downcast_ref::<Error>() {
                Some(Error::DegenerateScan { .. }) => 1,
                _ => 2,
            };
            std::process::exit(code);
        }
    }
}

fn run() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    match &cli.command {
        Command::Verify { config } => {
            let (cfg, built) = load_and_build(config)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(42);
            let out_dir = resolve_out(&cli.out, &cfg)?;
            cmd_verify(&cfg, &built, seed, &out_dir)
        }
        Command::Trajectory {
            config,
            q0,
            p0,
            t0,
            t_end,
        } => {
            let (cfg, built) = load_and_build(config)?;
            let out_dir = resolve_out(&cli.out, &cfg)?;
            cmd_trajectory(&cfg, &built, *q0, *p0, *t0, *t_end, &out_dir)
        }
        Command::Scan { config } => {
            let (cfg, built) = load_and_build(config)?;
            let out_dir = resolve_out(&cli.out, &cfg)?;
            cmd_scan(&cfg, &built, &out_dir)
        }
    }
}

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn load_and_build(path: &Path) -> anyhow::Result<(ScenarioConfig, Built)> {
    let cfg = config::load(path)?;
    let built = cfg
        .build()
        .with_context(|| format!("constructing scenario '{}'", cfg.name))?;
    Ok((cfg, built))
}

fn resolve_out(flag: &Option<PathBuf>, cfg: &ScenarioConfig) -> anyhow::Result<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("FOLIATE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

/// The packaged family, for checks that need its auxiliary integrals or
/// window-aware chart data; `inverse` scenarios carry none.
fn family_of<'a>(built: &'a Built, check: &str) -> Result<&'a foliate::FamilyInstance, Error> {
    built.instance.as_ref().ok_or_else(|| {
        Error::UnsupportedCheck(format!(
            "check '{check}' needs a packaged family, not an inverse construction"
        ))
    })
}

fn cmd_verify(
    cfg: &ScenarioConfig,
    built: &Built,
    seed: u64,
    out_dir: &Path,
) -> anyhow::Result<bool> {
    let started = Instant::now();
    let stem = slug(&cfg.name);
    let icfg = cfg.integrator.resolve();
    let mut checks: Vec<CheckSummary> = Vec::new();
    let mut artifacts: Vec<String> = Vec::new();

    // The defining residual is scanned unconditionally; the scenario may
    // reshape the lattice or move the threshold.
    {
        let (grid, threshold) = match &cfg.checks.residual_scan {
            Some(scan) => (scan.grid(built.window), scan.threshold),
            None => (GridSpec::standard(built.window), 1e-6),
        };
        let report = residual_scan(&built.potential, &built.compat, &grid, threshold)?;
        let csv_name = format!("{stem}.residuals.csv");
        residual_csv(&grid, &report).write(&out_dir.join(&csv_name))?;
        artifacts.push(csv_name);
        println!(
            "residual_scan: {} (max {:.3e}, threshold {:.1e}, {} included / {} excluded)",
            pass_str(report.pass),
            report.max_abs,
            report.threshold,
            report.included,
            report.excluded
        );
        checks.push(CheckSummary {
            check: "residual_scan",
            pass: report.pass,
            threshold: report.threshold,
            measured: report.max_abs,
            included: report.included,
            excluded: report.excluded,
            detail: format!(
                "max |residual| {} over {} lattice points",
                fmt_f64(report.max_abs),
                report.included
            ),
            residual_stats: Some(ResidualStats {
                mean_abs: report.mean_abs,
                p50: report.p50,
                p90: report.p90,
                p99: report.p99,
            }),
        });
    }

    // Conservation is checked whenever there is an invariant to conserve.
    let drift_applicable = built.instance.is_some() && built.invariant.is_some();
    if cfg.checks.drift.is_some() || drift_applicable {
        let fam = family_of(built, "drift")?;
        let d = cfg.checks.drift.clone().unwrap_or_default();
        let q_range = d.q_range.unwrap_or((0.4, 1.6));
        let p_range = d.p_range.unwrap_or((-1.5, 1.5));
        let t0 = built.window.0;
        let t_end = d.t_end.unwrap_or(built.window.1);
        let accept = |x: PhaseState| {
            built.potential.guard_ok(x.q, x.t)
                && built.compat.guard_ok(x)
                && built.invariant.as_ref().is_none_or(|j| j.guard_ok(x))
        };
        let inits = sample_states(d.runs, q_range, p_range, (t0, t0), seed, &accept)?;
        let mut csv = Csv::new(&["run", "t", "invariant", "drift_rel"]);
        let mut max_drift = 0.0_f64;
        let mut skipped = 0;
        let mut pass = true;
        for (run, init) in inits.iter().enumerate() {
            let report = drift_check(fam, *init, t_end, &icfg, d.threshold)?;
            for (t, value, rel) in &report.series {
                csv.row(&[run.to_string(), fmt_f64(*t), fmt_f64(*value), fmt_f64(*rel)]);
            }
            max_drift = max_drift.max(report.max_drift_rel);
            skipped += report.skipped;
            pass &= report.pass;
        }
        let csv_name = format!("{stem}.drift.csv");
        csv.write(&out_dir.join(&csv_name))?;
        artifacts.push(csv_name);
        println!(
            "drift: {} (max relative drift {:.3e} over {} runs, threshold {:.1e})",
            pass_str(pass),
            max_drift,
            inits.len(),
            d.threshold
        );
        checks.push(CheckSummary {
            check: "drift",
            pass,
            threshold: d.threshold,
            measured: max_drift,
            included: inits.len(),
            excluded: skipped,
            detail: format!(
                "max relative drift {} across {} seeded trajectories to t = {}",
                fmt_f64(max_drift),
                inits.len(),
                t_end
            ),
            residual_stats: None,
        });
    }

    // The reduced evolution law is checked whenever the family carries one
    // and an initial state is known — from [checks.riccati] or, failing
    // that, from the scenario's [trajectory] defaults.
    let law_available = built.instance.as_ref().is_some_and(|f| f.riccati.is_some());
    let law_params = match (&cfg.checks.riccati, &cfg.trajectory) {
        (Some(r), _) => Some((r.threshold, r.q0, r.p0, r.t0, r.t_end)),
        (None, Some(t)) if law_available => Some((1e-5, t.q0, t.p0, t.t0, t.t_end)),
        _ => None,
    };
    if let Some((threshold, q0, p0, t0, t_end)) = law_params {
        let fam = family_of(built, "riccati")?;
        let t0 = t0.unwrap_or(built.window.0);
        let t_end = t_end.unwrap_or(built.window.1);
        let init = PhaseState::new(q0, p0, t0);
        let report = riccati_consistency(fam, init, t_end, &icfg, threshold)?;
        println!(
            "riccati: {} (max defect {:.3e} at {} samples, threshold {:.1e})",
            pass_str(report.pass),
            report.max_abs_defect,
            report.samples.len(),
            report.threshold
        );
        checks.push(CheckSummary {
            check: "riccati",
            pass: report.pass,
            threshold: report.threshold,
            measured: report.max_abs_defect,
            included: report.samples.len(),
            excluded: report.skipped,
            detail: format!(
                "max |df/dt - rhs| {} along the trajectory from ({q0}, {p0})",
                fmt_f64(report.max_abs_defect)
            ),
            residual_stats: None,
        });
    }

    if let Some(rt) = &cfg.checks.roundtrip {
        let j = built.invariant.as_ref().ok_or_else(|| {
            Error::UnsupportedCheck(format!(
                "scenario '{}' carries no invariant to round-trip",
                cfg.name
            ))
        })?;
        let q_range = rt.q_range.unwrap_or((-2.0, 2.0));
        let p_range = rt.p_range.unwrap_or((-2.0, 2.0));
        let accept = |x: PhaseState| built.potential.guard_ok(x.q, x.t) && j.guard_ok(x);
        let states = sample_states(rt.samples, q_range, p_range, built.window, seed, &accept)?;
        let report = inverse_roundtrip(&built.potential, j, &states, rt.threshold)?;
        let measured = report.max_basic_residual.max(report.max_tangency);
        println!(
            "roundtrip: {} (max residual {:.3e}, max tangency {:.3e}, {} checked / {} excluded, threshold {:.1e})",
            pass_str(report.pass),
            report.max_basic_residual,
            report.max_tangency,
            report.checked,
            report.excluded,
            report.threshold
        );
        checks.push(CheckSummary {
            check: "roundtrip",
            pass: report.pass,
            threshold: report.threshold,
            measured,
            included: report.checked,
            excluded: report.excluded,
            detail: format!(
                "rebuilt coefficient: max residual {}, max tangency {}",
                fmt_f64(report.max_basic_residual),
                fmt_f64(report.max_tangency)
            ),
            residual_stats: None,
        });
    }

    if let Some(ch) = &cfg.checks.characteristic {
        let fam = family_of(built, "characteristic")?;
        let report = abel_characteristic_check(fam, ch.t, ch.q_bar, ch.p_bar, ch.threshold)?;
        println!(
            "characteristic: {} (max slope difference {:.3e} at {} samples, threshold {:.1e})",
            pass_str(report.pass),
            report.max_abs_diff,
            report.samples.len(),
            report.threshold
        );
        checks.push(CheckSummary {
            check: "characteristic",
            pass: report.pass,
            threshold: report.threshold,
            measured: report.max_abs_diff,
            included: report.samples.len(),
            excluded: report.skipped,
            detail: format!(
                "frozen-time slope field vs traced curve at t = {}",
                report.t
            ),
            residual_stats: None,
        });
    }

    let pass = checks.iter().all(|c| c.pass);
    let json_name = format!("{stem}.verify.json");
    artifacts.push(json_name.clone());
    let summary = VerifySummary {
        name: cfg.name.clone(),
        kind: built.kind,
        seed,
        pass,
        checks,
        artifacts,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&out_dir.join(&json_name), &summary)?;
    println!("verify {}: {}", cfg.name, pass_str(pass));
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_trajectory(
    cfg: &ScenarioConfig,
    built: &Built,
    q0: Option<f64>,
    p0: Option<f64>,
    t0: Option<f64>,
    t_end: Option<f64>,
    out_dir: &Path,
) -> anyhow::Result<bool> {
    let stem = slug(&cfg.name);
    let defaults = cfg.trajectory.as_ref();
    let q0 = q0.or(defaults.map(|d| d.q0)).ok_or_else(|| {
        Error::InvalidArgument("initial position: pass --q0 or set [trajectory] q0".into())
    })?;
    let p0 = p0.or(defaults.map(|d| d.p0)).ok_or_else(|| {
        Error::InvalidArgument("initial momentum: pass --p0 or set [trajectory] p0".into())
    })?;
    let t0 = t0.or(defaults.and_then(|d| d.t0)).unwrap_or(built.window.0);
    let t_end = t_end
        .or(defaults.and_then(|d| d.t_end))
        .unwrap_or(built.window.1);
    let icfg = cfg.integrator.resolve();
    let aux: &[foliate::AuxOde] = built
        .instance
        .as_ref()
        .map_or(&[], |f| f.aux_odes.as_slice());

    let traj = integrate(
        &built.potential,
        PhaseState::new(q0, p0, t0),
        t_end,
        &icfg,
        aux,
    )?;

    let mut header: Vec<&str> = vec!["t", "q", "p"];
    if built.invariant.is_some() {
        header.push("invariant");
        header.push("drift_rel");
    }
    header.extend(traj.aux_names.iter().copied());
    let mut csv = Csv::new(&header);
    let mut inv_first: Option<f64> = None;
    let mut inv_last: Option<f64> = None;
    let mut max_drift: Option<f64> = None;
    for i in 0..traj.len() {
        let x = traj.state(i);
        let mut cells = vec![fmt_f64(traj.times()[i]), fmt_f64(x.q), fmt_f64(x.p)];
        if let Some(j) = &built.invariant {
            // A guard hit mid-row is recorded as NaN rather than aborting the
            // whole table; drift is tracked over the evaluatable rows only.
            let value = j.value(x).unwrap_or(f64::NAN);
            let rel = if value.is_finite() {
                let first = *inv_first.get_or_insert(value);
                inv_last = Some(value);
                let rel = (value - first).abs() / first.abs().max(1.0);
                max_drift = Some(max_drift.map_or(rel, |m| m.max(rel)));
                rel
            } else {
                f64::NAN
            };
            cells.push(fmt_f64(value));
            cells.push(fmt_f64(rel));
        }
        for a in traj.aux(i) {
            cells.push(fmt_f64(*a));
        }
        csv.row(&cells);
    }
    csv.write(&out_dir.join(format!("{stem}.trajectory.csv")))?;

    let last = traj.state(traj.len() - 1);
    let summary = TrajectorySummary {
        name: cfg.name.clone(),
        kind: built.kind,
        q0,
        p0,
        t0,
        t_end_requested: t_end,
        t_final: traj.t_end(),
        q_final: last.q,
        p_final: last.p,
        steps_accepted: traj.accepted,
        steps_rejected: traj.rejected,
        guard_exit: traj.guard_exit,
        invariant_initial: inv_first,
        invariant_final: inv_last,
        max_drift_rel: max_drift,
    };
    write_json(&out_dir.join(format!("{stem}.trajectory.json")), &summary)?;

    println!(
        "trajectory {}: reached t = {:.6} in {} accepted steps ({} rejected)",
        cfg.name,
        traj.t_end(),
        traj.accepted,
        traj.rejected
    );
    if let Some(te) = traj.guard_exit {
        println!("  stopped at the domain boundary near t = {te:.6}");
    }
    Ok(true)
}

fn cmd_scan(cfg: &ScenarioConfig, built: &Built, out_dir: &Path) -> anyhow::Result<bool> {
    let stem = slug(&cfg.name);
    let (grid, threshold) = match &cfg.checks.residual_scan {
        Some(scan) => (scan.grid(built.window), scan.threshold),
        None => (GridSpec::standard(built.window), 1e-6),
    };
    let report = residual_scan(&built.potential, &built.compat, &grid, threshold)?;

    residual_csv(&grid, &report).write(&out_dir.join(format!("{stem}.residuals.csv")))?;

    let summary = ScanSummary {
        name: cfg.name.clone(),
        kind: built.kind,
        pass: report.pass,
        threshold: report.threshold,
        max_abs: report.max_abs,
        mean_abs: report.mean_abs,
        p50: report.p50,
        p90: report.p90,
        p99: report.p99,
        included: report.included,
        excluded: report.excluded,
    };
    write_json(&out_dir.join(format!("{stem}.scan.json")), &summary)?;

    println!(
        "scan {}: {} (max {:.3e}, mean {:.3e}, p99 {:.3e}, p50 {:.3e}, {} included / {} excluded)",
        cfg.name,
        pass_str(report.pass),
        report.max_abs,
        report.mean_abs,
        report.p99,
        report.p50,
        report.included,
        report.excluded
    );
    Ok(report.pass)
}
