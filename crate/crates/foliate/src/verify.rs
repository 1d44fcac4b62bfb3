//! Numerical certification of the compatibility algebra: residual scans over
//! phase-space grids, invariant conservation along trajectories, consistency
//! of the reduced evolution laws, invariant → coefficient round-trips, and
//! frozen-time characteristic tracing for the Abel-type family.
//!
//! Every check returns a report carrying the measured extremes, the counts of
//! included and excluded sample points, the threshold it was judged against,
//! and the resulting verdict. Points falling in a guarded strip around a
//! family's singular set are excluded and counted, never silently dropped;
//! any *other* failure aborts the check. A check whose sample set is
//! entirely excluded reports that degeneracy as an error rather than
//! returning a vacuous pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::families::FamilyInstance;
use crate::fields::{
    basic_equation_residual, compatible_from_invariant, PhaseState, PotentialSpec, ScalarField,
};
use crate::numerics::{integrate, solve_ode, IntegratorConfig};

/// Number of interior sample times used by the dense-output checks.
const DEFAULT_TIME_SAMPLES: usize = 33;

/// Budget of rejected draws before rejection sampling gives up.
const MAX_SAMPLE_REJECTS: usize = 100_000;

/// A rectangular phase-space lattice: each axis is (lo, hi, count) sampled
/// inclusively, with a single-point axis collapsing to the midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub q: (f64, f64, usize),
    pub p: (f64, f64, usize),
    pub t: (f64, f64, usize),
}

impl GridSpec {
    /// The default scan lattice: 10 × 10 × 10 points covering q, p ∈ [−2, 2]
    /// and t spanning the family's trusted window.
    pub fn standard(window: (f64, f64)) -> Self {
        GridSpec {
            q: (-2.0, 2.0, 10),
            p: (-2.0, 2.0, 10),
            t: (window.0, window.1, 10),
        }
    }

    pub fn len(&self) -> usize {
        self.q.2 * self.p.2 * self.t.2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis((lo, hi, n): (f64, f64, usize), i: usize) -> f64 {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// The lattice point of a flat index (q slowest, t fastest).
    pub fn state(&self, flat: usize) -> PhaseState {
        let it = flat % self.t.2;
        let ip = (flat / self.t.2) % self.p.2;
        let iq = flat / (self.t.2 * self.p.2);
        PhaseState::new(
            Self::axis(self.q, iq),
            Self::axis(self.p, ip),
            Self::axis(self.t, it),
        )
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi, n)) in [("q", self.q), ("p", self.p), ("t", self.t)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n == 0 {
                return Err(Error::InvalidArgument(format!(
                    "grid axis {name} must be a finite ordered range with at \
                     least one point, got ({lo}, {hi}, {n})"
                )));
            }
        }
        Ok(())
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Outcome of a residual scan over a grid.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Included lattice points with their residuals, in lattice order.
    pub samples: Vec<(PhaseState, f64)>,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub included: usize,
    pub excluded: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Evaluate the defining residual u(C) + C² + V_qq on every lattice point,
/// excluding (and counting) points in guarded strips. The scan fails if
/// every point is excluded.
pub fn residual_scan(
    v: &PotentialSpec,
    c: &ScalarField,
    grid: &GridSpec,
    threshold: f64,
) -> Result<ResidualReport> {
    grid.validate()?;
    let rows: Result<Vec<Option<(PhaseState, f64)>>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.state(i);
            match basic_equation_residual(v, c, x) {
                Ok(r) => Ok(Some((x, r))),
                Err(e) if e.is_domain_exclusion() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let rows = rows?;
    let samples: Vec<(PhaseState, f64)> = rows.into_iter().flatten().collect();
    let included = samples.len();
    let excluded = grid.len() - included;
    if included == 0 {
        return Err(Error::DegenerateScan { total: grid.len() });
    }
    let mut abs: Vec<f64> = samples.iter().map(|&(_, r)| r.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let max_abs = *abs.last().unwrap();
    let mean_abs = abs.iter().sum::<f64>() / included as f64;
    Ok(ResidualReport {
        samples,
        max_abs,
        mean_abs,
        p50: quantile(&abs, 0.50),
        p90: quantile(&abs, 0.90),
        p99: quantile(&abs, 0.99),
        included,
        excluded,
        threshold,
        pass: max_abs < threshold,
    })
}

/// Conservation record of a family's invariant along one trajectory.
#[derive(Debug, Clone)]
pub struct DriftReport {
    /// (t, I(t), relative drift) at every accepted step where the invariant
    /// was evaluable.
    pub series: Vec<(f64, f64, f64)>,
    /// Invariant value at the first evaluable sample.
    pub initial: f64,
    pub max_drift_rel: f64,
    /// Accepted steps where the invariant fell in a guarded strip.
    pub skipped: usize,
    /// Set when the trajectory stopped at the potential's domain boundary.
    pub guard_exit: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

/// Integrate the family's dynamics from `init` to `t_end` and measure the
/// relative drift |I − I₀| / max(1, |I₀|) of its invariant at every accepted
/// step. Families without a closed-form invariant are reported as
/// unsupported.
pub fn drift_check(
    fam: &FamilyInstance,
    init: PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
    threshold: f64,
) -> Result<DriftReport> {
    let invariant = fam.invariant.as_ref().ok_or_else(|| {
        Error::UnsupportedCheck(format!(
            "family {} exposes no closed-form invariant to conserve",
            fam.label
        ))
    })?;
    let traj = integrate(&fam.potential, init, t_end, cfg, &fam.aux_odes)?;
    let mut series = Vec::with_capacity(traj.len());
    let mut skipped = 0usize;
    let mut initial = f64::NAN;
    let mut max_drift_rel: f64 = 0.0;
    for i in 0..traj.len() {
        let x = traj.state(i);
        match invariant.value(x) {
            Ok(val) => {
                if initial.is_nan() {
                    initial = val;
                }
                let drift = (val - initial).abs() / initial.abs().max(1.0);
                max_drift_rel = max_drift_rel.max(drift);
                series.push((x.t, val, drift));
            }
            Err(e) if e.is_domain_exclusion() => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if series.is_empty() {
        return Err(Error::DegenerateScan { total: traj.len() });
    }
    Ok(DriftReport {
        series,
        initial,
        max_drift_rel,
        skipped,
        guard_exit: traj.guard_exit,
        threshold,
        pass: max_drift_rel < threshold,
    })
}

/// One interior sample of the reduced-law check.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiSample {
    pub t: f64,
    /// Characteristic variable f at the sample time.
    pub f: f64,
    /// Measured df/dt (Richardson-extrapolated central differences on the
    /// dense trajectory).
    pub df_dt: f64,
    /// The family's predicted right-hand side rhs(f, t).
    pub rhs: f64,
}

/// Outcome of the reduced-evolution-law consistency check.
#[derive(Debug, Clone)]
pub struct RiccatiReport {
    pub samples: Vec<RiccatiSample>,
    pub max_abs_defect: f64,
    pub skipped: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Check that the family's characteristic variable f obeys its reduced law
/// df/dt = rhs(f, t) along an actual trajectory: integrate from `init`,
/// measure df/dt at interior times by Richardson-extrapolated central
/// differences on the dense output, and compare against rhs.
pub fn riccati_consistency(
    fam: &FamilyInstance,
    init: PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
    threshold: f64,
) -> Result<RiccatiReport> {
    let riccati = fam.riccati.as_ref().ok_or_else(|| {
        Error::UnsupportedCheck(format!(
            "family {} exposes no reduced evolution law",
            fam.label
        ))
    })?;
    let cfg = IntegratorConfig {
        dense_output: true,
        ..*cfg
    };
    let traj = integrate(&fam.potential, init, t_end, &cfg, &fam.aux_odes)?;
    let (lo, hi) = (traj.t_start(), traj.t_end());
    let f_at = |t: f64| -> Result<Option<f64>> {
        let Some(x) = traj.state_at(t) else {
            return Ok(None);
        };
        match riccati.f.value(x) {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.is_domain_exclusion() => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut samples = Vec::new();
    let mut skipped = 0usize;
    let mut max_abs_defect: f64 = 0.0;
    let n = DEFAULT_TIME_SAMPLES;
    for i in 0..n {
        let t = lo + (hi - lo) * (i + 1) as f64 / (n + 1) as f64;
        let mut h = 1e-3 * t.abs().max(1.0);
        h = h.min(0.5 * (t - lo)).min(0.5 * (hi - t));
        if h <= 0.0 {
            skipped += 1;
            continue;
        }
        let stencil = [
            f_at(t)?,
            f_at(t + h)?,
            f_at(t - h)?,
            f_at(t + 0.5 * h)?,
            f_at(t - 0.5 * h)?,
        ];
        let [Some(f0), Some(fp), Some(fm), Some(fhp), Some(fhm)] = stencil else {
            skipped += 1;
            continue;
        };
        let d_h = (fp - fm) / (2.0 * h);
        let d_h2 = (fhp - fhm) / h;
        let df_dt = (4.0 * d_h2 - d_h) / 3.0;
        let rhs = (riccati.rhs)(f0, t);
        max_abs_defect = max_abs_defect.max((df_dt - rhs).abs());
        samples.push(RiccatiSample {
            t,
            f: f0,
            df_dt,
            rhs,
        });
    }
    if samples.is_empty() {
        return Err(Error::DegenerateScan { total: n });
    }
    Ok(RiccatiReport {
        samples,
        max_abs_defect,
        skipped,
        threshold,
        pass: max_abs_defect < threshold,
    })
}

/// Outcome of the invariant → compatible-coefficient round-trip.
#[derive(Debug, Clone)]
pub struct RoundTripReport {
    pub checked: usize,
    pub excluded: usize,
    /// Largest |u(C) + C² + V_qq| with C built from the invariant.
    pub max_basic_residual: f64,
    /// Largest |J_q + C·J_p| — tangency of the invariant to the rebuilt field.
    pub max_tangency: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Rebuild C = −J_q/J_p from an invariant J of the dynamics of `v` and
/// verify, on the given states, that the rebuilt coefficient satisfies the
/// defining residual and that J is constant along the rebuilt field.
pub fn inverse_roundtrip(
    v: &PotentialSpec,
    j: &ScalarField,
    states: &[PhaseState],
    threshold: f64,
) -> Result<RoundTripReport> {
    let c = compatible_from_invariant(j);
    let rows: Result<Vec<Option<(f64, f64)>>> = states
        .par_iter()
        .map(|&x| {
            let jd = match j.derivs(x) {
                Ok(d) => d,
                Err(e) if e.is_domain_exclusion() => return Ok(None),
                Err(e) => return Err(e),
            };
            let cv = match c.value(x) {
                Ok(cv) => cv,
                Err(e) if e.is_domain_exclusion() => return Ok(None),
                Err(e) => return Err(e),
            };
            let res = match basic_equation_residual(v, &c, x) {
                Ok(r) => r,
                Err(e) if e.is_domain_exclusion() => return Ok(None),
                Err(e) => return Err(e),
            };
            Ok(Some((res.abs(), (jd.d_q + cv * jd.d_p).abs())))
        })
        .collect();
    let rows = rows?;
    let mut checked = 0usize;
    let mut max_basic_residual: f64 = 0.0;
    let mut max_tangency: f64 = 0.0;
    for row in rows.into_iter().flatten() {
        checked += 1;
        max_basic_residual = max_basic_residual.max(row.0);
        max_tangency = max_tangency.max(row.1);
    }
    if checked == 0 {
        return Err(Error::DegenerateScan {
            total: states.len(),
        });
    }
    Ok(RoundTripReport {
        checked,
        excluded: states.len() - checked,
        max_basic_residual,
        max_tangency,
        threshold,
        pass: max_basic_residual < threshold && max_tangency < threshold,
    })
}

/// One sample of the frozen-time characteristic comparison.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicSample {
    pub q_bar: f64,
    pub p_bar: f64,
    /// Closed-form slope dp̄/dq̄ of the family's characteristic equation.
    pub slope_formula: f64,
    /// Slope measured by differentiating the traced, chart-mapped curve.
    pub slope_traced: f64,
}

/// Outcome of the frozen-time characteristic check.
#[derive(Debug, Clone)]
pub struct CharacteristicReport {
    pub t: f64,
    pub samples: Vec<CharacteristicSample>,
    pub max_abs_diff: f64,
    pub skipped: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Freeze time at `t`, trace an integral curve of the compatible field
/// (dp/dq = C at fixed t) across the requested q̄ range, map it into the
/// (q̄, p̄) chart, and compare its numerically measured slope against the
/// closed-form characteristic slope. Only the Abel-type family carries the
/// data this check needs.
///
/// The slope is measured by differencing the traced curve, so the
/// comparison degrades near turning points (p̄ → 0), where the slope
/// diverges; choose a range whose characteristic stays clear of them.
pub fn abel_characteristic_check(
    fam: &FamilyInstance,
    t: f64,
    q_bar_range: (f64, f64),
    p_bar_init: f64,
    threshold: f64,
) -> Result<CharacteristicReport> {
    let spec = fam.abel.as_ref().ok_or_else(|| {
        Error::UnsupportedCheck(format!(
            "family {} carries no frozen-time characteristic data",
            fam.label
        ))
    })?;
    if !(q_bar_range.0.is_finite() && q_bar_range.1.is_finite() && q_bar_range.0 < q_bar_range.1) {
        return Err(Error::InvalidArgument(format!(
            "q_bar range must be a finite increasing interval, got [{}, {}]",
            q_bar_range.0, q_bar_range.1
        )));
    }
    let fz = spec.frozen(t)?;
    let q_a = spec.q_of(&fz, q_bar_range.0);
    let q_b = spec.q_of(&fz, q_bar_range.1);
    // March in arclength s ≥ 0 regardless of the chart's orientation.
    let dir = (q_b - q_a).signum();
    let s_len = (q_b - q_a).abs();
    let p0 = spec.p_of(&fz, q_a, p_bar_init);
    let compat = &fam.compat;
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let q = q_a + dir * s;
        dy[0] = dir * compat.value(PhaseState::new(q, y[0], t))?;
        Ok(())
    };
    let guard = |s: f64, y: &[f64]| compat.guard_ok(PhaseState::new(q_a + dir * s, y[0], t));
    // The curve is differentiated numerically, which amplifies interpolation
    // error by 1/h; trace it well below the comparison threshold.
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        dense_output: true,
        ..IntegratorConfig::default()
    };
    let sol = solve_ode(&rhs, 0.0, &[p0], s_len, &cfg, Some(&guard))?;
    let n = DEFAULT_TIME_SAMPLES;
    let Some((s_lo, s_hi)) = sol.dense.span() else {
        return Err(Error::DegenerateScan { total: n });
    };
    let rho_e = fz.rho * fz.e;
    let p_bar_of = |s: f64, p: f64| {
        let q = q_a + dir * s;
        fz.rho * p - fz.rho_d * q - q / (fz.rho * (fz.t_int + spec.k))
    };
    let p_at = |s: f64| sol.dense.eval(s).map(|y| y[0]);
    // dq̄/ds is the constant dir/(ρE); dp̄/ds is measured by Richardson
    // differences of the mapped momentum.
    let dqbar_ds = dir / rho_e;
    let mut samples = Vec::new();
    let mut skipped = 0usize;
    let mut max_abs_diff: f64 = 0.0;
    for i in 0..n {
        let s = s_lo + (s_hi - s_lo) * (i + 1) as f64 / (n + 1) as f64;
        let mut h = 1e-3 * s.abs().max(1.0);
        h = h.min(0.5 * (s - s_lo)).min(0.5 * (s_hi - s));
        if h <= 0.0 {
            skipped += 1;
            continue;
        }
        let stencil = [
            p_at(s),
            p_at(s + h),
            p_at(s - h),
            p_at(s + 0.5 * h),
            p_at(s - 0.5 * h),
        ];
        let [Some(p0s), Some(pp), Some(pm), Some(php), Some(phm)] = stencil else {
            skipped += 1;
            continue;
        };
        let q_bar = (q_a + dir * s) / rho_e;
        let p_bar = p_bar_of(s, p0s);
        let d_h = (p_bar_of(s + h, pp) - p_bar_of(s - h, pm)) / (2.0 * h);
        let d_h2 = (p_bar_of(s + 0.5 * h, php) - p_bar_of(s - 0.5 * h, phm)) / h;
        let dpbar_ds = (4.0 * d_h2 - d_h) / 3.0;
        let slope_traced = dpbar_ds / dqbar_ds;
        let slope_formula = match spec.slope(&fz, q_bar, p_bar) {
            Ok(v) => v,
            Err(e) if e.is_domain_exclusion() => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        max_abs_diff = max_abs_diff.max((slope_traced - slope_formula).abs());
        samples.push(CharacteristicSample {
            q_bar,
            p_bar,
            slope_formula,
            slope_traced,
        });
    }
    if samples.is_empty() {
        return Err(Error::DegenerateScan { total: n });
    }
    Ok(CharacteristicReport {
        t,
        samples,
        max_abs_diff,
        skipped,
        threshold,
        pass: max_abs_diff < threshold,
    })
}

/// Draw `n` phase states uniformly from a box by seeded rejection sampling.
/// The stream is deterministic in `seed`; a predicate rejecting more than
/// the retry budget aborts with a sampling error.
pub fn sample_states(
    n: usize,
    q_range: (f64, f64),
    p_range: (f64, f64),
    t_range: (f64, f64),
    seed: u64,
    accept: &dyn Fn(PhaseState) -> bool,
) -> Result<Vec<PhaseState>> {
    for (name, (lo, hi)) in [("q", q_range), ("p", p_range), ("t", t_range)] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!(
                "sampling range {name} must be finite and ordered, got ({lo}, {hi})"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = move |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.gen::<f64>();
    let mut out = Vec::with_capacity(n);
    let mut rejects = 0usize;
    while out.len() < n {
        let x = PhaseState::new(draw(q_range), draw(p_range), draw(t_range));
        if accept(x) {
            out.push(x);
        } else {
            rejects += 1;
            if rejects >= MAX_SAMPLE_REJECTS {
                return Err(Error::SamplingExhausted {
                    retries: MAX_SAMPLE_REJECTS,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{abel_family, forced_oscillator, quadratic, sarlet};
    use crate::funcat::{FnKind, SpaceProfile, TimeFunction};

    fn tf(kind: FnKind) -> TimeFunction {
        TimeFunction(kind)
    }

    fn breathing() -> TimeFunction {
        tf(FnKind::Trigonometric {
            a: 2.0,
            b: 1.0,
            omega: 1.0,
            phi: 0.0,
        })
    }

    #[test]
    fn grid_covers_corners_in_lattice_order() {
        let g = GridSpec::standard((0.0, 2.0));
        assert_eq!(g.len(), 1000);
        let first = g.state(0);
        let last = g.state(999);
        assert_eq!((first.q, first.p, first.t), (-2.0, -2.0, 0.0));
        assert_eq!((last.q, last.p, last.t), (2.0, 2.0, 2.0));
        // t is the fastest axis
        let second = g.state(1);
        assert_eq!((second.q, second.p), (-2.0, -2.0));
        assert!(second.t > 0.0);
    }

    #[test]
    fn residual_scan_passes_for_a_clean_family() {
        let fam = forced_oscillator(
            breathing(),
            tf(FnKind::Polynomial(vec![0.0, 1.0])),
            (0.0, 2.0),
        )
        .unwrap();
        let rep = residual_scan(
            &fam.potential,
            &fam.compat,
            &GridSpec::standard(fam.window),
            1e-8,
        )
        .unwrap();
        assert!(rep.pass, "max residual {:.3e}", rep.max_abs);
        assert_eq!(rep.excluded, 0);
        assert_eq!(rep.included, 1000);
        assert!(rep.p50 <= rep.p90 && rep.p90 <= rep.p99 && rep.p99 <= rep.max_abs);
    }

    #[test]
    fn residual_scan_counts_guarded_points() {
        let fam = sarlet(
            tf(FnKind::Constant(1.0)),
            tf(FnKind::Constant(0.0)),
            tf(FnKind::Constant(1.0)),
            (0.0, 2.0),
        )
        .unwrap();
        // one q column sits inside the guarded strip around q = σ = 0
        let grid = GridSpec {
            q: (5e-4, 2.0, 5),
            p: (-2.0, 2.0, 5),
            t: (0.0, 2.0, 5),
        };
        let rep = residual_scan(&fam.potential, &fam.compat, &grid, 1e-6).unwrap();
        assert_eq!(rep.excluded, 25);
        assert_eq!(rep.included, 100);
        assert!(rep.pass, "max residual {:.3e}", rep.max_abs);
    }

    #[test]
    fn fully_guarded_scan_is_degenerate() {
        let fam = sarlet(
            tf(FnKind::Constant(1.0)),
            tf(FnKind::Constant(0.0)),
            tf(FnKind::Constant(1.0)),
            (0.0, 2.0),
        )
        .unwrap();
        let grid = GridSpec {
            q: (-5e-4, 5e-4, 4),
            p: (-2.0, 2.0, 4),
            t: (0.0, 2.0, 4),
        };
        let got = residual_scan(&fam.potential, &fam.compat, &grid, 1e-6);
        assert!(matches!(got, Err(Error::DegenerateScan { total: 64 })));
    }

    #[test]
    fn drift_check_conserves_the_forced_oscillator_invariant() {
        let fam = forced_oscillator(
            breathing(),
            tf(FnKind::Polynomial(vec![0.0, 1.0])),
            (0.0, 2.0),
        )
        .unwrap();
        let rep = drift_check(
            &fam,
            PhaseState::new(1.0, 0.5, 0.0),
            2.0,
            &IntegratorConfig::default(),
            1e-6,
        )
        .unwrap();
        assert!(rep.pass, "max drift {:.3e}", rep.max_drift_rel);
        assert_eq!(rep.skipped, 0);
        assert!(rep.guard_exit.is_none());
        assert!(rep.series.len() > 5);
    }

    #[test]
    fn drift_check_requires_an_invariant() {
        let fam = abel_family(
            tf(FnKind::Constant(1.0)),
            1.0,
            SpaceProfile(FnKind::Polynomial(vec![0.0, 0.0, 0.5])),
            (0.0, 2.0),
        )
        .unwrap();
        let got = drift_check(
            &fam,
            PhaseState::new(1.0, 0.5, 0.0),
            2.0,
            &IntegratorConfig::default(),
            1e-6,
        );
        assert!(matches!(got, Err(Error::UnsupportedCheck(_))));
    }

    #[test]
    fn reduced_law_holds_and_tightens_with_tolerance() {
        // nonlinear reduced law (Riccati): defect is dominated by dense-output
        // error, so tightening the integrator must shrink it markedly
        let fam = sarlet(
            breathing(),
            tf(FnKind::Constant(0.0)),
            tf(FnKind::Constant(1.0)),
            (0.0, 2.0),
        )
        .unwrap();
        let init = PhaseState::new(2.0, 1.0, 0.0);
        let loose = riccati_consistency(
            &fam,
            init,
            2.0,
            &IntegratorConfig {
                rel_tol: 1e-6,
                abs_tol: 1e-8,
                ..IntegratorConfig::default()
            },
            1e-2,
        )
        .unwrap();
        let tight =
            riccati_consistency(&fam, init, 2.0, &IntegratorConfig::default(), 1e-5).unwrap();
        assert!(tight.pass, "defect {:.3e}", tight.max_abs_defect);
        assert!(
            tight.max_abs_defect < loose.max_abs_defect,
            "tight {:.3e} vs loose {:.3e}",
            tight.max_abs_defect,
            loose.max_abs_defect
        );
    }

    #[test]
    fn roundtrip_rebuilds_a_compatible_coefficient() {
        let fam = quadratic(
            breathing(),
            tf(FnKind::Polynomial(vec![0.0, 1.0])),
            SpaceProfile(FnKind::Polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0])),
            (0.0, 2.0),
        )
        .unwrap();
        let j = fam.invariant.as_ref().unwrap();
        let states =
            sample_states(500, (-2.0, 2.0), (-2.0, 2.0), (0.0, 2.0), 42, &|_| true).unwrap();
        let rep = inverse_roundtrip(&fam.potential, j, &states, 1e-8).unwrap();
        assert!(
            rep.pass,
            "residual {:.3e}, tangency {:.3e}",
            rep.max_basic_residual, rep.max_tangency
        );
        assert!(rep.checked > 400);
    }

    #[test]
    fn roundtrip_with_momentum_free_states_is_degenerate() {
        // autonomous J = p²/2 + V has J_p = p; a p = 0 slice excludes all
        let v = PotentialSpec::autonomous(SpaceProfile(FnKind::Polynomial(vec![0.0, 0.0, 0.5])));
        let j = ScalarField::from_jet_fn(|x| {
            Ok(crate::jet::Jet::p(x.p).sq() * 0.5 + crate::jet::Jet::q(x.q).sq() * 0.5)
        });
        let states: Vec<PhaseState> = (0..10)
            .map(|i| PhaseState::new(-1.0 + 0.2 * i as f64, 0.0, 0.0))
            .collect();
        let got = inverse_roundtrip(&v, &j, &states, 1e-8);
        assert!(matches!(got, Err(Error::DegenerateScan { total: 10 })));
    }

    #[test]
    fn characteristic_slope_matches_the_traced_curve() {
        let fam = abel_family(
            tf(FnKind::Constant(1.0)),
            1.0,
            SpaceProfile(FnKind::Polynomial(vec![0.0, 0.0, 0.5])),
            (0.0, 2.0),
        )
        .unwrap();
        // p̄ starts at 2 and stays above ~1 on this range — clear of the
        // turning point the characteristic reaches near q̄ ≈ 1.38
        let rep = abel_characteristic_check(&fam, 0.8, (0.5, 1.2), 2.0, 1e-6).unwrap();
        assert!(rep.pass, "max diff {:.3e}", rep.max_abs_diff);
        assert!(rep.samples.len() > 20);
    }

    #[test]
    fn characteristic_check_needs_the_abel_data() {
        let fam = forced_oscillator(
            tf(FnKind::Constant(1.0)),
            tf(FnKind::Constant(0.0)),
            (0.0, 2.0),
        )
        .unwrap();
        let got = abel_characteristic_check(&fam, 0.5, (0.5, 1.5), 2.0, 1e-6);
        assert!(matches!(got, Err(Error::UnsupportedCheck(_))));
    }

    #[test]
    fn sampling_is_deterministic_and_respects_the_predicate() {
        let a = sample_states(50, (-2.0, 2.0), (-2.0, 2.0), (0.0, 1.0), 42, &|x| {
            x.p.abs() > 0.1
        })
        .unwrap();
        let b = sample_states(50, (-2.0, 2.0), (-2.0, 2.0), (0.0, 1.0), 42, &|x| {
            x.p.abs() > 0.1
        })
        .unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.p.abs() > 0.1));
        let c = sample_states(50, (-2.0, 2.0), (-2.0, 2.0), (0.0, 1.0), 7, &|x| {
            x.p.abs() > 0.1
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn impossible_predicates_exhaust_the_sampler() {
        let got = sample_states(1, (0.0, 1.0), (0.0, 1.0), (0.0, 1.0), 42, &|_| false);
        assert!(matches!(got, Err(Error::SamplingExhausted { .. })));
    }
}
