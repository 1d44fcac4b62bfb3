//! Numeric substrate: adaptive Runge–Kutta integration of the canonical
//! equations (with co-integrated auxiliaries, dense output, and clean stops
//! at domain boundaries), adaptive quadrature, and safeguarded root-finding.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{PhaseState, PotentialSpec};

/// Tolerances and budgets for the embedded Runge–Kutta pair.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    pub dense_output: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
            dense_output: true,
        }
    }
}

// Dormand–Prince 5(4) tableau with the first-same-as-last optimization.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and 4th-order weights (error estimator).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Weights of the 4th-order dense-output polynomial.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// One interpolation segment of an accepted step.
struct DenseSeg {
    t0: f64,
    h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseSeg {
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            let [r1, r2, r3, r4, r5] = [
                self.rcont[0][i],
                self.rcont[1][i],
                self.rcont[2][i],
                self.rcont[3][i],
                self.rcont[4][i],
            ];
            *o = r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
        }
    }
}

/// Piecewise-polynomial interpolant over all accepted steps.
pub(crate) struct Dense {
    segs: Vec<DenseSeg>,
    dim: usize,
}

impl Dense {
    pub(crate) fn span(&self) -> Option<(f64, f64)> {
        let first = self.segs.first()?;
        let last = self.segs.last()?;
        Some((first.t0, last.t0 + last.h))
    }

    /// Interpolated state at `t`, clamped to the covered span.
    pub(crate) fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let (lo, hi) = self.span()?;
        let t = t.clamp(lo, hi);
        // binary search for the segment containing t
        let idx = self
            .segs
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.segs.len() - 1);
        let mut out = vec![0.0; self.dim];
        self.segs[idx].eval_into(t, &mut out);
        Some(out)
    }
}

pub(crate) struct OdeSolution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
    pub guard_exit: Option<f64>,
    pub dense: Dense,
}

/// Right-hand side of a first-order system: fills `dy` from `(t, y)`.
pub(crate) type OdeRhs<'a> = &'a dyn Fn(f64, &[f64], &mut [f64]) -> Result<()>;

/// Domain predicate on `(t, y)`; `false` stops the integration cleanly.
pub(crate) type OdeGuard<'a> = &'a dyn Fn(f64, &[f64]) -> bool;

fn rms_scaled(v: &[f64], sc: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(sc).map(|(x, s)| (x / s) * (x / s)).sum();
    (s / v.len() as f64).sqrt()
}

/// Starting step size from the local derivative magnitudes.
fn initial_step(
    rhs: OdeRhs,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let n = y0.len();
    let sc: Vec<f64> = y0
        .iter()
        .map(|y| cfg.abs_tol + cfg.rel_tol * y.abs())
        .collect();
    let d0 = rms_scaled(y0, &sc);
    let d1 = rms_scaled(f0, &sc);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(t_end - t0);

    // one explicit Euler probe to estimate the second derivative
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    let h1 = if rhs(t0 + h0, &y1, &mut f1).is_ok() {
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = rms_scaled(&diff, &sc) / h0;
        let dmax = d1.max(d2);
        if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(0.2)
        }
    } else {
        h0 * 1e-3
    };
    (100.0 * h0).min(h1).min(t_end - t0).min(cfg.max_step)
}

/// Integrate y' = rhs(t, y) from t0 to t_end with the embedded 5(4) pair.
///
/// A failing right-hand side inside a trial step (a stage stepping outside
/// the domain) rejects the step and halves it. When `guard` is supplied,
/// integration stops cleanly the first time an accepted point leaves the
/// guarded region; the boundary time is located on the dense interpolant and
/// recorded as `guard_exit`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negated forms also reject NaN inputs
pub(crate) fn solve_ode(
    rhs: OdeRhs,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    cfg: &IntegratorConfig,
    guard: Option<OdeGuard>,
) -> Result<OdeSolution> {
    if !(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "integrator tolerances must be positive".into(),
        ));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!(
            "t_end ({t_end}) must exceed the initial time ({t0})"
        )));
    }
    let n = y0.len();
    let mut sol = OdeSolution {
        ts: vec![t0],
        ys: vec![y0.to_vec()],
        accepted: 0,
        rejected: 0,
        guard_exit: None,
        dense: Dense {
            segs: Vec::new(),
            dim: n,
        },
    };
    if let Some(g) = guard {
        if !g(t0, y0) {
            sol.guard_exit = Some(t0);
            return Ok(sol);
        }
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    rhs(t, &y, &mut k[0])?;
    let mut h = initial_step(rhs, t, &y, &k[0], t_end, cfg);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut y_new = vec![0.0; n];
    let mut y_stage = vec![0.0; n];
    let expo1 = 0.2 - BETA * 0.75;

    let mut trials = 0usize;
    loop {
        if trials >= cfg.max_steps {
            return Err(Error::StepBudget {
                max_steps: cfg.max_steps,
            });
        }
        trials += 1;

        let t_scale = t.abs().max(1.0);
        if h < 1e-14 * t_scale {
            // Persistent domain rejections near a boundary end in a clean
            // stop at the last good point; genuine stiffness is an error.
            if guard.is_some() && last_rejected {
                sol.guard_exit = Some(t);
                break;
            }
            return Err(Error::StepUnderflow { t });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        // stages 2..7 (stage 1 is the FSAL slot k[0])
        let mut domain_reject = false;
        let a_rows: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
        for (s, a_row) in a_rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &a) in a_row.iter().enumerate() {
                    acc += a * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            if rhs(t + C[s + 1] * h, &y_stage, &mut k[s + 1]).is_err() {
                domain_reject = true;
                break;
            }
        }
        if domain_reject {
            sol.rejected += 1;
            last_rejected = true;
            h *= 0.5;
            continue;
        }
        // k[6] was evaluated at y_new (the A7 row *is* the 5th-order update)
        for i in 0..n {
            let mut acc = 0.0;
            for (j, &a) in A7.iter().enumerate() {
                acc += a * k[j][i];
            }
            y_new[i] = y[i] + h * acc;
        }

        // scaled error norm of the embedded difference
        let mut err_sq = 0.0;
        for i in 0..n {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            let mut e = 0.0;
            for (j, &w) in E.iter().enumerate() {
                e += w * k[j][i];
            }
            let r = h * e / sc;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();

        let fac11 = err.max(1e-30).powf(expo1);
        if err > 1.0 {
            sol.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            continue;
        }

        // accepted: build the interpolation polynomial for this step
        sol.accepted += 1;
        let t_new = if last { t_end } else { t + h };
        let mut rcont: [Vec<f64>; 5] = [
            y.clone(),
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];
        for i in 0..n {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            rcont[1][i] = ydiff;
            rcont[2][i] = bspl;
            rcont[3][i] = ydiff - h * k[6][i] - bspl;
            let mut dsum = 0.0;
            for (j, &d) in D.iter().enumerate() {
                dsum += d * k[j][i];
            }
            rcont[4][i] = h * dsum;
        }
        let seg = DenseSeg { t0: t, h, rcont };

        // guard exit: bisect on the interpolant for the last interior point
        if let Some(g) = guard {
            if !g(t_new, &y_new) {
                let mut lo = 0.0_f64;
                let mut hi = 1.0_f64;
                let mut probe = vec![0.0; n];
                while (hi - lo) * h.abs() > 1e-13 * t_scale {
                    let mid = 0.5 * (lo + hi);
                    seg.eval_into(t + mid * h, &mut probe);
                    if g(t + mid * h, &probe) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_exit = t + lo * h;
                seg.eval_into(t_exit, &mut probe);
                sol.ts.push(t_exit);
                sol.ys.push(probe.clone());
                if cfg.dense_output {
                    sol.dense.segs.push(seg);
                }
                sol.guard_exit = Some(t_exit);
                break;
            }
        }

        if cfg.dense_output {
            sol.dense.segs.push(seg);
        }
        t = t_new;
        y.copy_from_slice(&y_new);
        k.swap(0, 6); // first-same-as-last
        sol.ts.push(t);
        sol.ys.push(y.clone());
        if last {
            break;
        }

        let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_next = (h / fac).min(cfg.max_step);
        if last_rejected {
            h_next = h_next.min(h);
        }
        h = h_next;
        facold = err.max(1e-4);
        last_rejected = false;
    }
    Ok(sol)
}

/// Right-hand side of an auxiliary equation, called as `(t, q, p, aux)`.
type AuxRhs = Arc<dyn Fn(f64, f64, f64, &[f64]) -> f64 + Send + Sync>;

/// One co-integrated auxiliary state: a named scalar obeying its own first
/// order equation alongside (q, p). The right-hand side sees the full
/// auxiliary vector, so later auxiliaries may depend on earlier ones.
#[derive(Clone)]
pub struct AuxOde {
    pub name: &'static str,
    init: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    rhs: AuxRhs,
}

impl AuxOde {
    pub fn new<I, R>(name: &'static str, init: I, rhs: R) -> Self
    where
        I: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64, f64, f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        AuxOde {
            name,
            init: Arc::new(init),
            rhs: Arc::new(rhs),
        }
    }

    pub fn initial(&self, t0: f64) -> f64 {
        (self.init)(t0)
    }
}

/// A solution of the canonical equations q' = p, p' = −V_q, sampled at the
/// accepted steps together with any co-integrated auxiliary values.
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    pub aux_names: Vec<&'static str>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Set when integration stopped at the potential's domain boundary.
    pub guard_exit: Option<f64>,
    dense: Dense,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn state(&self, i: usize) -> PhaseState {
        PhaseState::new(self.states[i][0], self.states[i][1], self.times[i])
    }

    pub fn aux(&self, i: usize) -> &[f64] {
        &self.states[i][2..]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Interpolated phase state at an arbitrary time inside the span.
    pub fn state_at(&self, t: f64) -> Option<PhaseState> {
        let y = self.dense.eval(t)?;
        Some(PhaseState::new(
            y[0],
            y[1],
            t.clamp(self.t_start(), self.t_end()),
        ))
    }

    /// Interpolated auxiliary vector at an arbitrary time inside the span.
    pub fn aux_at(&self, t: f64) -> Option<Vec<f64>> {
        Some(self.dense.eval(t)?[2..].to_vec())
    }
}

/// Integrate the canonical equations for a potential from `init` to `t_end`,
/// co-integrating the given auxiliaries. Stops cleanly (with a marker) if the
/// trajectory exits the potential's domain.
pub fn integrate(
    v: &PotentialSpec,
    init: PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
    aux: &[AuxOde],
) -> Result<Trajectory> {
    if !init.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "initial state must be finite, got {init:?}"
        )));
    }
    if !v.guard_ok(init.q, init.t) {
        return Err(Error::guard(init.q, init.p, init.t));
    }
    let mut y0 = vec![init.q, init.p];
    for a in aux {
        y0.push(a.initial(init.t));
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let d = v.eval(y[0], t)?;
        dy[0] = y[1];
        dy[1] = -d.d_q;
        for (i, a) in aux.iter().enumerate() {
            dy[2 + i] = (a.rhs)(t, y[0], y[1], &y[2..]);
        }
        Ok(())
    };
    let guard = |t: f64, y: &[f64]| v.guard_ok(y[0], t);
    let sol = solve_ode(&rhs, init.t, &y0, t_end, cfg, Some(&guard))?;
    Ok(Trajectory {
        times: sol.ts,
        states: sol.ys,
        aux_names: aux.iter().map(|a| a.name).collect(),
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        accepted: sol.accepted,
        rejected: sol.rejected,
        guard_exit: sol.guard_exit,
        dense: sol.dense,
    })
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Gauss and Kronrod estimates on one interval.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (gauss * half, kronrod * half)
}

const QUAD_MAX_DEPTH: usize = 50;

fn quad_rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
    let (g, k) = gk15(f, a, b);
    let err = (k - g).abs();
    if err <= tol.max(1e-16 * k.abs()) {
        return Ok(k);
    }
    if depth >= QUAD_MAX_DEPTH {
        return Err(Error::QuadratureLimit {
            limit: QUAD_MAX_DEPTH,
        });
    }
    let m = 0.5 * (a + b);
    Ok(quad_rec(f, a, m, 0.5 * tol, depth + 1)? + quad_rec(f, m, b, 0.5 * tol, depth + 1)?)
}

/// Adaptive Gauss–Kronrod quadrature of `f` over [a, b] to absolute
/// tolerance `tol`. Swapped limits negate the result.
pub fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-quad_rec(f, b, a, tol, 0)?);
    }
    quad_rec(f, a, b, tol, 0)
}

const ROOT_MAX_ITER: usize = 200;

/// Bracketed root of `f` to absolute x-tolerance `tol`: inverse-quadratic /
/// secant steps with a bisection safeguard. The bracket must straddle a sign
/// change.
pub fn find_root(f: &dyn Fn(f64) -> f64, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut a, mut b) = bracket;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..ROOT_MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // interpolation step: secant, upgraded to inverse quadratic
            // when three distinct points are available
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
    }
    Err(Error::NoConvergence {
        max_iter: ROOT_MAX_ITER,
    })
}
