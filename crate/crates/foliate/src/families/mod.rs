//! Closed-form potential families packaged with their compatible
//! coefficients, invariants where one exists, and the auxiliary data the
//! verification checks need.
//!
//! Every family fixes a potential V(q, t) built from a few free functions of
//! time (and sometimes a free space profile), together with the coefficient
//! C(q, p, t) that closes the pair (u, v = ∂q + C∂p) under the commutator.
//! Construction validates the free functions on a trusted time window;
//! evaluation stays guarded away from each family's singular set.

mod abel;
mod forced_oscillator;
mod giacomini;
mod quadratic;
mod sarlet;

pub use abel::{abel_family, AbelFrozen, AbelSpec};
pub use forced_oscillator::forced_oscillator;
pub use giacomini::giacomini;
pub use quadratic::quadratic;
pub use sarlet::{sarlet, sarlet_with_variant, SarletVariant};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{PhaseState, PotentialSpec, ScalarField};
use crate::funcat::{SpaceProfile, TimeFunction};
use crate::jet::Jet;
use crate::numerics::{find_root, quad, AuxOde};

/// Half-width of the strip excluded around every singular denominator
/// (q − σ, p̄, p − C₂, T + k, and the invariant denominators).
pub const SINGULAR_MARGIN: f64 = 1e-3;

/// Absolute tolerance of the pointwise time quadratures (T, Γ).
pub(crate) const TIME_QUAD_TOL: f64 = 1e-13;

/// Which family a [`FamilyInstance`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyLabel {
    ForcedOscillator,
    Sarlet,
    Quadratic,
    Giacomini,
    Abel,
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FamilyLabel::ForcedOscillator => "forced_oscillator",
            FamilyLabel::Sarlet => "sarlet",
            FamilyLabel::Quadratic => "quadratic",
            FamilyLabel::Giacomini => "giacomini",
            FamilyLabel::Abel => "abel",
        };
        f.write_str(name)
    }
}

/// A named auxiliary evaluator a family exposes (transformed coordinates,
/// reparametrized clocks, implicit potential values, …).
#[derive(Clone)]
pub enum Aux {
    /// Function of time only.
    Time(Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>),
    /// Function of the full phase state.
    State(Arc<dyn Fn(PhaseState) -> Result<f64> + Send + Sync>),
}

impl Aux {
    pub fn time<F>(f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        Aux::Time(Arc::new(f))
    }

    pub fn state<F>(f: F) -> Self
    where
        F: Fn(PhaseState) -> Result<f64> + Send + Sync + 'static,
    {
        Aux::State(Arc::new(f))
    }

    pub fn eval(&self, x: PhaseState) -> Result<f64> {
        match self {
            Aux::Time(f) => f(x.t),
            Aux::State(f) => f(x),
        }
    }
}

/// A characteristic variable f(q, p, t) whose evolution along trajectories
/// closes as df/dt = rhs(f, t) — the reduced one-dimensional law the family
/// predicts on the leaves of its compatible field.
#[derive(Clone)]
pub struct RiccatiSpec {
    pub f: ScalarField,
    pub rhs: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

/// Point of the transformed chart (q̄, p̄) attached to a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedState {
    pub q_bar: f64,
    pub p_bar: f64,
}

/// One constructed family: potential, compatible coefficient, optional
/// invariant, trusted window, and auxiliary evaluators/equations.
pub struct FamilyInstance {
    pub label: FamilyLabel,
    pub potential: PotentialSpec,
    /// Reduced compatible coefficient C with its singular set guarded.
    pub compat: ScalarField,
    /// Closed-form first integral, when the family has one.
    pub invariant: Option<ScalarField>,
    /// Time window the free functions were validated on.
    pub window: (f64, f64),
    /// Named auxiliary evaluators (deterministically ordered).
    pub aux: BTreeMap<&'static str, Aux>,
    /// Auxiliary quantities co-integrated alongside trajectories.
    pub aux_odes: Vec<AuxOde>,
    /// Reduced evolution law of the characteristic variable, if any.
    pub riccati: Option<RiccatiSpec>,
    /// Characteristic-slope data for the Abel-type family.
    pub abel: Option<AbelSpec>,
}

impl FamilyInstance {
    /// The transformed chart (q̄, p̄) at a state, for families that define
    /// one via `q_bar`/`p_bar` auxiliaries.
    pub fn transform(&self, x: PhaseState) -> Option<Result<TransformedState>> {
        let qb = self.aux.get("q_bar")?;
        let pb = self.aux.get("p_bar")?;
        Some((|| {
            Ok(TransformedState {
                q_bar: qb.eval(x)?,
                p_bar: pb.eval(x)?,
            })
        })())
    }
}

pub(crate) fn check_window(window: (f64, f64)) -> Result<()> {
    if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
        return Err(Error::InvalidArgument(format!(
            "window must be a finite increasing interval, got [{}, {}]",
            window.0, window.1
        )));
    }
    Ok(())
}

/// T(t) = ∫₀ᵗ ds/ρ(s)², the reparametrized clock shared by several families.
pub(crate) fn t_integral(rho: &TimeFunction, t: f64) -> Result<f64> {
    quad(
        &|s| {
            let r = rho.d(s, 0);
            1.0 / (r * r)
        },
        0.0,
        t,
        TIME_QUAD_TOL,
    )
}

/// T(t) lifted to a jet: the value comes from quadrature, the time
/// derivatives from the integrand 1/ρ² evaluated exactly at t.
pub(crate) fn t_integral_jet(rho: &TimeFunction, t: f64) -> Result<Jet> {
    let v = t_integral(rho, t)?;
    let rate = rho.eval_jet(Jet::t(t)).sq().recip();
    let mut j = Jet::val(v);
    j.dt = rate.v;
    j.dtt = rate.dt;
    Ok(j)
}

/// Co-integrated version of T: T(t₀) seeds from quadrature, then T′ = 1/ρ².
pub(crate) fn t_integral_ode(rho: TimeFunction) -> AuxOde {
    let seed = rho.clone();
    AuxOde::new(
        "T",
        move |t0| t_integral(&seed, t0).unwrap_or(f64::NAN),
        move |t, _, _, _| {
            let r = rho.d(t, 0);
            1.0 / (r * r)
        },
    )
}

const SCAN_CELLS: usize = 64;
const MAX_EXPANSIONS: u32 = 21;

/// Scan 64-cell windows of geometrically doubling half-width around
/// `center`, returning the bracketing cells of the first width at which the
/// scan sees any sign change (degenerate cells mark exact node roots).
pub(crate) fn sign_change_cells(g: &dyn Fn(f64) -> f64, center: f64) -> Vec<(f64, f64)> {
    let scale = center.abs().max(1.0);
    for level in 0..=MAX_EXPANSIONS {
        let r = scale * 1e-4 * (1u64 << level) as f64;
        let cells = cells_in_window(g, center, r);
        if !cells.is_empty() {
            return cells;
        }
    }
    Vec::new()
}

/// The sign-change cells of one symmetric window [center − r, center + r].
pub(crate) fn cells_in_window(g: &dyn Fn(f64) -> f64, center: f64, r: f64) -> Vec<(f64, f64)> {
    let mut cells = Vec::new();
    let mut prev_x = center - r;
    let mut prev_g = g(prev_x);
    for i in 1..=SCAN_CELLS {
        let x = center - r + 2.0 * r * i as f64 / SCAN_CELLS as f64;
        let gx = g(x);
        if prev_g == 0.0 {
            cells.push((prev_x, prev_x));
        } else if prev_g.is_finite()
            && gx.is_finite()
            && gx != 0.0
            && prev_g.signum() != gx.signum()
        {
            cells.push((prev_x, x));
        }
        prev_x = x;
        prev_g = gx;
    }
    if prev_g == 0.0 {
        cells.push((prev_x, prev_x));
    }
    cells
}

/// Q(q, t) solving Q = F((q−σ)/ρ − Q·T(t)) by bracketed root-finding,
/// where T(t) = ∫₀ᵗ dt′/ρ². The bracket search expands geometrically
/// around the explicit T = 0 value Q = F((q−σ)/ρ); among the cells of the
/// first width showing a sign change, the one nearest that value wins.
pub fn solve_q(
    f: &SpaceProfile,
    rho: &TimeFunction,
    sigma: &TimeFunction,
    q: f64,
    t: f64,
) -> Result<f64> {
    let rho_t = rho.d(t, 0);
    if rho_t.abs() < 1e-12 {
        return Err(Error::guard(q, 0.0, t));
    }
    let x0 = (q - sigma.d(t, 0)) / rho_t;
    let center = f.d(x0, 0);
    let t_int = t_integral(rho, t)?;
    if t_int == 0.0 {
        return Ok(center);
    }
    let g = |qq: f64| qq - f.d(x0 - qq * t_int, 0);
    let cells = sign_change_cells(&g, center);
    let scale = center.abs().max(1.0);
    let Some(cell) = cells.into_iter().min_by(|a, b| {
        let da = (0.5 * (a.0 + a.1) - center).abs();
        let db = (0.5 * (b.0 + b.1) - center).abs();
        da.total_cmp(&db)
    }) else {
        let r_max = scale * 1e-4 * (1u64 << MAX_EXPANSIONS) as f64;
        return Err(Error::NoBracket {
            lo: center - r_max,
            hi: center + r_max,
        });
    };
    if cell.0 == cell.1 {
        return Ok(cell.0);
    }
    find_root(&g, cell, 1e-12 * scale)
}
