//! Vector fields on extended phase space (q, p, t).
//!
//! The dynamical field of a Hamiltonian H = p²/2 + V(q,t) is
//! u = ∂_t + p ∂_q − V_q ∂_p. A second field v = ∂_q + C ∂_p is *compatible*
//! with u when their Lie bracket stays in their span, [u,v] = αu + βv, which
//! pins α = 0, β = −C and leaves one scalar condition — the basic equation
//! u(C) + C² + V_qq = 0. This module holds the types for V and for scalar
//! fields like C, the bracket/residual operations, and the inverse
//! construction C = −J_q/J_p that turns a known invariant J into a
//! compatible field.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcat::SpaceProfile;
use crate::jet::Jet;

/// A point (q, p, t) of extended phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: f64,
    pub p: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: f64, p: f64, t: f64) -> Self {
        PhaseState { q, p, t }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.p.is_finite() && self.t.is_finite()
    }
}

/// Value and the derivatives of a potential that the bracket machinery needs.
#[derive(Debug, Clone, Copy)]
pub struct PotentialDerivs {
    pub v: f64,
    pub d_q: f64,
    pub d_qq: f64,
    pub d_t: f64,
}

type PotentialJetFn = dyn Fn(f64, f64) -> Result<Jet> + Send + Sync;

/// A potential V(q,t) with exact spatial and time derivatives.
///
/// The evaluator returns the full second-order jet of V at (q, t); domain
/// guards live inside it — a point outside the formula's domain evaluates to
/// a domain error rather than a poisoned number.
#[derive(Clone)]
pub struct PotentialSpec {
    jet_fn: Arc<PotentialJetFn>,
}

impl PotentialSpec {
    pub fn from_jet_fn<F>(jet_fn: F) -> Self
    where
        F: Fn(f64, f64) -> Result<Jet> + Send + Sync + 'static,
    {
        PotentialSpec {
            jet_fn: Arc::new(jet_fn),
        }
    }

    /// The zero potential (free motion).
    pub fn zero() -> Self {
        PotentialSpec::from_jet_fn(|_, _| Ok(Jet::val(0.0)))
    }

    /// An autonomous potential V(q) given by a catalog profile.
    pub fn autonomous(profile: SpaceProfile) -> Self {
        PotentialSpec::from_jet_fn(move |q, _| Ok(profile.eval_jet(Jet::q(q))))
    }

    pub(crate) fn jet(&self, q: f64, t: f64) -> Result<Jet> {
        (self.jet_fn)(q, t)
    }

    pub fn eval(&self, q: f64, t: f64) -> Result<PotentialDerivs> {
        let j = self.jet(q, t)?;
        Ok(PotentialDerivs {
            v: j.v,
            d_q: j.dq,
            d_qq: j.dqq,
            d_t: j.dt,
        })
    }

    /// Domain membership: whether the potential evaluates cleanly at (q, t).
    pub fn guard_ok(&self, q: f64, t: f64) -> bool {
        self.jet(q, t).is_ok()
    }
}

/// Value and first partials of a scalar field of (q, p, t).
#[derive(Debug, Clone, Copy)]
pub struct FieldDerivs {
    pub v: f64,
    pub d_q: f64,
    pub d_p: f64,
    pub d_t: f64,
}

type StateJetFn = dyn Fn(PhaseState) -> Result<Jet> + Send + Sync;
type StateValFn = dyn Fn(PhaseState) -> Result<f64> + Send + Sync;

#[derive(Clone)]
enum FieldImpl {
    /// Full second-order jet, analytically exact.
    Jet(Arc<StateJetFn>),
    /// Value plus analytic first partials; second partials fall back to
    /// central differences of the supplied firsts.
    Parts {
        value: Arc<StateValFn>,
        d_q: Arc<StateValFn>,
        d_p: Arc<StateValFn>,
        d_t: Arc<StateValFn>,
    },
    /// Value only; all partials by central finite differences with step
    /// h = 1e−6·max(1, |coordinate|), accuracy O(h²).
    Numeric(Arc<StateValFn>),
}

/// A scalar field on extended phase space: an evaluatable function of
/// (q, p, t) with first partial derivatives. Houses compatible-field
/// coefficients, invariants, and characteristic surfaces.
#[derive(Clone)]
pub struct ScalarField {
    imp: FieldImpl,
}

fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

impl ScalarField {
    pub fn from_jet_fn<F>(jet_fn: F) -> Self
    where
        F: Fn(PhaseState) -> Result<Jet> + Send + Sync + 'static,
    {
        ScalarField {
            imp: FieldImpl::Jet(Arc::new(jet_fn)),
        }
    }

    pub fn from_parts<V, Q, P, T>(value: V, d_q: Q, d_p: P, d_t: T) -> Self
    where
        V: Fn(PhaseState) -> Result<f64> + Send + Sync + 'static,
        Q: Fn(PhaseState) -> Result<f64> + Send + Sync + 'static,
        P: Fn(PhaseState) -> Result<f64> + Send + Sync + 'static,
        T: Fn(PhaseState) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField {
            imp: FieldImpl::Parts {
                value: Arc::new(value),
                d_q: Arc::new(d_q),
                d_p: Arc::new(d_p),
                d_t: Arc::new(d_t),
            },
        }
    }

    /// Field given by value alone; partials by finite differences.
    pub fn from_value_numeric<F>(value: F) -> Self
    where
        F: Fn(PhaseState) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField {
            imp: FieldImpl::Numeric(Arc::new(value)),
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::from_jet_fn(move |_| Ok(Jet::val(c)))
    }

    pub fn value(&self, x: PhaseState) -> Result<f64> {
        match &self.imp {
            FieldImpl::Jet(f) => Ok(f(x)?.v),
            FieldImpl::Parts { value, .. } => value(x),
            FieldImpl::Numeric(f) => f(x),
        }
    }

    pub fn derivs(&self, x: PhaseState) -> Result<FieldDerivs> {
        match &self.imp {
            FieldImpl::Jet(f) => {
                let j = f(x)?;
                Ok(FieldDerivs {
                    v: j.v,
                    d_q: j.dq,
                    d_p: j.dp,
                    d_t: j.dt,
                })
            }
            FieldImpl::Parts {
                value,
                d_q,
                d_p,
                d_t,
            } => Ok(FieldDerivs {
                v: value(x)?,
                d_q: d_q(x)?,
                d_p: d_p(x)?,
                d_t: d_t(x)?,
            }),
            FieldImpl::Numeric(f) => {
                let v = f(x)?;
                let (hq, hp, ht) = (fd_step(x.q), fd_step(x.p), fd_step(x.t));
                let at = |q, p, t| f(PhaseState::new(q, p, t));
                Ok(FieldDerivs {
                    v,
                    d_q: (at(x.q + hq, x.p, x.t)? - at(x.q - hq, x.p, x.t)?) / (2.0 * hq),
                    d_p: (at(x.q, x.p + hp, x.t)? - at(x.q, x.p - hp, x.t)?) / (2.0 * hp),
                    d_t: (at(x.q, x.p, x.t + ht)? - at(x.q, x.p, x.t - ht)?) / (2.0 * ht),
                })
            }
        }
    }

    /// Full second-order jet. Exact for jet-backed fields; for the other
    /// variants the missing orders are filled by central differences.
    pub(crate) fn jet(&self, x: PhaseState) -> Result<Jet> {
        match &self.imp {
            FieldImpl::Jet(f) => f(x),
            FieldImpl::Parts { .. } | FieldImpl::Numeric(_) => {
                let d0 = self.derivs(x)?;
                // Second partials by differencing the first-derivative maps.
                let (hq, hp, ht) = (fd_step(x.q), fd_step(x.p), fd_step(x.t));
                let dq = |s: PhaseState| -> Result<f64> { Ok(self.derivs(s)?.d_q) };
                let dp = |s: PhaseState| -> Result<f64> { Ok(self.derivs(s)?.d_p) };
                let dt = |s: PhaseState| -> Result<f64> { Ok(self.derivs(s)?.d_t) };
                let shift_q = |h: f64| PhaseState::new(x.q + h, x.p, x.t);
                let shift_p = |h: f64| PhaseState::new(x.q, x.p + h, x.t);
                let shift_t = |h: f64| PhaseState::new(x.q, x.p, x.t + h);
                Ok(Jet {
                    v: d0.v,
                    dq: d0.d_q,
                    dp: d0.d_p,
                    dt: d0.d_t,
                    dqq: (dq(shift_q(hq))? - dq(shift_q(-hq))?) / (2.0 * hq),
                    dqp: (dq(shift_p(hp))? - dq(shift_p(-hp))?) / (2.0 * hp),
                    dqt: (dq(shift_t(ht))? - dq(shift_t(-ht))?) / (2.0 * ht),
                    dpp: (dp(shift_p(hp))? - dp(shift_p(-hp))?) / (2.0 * hp),
                    dpt: (dp(shift_t(ht))? - dp(shift_t(-ht))?) / (2.0 * ht),
                    dtt: (dt(shift_t(ht))? - dt(shift_t(-ht))?) / (2.0 * ht),
                })
            }
        }
    }

    /// Domain membership: whether the field evaluates cleanly at x.
    pub fn guard_ok(&self, x: PhaseState) -> bool {
        self.derivs(x).is_ok()
    }
}

/// Coefficients of the bracket relation [u,v] = αu + βv for a reduced field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketCoeffs {
    pub alpha: f64,
    pub beta: f64,
}

/// An unreduced field A ∂_t + B ∂_q + C ∂_p.
#[derive(Clone)]
pub struct GeneralField {
    pub a: ScalarField,
    pub b: ScalarField,
    pub c: ScalarField,
}

/// Margin below which the reduction denominator B − A·p counts as singular.
const SINGULAR_REDUCTION_MARGIN: f64 = 1e-12;

/// Denominator guard for the inverse construction C = −J_q/J_p: points with
/// |J_p| below this are outside the returned field's domain (momentum
/// turning points, where the quotient blows up).
pub const DELTA_P: f64 = 1e-3;

/// Apply the dynamical field u = ∂_t + p ∂_q − V_q ∂_p to a scalar field.
pub fn apply_u(v: &PotentialSpec, s: &ScalarField, x: PhaseState) -> Result<f64> {
    let vd = v.eval(x.q, x.t)?;
    let sd = s.derivs(x)?;
    Ok(sd.d_t + x.p * sd.d_q - vd.d_q * sd.d_p)
}

/// Left side of the basic equation, u(C) + C² + V_qq. It vanishes at x
/// exactly when v = ∂_q + C ∂_p is compatible with the dynamical field there.
pub fn basic_equation_residual(v: &PotentialSpec, c: &ScalarField, x: PhaseState) -> Result<f64> {
    let vd = v.eval(x.q, x.t)?;
    let cd = c.derivs(x)?;
    let u_of_c = cd.d_t + x.p * cd.d_q - vd.d_q * cd.d_p;
    Ok(u_of_c + cd.v * cd.v + vd.d_qq)
}

/// Bracket coefficients and the full three-component compatibility residual
/// [u,v] − αu − βv, in (∂_t, ∂_q, ∂_p) component order.
///
/// For a reduced field the bracket is [u,v] = −C ∂_q + (u(C) + V_qq) ∂_p, so
/// α = 0 and β = −C close the first two components identically and the ∂_p
/// slot carries the basic-equation residual.
pub fn bracket_coeffs(
    v: &PotentialSpec,
    c: &ScalarField,
    x: PhaseState,
) -> Result<(BracketCoeffs, [f64; 3])> {
    let vd = v.eval(x.q, x.t)?;
    let cd = c.derivs(x)?;
    let u_of_c = cd.d_t + x.p * cd.d_q - vd.d_q * cd.d_p;

    // [u,v] componentwise, then subtract α·u + β·v with α = 0, β = −C.
    let bracket = [0.0, -cd.v, u_of_c + vd.d_qq];
    let coeffs = BracketCoeffs {
        alpha: 0.0,
        beta: -cd.v,
    };
    let u_comp = [1.0, x.p, -vd.d_q];
    let v_comp = [0.0, 1.0, cd.v];
    let mut residual = [0.0; 3];
    for i in 0..3 {
        residual[i] = bracket[i] - coeffs.alpha * u_comp[i] - coeffs.beta * v_comp[i];
    }
    Ok((coeffs, residual))
}

/// Collapse an unreduced field A ∂_t + B ∂_q + C ∂_p to the coefficient of
/// the equivalent reduced field ∂_q + C′ ∂_p, via C′ = (C + A·V_q)/(B − A·p).
/// The line B = A·p is excluded: there the combination degenerates onto the
/// dynamical field itself.
pub fn reduce_general_field(g: &GeneralField, v: &PotentialSpec, x: PhaseState) -> Result<f64> {
    let a = g.a.value(x)?;
    let b = g.b.value(x)?;
    let c = g.c.value(x)?;
    let vd = v.eval(x.q, x.t)?;
    let den = b - a * x.p;
    let scale = b.abs().max((a * x.p).abs()).max(1.0);
    if den.abs() < SINGULAR_REDUCTION_MARGIN * scale {
        return Err(Error::SingularReduction {
            q: x.q,
            p: x.p,
            t: x.t,
        });
    }
    Ok((c + a * vd.d_q) / den)
}

/// Build the compatible-field coefficient C = −J_q/J_p from a scalar field J.
///
/// If J is an invariant of the dynamical field, the resulting C satisfies the
/// basic equation and v(J) = 0 wherever |J_p| stays above [`DELTA_P`] — that
/// guard is baked into the returned field's domain.
pub fn compatible_from_invariant(j: &ScalarField) -> ScalarField {
    fn quotient_jet(j: &ScalarField, x: PhaseState) -> Result<Jet> {
        let jj = j.jet(x)?;
        if jj.dp.abs() < DELTA_P {
            return Err(Error::guard(x.q, x.p, x.t));
        }
        Ok(jj)
    }

    let (jv, jq, jp, jt) = (j.clone(), j.clone(), j.clone(), j.clone());
    ScalarField::from_parts(
        move |x| {
            let jj = quotient_jet(&jv, x)?;
            Ok(-jj.dq / jj.dp)
        },
        move |x| {
            let jj = quotient_jet(&jq, x)?;
            Ok(-(jj.dqq * jj.dp - jj.dq * jj.dqp) / (jj.dp * jj.dp))
        },
        move |x| {
            let jj = quotient_jet(&jp, x)?;
            Ok(-(jj.dqp * jj.dp - jj.dq * jj.dpp) / (jj.dp * jj.dp))
        },
        move |x| {
            let jj = quotient_jet(&jt, x)?;
            Ok(-(jj.dqt * jj.dp - jj.dq * jj.dpt) / (jj.dp * jj.dp))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcat::FnKind;

    fn harmonic() -> PotentialSpec {
        // V = q²/2
        PotentialSpec::autonomous(SpaceProfile(FnKind::Polynomial(vec![0.0, 0.0, 0.5])))
    }

    fn quartic() -> PotentialSpec {
        // V = q⁴/4
        PotentialSpec::autonomous(SpaceProfile(FnKind::Polynomial(vec![
            0.0, 0.0, 0.0, 0.0, 0.25,
        ])))
    }

    fn momentum() -> ScalarField {
        ScalarField::from_jet_fn(|x| Ok(Jet::p(x.p)))
    }

    fn energy_harmonic() -> ScalarField {
        ScalarField::from_jet_fn(|x| Ok((Jet::p(x.p).sq() + Jet::q(x.q).sq()) * 0.5))
    }

    /// C = −q/p, the compatible coefficient paired with V = q²/2.
    fn c_harmonic() -> ScalarField {
        ScalarField::from_jet_fn(|x| {
            if x.p.abs() < 1e-9 {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            Ok(-Jet::q(x.q) / Jet::p(x.p))
        })
    }

    #[test]
    fn free_particle_conserves_momentum() {
        let v = PotentialSpec::zero();
        let s = momentum();
        for &(q, p, t) in &[(0.0, 1.0, 0.0), (2.0, -3.0, 1.5), (-1.0, 0.2, -4.0)] {
            assert_eq!(apply_u(&v, &s, PhaseState::new(q, p, t)).unwrap(), 0.0);
        }
    }

    #[test]
    fn harmonic_drives_momentum() {
        let got = apply_u(&harmonic(), &momentum(), PhaseState::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(got, -1.0);
    }

    #[test]
    fn autonomous_energy_is_stationary() {
        let got = apply_u(
            &harmonic(),
            &energy_harmonic(),
            PhaseState::new(0.3, -0.7, 2.0),
        )
        .unwrap();
        assert!(got.abs() < 1e-15, "u(energy) = {got}");
    }

    #[test]
    fn trivial_fields_zero_the_basic_equation() {
        let v = PotentialSpec::zero();
        let c = ScalarField::constant(0.0);
        for &(q, p, t) in &[(0.0, 0.0, 0.0), (1.0, 2.0, 3.0), (-0.5, 0.1, -2.0)] {
            let r = basic_equation_residual(&v, &c, PhaseState::new(q, p, t)).unwrap();
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn harmonic_quotient_field_zeroes_the_basic_equation() {
        let r = basic_equation_residual(&harmonic(), &c_harmonic(), PhaseState::new(1.0, 2.0, 0.0))
            .unwrap();
        assert!(r.abs() < 1e-15, "residual = {r}");

        // Independent numeric route: same C supplied value-only, partials by
        // finite differences.
        let c_fd = ScalarField::from_value_numeric(|x| {
            if x.p.abs() < 1e-9 {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            Ok(-x.q / x.p)
        });
        let r_fd =
            basic_equation_residual(&harmonic(), &c_fd, PhaseState::new(1.0, 2.0, 0.0)).unwrap();
        assert!(r_fd.abs() < 1e-8, "fd residual = {r_fd}");
    }

    #[test]
    fn curvature_shows_up_when_the_field_is_wrong() {
        let c = ScalarField::constant(0.0);
        for &(q, p, t) in &[(0.0, 0.0, 0.0), (1.0, 2.0, 3.0)] {
            let r = basic_equation_residual(&harmonic(), &c, PhaseState::new(q, p, t)).unwrap();
            assert_eq!(r, 1.0);
        }
    }

    #[test]
    fn bracket_of_trivial_pair_vanishes() {
        let (coeffs, residual) = bracket_coeffs(
            &PotentialSpec::zero(),
            &ScalarField::constant(0.0),
            PhaseState::new(0.4, -1.0, 2.0),
        )
        .unwrap();
        assert_eq!(
            coeffs,
            BracketCoeffs {
                alpha: 0.0,
                beta: 0.0
            }
        );
        assert_eq!(residual, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn bracket_beta_is_minus_c() {
        let x = PhaseState::new(1.0, 2.0, 0.0);
        let (coeffs, residual) = bracket_coeffs(&harmonic(), &c_harmonic(), x).unwrap();
        assert_eq!(coeffs.alpha, 0.0);
        assert!((coeffs.beta - 0.5).abs() < 1e-15);
        assert_eq!(residual[0], 0.0);
        assert_eq!(residual[1], 0.0);
        assert!(residual[2].abs() < 1e-15);
    }

    #[test]
    fn bracket_residual_p_slot_carries_the_defect() {
        let x = PhaseState::new(0.7, 1.3, 0.2);
        let (_, residual) = bracket_coeffs(&harmonic(), &ScalarField::constant(0.0), x).unwrap();
        assert_eq!(residual, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn reduction_of_already_reduced_field_is_identity() {
        let g = GeneralField {
            a: ScalarField::constant(0.0),
            b: ScalarField::constant(1.0),
            c: ScalarField::constant(0.7),
        };
        let got = reduce_general_field(&g, &PotentialSpec::zero(), PhaseState::new(0.0, 1.0, 0.0))
            .unwrap();
        assert_eq!(got, 0.7);
    }

    #[test]
    fn reduction_rescales() {
        let g = GeneralField {
            a: ScalarField::constant(0.0),
            b: ScalarField::constant(2.0),
            c: ScalarField::constant(1.4),
        };
        let got = reduce_general_field(&g, &PotentialSpec::zero(), PhaseState::new(0.0, 1.0, 0.0))
            .unwrap();
        assert!((got - 0.7).abs() < 1e-15);
    }

    #[test]
    fn reduction_folds_in_the_time_component() {
        // A ∂_t alone reduces to C′ = V_q/(−p).
        let g = GeneralField {
            a: ScalarField::constant(1.0),
            b: ScalarField::constant(0.0),
            c: ScalarField::constant(0.0),
        };
        let x = PhaseState::new(1.0, 2.0, 0.0);
        let got = reduce_general_field(&g, &harmonic(), x).unwrap();
        assert!((got - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn reduction_detects_the_singular_line() {
        let g = GeneralField {
            a: ScalarField::constant(1.0),
            b: ScalarField::constant(2.0),
            c: ScalarField::constant(0.0),
        };
        let got = reduce_general_field(&g, &PotentialSpec::zero(), PhaseState::new(0.0, 2.0, 0.0));
        assert!(matches!(got, Err(Error::SingularReduction { .. })));
    }

    #[test]
    fn invariant_momentum_gives_zero_field() {
        let c = compatible_from_invariant(&momentum());
        let x = PhaseState::new(1.0, 2.0, 3.0);
        assert_eq!(c.value(x).unwrap(), 0.0);
        let d = c.derivs(x).unwrap();
        assert_eq!((d.d_q, d.d_p, d.d_t), (0.0, 0.0, 0.0));
    }

    #[test]
    fn invariant_energy_gives_quotient_field() {
        let c = compatible_from_invariant(&energy_harmonic());
        let x = PhaseState::new(1.0, 2.0, 0.0);
        assert!((c.value(x).unwrap() - (-0.5)).abs() < 1e-15);
        // ... and the turning-point guard excludes small momenta.
        assert!(c.value(PhaseState::new(1.0, 1e-4, 0.0)).is_err());
    }

    #[test]
    fn quartic_invariant_roundtrip_is_residual_free() {
        let v = quartic();
        let j =
            ScalarField::from_jet_fn(|x| Ok(Jet::p(x.p).sq() * 0.5 + Jet::q(x.q).powi(4) * 0.25));
        let c = compatible_from_invariant(&j);

        // Deterministic low-discrepancy sweep of 100 guard-interior points.
        let mut worst: f64 = 0.0;
        let mut used = 0;
        for i in 0..100 {
            let s = i as f64;
            let q = -2.0 + 4.0 * ((s * 0.618_033_988_749_895) % 1.0);
            let p = -2.0 + 4.0 * ((s * 0.754_877_666_246_693) % 1.0);
            let x = PhaseState::new(q, p, 0.3 * s % 2.0);
            if p.abs() < DELTA_P {
                continue;
            }
            used += 1;
            let r = basic_equation_residual(&v, &c, x).unwrap();
            worst = worst.max(r.abs());
            // expected closed form: C = −q³/p
            let expected = -q.powi(3) / p;
            assert!((c.value(x).unwrap() - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
        assert!(used > 90);
        assert!(worst < 1e-9, "max residual {worst}");
    }

    #[test]
    fn built_field_is_tangent_to_its_invariant() {
        let j = energy_harmonic();
        let c = compatible_from_invariant(&j);
        for i in 0..50 {
            let s = i as f64;
            let x = PhaseState::new(
                -1.5 + 3.0 * ((s * 0.618_033_988_749_895) % 1.0),
                1.0 + ((s * 0.754_877_666_246_693) % 1.0),
                s * 0.1,
            );
            let jd = j.derivs(x).unwrap();
            let tangency = jd.d_q + c.value(x).unwrap() * jd.d_p;
            assert!(tangency.abs() < 1e-12, "v(J) = {tangency} at {x:?}");
        }
    }

    #[test]
    fn numeric_partials_track_analytic_ones() {
        let analytic = ScalarField::from_jet_fn(|x| {
            Ok((Jet::q(x.q) * Jet::p(x.p)).sin() + Jet::t(x.t).exp() * Jet::q(x.q))
        });
        let numeric = ScalarField::from_value_numeric(|x| Ok((x.q * x.p).sin() + x.t.exp() * x.q));
        let x = PhaseState::new(0.7, -1.1, 0.4);
        let a = analytic.derivs(x).unwrap();
        let n = numeric.derivs(x).unwrap();
        assert!((a.d_q - n.d_q).abs() < 1e-5);
        assert!((a.d_p - n.d_p).abs() < 1e-5);
        assert!((a.d_t - n.d_t).abs() < 1e-5);
    }
}
