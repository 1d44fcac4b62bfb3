//! Family whose compatible coefficient is linear in momentum with
//! position-dependent slope 1/(q − σ): an inverse-square interaction around
//! a moving center, plus a logarithmic term when γ varies.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    check_window, t_integral_jet, t_integral_ode, Aux, FamilyInstance, FamilyLabel, RiccatiSpec,
    SINGULAR_MARGIN,
};
use crate::error::{Error, Result};
use crate::fields::{PhaseState, PotentialSpec, ScalarField};
use crate::funcat::TimeFunction;
use crate::jet::Jet;

/// Which quadratic term the potential carries.
///
/// The self-consistent form uses −ρ̈(q−σ)²/(2ρ); with it the characteristic
/// variable f = (p−σ̇)/(q−σ) − γ/(q−σ)² obeys df/dt = −f² + ρ̈/ρ exactly.
/// The historical form with −ρ̈q²/(2ρ) coincides when σ = 0 but breaks that
/// reduction (and the defining residual) for σ ≠ 0; it is kept for
/// comparison runs and carries no invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SarletVariant {
    Corrected,
    PrintedQuadratic,
}

#[derive(Clone, Copy, PartialEq)]
enum WGuard {
    /// γ ≡ 0: the potential is smooth across q = σ.
    None,
    /// γ a nonzero constant: exclude |q − σ| < margin.
    TwoSided,
    /// γ̇ ≠ 0: the logarithm needs q − σ ≥ margin.
    OneSided,
}

impl WGuard {
    fn ok(self, w: f64) -> bool {
        match self {
            WGuard::None => true,
            WGuard::TwoSided => w.abs() >= SINGULAR_MARGIN,
            WGuard::OneSided => w >= SINGULAR_MARGIN,
        }
    }
}

/// Build the family with the self-consistent quadratic term.
pub fn sarlet(
    rho: TimeFunction,
    sigma: TimeFunction,
    gamma: TimeFunction,
    window: (f64, f64),
) -> Result<FamilyInstance> {
    sarlet_with_variant(rho, sigma, gamma, window, SarletVariant::Corrected)
}

/// Build the family
///
///   V = −σ̈(q−σ) − ρ̈(q−σ)²/(2ρ) − γ²/(2(q−σ)²) − γ̇·ln(q−σ),
///   C = (p−σ̇)/(q−σ) − 2γ/(q−σ)²,
///   I = T − ((q−σ)/ρ) / (ρ(p−σ̇) − ρ̇(q−σ) − γρ/(q−σ)),   T = ∫₀ᵗ dt′/ρ²,
///
/// with γ-terms dropped exactly when γ (or γ̇) vanishes identically, and the
/// domain guarded accordingly. `variant` selects the quadratic term; the
/// historical form gets no invariant.
pub fn sarlet_with_variant(
    rho: TimeFunction,
    sigma: TimeFunction,
    gamma: TimeFunction,
    window: (f64, f64),
    variant: SarletVariant,
) -> Result<FamilyInstance> {
    check_window(window)?;
    rho.check_nonzero(window, SINGULAR_MARGIN, "rho")?;

    let gamma_zero = gamma.constant_value() == Some(0.0);
    let gamma_dot_zero = gamma.derivative_identically_zero();
    let potential_guard = if !gamma_dot_zero {
        WGuard::OneSided
    } else if !gamma_zero {
        WGuard::TwoSided
    } else {
        WGuard::None
    };
    // Fields with 1/(q−σ) always need the strip excluded; under a
    // logarithmic potential the whole negative side is out of domain.
    let field_guard = if potential_guard == WGuard::OneSided {
        WGuard::OneSided
    } else {
        WGuard::TwoSided
    };

    let potential = {
        let rho = rho.clone();
        let sigma = sigma.clone();
        let gamma = gamma.clone();
        PotentialSpec::from_jet_fn(move |q, t| {
            let tj = Jet::t(t);
            let r = rho.eval_jet(tj);
            if r.v.abs() < 1e-12 {
                return Err(Error::guard(q, 0.0, t));
            }
            let w = Jet::q(q) - sigma.eval_jet(tj);
            if !potential_guard.ok(w.v) {
                return Err(Error::guard(q, 0.0, t));
            }
            let quad_arg = match variant {
                SarletVariant::Corrected => w,
                SarletVariant::PrintedQuadratic => Jet::q(q),
            };
            let mut v = -(sigma.jet_at(t, 2) * w) - rho.jet_at(t, 2) * quad_arg.sq() / (2.0 * r);
            if !gamma_zero {
                let g = gamma.eval_jet(tj);
                v = v - g.sq() / (2.0 * w.sq());
            }
            if !gamma_dot_zero {
                v = v - gamma.jet_at(t, 1) * w.ln();
            }
            Ok(v)
        })
    };

    let compat = {
        let sigma = sigma.clone();
        let gamma = gamma.clone();
        ScalarField::from_jet_fn(move |x| {
            let tj = Jet::t(x.t);
            let w = Jet::q(x.q) - sigma.eval_jet(tj);
            if !field_guard.ok(w.v) {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            let mut c = (Jet::p(x.p) - sigma.jet_at(x.t, 1)) / w;
            if !gamma_zero {
                c = c - 2.0 * gamma.eval_jet(tj) / w.sq();
            }
            Ok(c)
        })
    };

    let invariant = match variant {
        SarletVariant::PrintedQuadratic => None,
        SarletVariant::Corrected => {
            let rho = rho.clone();
            let sigma = sigma.clone();
            let gamma = gamma.clone();
            Some(ScalarField::from_jet_fn(move |x| {
                let tj = Jet::t(x.t);
                let r = rho.eval_jet(tj);
                if r.v.abs() < 1e-12 {
                    return Err(Error::guard(x.q, x.p, x.t));
                }
                let w = Jet::q(x.q) - sigma.eval_jet(tj);
                if !gamma_zero && !field_guard.ok(w.v) {
                    return Err(Error::guard(x.q, x.p, x.t));
                }
                let mut d = r * (Jet::p(x.p) - sigma.jet_at(x.t, 1)) - rho.jet_at(x.t, 1) * w;
                if !gamma_zero {
                    d = d - gamma.eval_jet(tj) * r / w;
                }
                if d.v.abs() < SINGULAR_MARGIN {
                    return Err(Error::guard(x.q, x.p, x.t));
                }
                Ok(t_integral_jet(&rho, x.t)? - (w / r) / d)
            }))
        }
    };

    let riccati_f = {
        let sigma = sigma.clone();
        let gamma = gamma.clone();
        ScalarField::from_jet_fn(move |x| {
            let tj = Jet::t(x.t);
            let w = Jet::q(x.q) - sigma.eval_jet(tj);
            if !field_guard.ok(w.v) {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            let mut f = (Jet::p(x.p) - sigma.jet_at(x.t, 1)) / w;
            if !gamma_zero {
                f = f - gamma.eval_jet(tj) / w.sq();
            }
            Ok(f)
        })
    };
    let riccati = RiccatiSpec {
        f: riccati_f.clone(),
        rhs: {
            let rho = rho.clone();
            Arc::new(move |f, t| -f * f + rho.d(t, 2) / rho.d(t, 0))
        },
    };

    let mut aux = BTreeMap::new();
    aux.insert("f", Aux::state(move |x: PhaseState| riccati_f.value(x)));

    Ok(FamilyInstance {
        label: FamilyLabel::Sarlet,
        potential,
        compat,
        invariant,
        window,
        aux,
        aux_odes: vec![t_integral_ode(rho)],
        riccati: Some(riccati),
        abel: None,
    })
}
