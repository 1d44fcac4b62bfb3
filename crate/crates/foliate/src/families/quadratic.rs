//! Family with an energy-like invariant quadratic in momentum, organized by
//! the time-dependent point transformation q̄ = (q−σ)/ρ, p̄ = ρ(p−σ̇) − ρ̇(q−σ).

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{check_window, Aux, FamilyInstance, FamilyLabel, RiccatiSpec, SINGULAR_MARGIN};
use crate::error::{Error, Result};
use crate::fields::{PhaseState, PotentialSpec, ScalarField};
use crate::funcat::{SpaceProfile, TimeFunction};
use crate::jet::Jet;

/// Build the quadratic-invariant family
///
///   V = (σρ̈ − ρσ̈)q/ρ − ρ̈q²/(2ρ) + U(q̄)/ρ²,
///   C = ρ̇/ρ − U′(q̄)/(ρ²p̄),
///   I = p̄²/2 + U(q̄),
///
/// in the transformed chart q̄ = (q−σ)/ρ, p̄ = ρ(p−σ̇) − ρ̇(q−σ). The
/// invariant is global; the compatible coefficient is guarded away from the
/// turning set p̄ = 0.
pub fn quadratic(
    rho: TimeFunction,
    sigma: TimeFunction,
    u: SpaceProfile,
    window: (f64, f64),
) -> Result<FamilyInstance> {
    check_window(window)?;
    rho.check_nonzero(window, SINGULAR_MARGIN, "rho")?;

    let q_bar_jet = {
        let rho = rho.clone();
        let sigma = sigma.clone();
        move |q: f64, t: f64| -> Result<Jet> {
            let tj = Jet::t(t);
            let r = rho.eval_jet(tj);
            if r.v.abs() < 1e-12 {
                return Err(Error::guard(q, 0.0, t));
            }
            Ok((Jet::q(q) - sigma.eval_jet(tj)) / r)
        }
    };
    let p_bar_jet = {
        let rho = rho.clone();
        let sigma = sigma.clone();
        move |x: PhaseState| -> Jet {
            let tj = Jet::t(x.t);
            let r = rho.eval_jet(tj);
            let w = Jet::q(x.q) - sigma.eval_jet(tj);
            r * (Jet::p(x.p) - sigma.jet_at(x.t, 1)) - rho.jet_at(x.t, 1) * w
        }
    };

    let potential = {
        let rho = rho.clone();
        let sigma = sigma.clone();
        let u = u.clone();
        let q_bar_jet = q_bar_jet.clone();
        PotentialSpec::from_jet_fn(move |q, t| {
            let tj = Jet::t(t);
            let r = rho.eval_jet(tj);
            if r.v.abs() < 1e-12 {
                return Err(Error::guard(q, 0.0, t));
            }
            let qj = Jet::q(q);
            let s = sigma.eval_jet(tj);
            let s_dd = sigma.jet_at(t, 2);
            let r_dd = rho.jet_at(t, 2);
            let lin = (s * r_dd - r * s_dd) * qj / r;
            Ok(lin - r_dd * qj.sq() / (2.0 * r) + u.eval_jet(q_bar_jet(q, t)?) / r.sq())
        })
    };

    let compat = {
        let rho = rho.clone();
        let u = u.clone();
        let q_bar_jet = q_bar_jet.clone();
        let p_bar_jet = p_bar_jet.clone();
        ScalarField::from_jet_fn(move |x| {
            let pb = p_bar_jet(x);
            if pb.v.abs() < SINGULAR_MARGIN {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            let r = rho.eval_jet(Jet::t(x.t));
            if r.v.abs() < 1e-12 {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            let u_prime = u.eval_jet_deriv(q_bar_jet(x.q, x.t)?, 1);
            Ok(rho.jet_at(x.t, 1) / r - u_prime / (r.sq() * pb))
        })
    };

    let invariant = {
        let u = u.clone();
        let q_bar_jet = q_bar_jet.clone();
        let p_bar_jet = p_bar_jet.clone();
        ScalarField::from_jet_fn(move |x| {
            let pb = p_bar_jet(x);
            Ok(0.5 * pb.sq() + u.eval_jet(q_bar_jet(x.q, x.t)?))
        })
    };

    let mut aux = BTreeMap::new();
    aux.insert("q_bar", {
        let q_bar_jet = q_bar_jet.clone();
        Aux::state(move |x: PhaseState| Ok(q_bar_jet(x.q, x.t)?.v))
    });
    aux.insert("p_bar", {
        let p_bar_jet = p_bar_jet.clone();
        Aux::state(move |x: PhaseState| Ok(p_bar_jet(x).v))
    });

    let riccati = RiccatiSpec {
        f: invariant.clone(),
        rhs: Arc::new(|_, _| 0.0),
    };

    Ok(FamilyInstance {
        label: FamilyLabel::Quadratic,
        potential,
        compat,
        invariant: Some(invariant),
        window,
        aux,
        aux_odes: Vec::new(),
        riccati: Some(riccati),
        abel: None,
    })
}
