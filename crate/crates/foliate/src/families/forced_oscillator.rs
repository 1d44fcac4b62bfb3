//! Driven oscillator with time-dependent stiffness: the compatible
//! coefficient depends on time alone and the invariant is linear in
//! momentum.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{check_window, FamilyInstance, FamilyLabel, RiccatiSpec, SINGULAR_MARGIN};
use crate::error::{Error, Result};
use crate::fields::{PotentialSpec, ScalarField};
use crate::funcat::TimeFunction;
use crate::jet::Jet;

/// Build the driven-oscillator family
///
///   V = −Ḟ(t)q/ρ − ρ̈(t)q²/(2ρ),   C = ρ̇/ρ,   I = ρp − ρ̇q − F,
///
/// where ρ must stay bounded away from zero on `window`. The additive free
/// function of time is dropped: it never enters the equations of motion.
pub fn forced_oscillator(
    rho: TimeFunction,
    force: TimeFunction,
    window: (f64, f64),
) -> Result<FamilyInstance> {
    check_window(window)?;
    rho.check_nonzero(window, SINGULAR_MARGIN, "rho")?;

    let potential = {
        let rho = rho.clone();
        let force = force.clone();
        PotentialSpec::from_jet_fn(move |q, t| {
            let r = rho.eval_jet(Jet::t(t));
            if r.v.abs() < 1e-12 {
                return Err(Error::guard(q, 0.0, t));
            }
            let qj = Jet::q(q);
            let f_dot = force.jet_at(t, 1);
            let r_dd = rho.jet_at(t, 2);
            Ok(-(f_dot * qj) / r - r_dd * qj.sq() / (2.0 * r))
        })
    };

    let compat = {
        let rho = rho.clone();
        ScalarField::from_jet_fn(move |x| {
            let r = rho.eval_jet(Jet::t(x.t));
            if r.v.abs() < 1e-12 {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            Ok(rho.jet_at(x.t, 1) / r)
        })
    };

    let invariant = {
        let rho = rho.clone();
        let force = force.clone();
        ScalarField::from_jet_fn(move |x| {
            let tj = Jet::t(x.t);
            let r = rho.eval_jet(tj);
            let r_d = rho.jet_at(x.t, 1);
            Ok(r * Jet::p(x.p) - r_d * Jet::q(x.q) - force.eval_jet(tj))
        })
    };

    // characteristic variable f = p − ρ̇q/ρ obeying df/dt = Ḟ/ρ − (ρ̇/ρ)f
    let riccati = {
        let f_field = {
            let rho = rho.clone();
            ScalarField::from_jet_fn(move |x| {
                let r = rho.eval_jet(Jet::t(x.t));
                if r.v.abs() < 1e-12 {
                    return Err(Error::guard(x.q, x.p, x.t));
                }
                Ok(Jet::p(x.p) - rho.jet_at(x.t, 1) * Jet::q(x.q) / r)
            })
        };
        let rho = rho.clone();
        let force = force.clone();
        RiccatiSpec {
            f: f_field,
            rhs: Arc::new(move |f, t| {
                let r = rho.d(t, 0);
                force.d(t, 1) / r - rho.d(t, 1) / r * f
            }),
        }
    };

    Ok(FamilyInstance {
        label: FamilyLabel::ForcedOscillator,
        potential,
        compat,
        invariant: Some(invariant),
        window,
        aux: BTreeMap::new(),
        aux_odes: Vec::new(),
        riccati: Some(riccati),
        abel: None,
    })
}
