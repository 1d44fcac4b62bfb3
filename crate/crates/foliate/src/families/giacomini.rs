//! Potentials transported along straight characteristics: V is constant on
//! the lines q − C₂(V)·t, so it solves V = W(q − C₂(V)t) with initial
//! profile V(q, 0) = W(q). Characteristics can cross; past a fold the value
//! is ambiguous and evaluation reports a shock instead of picking a branch.

use std::collections::BTreeMap;

use super::{cells_in_window, check_window, Aux, FamilyInstance, FamilyLabel, SINGULAR_MARGIN};
use crate::error::{Error, Result};
use crate::fields::{PotentialSpec, ScalarField};
use crate::funcat::SpaceProfile;
use crate::jet::Jet;
use crate::numerics::find_root;

/// Smallest admissible characteristic Jacobian D = 1 + W′(s)C₂′(V)t; at
/// D = 0 the implicit solution folds.
const DELTA_D: f64 = 1e-6;

const MAX_EXPANSIONS: u32 = 21;

/// V(q, t) from the implicit relation, following the branch continuously
/// connected to the initial profile.
///
/// The bracket search expands geometrically around the t = 0 value W(q).
/// Every root found is classified by its Jacobian D: the pre-fold branch has
/// D > 0 (D = 1 at t = 0 and only changes sign through a fold). Exactly one
/// admissible root wins; several signal crossed characteristics, none at all
/// means the point lies past a fold.
fn solve_implicit(w: &SpaceProfile, c2: &SpaceProfile, q: f64, t: f64) -> Result<f64> {
    let center = w.d(q, 0);
    if t == 0.0 {
        return Ok(center);
    }
    let g = |v: f64| v - w.d(q - c2.d(v, 0) * t, 0);
    let jac = |v: f64| {
        let s = q - c2.d(v, 0) * t;
        1.0 + w.d(s, 1) * c2.d(v, 1) * t
    };
    let scale = center.abs().max(1.0);
    let mut saw_root = false;
    for level in 0..=MAX_EXPANSIONS {
        let r = scale * 1e-4 * (1u64 << level) as f64;
        let mut roots: Vec<f64> = Vec::new();
        for cell in cells_in_window(&g, center, r) {
            let root = if cell.0 == cell.1 {
                cell.0
            } else {
                match find_root(&g, cell, 1e-13 * scale) {
                    Ok(root) => root,
                    Err(_) => continue,
                }
            };
            if !roots.iter().any(|x| (x - root).abs() <= 1e-8 * scale) {
                roots.push(root);
            }
        }
        if roots.is_empty() {
            continue;
        }
        saw_root = true;
        let passing: Vec<f64> = roots.into_iter().filter(|&v| jac(v) > DELTA_D).collect();
        match passing.len() {
            // the live branch may still lie outside this window
            0 => continue,
            1 => return Ok(passing[0]),
            _ => return Err(Error::Shock { q, t }),
        }
    }
    if saw_root {
        Err(Error::Shock { q, t })
    } else {
        let r_max = scale * 1e-4 * (1u64 << MAX_EXPANSIONS) as f64;
        Err(Error::NoBracket {
            lo: center - r_max,
            hi: center + r_max,
        })
    }
}

/// Jet of the implicit V at (q, t) by differentiating the defining relation:
/// with D = 1 + W′(s)C₂′(V)t and s = q − C₂(V)t,
///
///   V_q = W′/D,          V_t = −C₂·V_q,
///   V_qq = W″/D² − W′tA/D³,            A = W″C₂′ + W′²C₂″,
///   V_qt = −W″C₂/D² − W′D_t/D²,        D_t = W′C₂′ − tC₂A/D,
///   V_tt = C₂C₂′V_q² − C₂·V_qt.
fn implicit_jet(w: &SpaceProfile, c2: &SpaceProfile, q: f64, t: f64) -> Result<Jet> {
    let v = solve_implicit(w, c2, q, t)?;
    let c2v = c2.d(v, 0);
    let c2p = c2.d(v, 1);
    let c2pp = c2.d(v, 2);
    let s = q - c2v * t;
    let (w1, w2) = (w.d(s, 1), w.d(s, 2));
    let dd = 1.0 + w1 * c2p * t;
    if dd.abs() <= DELTA_D {
        return Err(Error::Shock { q, t });
    }
    let vq = w1 / dd;
    let vt = -c2v * vq;
    let a = w2 * c2p + w1 * w1 * c2pp;
    let d_t = w1 * c2p - t * c2v * a / dd;
    let vqq = w2 / (dd * dd) - w1 * t * a / (dd * dd * dd);
    let vqt = -(w2 * c2v + w1 * d_t) / (dd * dd);
    let vtt = c2v * c2p * vq * vq - c2v * vqt;
    Ok(Jet {
        v,
        dq: vq,
        dp: 0.0,
        dt: vt,
        dqq: vqq,
        dqp: 0.0,
        dqt: vqt,
        dpp: 0.0,
        dpt: 0.0,
        dtt: vtt,
    })
}

/// Build the characteristics-transport family for a profile speed C₂(V) and
/// initial profile W:
///
///   V = W(q − C₂(V)t)  (implicit),   C = −V_q / (p − C₂(V)).
///
/// When C₂ is a constant c the transport is explicit, V = W(q − ct), and the
/// family carries the invariant I = (p − c)²/2 + V; for genuinely
/// V-dependent speeds no closed-form invariant is attached.
pub fn giacomini(
    c2_of_v: SpaceProfile,
    w: SpaceProfile,
    window: (f64, f64),
) -> Result<FamilyInstance> {
    check_window(window)?;

    let instance = match c2_of_v.constant_value() {
        Some(c) => {
            let potential = {
                let w = w.clone();
                PotentialSpec::from_jet_fn(move |q, t| Ok(w.eval_jet(Jet::q(q) - Jet::t(t) * c)))
            };
            let compat = {
                let w = w.clone();
                ScalarField::from_jet_fn(move |x| {
                    if (x.p - c).abs() < SINGULAR_MARGIN {
                        return Err(Error::guard(x.q, x.p, x.t));
                    }
                    let w_prime = w.eval_jet_deriv(Jet::q(x.q) - Jet::t(x.t) * c, 1);
                    Ok(-(w_prime) / (Jet::p(x.p) - c))
                })
            };
            let invariant = {
                let w = w.clone();
                ScalarField::from_jet_fn(move |x| {
                    let shifted = (Jet::p(x.p) - c).sq() * 0.5;
                    Ok(shifted + w.eval_jet(Jet::q(x.q) - Jet::t(x.t) * c))
                })
            };
            let mut aux = BTreeMap::new();
            aux.insert("V", {
                let w = w.clone();
                Aux::state(move |x| Ok(w.d(x.q - c * x.t, 0)))
            });
            FamilyInstance {
                label: FamilyLabel::Giacomini,
                potential,
                compat,
                invariant: Some(invariant),
                window,
                aux,
                aux_odes: Vec::new(),
                riccati: None,
                abel: None,
            }
        }
        None => {
            let potential = {
                let w = w.clone();
                let c2 = c2_of_v.clone();
                PotentialSpec::from_jet_fn(move |q, t| implicit_jet(&w, &c2, q, t))
            };
            let compat = {
                let w = w.clone();
                let c2 = c2_of_v.clone();
                ScalarField::from_jet_fn(move |x| {
                    let vj = implicit_jet(&w, &c2, x.q, x.t)?;
                    let c2j = c2.eval_jet(vj);
                    if (x.p - c2j.v).abs() < SINGULAR_MARGIN {
                        return Err(Error::guard(x.q, x.p, x.t));
                    }
                    // Third derivatives of the implicit V are not assembled,
                    // so the quotient's unused curvature lanes are poisoned:
                    // an accidental read shows up as NaN, never as a number.
                    let vq_jet = Jet {
                        v: vj.dq,
                        dq: vj.dqq,
                        dp: 0.0,
                        dt: vj.dqt,
                        dqq: f64::NAN,
                        dqp: f64::NAN,
                        dqt: f64::NAN,
                        dpp: f64::NAN,
                        dpt: f64::NAN,
                        dtt: f64::NAN,
                    };
                    Ok(-(vq_jet) / (Jet::p(x.p) - c2j))
                })
            };
            let mut aux = BTreeMap::new();
            aux.insert("V", {
                let w = w.clone();
                let c2 = c2_of_v.clone();
                Aux::state(move |x| solve_implicit(&w, &c2, x.q, x.t))
            });
            FamilyInstance {
                label: FamilyLabel::Giacomini,
                potential,
                compat,
                invariant: None,
                window,
                aux,
                aux_odes: Vec::new(),
                riccati: None,
                abel: None,
            }
        }
    };
    Ok(instance)
}
