//! Weakly integrable family generated by the linear implicit profile
//! F(s) = s/k: the transport speed has the closed form Q = q/(ρ(T+k)) with
//! T = ∫₀ᵗ dt′/ρ², and the potential is organized by the rescaled
//! coordinate q̄ = q/(ρE), E = (T+k)/k. Its characteristic equation at
//! frozen time is a second-kind Abel equation, so no closed-form invariant
//! is attached.

use std::collections::BTreeMap;

use super::{
    check_window, t_integral, t_integral_jet, t_integral_ode, Aux, FamilyInstance, FamilyLabel,
    SINGULAR_MARGIN,
};
use crate::error::{Error, Result};
use crate::fields::{PotentialSpec, ScalarField};
use crate::funcat::{SpaceProfile, TimeFunction};
use crate::jet::Jet;
use crate::numerics::{quad, AuxOde};

/// Absolute tolerance of the Γ quadrature (one level above the clock
/// quadrature it nests).
const GAMMA_QUAD_TOL: f64 = 1e-12;

/// Integrand of P(t) = ∫₀ᵗ ρ⁴E²G dt′ with G = ρ⃛/ρ + 3ρ̇ρ̈/ρ² + 2ρ̈/(ρ³(T+k)).
/// A failed inner clock quadrature poisons the value; the outer quadrature
/// then reports its subdivision limit instead of returning garbage.
fn p_integrand(rho: &TimeFunction, k: f64, s: f64) -> f64 {
    let Ok(ti) = t_integral(rho, s) else {
        return f64::NAN;
    };
    let r = rho.d(s, 0);
    let (r1, r2, r3) = (rho.d(s, 1), rho.d(s, 2), rho.d(s, 3));
    let tk = ti + k;
    let e = tk / k;
    let g = r3 / r + 3.0 * r1 * r2 / (r * r) + 2.0 * r2 / (r * r * r) / tk;
    r.powi(4) * e * e * g
}

fn p_integral(rho: &TimeFunction, k: f64, t: f64) -> Result<f64> {
    quad(&|s| p_integrand(rho, k, s), 0.0, t, GAMMA_QUAD_TOL)
}

/// The P integrand lifted to a jet in t (used for Γ's time derivatives).
fn p_integrand_jet(rho: &TimeFunction, k: f64, t: f64) -> Result<Jet> {
    let r = rho.eval_jet(Jet::t(t));
    let (r1, r2, r3) = (rho.jet_at(t, 1), rho.jet_at(t, 2), rho.jet_at(t, 3));
    let tk = t_integral_jet(rho, t)? + k;
    let e = tk / k;
    let g = r3 / r + 3.0 * r1 * r2 / r.sq() + 2.0 * r2 / (r * r.sq()) * tk.recip();
    Ok(r.sq().sq() * e.sq() * g)
}

fn gamma_value(rho: &TimeFunction, k: f64, t: f64) -> Result<f64> {
    let p = p_integral(rho, k, t)?;
    let r = rho.d(t, 0);
    Ok(-p / (2.0 * r * r))
}

/// Γ(t) = −P(t)/(2ρ²) as a jet: the value comes from quadrature, the time
/// derivatives from P′ = ρ⁴E²G evaluated exactly at t.
fn gamma_jet(rho: &TimeFunction, k: f64, t: f64) -> Result<Jet> {
    let integrand = p_integrand_jet(rho, k, t)?;
    let mut p_jet = Jet::val(p_integral(rho, k, t)?);
    p_jet.dt = integrand.v;
    p_jet.dtt = integrand.dt;
    let r = rho.eval_jet(Jet::t(t));
    Ok(-(p_jet) / (2.0 * r.sq()))
}

/// The family's defining functions, frozen duplicates of which drive the
/// characteristic-slope check.
pub struct AbelSpec {
    pub k: f64,
    rho: TimeFunction,
    u: SpaceProfile,
}

/// Scalar data of the family at one frozen instant.
#[derive(Debug, Clone, Copy)]
pub struct AbelFrozen {
    pub t: f64,
    pub rho: f64,
    pub rho_d: f64,
    pub rho_dd: f64,
    pub t_int: f64,
    pub e: f64,
    pub gamma: f64,
}

impl AbelSpec {
    pub fn frozen(&self, t: f64) -> Result<AbelFrozen> {
        let t_int = t_integral(&self.rho, t)?;
        let tk = t_int + self.k;
        if tk.abs() < SINGULAR_MARGIN || tk.signum() != self.k.signum() {
            return Err(Error::guard(f64::NAN, f64::NAN, t));
        }
        Ok(AbelFrozen {
            t,
            rho: self.rho.d(t, 0),
            rho_d: self.rho.d(t, 1),
            rho_dd: self.rho.d(t, 2),
            t_int,
            e: tk / self.k,
            gamma: gamma_value(&self.rho, self.k, t)?,
        })
    }

    /// Physical coordinate of a transformed q̄ at the frozen instant.
    pub fn q_of(&self, fz: &AbelFrozen, q_bar: f64) -> f64 {
        q_bar * fz.rho * fz.e
    }

    /// Physical momentum recovering a transformed p̄ at coordinate q.
    pub fn p_of(&self, fz: &AbelFrozen, q: f64, p_bar: f64) -> f64 {
        (p_bar + fz.rho_d * q + q / (fz.rho * (fz.t_int + self.k))) / fz.rho
    }

    /// Slope dp̄/dq̄ of the frozen-time characteristic
    ///
    ///   p̄ dp̄/dq̄ + E p̄/(T+k) + ρ³ρ̈E²q̄ + 2ρ²Γq̄ + U′(q̄) = 0.
    pub fn slope(&self, fz: &AbelFrozen, q_bar: f64, p_bar: f64) -> Result<f64> {
        if p_bar.abs() < SINGULAR_MARGIN {
            return Err(Error::guard(q_bar, p_bar, fz.t));
        }
        let num = fz.e / (fz.t_int + self.k) * p_bar
            + fz.rho.powi(3) * fz.rho_dd * fz.e * fz.e * q_bar
            + 2.0 * fz.rho * fz.rho * fz.gamma * q_bar
            + self.u.d(q_bar, 1);
        Ok(-num / p_bar)
    }
}

/// Build the F(s) = s/k family
///
///   V = Γ(t)q̄² + U(q̄)/ρ²,   q̄ = q/(ρE),   E = (T+k)/k,
///   C = ρ̇/ρ − (ρV_q + ρ̈q)/p̄,   p̄ = ρp − ρ̇q − q/(ρ(T+k)),
///
/// with Γ the quadrature above. Requires k ≠ 0, ρ bounded away from zero on
/// the window, and T+k keeping the sign of k there.
pub fn abel_family(
    rho: TimeFunction,
    k: f64,
    u: SpaceProfile,
    window: (f64, f64),
) -> Result<FamilyInstance> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "k must be a nonzero finite constant, got {k}"
        )));
    }
    check_window(window)?;
    rho.check_nonzero(window, SINGULAR_MARGIN, "rho")?;
    // T is monotone, so sign and margin at the endpoints bound the interior.
    for t_end in [window.0, window.1] {
        let tk = t_integral(&rho, t_end)? + k;
        if tk.abs() < SINGULAR_MARGIN || tk.signum() != k.signum() {
            return Err(Error::Construction(format!(
                "T + k must keep the sign of k and stay off zero on the window: \
                 at t = {t_end}, T + k = {tk:.6e} with k = {k}"
            )));
        }
    }

    // shared guard: ρ away from zero pointwise, T+k on k's side of zero
    let time_slice = {
        let rho = rho.clone();
        move |q: f64, p: f64, t: f64| -> Result<(Jet, Jet)> {
            let r = rho.eval_jet(Jet::t(t));
            if r.v.abs() < 1e-12 {
                return Err(Error::guard(q, p, t));
            }
            let tk = t_integral_jet(&rho, t)? + k;
            if tk.v.abs() < SINGULAR_MARGIN || tk.v.signum() != k.signum() {
                return Err(Error::guard(q, p, t));
            }
            Ok((r, tk))
        }
    };

    let potential = {
        let rho = rho.clone();
        let u = u.clone();
        let time_slice = time_slice.clone();
        PotentialSpec::from_jet_fn(move |q, t| {
            let (r, tk) = time_slice(q, 0.0, t)?;
            let e = tk / k;
            let q_bar = Jet::q(q) / (r * e);
            let gam = gamma_jet(&rho, k, t)?;
            Ok(gam * q_bar.sq() + u.eval_jet(q_bar) / r.sq())
        })
    };

    let compat = {
        let rho = rho.clone();
        let u = u.clone();
        let time_slice = time_slice.clone();
        ScalarField::from_jet_fn(move |x| {
            let (r, tk) = time_slice(x.q, x.p, x.t)?;
            let qj = Jet::q(x.q);
            let r1 = rho.jet_at(x.t, 1);
            let p_bar = r * Jet::p(x.p) - r1 * qj - qj / (r * tk);
            if p_bar.v.abs() < SINGULAR_MARGIN {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            let e = tk / k;
            let q_bar = qj / (r * e);
            let gam = gamma_jet(&rho, k, x.t)?;
            let v_q = (2.0 * gam * q_bar + u.eval_jet_deriv(q_bar, 1) / r.sq()) * (r * e).recip();
            Ok(r1 / r - (r * v_q + rho.jet_at(x.t, 2) * qj) / p_bar)
        })
    };

    let mut aux = BTreeMap::new();
    aux.insert("T", {
        let rho = rho.clone();
        Aux::time(move |t| t_integral(&rho, t))
    });
    aux.insert("E", {
        let rho = rho.clone();
        Aux::time(move |t| Ok((t_integral(&rho, t)? + k) / k))
    });
    aux.insert("Gamma", {
        let rho = rho.clone();
        Aux::time(move |t| gamma_value(&rho, k, t))
    });
    aux.insert("Q", {
        let rho = rho.clone();
        Aux::state(move |x| {
            let r = rho.d(x.t, 0);
            let tk = t_integral(&rho, x.t)? + k;
            if r.abs() < 1e-12 || tk.abs() < SINGULAR_MARGIN {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            Ok(x.q / (r * tk))
        })
    });
    aux.insert("q_bar", {
        let rho = rho.clone();
        Aux::state(move |x| {
            let r = rho.d(x.t, 0);
            let tk = t_integral(&rho, x.t)? + k;
            if r.abs() < 1e-12 || tk.abs() < SINGULAR_MARGIN {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            Ok(x.q / (r * tk / k))
        })
    });
    aux.insert("p_bar", {
        let rho = rho.clone();
        Aux::state(move |x| {
            let r = rho.d(x.t, 0);
            let tk = t_integral(&rho, x.t)? + k;
            if r.abs() < 1e-12 || tk.abs() < SINGULAR_MARGIN {
                return Err(Error::guard(x.q, x.p, x.t));
            }
            Ok(r * x.p - rho.d(x.t, 1) * x.q - x.q / (r * tk))
        })
    });

    // co-integrated clock and Γ numerator: P′ = ρ⁴E²G reads the clock slot
    let p_ode = AuxOde::new(
        "P",
        {
            let rho = rho.clone();
            move |t0| p_integral(&rho, k, t0).unwrap_or(f64::NAN)
        },
        {
            let rho = rho.clone();
            move |t, _, _, aux: &[f64]| {
                let ti = aux[0];
                let r = rho.d(t, 0);
                let (r1, r2, r3) = (rho.d(t, 1), rho.d(t, 2), rho.d(t, 3));
                let tk = ti + k;
                let e = tk / k;
                let g = r3 / r + 3.0 * r1 * r2 / (r * r) + 2.0 * r2 / (r * r * r) / tk;
                r.powi(4) * e * e * g
            }
        },
    );

    Ok(FamilyInstance {
        label: FamilyLabel::Abel,
        potential,
        compat,
        invariant: None,
        window,
        aux,
        aux_odes: vec![t_integral_ode(rho.clone()), p_ode],
        riccati: None,
        abel: Some(AbelSpec { k, rho, u }),
    })
}
