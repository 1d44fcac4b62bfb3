//! Closed catalog of smooth scalar functions used as family inputs.
//!
//! Every time-dependent coefficient (a scaling factor, a drive, a gauge term)
//! and every spatial profile (a potential shape, a momentum-shift law) is one
//! of four analytic forms. Restricting to this catalog keeps every derivative
//! the construction needs exact: no symbolic engine, no divided differences
//! on the inputs.

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Analytic form shared by time functions and space profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum FnKind {
    /// f(x) = c
    Constant(f64),
    /// f(x) = a0 + a1 x + ... + an x^n, coefficients in ascending order
    Polynomial(Vec<f64>),
    /// f(x) = a + b cos(omega x + phi)
    Trigonometric {
        a: f64,
        b: f64,
        omega: f64,
        phi: f64,
    },
    /// f(x) = a e^(lambda x)
    Exponential { a: f64, lambda: f64 },
}

impl FnKind {
    /// Exact n-th derivative at `x`, any order. Internal: the public wrappers
    /// cap the order so callers cannot silently depend on smoothness beyond
    /// what the constructions are specified to use.
    fn deriv_any(&self, x: f64, n: u32) -> f64 {
        match self {
            FnKind::Constant(c) => {
                if n == 0 {
                    *c
                } else {
                    0.0
                }
            }
            FnKind::Polynomial(coeffs) => {
                let mut acc = 0.0;
                for (k, &a) in coeffs.iter().enumerate().skip(n as usize) {
                    // falling factorial k (k-1) ... (k-n+1)
                    let mut fall = 1.0;
                    for j in 0..n as usize {
                        fall *= (k - j) as f64;
                    }
                    acc += a * fall * x.powi((k - n as usize) as i32);
                }
                acc
            }
            FnKind::Trigonometric { a, b, omega, phi } => {
                let theta = omega * x + phi;
                if n == 0 {
                    return a + b * theta.cos();
                }
                let scale = b * omega.powi(n as i32);
                // d/dx rotates the phase by a quarter period each order
                match n % 4 {
                    0 => scale * theta.cos(),
                    1 => -scale * theta.sin(),
                    2 => -scale * theta.cos(),
                    _ => scale * theta.sin(),
                }
            }
            FnKind::Exponential { a, lambda } => a * lambda.powi(n as i32) * (lambda * x).exp(),
        }
    }

    /// Lift through a jet argument: value and first two derivatives at the
    /// jet's value, chained onto the jet's own partials.
    fn eval_jet(&self, x: Jet) -> Jet {
        self.jet_deriv(x, 0)
    }

    /// Lift the n-th derivative (itself treated as a function) through a jet
    /// argument. Orders n..n+2 of the underlying function are used; they are
    /// exact for every catalog kind at any order.
    fn jet_deriv(&self, x: Jet, n: u32) -> Jet {
        let f0 = self.deriv_any(x.v, n);
        let f1 = self.deriv_any(x.v, n + 1);
        let f2 = self.deriv_any(x.v, n + 2);
        x.chain(f0, f1, f2)
    }

    /// True when the first derivative vanishes identically (the function is
    /// constant as a map, whatever its printed form).
    fn derivative_identically_zero(&self) -> bool {
        match self {
            FnKind::Constant(_) => true,
            FnKind::Polynomial(coeffs) => coeffs.iter().skip(1).all(|&a| a == 0.0),
            FnKind::Trigonometric { b, omega, .. } => *b == 0.0 || *omega == 0.0,
            FnKind::Exponential { a, lambda } => *a == 0.0 || *lambda == 0.0,
        }
    }

    /// The constant value, when the function is constant.
    fn constant_value(&self) -> Option<f64> {
        if !self.derivative_identically_zero() {
            return None;
        }
        Some(self.deriv_any(0.0, 0))
    }
}

/// Number of sample points used when screening a coefficient over a window.
const NONZERO_SAMPLES: usize = 1024;

fn check_nonzero_on(kind: &FnKind, window: (f64, f64), delta: f64, role: &str) -> Result<()> {
    let (a, b) = window;
    for i in 0..=NONZERO_SAMPLES {
        let t = a + (b - a) * (i as f64) / (NONZERO_SAMPLES as f64);
        let v = kind.deriv_any(t, 0);
        if v.abs() < delta {
            return Err(Error::Construction(format!(
                "{role} must stay bounded away from zero on [{a}, {b}]: |{role}({t})| = {:.3e} < {delta:.1e}",
                v.abs()
            )));
        }
    }
    Ok(())
}

/// A smooth function of time drawn from the catalog. Derivatives up to third
/// order are available, which covers every construction in the library (the
/// steepest need is the triple derivative of a scaling factor).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFunction(pub FnKind);

impl TimeFunction {
    pub const MAX_ORDER: u32 = 3;

    pub fn constant(c: f64) -> Self {
        TimeFunction(FnKind::Constant(c))
    }

    /// n-th derivative at `t`; `order` 0 is the value itself.
    pub fn eval(&self, t: f64, order: u32) -> Result<f64> {
        if order > Self::MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                what: "time function",
                order,
                max: Self::MAX_ORDER,
            });
        }
        Ok(self.0.deriv_any(t, order))
    }

    /// Infallible access for orders the library itself needs (callers inside
    /// the crate never exceed the cap).
    pub(crate) fn d(&self, t: f64, order: u32) -> f64 {
        debug_assert!(order <= Self::MAX_ORDER);
        self.0.deriv_any(t, order)
    }

    /// Evaluate on a jet argument (typically `Jet::t(t)` or an expression in t).
    pub(crate) fn eval_jet(&self, x: Jet) -> Jet {
        self.0.eval_jet(x)
    }

    /// Jet of the n-th derivative as a function of time, seeded at bare `t`.
    /// This is how field constructions obtain, say, the second derivative of
    /// a scaling factor together with its own time slope.
    pub(crate) fn jet_at(&self, t: f64, n: u32) -> Jet {
        self.0.jet_deriv(Jet::t(t), n)
    }

    pub fn derivative_identically_zero(&self) -> bool {
        self.0.derivative_identically_zero()
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.0.constant_value()
    }

    /// Screen the function against a zero crossing over `window` by dense
    /// sampling. Used for coefficients that appear in denominators.
    pub fn check_nonzero(&self, window: (f64, f64), delta: f64, role: &str) -> Result<()> {
        check_nonzero_on(&self.0, window, delta, role)
    }
}

/// A smooth function of a single spatial variable drawn from the catalog.
/// Derivatives up to second order are available (potential shapes enter the
/// constructions through their slope and curvature).
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceProfile(pub FnKind);

impl SpaceProfile {
    pub const MAX_ORDER: u32 = 2;

    pub fn constant(c: f64) -> Self {
        SpaceProfile(FnKind::Constant(c))
    }

    /// n-th derivative at `x`; `order` 0 is the value itself.
    pub fn eval(&self, x: f64, order: u32) -> Result<f64> {
        if order > Self::MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                what: "space profile",
                order,
                max: Self::MAX_ORDER,
            });
        }
        Ok(self.0.deriv_any(x, order))
    }

    pub(crate) fn d(&self, x: f64, order: u32) -> f64 {
        debug_assert!(order <= Self::MAX_ORDER);
        self.0.deriv_any(x, order)
    }

    pub(crate) fn eval_jet(&self, x: Jet) -> Jet {
        self.0.eval_jet(x)
    }

    /// Jet of the n-th derivative as a function of its argument; used where a
    /// construction needs the slope of a profile's slope along a moving frame.
    pub(crate) fn eval_jet_deriv(&self, x: Jet, n: u32) -> Jet {
        self.0.jet_deriv(x, n)
    }

    pub fn derivative_identically_zero(&self) -> bool {
        self.0.derivative_identically_zero()
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.0.constant_value()
    }
}
