//! Second-order forward-mode jets over extended phase space (q, p, t).
//!
//! A [`Jet`] carries a value, its gradient, and its Hessian with respect to
//! the three coordinates. Building a scalar expression out of jets yields
//! machine-exact partial derivatives, which is what the residual and
//! conservation checks in this crate rely on: no finite differences on the
//! analytic evaluation path.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient, and symmetric Hessian of a scalar at a point of (q, p, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub dq: f64,
    pub dp: f64,
    pub dt: f64,
    pub dqq: f64,
    pub dqp: f64,
    pub dqt: f64,
    pub dpp: f64,
    pub dpt: f64,
    pub dtt: f64,
}

impl Jet {
    /// Constant: zero gradient and Hessian.
    pub const fn val(v: f64) -> Self {
        Jet {
            v,
            dq: 0.0,
            dp: 0.0,
            dt: 0.0,
            dqq: 0.0,
            dqp: 0.0,
            dqt: 0.0,
            dpp: 0.0,
            dpt: 0.0,
            dtt: 0.0,
        }
    }

    /// The coordinate q seeded at value `x`.
    pub const fn q(x: f64) -> Self {
        let mut j = Jet::val(x);
        j.dq = 1.0;
        j
    }

    /// The coordinate p seeded at value `x`.
    pub const fn p(x: f64) -> Self {
        let mut j = Jet::val(x);
        j.dp = 1.0;
        j
    }

    /// The coordinate t seeded at value `x`.
    pub const fn t(x: f64) -> Self {
        let mut j = Jet::val(x);
        j.dt = 1.0;
        j
    }

    /// Lift a value with known first partials; Hessian slots are zeroed.
    pub const fn with_grad(v: f64, dq: f64, dp: f64, dt: f64) -> Self {
        Jet {
            v,
            dq,
            dp,
            dt,
            dqq: 0.0,
            dqp: 0.0,
            dqt: 0.0,
            dpp: 0.0,
            dpt: 0.0,
            dtt: 0.0,
        }
    }

    /// Composition with a scalar function given its value and first two
    /// derivatives at `self.v`.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let x = self;
        Jet {
            v: f0,
            dq: f1 * x.dq,
            dp: f1 * x.dp,
            dt: f1 * x.dt,
            dqq: f2 * x.dq * x.dq + f1 * x.dqq,
            dqp: f2 * x.dq * x.dp + f1 * x.dqp,
            dqt: f2 * x.dq * x.dt + f1 * x.dqt,
            dpp: f2 * x.dp * x.dp + f1 * x.dpp,
            dpt: f2 * x.dp * x.dt + f1 * x.dpt,
            dtt: f2 * x.dt * x.dt + f1 * x.dtt,
        }
    }

    pub fn recip(self) -> Self {
        let v = self.v;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let v = self.v;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * r * r))
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Jet::val(1.0),
            1 => self,
            _ => {
                let v = self.v;
                let f0 = v.powi(n);
                let f1 = f64::from(n) * v.powi(n - 1);
                let f2 = f64::from(n) * f64::from(n - 1) * v.powi(n - 2);
                self.chain(f0, f1, f2)
            }
        }
    }

    /// Squared value; avoids the powi dispatch in hot expressions.
    pub fn sq(self) -> Self {
        self * self
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            dq: self.dq + o.dq,
            dp: self.dp + o.dp,
            dt: self.dt + o.dt,
            dqq: self.dqq + o.dqq,
            dqp: self.dqp + o.dqp,
            dqt: self.dqt + o.dqt,
            dpp: self.dpp + o.dpp,
            dpt: self.dpt + o.dpt,
            dtt: self.dtt + o.dtt,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            dq: self.dq - o.dq,
            dp: self.dp - o.dp,
            dt: self.dt - o.dt,
            dqq: self.dqq - o.dqq,
            dqp: self.dqp - o.dqp,
            dqt: self.dqt - o.dqt,
            dpp: self.dpp - o.dpp,
            dpt: self.dpt - o.dpt,
            dtt: self.dtt - o.dtt,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let a = self;
        let b = o;
        Jet {
            v: a.v * b.v,
            dq: a.dq * b.v + a.v * b.dq,
            dp: a.dp * b.v + a.v * b.dp,
            dt: a.dt * b.v + a.v * b.dt,
            dqq: a.dqq * b.v + 2.0 * a.dq * b.dq + a.v * b.dqq,
            dqp: a.dqp * b.v + a.dq * b.dp + a.dp * b.dq + a.v * b.dqp,
            dqt: a.dqt * b.v + a.dq * b.dt + a.dt * b.dq + a.v * b.dqt,
            dpp: a.dpp * b.v + 2.0 * a.dp * b.dp + a.v * b.dpp,
            dpt: a.dpt * b.v + a.dp * b.dt + a.dt * b.dp + a.v * b.dpt,
            dtt: a.dtt * b.v + 2.0 * a.dt * b.dt + a.v * b.dtt,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)] // a / b computed as a * b^-1
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            dq: -self.dq,
            dp: -self.dp,
            dt: -self.dt,
            dqq: -self.dqq,
            dqp: -self.dqp,
            dqt: -self.dqt,
            dpp: -self.dpp,
            dpt: -self.dpt,
            dtt: -self.dtt,
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        let mut j = self;
        j.v += c;
        j
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        let mut j = self;
        j.v -= c;
        j
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        Jet {
            v: self.v * c,
            dq: self.dq * c,
            dp: self.dp * c,
            dt: self.dt * c,
            dqq: self.dqq * c,
            dqp: self.dqp * c,
            dqt: self.dqt * c,
            dpp: self.dpp * c,
            dpt: self.dpt * c,
            dtt: self.dtt * c,
        }
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j * self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)] // c / j computed as j^-1 * c
    fn div(self, j: Jet) -> Jet {
        j.recip() * self
    }
}
