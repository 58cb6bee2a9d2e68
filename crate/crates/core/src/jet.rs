//! Second-order forward-mode differentiation in three variables.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to three independent variables. Arithmetic propagates both exactly
//! (up to round-off), so any closed-form expression written in `Jet`s yields
//! analytic first and second partials. Because the chain rule is built in,
//! feeding a metric a point whose coordinates are themselves `Jet`s in some
//! other variables (a chart) yields partials with respect to those variables.

use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub const ZERO: Jet = Jet::constant(0.0);
    pub const ONE: Jet = Jet::constant(1.0);

    pub const fn constant(v: f64) -> Self {
        Jet {
            v,
            d: [0.0; 3],
            h: [[0.0; 3]; 3],
        }
    }

    /// Independent variable number `k` with value `v`.
    pub fn variable(v: f64, k: usize) -> Self {
        let mut j = Jet::constant(v);
        j.d[k] = 1.0;
        j
    }

    /// Seeds a point as three independent variables.
    pub fn point(x: [f64; 3]) -> [Jet; 3] {
        [
            Jet::variable(x[0], 0),
            Jet::variable(x[1], 1),
            Jet::variable(x[2], 2),
        ]
    }

    pub fn constant_point(x: [f64; 3]) -> [Jet; 3] {
        [
            Jet::constant(x[0]),
            Jet::constant(x[1]),
            Jet::constant(x[2]),
        ]
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.v`.
    #[inline]
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Jet {
        let mut out = Jet::constant(f0);
        for i in 0..3 {
            out.d[i] = f1 * self.d[i];
            for j in 0..3 {
                out.h[i][j] = f1 * self.h[i][j] + f2 * (self.d[i] * self.d[j]);
            }
        }
        out
    }

    pub fn recip(self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sqrt(self) -> Jet {
        let s = math::sqrt(self.v);
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powf(self, p: f64) -> Jet {
        let f0 = math::powf(self.v, p);
        let f1 = p * math::powf(self.v, p - 1.0);
        let f2 = p * (p - 1.0) * math::powf(self.v, p - 2.0);
        self.chain(f0, f1, f2)
    }

    pub fn powi(self, n: i32) -> Jet {
        match n {
            0 => Jet::ONE,
            1 => self,
            2 => self * self,
            3 => self * self * self,
            4 => {
                let s = self * self;
                s * s
            }
            _ => self.powf(n as f64),
        }
    }

    pub fn exp(self) -> Jet {
        let e = math::exp(self.v);
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(math::ln(self.v), r, -r * r)
    }

    pub fn sin(self) -> Jet {
        let (s, c) = (math::sin(self.v), math::cos(self.v));
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = (math::sin(self.v), math::cos(self.v));
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Jet {
        let e = math::exp(self.v);
        let (s, c) = (0.5 * (e - 1.0 / e), 0.5 * (e + 1.0 / e));
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Jet {
        let e = math::exp(self.v);
        let (s, c) = (0.5 * (e - 1.0 / e), 0.5 * (e + 1.0 / e));
        self.chain(c, s, c)
    }

    pub fn scale(self, a: f64) -> Jet {
        let mut out = self;
        out.v *= a;
        for i in 0..3 {
            out.d[i] *= a;
            for j in 0..3 {
                out.h[i][j] *= a;
            }
        }
        out
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, o: Jet) -> Jet {
        self += o;
        self
    }
}

impl AddAssign for Jet {
    #[inline]
    fn add_assign(&mut self, o: Jet) {
        self.v += o.v;
        for i in 0..3 {
            self.d[i] += o.d[i];
            for j in 0..3 {
                self.h[i][j] += o.h[i][j];
            }
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, o: Jet) -> Jet {
        self -= o;
        self
    }
}

impl SubAssign for Jet {
    #[inline]
    fn sub_assign(&mut self, o: Jet) {
        self.v -= o.v;
        for i in 0..3 {
            self.d[i] -= o.d[i];
            for j in 0..3 {
                self.h[i][j] -= o.h[i][j];
            }
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..3 {
            out.d[i] = self.v * o.d[i] + o.v * self.d[i];
            for j in 0..3 {
                out.h[i][j] = (self.v * o.h[i][j] + o.v * self.h[i][j])
                    + (self.d[i] * o.d[j] + o.d[i] * self.d[j]);
            }
        }
        out
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, o: Jet) {
        *self = *self * o;
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, o: f64) -> Jet {
        self.v += o;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, o: f64) -> Jet {
        self.v -= o;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        self.scale(1.0 / o)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        o + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        (-o) + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        o.scale(self)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        o.recip().scale(self)
    }
}

/// Euclidean norm of a point given as jets.
pub fn norm(x: &[Jet; 3]) -> Jet {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(&[Jet; 3]) -> Jet, x: [f64; 3]) {
        let j = f(&Jet::point(x));
        let h = 1e-4;
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fp = f(&Jet::point(xp));
            let fm = f(&Jet::point(xm));
            let d = (fp.v - fm.v) / (2.0 * h);
            assert!(
                (d - j.d[k]).abs() < 1e-6 * (1.0 + d.abs()),
                "d{k}: {d} vs {}",
                j.d[k]
            );
            for l in 0..3 {
                let dd = (fp.d[l] - fm.d[l]) / (2.0 * h);
                assert!(
                    (dd - j.h[k][l]).abs() < 1e-6 * (1.0 + dd.abs()),
                    "h{k}{l}: {dd} vs {}",
                    j.h[k][l]
                );
            }
        }
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let x = [0.7, -1.3, 2.1];
        fd_check(|x| x[0] * x[1] / (x[2] + 3.0), x);
        fd_check(|x| norm(x).powf(-0.8), x);
        fd_check(|x| (x[0] * x[2]).sin() + (x[1]).cos() * x[0].exp(), x);
        fd_check(
            |x| (x[2] * 0.3).sinh() * (x[0] * 0.5).cosh() + (x[2] * x[2]).ln(),
            x,
        );
        fd_check(|x| (1.0 + 0.5 / norm(x)).powi(4), x);
    }

    #[test]
    fn hessian_is_symmetric() {
        let j = {
            let x = Jet::point([0.3, 0.4, 1.2]);
            (x[0] * x[1] * x[2]).exp() / norm(&x)
        };
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(j.h[i][k], j.h[k][i]);
            }
        }
    }
}
