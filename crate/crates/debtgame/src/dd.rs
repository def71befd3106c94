//! Double-double arithmetic (~31 significant digits).
//!
//! The best-response equations are evaluated at threshold ratios up to
//! `1e4`, where the residual functions have slopes around `1e15`: the nearest
//! representable `f64` to the root already carries a residual of order `1e-2`.
//! Meeting the `1e-12`-scale residual contracts therefore requires locating
//! and evaluating roots in extended precision. This module provides the
//! minimal double-double kit used by the solvers: field operations, `sqrt`,
//! `exp`, `ln` and `powf`, following the classic error-free transformation
//! algorithms (Dekker/Knuth two-sum and two-product, Karp square root, and
//! the scaled-Taylor exponential with Newton logarithm).
//!
//! Accuracy is verified in the tests against 40-digit references; the
//! transcendental functions are good to a few units in the 30th digit, far
//! beyond what the residual contracts need.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A double-double value `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    debug_assert!(a == 0.0 || a.abs() >= b.abs() || !a.is_finite());
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// ln 2 to double-double precision (the hi part is the f64 nearest
    /// ln 2 by construction, not an approximation of it).
    #[allow(clippy::approx_constant)]
    const LN2: Dd = Dd {
        hi: 0.693_147_180_559_945_3,
        lo: 2.319_046_813_846_299_6e-17,
    };
    /// Effective unit roundoff, 2^-104.
    const EPS: f64 = 4.93e-32;

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Multiply by an exact power of two (error free).
    #[inline]
    pub(crate) fn mul_pwr2(self, k: f64) -> Dd {
        Dd {
            hi: self.hi * k,
            lo: self.lo * k,
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        assert!(self.hi > 0.0, "sqrt of negative double-double");
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let err = (self - Dd::from(ax) * Dd::from(ax)).hi;
        Dd::new(ax, err * (x * 0.5))
    }

    /// Exponential via argument reduction `exp(r)^512 * 2^m`.
    pub fn exp(self) -> Dd {
        if self.hi <= -709.0 {
            return Dd::ZERO;
        }
        if self.hi >= 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let m = (self.hi / Dd::LN2.hi + 0.5).floor();
        let r = (self - Dd::LN2 * Dd::from(m)).mul_pwr2(1.0 / 512.0);

        // Taylor series of exp(r) - 1 for |r| <= ln2/1024. Factorials up to
        // 18! are exact in f64, so dividing keeps each term at full
        // double-double accuracy (a rounded reciprocal would not).
        let mut p = r * r;
        let mut s = r + p.mul_pwr2(0.5);
        p = p * r;
        let mut t = p / Dd::from(6.0);
        let mut fact = 6.0;
        let mut order = 3.0;
        loop {
            s = s + t;
            p = p * r;
            order += 1.0;
            fact *= order;
            t = p / Dd::from(fact);
            if t.hi.abs() <= Dd::EPS / 512.0 || order >= 18.0 {
                break;
            }
        }
        s = s + t;

        // Nine squarings undo the 1/512 scaling: s <- (1+s)^2 - 1.
        for _ in 0..9 {
            s = s.mul_pwr2(2.0) + s * s;
        }
        s = s + Dd::ONE;
        let scale = libm::ldexp(1.0, m as i32);
        Dd::new(s.hi * scale, s.lo * scale)
    }

    /// Natural logarithm via one f64 seed plus two Newton corrections.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        if self == Dd::ONE {
            return Dd::ZERO;
        }
        let mut x = Dd::from(self.hi.ln());
        // x_{k+1} = x_k + a * exp(-x_k) - 1
        for _ in 0..2 {
            x = x + self * (-x).exp() - Dd::ONE;
        }
        x
    }

    pub fn powf(self, y: Dd) -> Dd {
        (y * self.ln()).exp()
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2b) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2b + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let mut r = self - rhs * Dd::from(q1);
        let q2 = r.hi / rhs.hi;
        r = r - rhs * Dd::from(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e + q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}
