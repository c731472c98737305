//! Outward-rounded interval arithmetic on binary64 with lossless text forms.

mod decimal;
mod hex;
mod linalg;
mod rounding;

pub use decimal::parse_decimal;
pub use hex::{format_hex, parse_hex};
pub use linalg::{affine_image, invert_affine, IMatrix, IVector};

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("division by an interval containing zero: {0}")]
    DivisionByZero(Interval),
    #[error("cannot parse decimal literal `{0}`")]
    BadDecimal(String),
    #[error("cannot parse hexadecimal float `{0}`")]
    BadHex(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not certifiably invertible")]
    Singular,
}

/// A closed interval `[lo, hi]` with `lo <= hi`.
///
/// There is no empty value: operations that may produce an empty set return
/// `Option<Interval>` instead.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    /// Panics if `lo > hi` or either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval bounds [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    /// The symmetric interval `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        Interval::new(-r.abs(), r.abs())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// A representable point inside the interval.
    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        if self.lo.is_infinite() || self.hi.is_infinite() {
            if self.lo.is_finite() {
                return self.lo;
            }
            if self.hi.is_finite() {
                return self.hi;
            }
            return 0.0;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> f64 {
        rounding::sub(self.hi, self.lo).1
    }

    /// Upper bound on the distance from `mid()` to either endpoint.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        rounding::sub(self.hi, m).1.max(rounding::sub(m, self.lo).1)
    }

    /// Largest absolute value.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// Closed inclusion `other ⊆ self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Strict inclusion of `other` in the interior of `self`.
    pub fn interior_encloses(&self, other: &Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn precedes(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn hull_point(&self, x: f64) -> Interval {
        Interval { lo: self.lo.min(x), hi: self.hi.max(x) }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::try_new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Widen by `r` on both sides, rounding outward.
    pub fn inflate(&self, r: f64) -> Interval {
        Interval { lo: rounding::sub(self.lo, r).0, hi: rounding::add(self.hi, r).1 }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval { lo: rounding::mul(a.lo, a.lo).0, hi: rounding::mul(a.hi, a.hi).1 }
    }

    pub fn powi(&self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => *self,
            _ if n.is_multiple_of(2) => self.powi(n / 2).sqr(),
            _ => {
                // odd powers are monotone
                let pow = |x: f64| {
                    let p = Interval::point(x);
                    let mut acc = p;
                    for _ in 1..n {
                        acc = acc * p;
                    }
                    acc
                };
                Interval { lo: pow(self.lo).lo, hi: pow(self.hi).hi }
            }
        }
    }

    pub fn recip(&self) -> Result<Interval, IntervalError> {
        Interval::ONE.div(self)
    }

    pub fn div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZero(*rhs));
        }
        let cands = [
            rounding::div(self.lo, rhs.lo),
            rounding::div(self.lo, rhs.hi),
            rounding::div(self.hi, rhs.lo),
            rounding::div(self.hi, rhs.hi),
        ];
        Ok(Interval::from_brackets(&cands))
    }

    /// Division by a positive integer, which is common in Taylor recursions.
    pub fn div_int(&self, k: u32) -> Interval {
        let k = k as f64;
        Interval { lo: rounding::div(self.lo, k).0, hi: rounding::div(self.hi, k).1 }
    }

    pub fn scale(&self, c: f64) -> Interval {
        *self * Interval::point(c)
    }

    /// Rigorous enclosure of the exponential.
    pub fn exp(&self) -> Interval {
        Interval { lo: exp_point(self.lo).lo, hi: exp_point(self.hi).hi }
    }

    fn from_brackets(c: &[(f64, f64); 4]) -> Interval {
        let lo = c[0].0.min(c[1].0).min(c[2].0).min(c[3].0);
        let hi = c[0].1.max(c[1].1).max(c[2].1).max(c[3].1);
        Interval { lo, hi }
    }

    /// `[lo_hex, hi_hex]`, exact and round-trippable.
    pub fn to_hex(&self) -> String {
        format!("[{},{}]", format_hex(self.lo), format_hex(self.hi))
    }

    pub fn from_hex(s: &str) -> Result<Interval, IntervalError> {
        let bad = || IntervalError::BadHex(s.to_string());
        let t = s.trim();
        let inner = t.strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let lo = parse_hex(a.trim())?;
        let hi = parse_hex(b.trim())?;
        Interval::try_new(lo, hi).ok_or_else(bad)
    }
}

fn exp_point(x: f64) -> Interval {
    if x.is_nan() {
        return Interval::ENTIRE;
    }
    if x == f64::NEG_INFINITY || x < -745.2 {
        return Interval::new(0.0, f64::MIN_POSITIVE);
    }
    if x == f64::INFINITY || x > 709.8 {
        return Interval::new(f64::MAX, f64::INFINITY);
    }
    if x == 0.0 {
        return Interval::ONE;
    }
    let mut s = 0;
    let mut y = x;
    while y.abs() > 0.5 {
        y *= 0.5;
        s += 1;
    }
    let yi = Interval::point(y);
    let mut sum = Interval::ONE;
    let mut term = Interval::ONE;
    let n = 24;
    for k in 1..=n {
        term = (term * yi).div_int(k);
        sum += term;
    }
    // |tail| <= |y|^(n+1)/(n+1)! * 1/(1 - |y|/(n+2)) <= 2 |term| |y| / (n+1)
    let tail = (term.abs() * yi.abs()).div_int(n + 1).scale(2.0);
    sum += Interval::new(-tail.hi, tail.hi);
    for _ in 0..s {
        sum = sum.sqr();
    }
    Interval { lo: sum.lo.max(0.0), hi: sum.hi }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval { lo: rounding::add(self.lo, rhs.lo).0, hi: rounding::add(self.hi, rhs.hi).1 }
    }
}

impl AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval { lo: rounding::sub(self.lo, rhs.hi).0, hi: rounding::sub(self.hi, rhs.lo).1 }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self.lo >= 0.0 && rhs.lo >= 0.0 {
            return Interval {
                lo: rounding::mul(self.lo, rhs.lo).0,
                hi: rounding::mul(self.hi, rhs.hi).1,
            };
        }
        let cands = [
            rounding::mul(self.lo, rhs.lo),
            rounding::mul(self.lo, rhs.hi),
            rounding::mul(self.hi, rhs.lo),
            rounding::mul(self.hi, rhs.hi),
        ];
        Interval::from_brackets(&cands)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn addition_of_exact_bounds() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
    }

    #[test]
    fn multiplication_across_zero() {
        assert_eq!(iv(-1.0, 2.0) * iv(-3.0, 1.0), iv(-6.0, 3.0));
    }

    #[test]
    fn division_by_zero_interval_is_an_error() {
        let r = iv(1.0, 1.0).div(&iv(-1.0, 1.0));
        assert!(matches!(r, Err(IntervalError::DivisionByZero(_))));
    }

    #[test]
    fn one_third_is_tight() {
        let q = Interval::ONE.div(&iv(3.0, 3.0)).unwrap();
        assert!(q.contains(1.0 / 3.0));
        assert_eq!(q.hi(), q.lo().next_up());
    }

    #[test]
    fn intersection_may_be_empty() {
        assert_eq!(iv(0.0, 1.0).intersect(&iv(2.0, 3.0)), None);
        assert_eq!(iv(0.0, 2.0).intersect(&iv(1.0, 3.0)), Some(iv(1.0, 2.0)));
    }

    #[test]
    fn hex_round_trip() {
        let x = iv(-0.1, std::f64::consts::PI);
        assert_eq!(Interval::from_hex(&x.to_hex()).unwrap(), x);
    }

    #[test]
    fn exp_encloses_libm() {
        for &x in &[0.1, 1.0, -1.0, 10.0, 60.0, -30.0, 1e-8] {
            let e = Interval::point(x).exp();
            assert!(e.contains(x.exp()), "{x}: {e:?}");
            assert!(e.width() <= 1e-12 * e.mag().max(1e-300), "{x}: {e:?}");
        }
    }

    #[test]
    fn powers() {
        assert_eq!(iv(-2.0, 1.0).powi(2), iv(0.0, 4.0));
        assert_eq!(iv(-2.0, 1.0).powi(3), iv(-8.0, 1.0));
    }
}
