//! Grönwall-type bounds between ODE solutions and their delayed perturbations,
//! evaluated with outward rounding.

use std::fmt;

use thiserror::Error;

use crate::interval::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("closeness radius must be positive, got {0}")]
    Radius(f64),
    #[error("{0} must be nonnegative")]
    Negative(&'static str),
}

/// Bounds and Lipschitz constants of `f` and `g`, plus the delay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConstants {
    pub m_f: Interval,
    pub l_f: Interval,
    pub m_g: Interval,
    pub l_g: Interval,
    pub tau: Interval,
}

impl FieldConstants {
    pub fn new(m_f: f64, l_f: f64, m_g: f64, l_g: f64, tau: f64) -> Result<Self, BoundError> {
        for (v, name) in [(m_f, "M_f"), (l_f, "L_f"), (m_g, "M_g"), (l_g, "L_g"), (tau, "tau")] {
            if !(v >= 0.0) {
                return Err(BoundError::Negative(name));
            }
        }
        let p = Interval::point;
        Ok(FieldConstants { m_f: p(m_f), l_f: p(l_f), m_g: p(m_g), l_g: p(l_g), tau: p(tau) })
    }
}

/// A positive quantity `m · 2^e`, so that bounds like `e^{L T}` never
/// overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    m: Interval,
    e: i64,
}

fn pow2(e: i64) -> f64 {
    // exact for the exponents produced by `normalize`
    2f64.powi(e as i32)
}

impl Bound {
    pub const ZERO: Bound = Bound { m: Interval::ZERO, e: 0 };

    pub fn new(x: Interval) -> Bound {
        Bound { m: x, e: 0 }.normalize()
    }

    fn normalize(self) -> Bound {
        let a = self.m.mag();
        if a == 0.0 || !a.is_finite() {
            return self;
        }
        let k = a.log2().floor() as i64;
        let s = pow2(-k);
        Bound { m: Interval::new(self.m.lo() * s, self.m.hi() * s), e: self.e + k }
    }

    /// `exp(x)` for `x ≥ 0`, by halving and repeated squaring.
    pub fn exp(x: Interval) -> Bound {
        let mut s = 0;
        let mut y = x;
        while y.mag() > 1.0 {
            y = Interval::new(y.lo() * 0.5, y.hi() * 0.5);
            s += 1;
        }
        let mut b = Bound::new(y.exp());
        for _ in 0..s {
            b = b.mul(&b);
        }
        b
    }

    pub fn mul(&self, o: &Bound) -> Bound {
        Bound { m: self.m * o.m, e: self.e + o.e }.normalize()
    }

    pub fn add(&self, o: &Bound) -> Bound {
        if self.m == Interval::ZERO {
            return *o;
        }
        if o.m == Interval::ZERO {
            return *self;
        }
        let (big, small) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = big.e - small.e;
        let sm = if d > 1100 {
            Interval::new(0.0, f64::MIN_POSITIVE)
        } else {
            let s = pow2(-(d.min(1000)));
            let t = if d > 1000 { pow2(-(d - 1000)) } else { 1.0 };
            Interval::new(small.m.lo() * s * t, small.m.hi() * s * t)
        };
        Bound { m: big.m + sm, e: big.e }.normalize()
    }

    /// `self / o` for `o > 0`.
    pub fn div(&self, o: &Bound) -> Option<Bound> {
        Some(Bound { m: self.m.div(&o.m).ok()?, e: self.e - o.e }.normalize())
    }

    /// Enclosure as an interval; the upper end may be `+inf`.
    pub fn value(&self) -> Interval {
        if self.e > 1100 {
            return Interval::new(if self.m.lo() > 0.0 { f64::MAX } else { 0.0 }, f64::INFINITY);
        }
        if self.e < -1100 {
            return Interval::new(0.0, f64::MIN_POSITIVE);
        }
        let (a, b) = if self.e.abs() > 1000 {
            let k = self.e.signum() * 1000;
            (pow2(k), pow2(self.e - k))
        } else {
            (pow2(self.e), 1.0)
        };
        let lo = (self.m.lo() * a) * b;
        let hi = (self.m.hi() * a) * b;
        // products by powers of two are exact unless they under- or overflow
        Interval::new(if lo.is_finite() { lo } else { f64::MAX }, if hi < f64::MIN_POSITIVE && hi > 0.0 { f64::MIN_POSITIVE } else { hi })
    }

    pub fn upper(&self) -> f64 {
        self.value().hi()
    }

    /// Decimal exponent, widened to cover the error of `log10`.
    pub fn log10(&self) -> Interval {
        let l2 = std::f64::consts::LOG10_2;
        let c = self.e as f64 * l2;
        let slack = 1e-12 * (1.0 + c.abs());
        let lo = if self.m.lo() > 0.0 { self.m.lo().log10() + c - slack } else { f64::NEG_INFINITY };
        Interval::new(lo, self.m.hi().log10() + c + slack)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if v.hi().is_finite() && v.lo() > 0.0 {
            write!(f, "{:.6e}", v.hi())
        } else {
            write!(f, "10^{:.6}", self.log10().hi())
        }
    }
}

/// `(M_f + |ε| M_g) · |Δt|`: how far any solution moves in time `Δt`.
pub fn lipschitz_in_time(c: &FieldConstants, eps: Interval, dt: Interval) -> Interval {
    (c.m_f + eps.abs() * c.m_g) * dt.abs()
}

/// `|ε| M_g t e^{L_f t}`: distance between the ODE and DDE solutions from
/// the same initial point.
pub fn ode_dde_deviation(c: &FieldConstants, eps: Interval, t: Interval) -> Bound {
    Bound::new(eps.abs() * c.m_g * t).mul(&Bound::exp(c.l_f * t))
}

/// Which estimate of the distance between two DDE solutions to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DdeDeviation {
    /// `|ε| L_g τ e^{(L_f + |ε| L_g) t} ‖v_0 - u_0‖ + ‖v(0) - u(0)‖ e^{(L_f + |ε| L_g) t}`.
    Lipschitz,
    /// `2 |ε| M_g t e^{L_f t} + e^{L_f t} ‖v(0) - u(0)‖`, no Lipschitz constant of `g`.
    Bounded,
}

pub fn dde_dde_deviation(c: &FieldConstants, eps: Interval, t: Interval, sup_dist: Interval, head_dist: Interval, variant: DdeDeviation) -> Bound {
    let e = eps.abs();
    match variant {
        DdeDeviation::Lipschitz => {
            let growth = Bound::exp((c.l_f + e * c.l_g) * t);
            Bound::new(e * c.l_g * c.tau * sup_dist).add(&Bound::new(head_dist)).mul(&growth)
        }
        DdeDeviation::Bounded => {
            let growth = Bound::exp(c.l_f * t);
            Bound::new((e * c.m_g * t).scale(2.0)).add(&Bound::new(head_dist)).mul(&growth)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistenceInput {
    /// Required closeness of the perturbed Poincaré map.
    pub r: f64,
    /// Upper bound on return times.
    pub t: f64,
    pub constants: FieldConstants,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonBound {
    /// Every `|ε| ≤ value` keeps the perturbed map `r`-close.
    Below(Bound),
    /// The perturbation has no effect (`M_g = 0`).
    Unbounded,
}

impl EpsilonBound {
    pub fn log10(&self) -> Interval {
        match self {
            EpsilonBound::Below(b) => b.log10(),
            EpsilonBound::Unbounded => Interval::point(f64::INFINITY),
        }
    }
}

/// Largest `ε` with `ε M_g T e^{L_f T} ≤ r/2`, the section slack being
/// `η = r / (2 M_f)`; the returned bound is rounded down.
pub fn poincare_epsilon(input: &PersistenceInput) -> Result<EpsilonBound, BoundError> {
    if !(input.r > 0.0) {
        return Err(BoundError::Radius(input.r));
    }
    if !(input.t >= 0.0) {
        return Err(BoundError::Negative("T"));
    }
    let c = &input.constants;
    if c.m_g.hi() == 0.0 || input.t == 0.0 {
        return Ok(EpsilonBound::Unbounded);
    }
    let t = Interval::point(input.t);
    let denom = Bound::new(c.m_g * t).mul(&Bound::exp(c.l_f * t));
    let half_r = Bound::new(Interval::point(input.r) * Interval::point(0.5));
    let q = half_r.div(&denom).expect("positive denominator");
    // keep only the lower end: any ε below it satisfies the inequality
    Ok(EpsilonBound::Below(Bound { m: Interval::point(q.m.lo()), e: q.e }))
}

/// Section slack used with [`poincare_epsilon`].
pub fn section_slack(input: &PersistenceInput) -> Interval {
    Interval::point(input.r).div(&input.constants.m_f.scale(2.0)).unwrap_or(Interval::ENTIRE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rossler_constants() -> FieldConstants {
        FieldConstants::new(10.0, 10.0, 20.0, 10.0, 1.0).unwrap()
    }

    #[test]
    fn lipschitz_in_time_examples() {
        let c = FieldConstants::new(10.0, 0.0, 20.0, 0.0, 1.0).unwrap();
        assert!(lipschitz_in_time(&c, Interval::ZERO, Interval::point(0.5)).contains(5.0));
        assert_eq!(lipschitz_in_time(&c, Interval::ONE, Interval::ZERO), Interval::ZERO);
        let v = lipschitz_in_time(&c, Interval::point(1e-4), Interval::ONE);
        assert!(v.contains(10.002) && v.width() < 1e-12);
    }

    #[test]
    fn deviation_vanishes_without_perturbation() {
        let c = rossler_constants();
        assert_eq!(ode_dde_deviation(&c, Interval::ZERO, Interval::point(6.0)).upper(), 0.0);
        assert_eq!(ode_dde_deviation(&c, Interval::point(1e-4), Interval::ZERO).upper(), 0.0);
        let z = dde_dde_deviation(&c, Interval::ZERO, Interval::point(3.0), Interval::ZERO, Interval::ZERO, DdeDeviation::Lipschitz);
        assert_eq!(z.upper(), 0.0);
    }

    #[test]
    fn ode_dde_large_exponent() {
        let v = ode_dde_deviation(&rossler_constants(), Interval::point(1e-4), Interval::point(6.0)).value();
        // 1e-4 · 20 · 6 · e^60
        let want = 1.2e-2 * 60f64.exp();
        assert!(v.lo() <= want * (1.0 + 1e-14) && want * (1.0 - 1e-14) <= v.hi());
        assert!(v.width() / want < 1e-12);
    }

    #[test]
    fn same_head_reduces_to_sup_term() {
        let c = rossler_constants();
        let (eps, t, s) = (Interval::point(1e-3), Interval::point(2.0), Interval::point(0.1));
        let full = dde_dde_deviation(&c, eps, t, s, Interval::ZERO, DdeDeviation::Lipschitz).value();
        let want = 1e-3 * 10.0 * 1.0 * (2.0 * (10.0 + 1e-2) as f64).exp() * 0.1;
        assert!(full.lo() <= want * (1.0 + 1e-13) && want * (1.0 - 1e-13) <= full.hi());
    }

    #[test]
    fn zero_perturbation_is_plain_gronwall() {
        let c = rossler_constants();
        let v = dde_dde_deviation(&c, Interval::ZERO, Interval::point(1.5), Interval::ZERO, Interval::point(1e-3), DdeDeviation::Lipschitz);
        let want = 1e-3 * 15f64.exp();
        assert!((v.upper() - want).abs() < 1e-12 * want);
        let b = dde_dde_deviation(&c, Interval::ZERO, Interval::point(1.5), Interval::ZERO, Interval::point(1e-3), DdeDeviation::Bounded);
        assert!((b.upper() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn epsilon_of_order_1e_minus_31() {
        let input = PersistenceInput { r: 4e-4, t: 6.0, constants: rossler_constants() };
        let EpsilonBound::Below(b) = poincare_epsilon(&input).unwrap() else { panic!() };
        let l = b.log10();
        assert!(l.hi() > -32.0 && l.lo() < -30.0, "{l:?}");
        // ε M_g T e^{L_f T} = r / 2 at the bound
        assert!((l.mid() - (2e-4f64.log10() - 120f64.log10() - 60.0 * std::f64::consts::LOG10_E)).abs() < 1e-9);
        let doubled = PersistenceInput { r: 8e-4, ..input };
        let EpsilonBound::Below(b2) = poincare_epsilon(&doubled).unwrap() else { panic!() };
        assert!((b2.value().hi() / b.value().hi() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_unbounded_and_errors() {
        let c = FieldConstants::new(10.0, 10.0, 0.0, 10.0, 1.0).unwrap();
        assert_eq!(poincare_epsilon(&PersistenceInput { r: 1e-3, t: 6.0, constants: c }).unwrap(), EpsilonBound::Unbounded);
        assert!(poincare_epsilon(&PersistenceInput { r: 0.0, t: 6.0, constants: rossler_constants() }).is_err());
        assert!(FieldConstants::new(-1.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn huge_exponents_stay_finite_in_log_space() {
        let c = FieldConstants::new(1.0, 100.0, 1.0, 1.0, 1.0).unwrap();
        let b = ode_dde_deviation(&c, Interval::ONE, Interval::point(100.0));
        assert_eq!(b.upper(), f64::INFINITY);
        let l = b.log10();
        let want = 2.0 + 1e4 * std::f64::consts::LOG10_E;
        assert!(l.contains(want) && l.width() < 1e-6, "{l:?}");
    }
}
