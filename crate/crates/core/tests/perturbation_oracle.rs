use num_bigint::BigInt;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shark_core::interval::Interval;
use shark_core::perturbation::{ode_dde_deviation, poincare_epsilon, EpsilonBound, FieldConstants, PersistenceInput};

const BITS: usize = 400;

/// `x` as a fixed-point integer `x · 2^BITS` (exact for every f64 used here).
fn fixed(x: f64) -> BigInt {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1075;
    let m = BigInt::from((bits & ((1u64 << 52) - 1)) | (1u64 << 52));
    let sign = if x < 0.0 { -1 } else { 1 };
    if x == 0.0 {
        return BigInt::from(0);
    }
    let shift = exp + BITS as i64;
    sign * if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize }
}

fn fmul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> BITS
}

/// `e^x · 2^BITS` for `x >= 0`, truncated; error far below one part in 2^300.
fn exp_fixed(x: f64) -> BigInt {
    let xf = fixed(x);
    let one = BigInt::from(1) << BITS;
    let mut term = one.clone();
    let mut sum = one;
    for k in 1..2000u32 {
        term = fmul(&term, &xf) / k;
        if term == BigInt::from(0) {
            break;
        }
        sum += &term;
    }
    sum
}

fn to_f64(v: &BigInt) -> f64 {
    let (_, digits) = v.to_u64_digits();
    let mut acc = 0.0;
    for d in digits.iter().rev() {
        acc = acc * 18446744073709551616.0 + *d as f64;
    }
    acc * 2f64.powi(-(BITS as i32))
}

#[test]
fn ode_dde_deviation_against_oracle() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..1000 {
        let eps: f64 = 10f64.powf(rng.gen_range(-6.0..-1.0));
        let mg: f64 = rng.gen_range(0.1..50.0);
        let lf: f64 = rng.gen_range(0.0..12.0);
        let t: f64 = rng.gen_range(0.0..8.0);
        let c = FieldConstants::new(10.0, lf, mg, 10.0, 1.0).unwrap();
        let b = ode_dde_deviation(&c, Interval::point(eps), Interval::point(t));
        // the product eps·M_g·t and L_f·t are formed exactly in the oracle
        let lt = Interval::point(lf) * Interval::point(t);
        let e_lo = exp_fixed(lt.lo());
        let e_hi = exp_fixed(lt.hi());
        let pre = fmul(&fmul(&fixed(eps), &fixed(mg)), &fixed(t));
        let exact_lo = fmul(&pre, &e_lo);
        let exact_hi = fmul(&pre, &e_hi);
        let upper = b.upper();
        assert!(upper.is_finite());
        // rigorous: the bound is at least the exact value
        assert!(fixed(upper) >= exact_hi, "eps={eps} mg={mg} lf={lf} t={t}");
        let o = to_f64(&exact_lo);
        if o > 0.0 {
            assert!((upper - o) / o <= 1e-6, "eps={eps} mg={mg} lf={lf} t={t}: {upper} vs {o}");
        }
    }
}

#[test]
fn e_to_the_sixty_example() {
    // 1e-4 · 20 · 6 · e^60 ≈ 1.37e24
    let c = FieldConstants::new(10.0, 10.0, 20.0, 10.0, 1.0).unwrap();
    let b = ode_dde_deviation(&c, Interval::point(1e-4), Interval::point(6.0));
    let pre = fmul(&fmul(&fixed(1e-4), &fixed(20.0)), &fixed(6.0));
    let o = to_f64(&fmul(&pre, &exp_fixed(60.0)));
    assert!((b.upper() - o) / o <= 1e-6 && b.upper() >= o);
    assert!((o / 1.37e24 - 1.0).abs() < 0.01);
}

fn bound(r: f64, t: f64, mf: f64, lf: f64, mg: f64, lg: f64, tau: f64) -> f64 {
    let c = FieldConstants::new(mf, lf, mg, lg, tau).unwrap();
    match poincare_epsilon(&PersistenceInput { r, t, constants: c }).unwrap() {
        EpsilonBound::Below(b) => b.log10().lo(),
        EpsilonBound::Unbounded => f64::INFINITY,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn deviation_is_monotone(eps in 1e-6..1e-2f64, mg in 0.1..40.0f64, lf in 0.0..10.0f64, t in 0.0..6.0f64, k in 1.0..2.0f64) {
        let dev = |eps: f64, mg: f64, lf: f64, t: f64| {
            let c = FieldConstants::new(5.0, lf, mg, 5.0, 1.0).unwrap();
            ode_dde_deviation(&c, Interval::point(eps), Interval::point(t)).upper()
        };
        let base = dev(eps, mg, lf, t);
        prop_assert!(dev(eps * k, mg, lf, t) >= base);
        prop_assert!(dev(eps, mg * k, lf, t) >= base);
        prop_assert!(dev(eps, mg, lf * k, t) >= base);
        prop_assert!(dev(eps, mg, lf, t * k) >= base);
    }

    #[test]
    fn epsilon_bound_is_monotone(r in 1e-6..1e-2f64, t in 0.5..10.0f64, mg in 0.1..40.0f64, lf in 0.0..12.0f64, k in 1.0..2.0f64) {
        let base = bound(r, t, 10.0, lf, mg, 10.0, 1.0);
        prop_assert!(bound(r * k, t, 10.0, lf, mg, 10.0, 1.0) >= base);
        prop_assert!(bound(r, t * k, 10.0, lf, mg, 10.0, 1.0) <= base);
        prop_assert!(bound(r, t, 10.0, lf, mg * k, 10.0, 1.0) <= base);
        prop_assert!(bound(r, t, 10.0, lf * k, mg, 10.0, 1.0) <= base);
    }

    #[test]
    fn doubling_r_doubles_epsilon(r in 1e-6..1e-2f64, t in 0.5..10.0f64) {
        let a = bound(r, t, 10.0, 10.0, 20.0, 10.0, 1.0);
        let b = bound(2.0 * r, t, 10.0, 10.0, 20.0, 10.0, 1.0);
        prop_assert!((b - a - 2f64.log10()).abs() < 1e-9);
    }
}
