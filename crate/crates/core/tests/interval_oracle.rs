use num_bigint::BigInt;
use proptest::prelude::*;
use shark_core::interval::{format_hex, parse_decimal, parse_hex, Interval};

/// Exact dyadic value `m · 2^e`.
#[derive(Clone, Debug)]
struct Dyadic {
    m: BigInt,
    e: i32,
}

fn dyadic(x: f64) -> Dyadic {
    assert!(x.is_finite());
    if x == 0.0 {
        return Dyadic { m: BigInt::from(0), e: 0 };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    Dyadic { m: BigInt::from(m) * sign, e }
}

fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt) {
    let e = a.e.min(b.e);
    (a.m.clone() << (a.e - e) as usize, b.m.clone() << (b.e - e) as usize)
}

fn add(a: &Dyadic, b: &Dyadic) -> Dyadic {
    let (x, y) = align(a, b);
    Dyadic { m: x + y, e: a.e.min(b.e) }
}

fn mul(a: &Dyadic, b: &Dyadic) -> Dyadic {
    Dyadic { m: &a.m * &b.m, e: a.e + b.e }
}

fn le(a: &Dyadic, b: &Dyadic) -> bool {
    let (x, y) = align(a, b);
    x <= y
}

fn encloses(iv: Interval, v: &Dyadic) -> bool {
    le(&dyadic(iv.lo()), v) && le(v, &dyadic(iv.hi()))
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1.0..1.0f64, (-300i32..300, -1.0..1.0f64).prop_map(|(e, m)| m * 2f64.powi(e))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn sums_and_products_are_enclosed(a in finite(), b in finite()) {
        let (x, y) = (Interval::point(a), Interval::point(b));
        let (da, db) = (dyadic(a), dyadic(b));
        prop_assert!(encloses(x + y, &add(&da, &db)));
        let neg = Dyadic { m: -db.m.clone(), e: db.e };
        prop_assert!(encloses(x - y, &add(&da, &neg)));
        prop_assert!(encloses(x * y, &mul(&da, &db)));
    }

    #[test]
    fn quotients_are_enclosed(a in finite(), b in finite()) {
        prop_assume!(b != 0.0);
        let q = Interval::point(a).div(&Interval::point(b)).unwrap();
        // a / b in [lo, hi]  iff  lo·b <= a <= hi·b for b > 0, reversed otherwise
        let (da, db) = (dyadic(a), dyadic(b));
        let (l, h) = (mul(&dyadic(q.lo()), &db), mul(&dyadic(q.hi()), &db));
        if b > 0.0 {
            prop_assert!(le(&l, &da) && le(&da, &h));
        } else {
            prop_assert!(le(&h, &da) && le(&da, &l));
        }
    }

    #[test]
    fn hull_of_products_over_boxes(a in finite(), w in 0.0..1.0f64, b in finite(), t in 0.0..1.0f64, s in 0.0..1.0f64) {
        let x = Interval::new(a, a + w);
        let y = Interval::new(b - 1.0, b);
        let p = x * y;
        let (u, v) = (a + t * w, b - s);
        prop_assume!(x.contains(u) && y.contains(v));
        prop_assert!(encloses(p, &mul(&dyadic(u), &dyadic(v))));
    }

    #[test]
    fn hex_text_round_trips(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(parse_hex(&format_hex(x)).unwrap().to_bits(), x.to_bits());
        let iv = Interval::new(x.min(0.0), x.max(0.0));
        prop_assert_eq!(Interval::from_hex(&iv.to_hex()).unwrap(), iv);
    }

    #[test]
    fn decimal_literals_are_enclosed(int in 0u32..100000, frac in 0u32..100000, e in -20i32..20) {
        let text = format!("{int}.{frac:05}e{e}");
        let iv = parse_decimal(&text).unwrap();
        // exact value (int·10^5 + frac) · 10^(e-5) against the bounds, scaled by 10^k
        let digits = BigInt::from(int) * BigInt::from(100000) + BigInt::from(frac);
        let k = e - 5;
        let ten = BigInt::from(10);
        for (bound, upper) in [(iv.lo(), false), (iv.hi(), true)] {
            let d = dyadic(bound);
            // compare bound·10^-k with digits, both as integers times powers of two
            let (lhs, rhs) = if k >= 0 {
                (d.m.clone(), digits.clone() * ten.pow(k as u32))
            } else {
                (d.m.clone() * ten.pow((-k) as u32), digits.clone())
            };
            let (lhs, rhs) = align(&Dyadic { m: lhs, e: d.e }, &Dyadic { m: rhs, e: 0 });
            prop_assert!(if upper { lhs >= rhs } else { lhs <= rhs }, "{text}: {iv:?}");
        }
        prop_assert!(iv.width() <= 2.0 * f64::EPSILON * iv.mag());
    }
}

#[test]
fn exp_brackets_exact_values() {
    // e^0 = 1 exactly, e^x e^-x = 1 up to the enclosure widths
    assert!(Interval::ZERO.exp().contains(1.0));
    for x in [-30.0, -1.0, 0.1, 1.0, 10.0, 60.0] {
        let p = Interval::point(x).exp() * Interval::point(-x).exp();
        assert!(p.contains(1.0) && p.width() < 1e-12, "{x}: {p:?}");
    }
}
