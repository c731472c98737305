//! Directed rounding built from error-free transformations.
//!
//! Every helper returns a pair `(down, up)` bracketing the exact real result.
//! When the rounding error is provably zero both entries coincide.

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
const SPLIT_LIMIT: f64 = 6.696_928_794_914_171e299; // 2^996
const TINY: f64 = 1.492_788_039_048_094_5e-290; // 2^-962

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

#[inline]
fn fallback(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    (x.next_down(), x.next_up())
}

#[inline]
fn from_error(s: f64, e: f64) -> (f64, f64) {
    if e > 0.0 {
        (s, s.next_up())
    } else if e < 0.0 {
        (s.next_down(), s)
    } else {
        (s, s)
    }
}

#[inline]
fn overflowed(s: f64) -> (f64, f64) {
    if s == f64::INFINITY {
        (f64::MAX, s)
    } else if s == f64::NEG_INFINITY {
        (s, -f64::MAX)
    } else {
        fallback(s)
    }
}

/// Bracket of `a + b`.
#[inline]
pub fn add(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        if a.is_finite() && b.is_finite() {
            return overflowed(s);
        }
        return (s, s);
    }
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    from_error(s, e)
}

/// Bracket of `a - b`.
#[inline]
pub fn sub(a: f64, b: f64) -> (f64, f64) {
    add(a, -b)
}

/// Bracket of `a * b`.
#[inline]
pub fn mul(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if a == 0.0 || b == 0.0 {
        return (p, p);
    }
    if !p.is_finite() {
        if a.is_finite() && b.is_finite() {
            return overflowed(p);
        }
        return (p, p);
    }
    if a.abs() >= SPLIT_LIMIT || b.abs() >= SPLIT_LIMIT || p.abs() < TINY {
        return fallback(p);
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    from_error(p, e)
}

/// Bracket of `a / b` for `b != 0`.
#[inline]
pub fn div(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    if a == 0.0 {
        return (q, q);
    }
    if !q.is_finite() {
        if a.is_finite() && b.is_finite() {
            return overflowed(q);
        }
        return (q, q);
    }
    if q.abs() >= SPLIT_LIMIT || b.abs() >= SPLIT_LIMIT || q.abs() < TINY || a.abs() < TINY {
        return fallback(q);
    }
    let (p, e) = {
        let p = q * b;
        let (qh, ql) = split(q);
        let (bh, bl) = split(b);
        (p, ((qh * bh - p) + qh * bl + ql * bh) + ql * bl)
    };
    // a - q*b = (a - p) - e, and a - p is exact because p is within a factor two of a.
    let rem = (a - p) - e;
    let sign = if b > 0.0 { rem } else { -rem };
    from_error(q, sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_are_not_widened() {
        assert_eq!(add(1.0, 3.0), (4.0, 4.0));
        assert_eq!(mul(1.5, 2.0), (3.0, 3.0));
        assert_eq!(div(1.0, 4.0), (0.25, 0.25));
    }

    #[test]
    fn inexact_operations_bracket() {
        let (lo, hi) = add(0.1, 0.2);
        assert!(lo < hi && hi == lo.next_up());
        let (lo, hi) = div(1.0, 3.0);
        assert!(lo < hi);
        assert!(lo * 3.0 <= 1.0 && hi * 3.0 >= 1.0);
        let (lo, hi) = mul(0.1, 0.1);
        assert!(lo < hi);
    }

    #[test]
    fn division_sign_of_remainder() {
        for &(a, b) in &[(2.0, 3.0), (-2.0, 3.0), (2.0, -3.0), (-7.0, -11.0), (1e-5, 7.0)] {
            let (lo, hi) = div(a, b);
            assert!(hi == lo.next_up(), "{a}/{b}");
        }
    }
}
