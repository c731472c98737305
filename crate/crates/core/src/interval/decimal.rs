//! Decimal literals to tight rigorous enclosures.

use std::cmp::Ordering;

use num_bigint::BigUint;

use super::{Interval, IntervalError};

/// Enclose the exact value of a decimal literal.
///
/// The result is a point interval when the literal is representable and
/// otherwise the two neighbouring doubles around the exact value.
pub fn parse_decimal(s: &str) -> Result<Interval, IntervalError> {
    let bad = || IntervalError::BadDecimal(s.to_string());
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let (mant, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let all_digits = |x: &str| x.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !all_digits(int_part) || !all_digits(frac_part) {
        return Err(bad());
    }
    let digits: String = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let e10 = exp - frac_part.len() as i64;
    if digits.is_empty() {
        return Ok(Interval::ZERO);
    }
    if digits.len() > 4000 || e10.abs() > 4000 {
        return Err(bad());
    }
    let x: f64 = format!("{digits}e{e10}").parse().map_err(|_| bad())?;
    if x.is_infinite() {
        return Err(bad());
    }
    let exact = BigUint::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
    let (lo, hi) = match compare_double(x, &exact, e10) {
        Ordering::Equal => (x, x),
        Ordering::Less => (x, x.next_up()),
        Ordering::Greater => (x.next_down(), x),
    };
    let iv = Interval::new(lo, hi);
    Ok(if neg { -iv } else { iv })
}

/// Compare a non-negative double with `n * 10^e10`.
fn compare_double(x: f64, n: &BigUint, e10: i64) -> Ordering {
    if x == 0.0 {
        return Ordering::Less;
    }
    let bits = x.to_bits();
    let be = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e2) = if be == 0 { (frac, -1074) } else { (frac | (1u64 << 52), be - 1075) };
    let mut lhs = BigUint::from(m);
    let mut rhs = n.clone();
    if e2 >= 0 {
        lhs <<= e2 as usize;
    } else {
        rhs <<= (-e2) as usize;
    }
    let ten = BigUint::from(10u32);
    if e10 >= 0 {
        rhs *= ten.pow(e10 as u32);
    } else {
        lhs *= ten.pow((-e10) as u32);
    }
    lhs.cmp(&rhs)
}
