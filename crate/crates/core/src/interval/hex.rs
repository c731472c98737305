//! Hexadecimal floating-point text, lossless in both directions.

use super::IntervalError;

pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let es = if e >= 0 { format!("+{e}") } else { e.to_string() };
    if digits.is_empty() {
        format!("{sign}0x{lead}p{es}")
    } else {
        format!("{sign}0x{lead}.{digits}p{es}")
    }
}

pub fn parse_hex(s: &str) -> Result<f64, IntervalError> {
    let bad = || IntervalError::BadHex(s.to_string());
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let sign = if neg { -1.0 } else { 1.0 };
    match body {
        "inf" => return Ok(sign * f64::INFINITY),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")).ok_or_else(bad)?;
    let (mant_str, exp_str) = body.split_once(['p', 'P']).ok_or_else(bad)?;
    let mut exp: i64 = exp_str.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mant_str.split_once('.').unwrap_or((mant_str, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let mut m: u128 = 0;
    for (i, c) in int_part.chars().chain(frac_part.chars()).enumerate() {
        let d = c.to_digit(16).ok_or_else(bad)? as u128;
        if i >= 30 {
            return Err(bad());
        }
        m = (m << 4) | d;
    }
    exp -= 4 * frac_part.len() as i64;
    if m == 0 {
        return Ok(sign * 0.0);
    }
    let nbits = 128 - m.leading_zeros() as i64;
    let top = exp + nbits - 1;
    if top > 1023 {
        return Err(bad());
    }
    let bits = if top >= -1022 {
        let shift = nbits - 53;
        let mant = if shift > 0 {
            if m & ((1u128 << shift) - 1) != 0 {
                return Err(bad());
            }
            m >> shift
        } else {
            m << (-shift)
        } as u64;
        (((top + 1023) as u64) << 52) | (mant & ((1u64 << 52) - 1))
    } else {
        let shift = exp + 1074;
        if shift < 0 {
            if -shift >= 128 || m & ((1u128 << (-shift)) - 1) != 0 {
                return Err(bad());
            }
            (m >> (-shift)) as u64
        } else {
            (m << shift) as u64
        }
    };
    Ok(sign * f64::from_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_forms() {
        assert_eq!(format_hex(1.0), "0x1p+0");
        assert_eq!(format_hex(-2.5), "-0x1.4p+1");
        assert_eq!(format_hex(0.0), "0x0p+0");
        assert_eq!(format_hex(f64::MIN_POSITIVE / 4.0), "0x0.4p-1022");
        assert_eq!(parse_hex("0x1.8p1").unwrap(), 3.0);
    }

    #[test]
    fn round_trip_edge_values() {
        for &x in &[
            0.1,
            -0.0,
            f64::MAX,
            f64::MIN_POSITIVE,
            5e-324,
            -1.2345e-310,
            f64::INFINITY,
            f64::NEG_INFINITY,
            1.0f64.next_up(),
        ] {
            let y = parse_hex(&format_hex(x)).unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{x}");
        }
    }

    #[test]
    fn inexact_text_is_rejected() {
        assert!(parse_hex("0x1.00000000000001p0").is_err());
        assert!(parse_hex("1.5").is_err());
    }
}
