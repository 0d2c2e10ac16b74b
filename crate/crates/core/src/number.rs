//! Exact arithmetic used for every measure and KPI value.
//!
//! Values are arbitrary-precision rationals. They only become floating point
//! when serialized for display.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Number = BigRational;

pub fn int(value: i128) -> Number {
    BigRational::from_integer(BigInt::from(value))
}

/// `numerator / denominator`. Panics on a zero denominator; callers check first.
pub fn ratio(numerator: i128, denominator: i128) -> Number {
    BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
}

pub fn to_f64(value: &Number) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Rounds half away from zero to the nearest integer.
pub fn round_to_i64(value: &Number) -> Option<i64> {
    value.round().to_integer().to_i64()
}

/// Parses a plain decimal literal (`12`, `0.25`, `-3.5`) exactly.
pub fn parse_decimal(text: &str) -> Option<Number> {
    let text = text.trim();
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if body.contains('.') && (frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit())) {
        return None;
    }
    let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let value = BigRational::new(digits, scale);
    Some(if negative { -value } else { value })
}

/// Prints `value` as a terminating decimal when it has one (denominator of
/// the form 2^a·5^b), otherwise `None`.
pub fn format_decimal(value: &Number) -> Option<String> {
    let mut denom = value.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if denom != BigInt::from(1u32) {
        return None;
    }
    let places = twos.max(fives);
    let scaled = value.abs() * BigRational::from_integer(BigInt::from(10u32).pow(places));
    let digits = scaled.to_integer().to_string();
    let sign = if value.is_negative() { "-" } else { "" };
    if places == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (w, f) = padded.split_at(padded.len() - places);
    Some(format!("{sign}{w}.{f}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        for text in ["0", "12", "0.25", "2.5", "-3.125", "100.001", "0.0001"] {
            let value = parse_decimal(text).unwrap();
            assert_eq!(format_decimal(&value).unwrap(), text, "{text}");
        }
        assert_eq!(parse_decimal("1.50"), parse_decimal("1.5"));
        assert!(format_decimal(&ratio(1, 3)).is_none());
    }

    #[test]
    fn rejects_malformed_decimals() {
        for text in ["", ".5", "5.", "1e3", "1.2.3", "--1", "abc"] {
            assert!(parse_decimal(text).is_none(), "{text}");
        }
    }

    #[test]
    fn rounding() {
        assert_eq!(round_to_i64(&ratio(5, 2)), Some(3));
        assert_eq!(round_to_i64(&ratio(-5, 2)), Some(-3));
        assert_eq!(round_to_i64(&ratio(7, 3)), Some(2));
    }
}
