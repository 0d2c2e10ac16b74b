use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A non-integral quantity held as an integer count of thousandths.
///
/// Used for RVUs and FTE fractions so that sums over many records are exact.
/// The external form is a plain JSON number (or CSV decimal) with at most
/// three fractional digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Milli(pub i64);

impl Milli {
    pub const ONE: Milli = Milli(1000);

    pub fn from_f64(value: f64) -> Result<Self, String> {
        if !value.is_finite() {
            return Err(format!("{value} is not finite"));
        }
        let scaled = value * 1000.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 {
            return Err(format!("{value} has more than three decimal places"));
        }
        if rounded.abs() > 9.0e15 {
            return Err(format!("{value} is out of range"));
        }
        Ok(Milli(rounded as i64))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let value: f64 = text
            .parse()
            .map_err(|_| format!("'{text}' is not a decimal"))?;
        Self::from_f64(value)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl fmt::Display for Milli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Milli {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Milli {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MilliVisitor;

        impl Visitor<'_> for MilliVisitor {
            type Value = Milli;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal number with at most three fractional digits")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Milli, E> {
                Milli::from_f64(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Milli, E> {
                v.checked_mul(1000)
                    .map(Milli)
                    .ok_or_else(|| E::custom("out of range"))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Milli, E> {
                i64::try_from(v)
                    .ok()
                    .and_then(|v| v.checked_mul(1000))
                    .map(Milli)
                    .ok_or_else(|| E::custom("out of range"))
            }

            // CSV fields arrive as strings.
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Milli, E> {
                Milli::parse(v).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(MilliVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        assert_eq!(Milli::parse("1.25").unwrap(), Milli(1250));
        assert_eq!(Milli(1250).to_string(), "1.25");
        assert!(Milli::parse("0.0001").is_err());
        assert!(Milli::parse("abc").is_err());
    }

    #[test]
    fn json_round_trip() {
        let m: Milli = serde_json::from_str("0.333").unwrap();
        assert_eq!(m, Milli(333));
        assert_eq!(serde_json::to_string(&m).unwrap(), "0.333");
        let whole: Milli = serde_json::from_str("2").unwrap();
        assert_eq!(whole, Milli(2000));
    }
}
