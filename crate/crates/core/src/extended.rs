use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Roundoff allowance below zero; values in `[-CLAMP_TOL, 0)` become `0`.
pub const CLAMP_TOL: f64 = 1e-9;

/// A value in `[0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedNonNegative {
    Finite(f64),
    PositiveInfinity,
}

pub use ExtendedNonNegative::{Finite, PositiveInfinity};

impl ExtendedNonNegative {
    pub const ZERO: Self = Finite(0.0);

    /// Clamps tiny negatives to zero. NaN and values below `-1e-9` are rejected;
    /// `+inf` maps to [`PositiveInfinity`].
    pub fn finite(x: f64) -> Result<Self> {
        if x.is_nan() || x < -CLAMP_TOL {
            return Err(Error::NegativeValue(x));
        }
        if x == f64::INFINITY {
            return Ok(PositiveInfinity);
        }
        Ok(Finite(x.max(0.0)))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Finite(x) => Some(*x),
            PositiveInfinity => None,
        }
    }

    /// `f64` view with `+inf` for the infinite case.
    pub fn to_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    /// Multiplication by a non-negative scalar with `0 · inf = 0`.
    pub fn scale(&self, factor: f64) -> Self {
        debug_assert!(factor >= 0.0);
        match self {
            Finite(x) => Finite(x * factor),
            PositiveInfinity if factor == 0.0 => Finite(0.0),
            PositiveInfinity => PositiveInfinity,
        }
    }

    /// `self - other`, with `inf - inf` reported as [`Gap::Indeterminate`].
    pub fn minus(&self, other: &Self) -> Gap {
        match (self, other) {
            (Finite(a), Finite(b)) => Gap::Finite(a - b),
            (PositiveInfinity, Finite(_)) => Gap::PositiveInfinity,
            (Finite(_), PositiveInfinity) => Gap::NegativeInfinity,
            (PositiveInfinity, PositiveInfinity) => Gap::Indeterminate,
        }
    }
}

impl Add for ExtendedNonNegative {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            _ => PositiveInfinity,
        }
    }
}

impl Eq for ExtendedNonNegative {}

impl PartialOrd for ExtendedNonNegative {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedNonNegative {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Finite(a), Finite(b)) => a.total_cmp(b),
            (Finite(_), PositiveInfinity) => Ordering::Less,
            (PositiveInfinity, Finite(_)) => Ordering::Greater,
            (PositiveInfinity, PositiveInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtendedNonNegative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(x) => match f.precision() {
                Some(p) => write!(f, "{x:.p$}"),
                None => write!(f, "{x}"),
            },
            PositiveInfinity => f.write_str("inf"),
        }
    }
}

/// Serialized as a JSON number, or the string `"inf"`.
impl Serialize for ExtendedNonNegative {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Finite(x) => s.serialize_f64(*x),
            PositiveInfinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedNonNegative {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => ExtendedNonNegative::finite(x).map_err(serde::de::Error::custom),
            Repr::Str(s) if s == "inf" => Ok(PositiveInfinity),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

/// Difference of two extended values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gap {
    Finite(f64),
    PositiveInfinity,
    NegativeInfinity,
    Indeterminate,
}

impl Gap {
    pub fn value(&self) -> Option<f64> {
        match self {
            Gap::Finite(x) => Some(*x),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_roundoff() {
        assert_eq!(ExtendedNonNegative::finite(-5e-10).unwrap(), Finite(0.0));
        assert!(ExtendedNonNegative::finite(-1e-6).is_err());
        assert!(ExtendedNonNegative::finite(f64::NAN).is_err());
        assert_eq!(ExtendedNonNegative::finite(f64::INFINITY).unwrap(), PositiveInfinity);
    }

    #[test]
    fn arithmetic_and_order() {
        assert_eq!(Finite(1.0) + PositiveInfinity, PositiveInfinity);
        assert_eq!(Finite(1.0) + Finite(2.0), Finite(3.0));
        assert!(Finite(1e300) < PositiveInfinity);
        assert_eq!(PositiveInfinity.minus(&PositiveInfinity), Gap::Indeterminate);
        assert_eq!(PositiveInfinity.scale(0.0), Finite(0.0));
        assert_eq!(format!("{}", PositiveInfinity), "inf");
    }

    #[test]
    fn json_form() {
        assert_eq!(serde_json::to_string(&PositiveInfinity).unwrap(), "\"inf\"");
        let v: ExtendedNonNegative = serde_json::from_str("0.5").unwrap();
        assert_eq!(v, Finite(0.5));
        let v: ExtendedNonNegative = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(v, PositiveInfinity);
    }
}
