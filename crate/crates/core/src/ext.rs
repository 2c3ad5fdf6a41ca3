//! Extended reals: a finite value or minus infinity.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A real number or `-∞`.
///
/// `-∞` is absorbing under addition with finite values and under `min`.
/// The derived order puts `NegInf` below every finite value.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
}

impl ExtReal {
    /// Maps `f64::NEG_INFINITY` to `NegInf`. NaN and `+∞` are not representable.
    pub fn from_f64(v: f64) -> Self {
        assert!(
            !v.is_nan() && v != f64::INFINITY,
            "not an extended real: {v}"
        );
        if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::NegInf => None,
            ExtReal::Finite(v) => Some(v),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, c: f64) -> Self {
        match self {
            ExtReal::NegInf => ExtReal::NegInf,
            ExtReal::Finite(v) => ExtReal::Finite(v + c),
        }
    }

    pub fn scale(self, c: f64) -> Self {
        debug_assert!(c > 0.0);
        match self {
            ExtReal::NegInf => ExtReal::NegInf,
            ExtReal::Finite(v) => ExtReal::Finite(v * c),
        }
    }

    pub fn min(self, other: Self) -> Self {
        match self.partial_cmp(&other) {
            Some(Ordering::Greater) => other,
            _ => self,
        }
    }

    pub fn max(self, other: Self) -> Self {
        match self.partial_cmp(&other) {
            Some(Ordering::Less) => other,
            _ => self,
        }
    }

    /// Both `-∞`, or both finite and within `tol`.
    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::NegInf, ExtReal::NegInf) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }

    /// `self <= other + tol`, with `-∞` below everything.
    pub fn le_tol(self, other: Self, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::NegInf, _) => true,
            (ExtReal::Finite(_), ExtReal::NegInf) => false,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= b + tol,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(v) => write!(f, "{v:.16e}"),
        }
    }
}

// Finite values serialize as JSON numbers, -∞ as the string "-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::Finite(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;
        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                if v == "-inf" {
                    Ok(ExtReal::NegInf)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(ExtVisitor)
    }
}
