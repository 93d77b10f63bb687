//! Extended real numbers: a finite value, `+∞` or `-∞`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::de::{self, Deserializer, Visitor};
use serde::{Serialize, Serializer};

/// A totally ordered extended real. Finite payloads are never NaN.
#[derive(Debug, Clone, Copy)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Converts an `f64`, mapping infinities to the matching variant.
    ///
    /// # Panics
    /// Panics on NaN.
    pub fn new(x: f64) -> Self {
        assert!(!x.is_nan(), "ExtReal cannot hold NaN");
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Lossless conversion to `f64` with IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Adds a finite shift; infinities absorb it.
    pub fn shift(self, c: f64) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::new(x + c),
            other => other,
        }
    }

    /// Multiplies by a nonnegative scalar with the convention `0·∞ = 0`.
    pub fn scale(self, lambda: f64) -> Self {
        debug_assert!(lambda >= 0.0);
        if lambda == 0.0 {
            return ExtReal::ZERO;
        }
        match self {
            ExtReal::Finite(x) => ExtReal::new(lambda * x),
            other => other,
        }
    }

    /// Sum of two extended reals; `None` for `∞ - ∞`.
    pub fn checked_add(self, other: ExtReal) -> Option<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(ExtReal::new(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
        }
    }

    /// Difference `self - other`; `None` when both are the same infinity.
    pub fn checked_sub(self, other: ExtReal) -> Option<ExtReal> {
        self.checked_add(-other)
    }

    /// `|self - other|`, with equal infinities at distance zero.
    pub fn distance(self, other: ExtReal) -> f64 {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
            (a, b) if a == b => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::new(x)
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            // -0.0 and 0.0 compare equal.
            (Finite(a), Finite(b)) => a.partial_cmp(b).expect("ExtReal holds no NaN"),
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

/// Serialized as a JSON number, or the strings `"inf"` / `"-inf"`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                if v.is_nan() {
                    return Err(E::custom("NaN is not an extended real"));
                }
                Ok(ExtReal::new(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal::PosInf),
                    "-inf" => Ok(ExtReal::NegInf),
                    other => Err(E::custom(format!("unknown extended real {other:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_places_infinities_at_the_ends() {
        let mut v = vec![ExtReal::PosInf, ExtReal::Finite(1.0), ExtReal::NegInf, ExtReal::Finite(-3.0)];
        v.sort();
        assert_eq!(v, vec![ExtReal::NegInf, ExtReal::Finite(-3.0), ExtReal::Finite(1.0), ExtReal::PosInf]);
        assert_eq!(ExtReal::NegInf.max(ExtReal::Finite(2.0)), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::PosInf.min(ExtReal::Finite(2.0)), ExtReal::Finite(2.0));
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtReal::PosInf.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::NegInf.scale(0.5), ExtReal::NegInf);
    }

    #[test]
    fn opposite_infinities_do_not_add() {
        assert!(ExtReal::PosInf.checked_add(ExtReal::NegInf).is_none());
        assert_eq!(ExtReal::PosInf.checked_add(ExtReal::Finite(1.0)), Some(ExtReal::PosInf));
    }

    #[test]
    fn json_round_trip() {
        let v = vec![ExtReal::NegInf, ExtReal::Finite(0.5), ExtReal::PosInf];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["-inf",0.5,"inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
