use std::fmt;
use std::ops::Add;

use serde::de::{self, Deserializer, Visitor};
use serde::{Serialize, Serializer};

use crate::Scalar;

/// Extended real number: a finite value or one of the two infinities.
///
/// Serialized as a JSON number when finite and as the strings `"+inf"` /
/// `"-inf"` otherwise, since JSON has no infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> ExtReal<T> {
    pub fn from_scalar(x: T) -> Self {
        if x.is_nan() || x == T::infinity() {
            ExtReal::PosInf
        } else if x == T::neg_infinity() {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn finite(self) -> Option<T> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Maps to the scalar line, infinities included.
    pub fn to_scalar(self) -> T {
        match self {
            ExtReal::NegInf => T::neg_infinity(),
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => T::infinity(),
        }
    }

    /// Multiplication by a positive scalar.
    pub fn scale(self, alpha: T) -> Self {
        debug_assert!(alpha > T::zero());
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(alpha * x),
            other => other,
        }
    }

    pub fn lt(self, other: Self) -> bool {
        self.to_scalar() < other.to_scalar()
    }
}

/// `+inf + -inf` is resolved to `+inf`: in this crate sums only ever combine
/// function values of CPC functions, which never take the value `-inf`.
impl<T: Scalar> Add for ExtReal<T> {
    type Output = ExtReal<T>;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            (ExtReal::NegInf, _) | (_, ExtReal::NegInf) => ExtReal::NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from_scalar(a + b),
        }
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

impl<T: Scalar> Serialize for ExtReal<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => x.serialize(s),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de, T: Scalar> serde::Deserialize<'de> for ExtReal<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);

        impl<T: Scalar> Visitor<'_> for V<T> {
            type Value = ExtReal<T>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"+inf\", \"inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(ExtReal::from_scalar(T::lit(v)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v {
                    "+inf" | "inf" => Ok(ExtReal::PosInf),
                    "-inf" => Ok(ExtReal::NegInf),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(V(std::marker::PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let xs: Vec<ExtReal<f64>> = vec![ExtReal::Finite(1.5), ExtReal::PosInf, ExtReal::NegInf];
        let s = serde_json::to_string(&xs).unwrap();
        assert_eq!(s, r#"[1.5,"+inf","-inf"]"#);
        let back: Vec<ExtReal<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs);
    }

    #[test]
    fn infinite_sums_absorb() {
        let a = ExtReal::Finite(2.0f64);
        assert_eq!(a + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(a + ExtReal::Finite(-1.0), ExtReal::Finite(1.0));
        assert!(ExtReal::Finite(-3.0f64).lt(ExtReal::Finite(0.0)));
    }
}
