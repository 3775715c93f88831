use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A real number or +∞. `NegInf` only shows up in ψ-values (ψ = log Q with Q = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, ExtendedReal::PosInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Lossy conversion for comparisons and plotting.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(x) => x,
            ExtendedReal::PosInf => f64::INFINITY,
            ExtendedReal::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtendedReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(x)
        }
    }

    /// `self ≤ other + tol`, with the obvious infinite cases.
    pub fn le_within(self, other: ExtendedReal, tol: f64) -> bool {
        match (self, other) {
            (_, ExtendedReal::PosInf) | (ExtendedReal::NegInf, _) => true,
            (ExtendedReal::PosInf, _) | (_, ExtendedReal::NegInf) => false,
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a <= b + tol,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInf => write!(f, "inf"),
            ExtendedReal::NegInf => write!(f, "-inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            ExtendedReal::PosInf => s.serialize_str("inf"),
            ExtendedReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtendedReal::Finite(x)),
            Raw::Str(s) if s == "inf" => Ok(ExtendedReal::PosInf),
            Raw::Str(s) if s == "-inf" => Ok(ExtendedReal::NegInf),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad extended real {s:?}"))),
        }
    }
}
