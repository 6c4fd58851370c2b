use std::fmt;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

/// A value in {-1, +1}. Used for labels, stump polarities and base
/// hypothesis outputs. Serialized as the integer `-1` or `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    /// `+1` iff `z >= 0`; zero maps to `+1`.
    #[inline]
    pub fn of(z: f64) -> Sign {
        if z >= 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }

    /// Parses an exact ±1 real.
    pub fn from_unit(v: f64) -> Option<Sign> {
        if v == 1.0 {
            Some(Sign::Pos)
        } else if v == -1.0 {
            Some(Sign::Neg)
        } else {
            None
        }
    }
}

/// `sign(z)`: `+1` if `z >= 0`, `-1` otherwise.
#[inline]
pub fn sign_of(z: f64) -> Sign {
    Sign::of(z)
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Pos),
            -1 => Ok(Sign::Neg),
            other => Err(format!("expected -1 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Pos => write!(f, "+1"),
            Sign::Neg => write!(f, "-1"),
        }
    }
}
