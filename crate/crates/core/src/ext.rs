//! Extended reals on `(-inf, +inf]`.
//!
//! Divergence values, generator limits and bound values can all be `+inf`
//! (Kullback-Leibler between mutually singular measures, `f'(inf)` of
//! `x log x`, ...). They never reach `-inf`: a convex `f` with `f(1) = 0` is
//! bounded below near `0` and `f(x)/x` is bounded below as `x -> inf`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Lossy conversion to IEEE `f64` (`+inf` maps to `f64::INFINITY`).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Inverse of [`ExtReal::to_f64`]. NaN and `-inf` are rejected.
    pub fn from_f64(v: f64) -> Option<ExtReal> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            None
        } else if v == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else {
            Some(ExtReal::Finite(v))
        }
    }

    /// `c * self` for `c >= 0`, with the measure-theoretic convention `0 * inf = 0`.
    pub fn scale(self, c: f64) -> ExtReal {
        debug_assert!(c >= 0.0, "negative scale {c}");
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(c * v),
            ExtReal::PosInf if c == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Total order used for deterministic reductions. `Finite(NaN)` sorts last.
    pub fn total_cmp(&self, other: &ExtReal) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Ordering::Less,
            (ExtReal::PosInf, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::PosInf, ExtReal::PosInf) => Ordering::Equal,
        }
    }

    /// `|self - other|` when both are finite, `0` when both are `+inf`,
    /// `+inf` otherwise.
    pub fn abs_diff(self, other: ExtReal) -> f64 {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
            (ExtReal::PosInf, ExtReal::PosInf) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl Default for ExtReal {
    fn default() -> Self {
        ExtReal::ZERO
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::Finite(v)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        matches!(self, ExtReal::Finite(v) if v == other)
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&ExtReal::Finite(*other))
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl AddAssign for ExtReal {
    fn add_assign(&mut self, rhs: ExtReal) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

// JSON has no infinity literal: finite values serialize as numbers, `+inf`
// as the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::PosInf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Str(s) if s == "inf" || s == "+inf" => Ok(ExtReal::PosInf),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Format a float with 17 significant digits, or `inf`.
///
/// 17 digits round-trip every `f64`, so CSV output is bit-exact.
pub fn fmt17(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// [`fmt17`] for extended reals.
pub fn fmt17_ext(v: ExtReal) -> String {
    fmt17(v.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtReal::PosInf.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::PosInf.scale(0.5), ExtReal::PosInf);
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert!(ExtReal::PosInf >= ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(2.0).max(ExtReal::PosInf), ExtReal::PosInf);
    }

    #[test]
    fn json_round_trip_with_infinity() {
        let v = vec![ExtReal::Finite(0.25), ExtReal::PosInf];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[0.25,"inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn fmt17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 123456.789] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }
}
