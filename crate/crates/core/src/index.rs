//! Exponents in `(0, ∞]`.
//!
//! Infinity is a distinct value rather than `f64::INFINITY` so that every
//! "usual modification" (sums of p-th powers becoming maxima) is an explicit
//! branch. Arithmetic follows `1/∞ = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Index {
    Finite(f64),
    Infinite,
}

impl Index {
    /// Builds a finite exponent, rejecting non-positive or non-finite input.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::invalid(format!(
                "exponent must be positive, got {p}"
            )));
        }
        if p.is_infinite() {
            return Ok(Index::Infinite);
        }
        Ok(Index::Finite(p))
    }

    pub fn finite(p: f64) -> Self {
        Self::new(p).expect("finite positive exponent")
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Index::Infinite)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Index::Finite(p) => 1.0 / p,
            Index::Infinite => 0.0,
        }
    }

    /// Value as `f64`, mapping `∞` to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            Index::Finite(p) => p,
            Index::Infinite => f64::INFINITY,
        }
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            Index::Finite(p) => Some(p),
            Index::Infinite => None,
        }
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`; defined for `p ≥ 1`.
    pub fn conjugate(self) -> Result<Self> {
        match self {
            Index::Infinite => Ok(Index::Finite(1.0)),
            Index::Finite(p) if p == 1.0 => Ok(Index::Infinite),
            Index::Finite(p) if p > 1.0 => Ok(Index::Finite(p / (p - 1.0))),
            Index::Finite(p) => Err(Error::invalid(format!(
                "no conjugate exponent for p = {p} < 1"
            ))),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `(Σ xᵢ^p)^{1/p}` for nonnegative inputs, or `max xᵢ` when `p = ∞`.
    pub fn combine<I: IntoIterator<Item = f64>>(self, terms: I) -> f64 {
        match self {
            Index::Infinite => terms.into_iter().fold(0.0, f64::max),
            Index::Finite(p) => terms
                .into_iter()
                .map(|x| x.powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl From<f64> for Index {
    fn from(p: f64) -> Self {
        Index::finite(p)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(p) => write!(f, "{p}"),
            Index::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Index {
    type Err = Error;

    /// Accepts decimals, fractions such as `3/2`, and `inf`/`infinity`/`∞`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Index::Infinite),
            _ => {}
        }
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("cannot parse exponent '{s}'")))
        };
        let v = match t.split_once('/') {
            Some((num, den)) => parse(num)? / parse(den)?,
            None => parse(t)?,
        };
        Index::new(v)
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Index::Finite(p) => serializer.serialize_f64(*p),
            Index::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Index::new(p).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_infinity() {
        assert_eq!("3/2".parse::<Index>().unwrap(), Index::Finite(1.5));
        assert_eq!("inf".parse::<Index>().unwrap(), Index::Infinite);
        assert_eq!("∞".parse::<Index>().unwrap(), Index::Infinite);
        assert!("0".parse::<Index>().is_err());
        assert!("-1".parse::<Index>().is_err());
    }

    #[test]
    fn conjugates() {
        assert_eq!(Index::finite(1.0).conjugate().unwrap(), Index::Infinite);
        assert_eq!(Index::Infinite.conjugate().unwrap(), Index::finite(1.0));
        assert_eq!(Index::finite(2.0).conjugate().unwrap(), Index::finite(2.0));
        assert_eq!(Index::finite(1.5).conjugate().unwrap(), Index::finite(3.0));
        assert!(Index::finite(0.5).conjugate().is_err());
    }

    #[test]
    fn ordering_and_combine() {
        assert!(Index::Infinite > Index::finite(1e300));
        assert_eq!(Index::finite(2.0).min(Index::Infinite), Index::finite(2.0));
        assert_eq!(Index::Infinite.combine([1.0, 3.0, 2.0]), 3.0);
        assert!((Index::finite(2.0).combine([3.0, 4.0]) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let v = vec![Index::finite(1.5), Index::Infinite];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf"]"#);
        let back: Vec<Index> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
