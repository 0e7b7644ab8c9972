//! Lorentz weights with exactly computable primitives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A weight `w` on `(0, ∞)` whose primitive `W(t) = ∫₀ᵗ w` has a closed form.
///
/// * `Power { c, a }` is `w(t) = c·tᵃ` with `c > 0`, `a > −1`.
/// * `PiecewiseConstant` takes `levels[0]` on `(0, b₀)`, `levels[k]` on
///   `[b_{k−1}, b_k)` and the last level on `[b_last, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawWeight")]
pub enum WeightFunction {
    Power {
        c: f64,
        a: f64,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawWeight {
    Power {
        c: f64,
        a: f64,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
}

impl TryFrom<RawWeight> for WeightFunction {
    type Error = Error;

    fn try_from(raw: RawWeight) -> Result<Self> {
        match raw {
            RawWeight::Power { c, a } => Self::power(c, a),
            RawWeight::PiecewiseConstant {
                breakpoints,
                levels,
            } => Self::piecewise(breakpoints, levels),
        }
    }
}

impl WeightFunction {
    pub fn power(c: f64, a: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("power weight needs c > 0, got {c}")));
        }
        if !(a.is_finite() && a > -1.0) {
            return Err(Error::invalid(format!(
                "power weight needs a > -1, got {a}"
            )));
        }
        Ok(WeightFunction::Power { c, a })
    }

    pub fn piecewise(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(Error::invalid(
                "piecewise weight needs exactly one more level than breakpoints",
            ));
        }
        if breakpoints.iter().any(|b| !(b.is_finite() && *b > 0.0))
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::invalid(
                "breakpoints must be positive and strictly increasing",
            ));
        }
        if levels.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::invalid("levels must be finite and nonnegative"));
        }
        if levels.iter().all(|&l| l == 0.0) {
            return Err(Error::invalid("weight vanishes identically"));
        }
        Ok(WeightFunction::PiecewiseConstant {
            breakpoints,
            levels,
        })
    }

    /// `w ≡ 1`, so `W(t) = t`.
    pub fn unit() -> Self {
        WeightFunction::Power { c: 1.0, a: 0.0 }
    }

    /// Weight `(r/p)·t^{r/p − 1}` with `W(t) = t^{r/p}`, which turns `Λ_{r,w}` into `L_{p,r}`.
    pub fn lorentz(p: f64, r: f64) -> Result<Self> {
        Self::power(r / p, r / p - 1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            WeightFunction::Power { c, a } => c * t.powf(*a),
            WeightFunction::PiecewiseConstant {
                breakpoints,
                levels,
            } => {
                let k = breakpoints.partition_point(|&b| b <= t);
                levels[k]
            }
        }
    }

    /// `W(t) = ∫₀ᵗ w`, exact.
    pub fn primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            WeightFunction::Power { c, a } => c * t.powf(a + 1.0) / (a + 1.0),
            WeightFunction::PiecewiseConstant {
                breakpoints,
                levels,
            } => {
                let mut acc = 0.0;
                let mut start = 0.0;
                for (k, &level) in levels.iter().enumerate() {
                    let end = breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
                    if t <= end {
                        return acc + level * (t - start);
                    }
                    acc += level * (end - start);
                    start = end;
                }
                acc
            }
        }
    }

    /// Points inside `(lo, hi)` where `w` jumps.
    pub fn breakpoints_between(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            WeightFunction::Power { .. } => Vec::new(),
            WeightFunction::PiecewiseConstant { breakpoints, .. } => breakpoints
                .iter()
                .copied()
                .filter(|&b| b > lo && b < hi)
                .collect(),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        match self {
            WeightFunction::Power { a, .. } => *a <= 0.0,
            WeightFunction::PiecewiseConstant { levels, .. } => {
                levels.windows(2).all(|w| w[1] <= w[0])
            }
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        match self {
            WeightFunction::Power { a, .. } => *a >= 0.0,
            WeightFunction::PiecewiseConstant { levels, .. } => {
                levels.windows(2).all(|w| w[1] >= w[0])
            }
        }
    }

    /// Whether `∫₀^∞ w = ∞`.
    pub fn has_infinite_mass(&self) -> bool {
        match self {
            WeightFunction::Power { .. } => true,
            WeightFunction::PiecewiseConstant { levels, .. } => *levels.last().unwrap() > 0.0,
        }
    }

    /// `∫_{t₀}^∞ t^{−r} w(t) dt` in closed form; `None` when it diverges.
    pub fn tail_moment(&self, t0: f64, r: f64) -> Option<f64> {
        match self {
            WeightFunction::Power { c, a } => {
                let e = a - r + 1.0;
                (e < 0.0).then(|| c * t0.powf(e) / -e)
            }
            WeightFunction::PiecewiseConstant {
                breakpoints,
                levels,
            } => {
                let mut acc = 0.0;
                let mut start: f64 = 0.0;
                for (k, &level) in levels.iter().enumerate() {
                    let end = breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
                    let lo = start.max(t0);
                    start = end;
                    if end <= lo || level == 0.0 {
                        continue;
                    }
                    acc += level * power_moment(lo, end, r)?;
                }
                Some(acc)
            }
        }
    }
}

/// `∫ₓʸ t^{−r} dt` for `0 < x < y ≤ ∞`.
fn power_moment(x: f64, y: f64, r: f64) -> Option<f64> {
    if y.is_infinite() {
        return (r > 1.0).then(|| x.powf(1.0 - r) / (r - 1.0));
    }
    if r == 1.0 {
        Some((y / x).ln())
    } else {
        Some((y.powf(1.0 - r) - x.powf(1.0 - r)) / (1.0 - r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_primitive() {
        let w = WeightFunction::power(3.0, 2.0).unwrap();
        assert!((w.primitive(2.0) - 8.0).abs() < 1e-12);
        assert_eq!(w.primitive(0.0), 0.0);
        let l = WeightFunction::lorentz(2.0, 1.0).unwrap();
        assert!((l.primitive(9.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn piecewise_primitive_and_eval() {
        let w = WeightFunction::piecewise(vec![1.0, 3.0], vec![2.0, 1.0, 0.5]).unwrap();
        assert_eq!(w.eval(0.5), 2.0);
        assert_eq!(w.eval(1.0), 1.0);
        assert_eq!(w.eval(5.0), 0.5);
        assert_eq!(w.primitive(1.0), 2.0);
        assert_eq!(w.primitive(2.0), 3.0);
        assert_eq!(w.primitive(5.0), 2.0 + 2.0 + 1.0);
        assert!(w.is_nonincreasing());
        assert!(!w.is_nondecreasing());
    }

    #[test]
    fn rejects_invalid() {
        assert!(WeightFunction::power(1.0, -1.0).is_err());
        assert!(WeightFunction::power(0.0, 1.0).is_err());
        assert!(WeightFunction::piecewise(vec![2.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(WeightFunction::piecewise(vec![1.0], vec![1.0]).is_err());
        assert!(WeightFunction::piecewise(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn tail_moments() {
        // ∫₂^∞ t^{-2} dt = 1/2
        let unit = WeightFunction::unit();
        assert!((unit.tail_moment(2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(unit.tail_moment(2.0, 1.0).is_none());
        let pw = WeightFunction::piecewise(vec![4.0], vec![1.0, 0.0]).unwrap();
        // ∫₂⁴ t^{-1} dt = ln 2
        assert!((pw.tail_moment(2.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn deserializes_with_validation() {
        let w: WeightFunction =
            serde_json::from_str(r#"{"kind":"power","c":1.0,"a":0.5}"#).unwrap();
        assert_eq!(w, WeightFunction::Power { c: 1.0, a: 0.5 });
        let bad = serde_json::from_str::<WeightFunction>(r#"{"kind":"power","c":1.0,"a":-2.0}"#);
        assert!(bad.is_err());
    }
}
