//! Distribution functions, nonincreasing rearrangements and `f**`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::LatticeVector;

/// Nonincreasing step function on `[0, L)` given as `(level, length)` pieces.
///
/// The function is right-continuous: piece `k` covers
/// `[t_{k-1}, t_k)` where `t_k` is the running sum of lengths. Beyond the last
/// piece the function is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    pieces: Vec<(f64, f64)>,
}

impl StepFunction {
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(level, length)) in pieces.iter().enumerate() {
            if !(level.is_finite() && level >= 0.0) {
                return Err(Error::invalid(format!(
                    "piece {k}: level {level} must be finite and nonnegative"
                )));
            }
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::invalid(format!(
                    "piece {k}: length {length} must be positive"
                )));
            }
            if k > 0 && level > pieces[k - 1].0 {
                return Err(Error::invalid(format!(
                    "piece {k}: levels must be nonincreasing"
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn total_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.1).sum()
    }

    /// Value at `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut end = 0.0;
        for &(level, length) in &self.pieces {
            end += length;
            if t < end {
                return level;
            }
        }
        0.0
    }

    /// `∫₀ᵗ` of the step function, summed piece by piece.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut start = 0.0;
        for &(level, length) in &self.pieces {
            if t <= start {
                break;
            }
            acc += level * (t.min(start + length) - start);
            start += length;
        }
        acc
    }

    /// Distribution function of this step function viewed as a function on
    /// `(0, ∞)`, in the encoding used by [`distribution`].
    pub fn distribution(&self) -> StepFunction {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.pieces.len());
        for &(level, length) in self.pieces.iter().filter(|p| p.0 > 0.0) {
            match merged.last_mut() {
                Some(last) if last.0 == level => last.1 += length,
                _ => merged.push((level, length)),
            }
        }
        distribution_from_levels(&merged)
    }
}

fn distribution_from_levels(levels: &[(f64, f64)]) -> StepFunction {
    let mut cumulative = Vec::with_capacity(levels.len());
    let mut acc = 0.0;
    for &(_, mass) in levels {
        acc += mass;
        cumulative.push(acc);
    }
    // Ascending in τ: the smallest positive level first.
    let mut pieces = Vec::with_capacity(levels.len());
    let mut tau = 0.0;
    for k in (0..levels.len()).rev() {
        let level = levels[k].0;
        if level > 0.0 {
            pieces.push((cumulative[k], level - tau));
            tau = level;
        }
    }
    StepFunction { pieces }
}

/// Distribution function `τ ↦ μ{|f| > τ}` as a step function in `τ`.
///
/// The pieces are `(μ-value, τ-length)`, starting at `τ = 0`.
pub fn distribution(f: &LatticeVector) -> StepFunction {
    distribution_from_levels(&sorted_levels(f.values(), f.space().weights()))
}

/// Nonincreasing rearrangement `f*` on `(0, μ(Ω))`.
///
/// Atoms are sorted by `|value|` descending (ties by atom index) and equal
/// levels are merged; a zero level is kept so the total length equals the
/// measure of the space.
pub fn rearrangement(f: &LatticeVector) -> StepFunction {
    StepFunction {
        pieces: sorted_levels(f.values(), f.space().weights()),
    }
}

/// `f**(t) = (1/t) ∫₀ᵗ f*`.
pub fn double_star(fstar: &StepFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("f** is defined for t > 0, got {t}")));
    }
    Ok(fstar.integral_to(t) / t)
}

/// `(level, mass)` pairs of `|values|` sorted descending with equal levels merged.
pub(crate) fn sorted_levels(values: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(values.len());
    for i in order {
        let level = values[i].abs();
        match out.last_mut() {
            Some(last) if last.0 == level => last.1 += weights[i],
            _ => out.push((level, weights[i])),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::AtomicSpace;

    fn vec_on(weights: &[f64], values: &[f64]) -> LatticeVector {
        AtomicSpace::new(weights.to_vec())
            .unwrap()
            .vector(values.to_vec())
            .unwrap()
    }

    #[test]
    fn distribution_counts_atoms() {
        let f = vec_on(&[1.0, 1.0, 1.0], &[1.0, 3.0, 2.0]);
        let d = distribution(&f);
        assert_eq!(d.pieces(), &[(3.0, 1.0), (2.0, 1.0), (1.0, 1.0)]);
        assert_eq!(d.eval(0.0), 3.0);
        assert_eq!(d.eval(0.999), 3.0);
        assert_eq!(d.eval(1.0), 2.0);
        assert_eq!(d.eval(2.5), 1.0);
        assert_eq!(d.eval(3.0), 0.0);
    }

    #[test]
    fn distribution_of_zero_and_constant() {
        let z = vec_on(&[1.0, 2.0], &[0.0, 0.0]);
        assert!(distribution(&z).pieces().is_empty());
        assert_eq!(distribution(&z).eval(0.0), 0.0);
        let c = vec_on(&[2.0, 3.0], &[5.0, -5.0]);
        assert_eq!(distribution(&c).pieces(), &[(5.0, 5.0)]);
    }

    #[test]
    fn rearrangement_sorts_and_merges() {
        let f = vec_on(&[1.0, 1.0, 1.0], &[1.0, 3.0, 2.0]);
        assert_eq!(
            rearrangement(&f).pieces(),
            &[(3.0, 1.0), (2.0, 1.0), (1.0, 1.0)]
        );
        let chi = vec_on(&[0.5, 0.25, 1.0], &[1.0, 0.0, 1.0]);
        assert_eq!(rearrangement(&chi).pieces(), &[(1.0, 1.5), (0.0, 0.25)]);
        let tied = vec_on(&[1.0, 2.0, 1.0], &[-2.0, 2.0, 1.0]);
        assert_eq!(rearrangement(&tied).pieces(), &[(2.0, 3.0), (1.0, 1.0)]);
    }

    #[test]
    fn double_star_examples() {
        let flat = StepFunction::new(vec![(1.0, 3.0)]).unwrap();
        assert_eq!(double_star(&flat, 2.0).unwrap(), 1.0);
        let two = StepFunction::new(vec![(3.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(double_star(&two, 2.0).unwrap(), 2.0);
        let short = StepFunction::new(vec![(2.0, 1.0)]).unwrap();
        assert_eq!(double_star(&short, 4.0).unwrap(), 0.5);
        assert!(double_star(&short, 0.0).is_err());
        assert!(double_star(&short, -1.0).is_err());
    }

    #[test]
    fn step_function_validation() {
        assert!(StepFunction::new(vec![(1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(StepFunction::new(vec![(1.0, 0.0)]).is_err());
        assert!(StepFunction::new(vec![(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn equimeasurable_with_rearrangement() {
        let f = vec_on(&[0.5, 2.0, 1.0, 0.25, 1.0], &[-1.0, 0.5, 3.0, 0.0, 0.5]);
        assert_eq!(distribution(&f), rearrangement(&f).distribution());
    }
}
