//! Grid diagnostics for the Lorentz weight hypotheses.
//!
//! These are finite-sample checks: a pass means no violation on the grid, not
//! a proof.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::Index;
use crate::weight::WeightFunction;

/// Relative slack before a pair counts as a violation.
const REL_TOL: f64 = 1e-12;

/// `per_decade` logarithmically spaced points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && per_decade > 0) {
        return Err(Error::invalid(
            "log grid needs 0 < lo < hi and a positive density",
        ));
    }
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).round().max(1.0) as usize;
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..=steps)
        .map(|k| (a + (b - a) * k as f64 / steps as f64).exp())
        .collect())
}

/// 64 points per decade over `[1e-6, 1e6]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 64).expect("static grid parameters")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    /// First violating `(t₁, t₂)` in grid order (`t₁ ≤ t₂`).
    pub violation: Option<(f64, f64)>,
    /// Pairs examined.
    pub pairs: usize,
}

fn ratio_exponent(a: Index, b: Index) -> Result<f64> {
    match (a, b) {
        (Index::Finite(a), Index::Finite(b)) => Ok(a / b),
        _ => Err(Error::invalid("exponents must be finite")),
    }
}

fn scan(grid: &[f64], violated: impl Fn(f64, f64) -> bool) -> ConditionReport {
    let mut pairs = 0;
    for (i, &t1) in grid.iter().enumerate() {
        for &t2 in &grid[i..] {
            pairs += 1;
            if violated(t1, t2) {
                return ConditionReport {
                    holds: false,
                    violation: Some((t1, t2)),
                    pairs,
                };
            }
        }
    }
    ConditionReport {
        holds: true,
        violation: None,
        pairs,
    }
}

/// Superadditivity `W(t₁+t₂)^{p/r} ≥ W(t₁)^{p/r} + W(t₂)^{p/r}` on grid pairs.
pub fn convexity_check_w(
    w: &WeightFunction,
    p: Index,
    r: Index,
    grid: &[f64],
) -> Result<ConditionReport> {
    if p < r {
        return Err(Error::invalid("convexity check needs p >= r"));
    }
    let e = ratio_exponent(p, r)?;
    let big = |t: f64| w.primitive(t).powf(e);
    Ok(scan(grid, |t1, t2| {
        big(t1 + t2) < (big(t1) + big(t2)) * (1.0 - REL_TOL)
    }))
}

/// Subadditivity `V(t₁+t₂)^{q/s} ≤ V(t₁)^{q/s} + V(t₂)^{q/s}` on grid pairs.
pub fn concavity_check_v(
    v: &WeightFunction,
    q: Index,
    s: Index,
    grid: &[f64],
) -> Result<ConditionReport> {
    let e = ratio_exponent(q, s)?;
    let big = |t: f64| v.primitive(t).powf(e);
    Ok(scan(grid, |t1, t2| {
        big(t1 + t2) > (big(t1) + big(t2)) * (1.0 + REL_TOL)
    }))
}

/// Grid supremum of `z·V(1/z)^{1/r}·W(z)^{−1/s}`.
pub fn fourier_weight_condition(
    v: &WeightFunction,
    w: &WeightFunction,
    r: Index,
    s: Index,
    grid: &[f64],
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for &z in grid {
        let wz = w.primitive(z);
        if wz == 0.0 {
            return Err(Error::Domain(format!("W({z}) = 0")));
        }
        let val = z * v.primitive(1.0 / z).powf(r.recip()) * wz.powf(-s.recip());
        sup = sup.max(val);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: f64) -> Index {
        Index::finite(x)
    }

    #[test]
    fn grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 12 * 64 + 1);
        assert!((g[0] - 1e-6).abs() < 1e-18);
        assert!((g[g.len() - 1] - 1e6).abs() < 1e-6);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lorentz_weight_is_convex_at_p_over_r() {
        // W(t) = t^{r/p}, so W(t^{p/r}) = t: additive, the boundary case.
        let (p, r) = (3.0, 1.5);
        let w = WeightFunction::lorentz(p, r).unwrap();
        assert!(
            convexity_check_w(&w, f(p), f(r), &default_grid())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn square_root_fails_superadditivity() {
        let w = WeightFunction::power(0.5, -0.5).unwrap(); // W(t) = √t
        let rep = convexity_check_w(&w, f(1.0), f(1.0), &default_grid()).unwrap();
        assert!(!rep.holds);
        let (t1, t2) = rep.violation.unwrap();
        assert!(w.primitive(t1 + t2) < w.primitive(t1) + w.primitive(t2));
        let sq = WeightFunction::power(2.0, 1.0).unwrap(); // W(t) = t²
        assert!(
            convexity_check_w(&sq, f(2.0), f(2.0), &default_grid())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn concavity_cases() {
        let dec = WeightFunction::piecewise(vec![1.0, 10.0], vec![3.0, 1.0, 0.2]).unwrap();
        assert!(
            concavity_check_v(&dec, f(2.0), f(2.0), &default_grid())
                .unwrap()
                .holds
        );
        let sq = WeightFunction::power(2.0, 1.0).unwrap();
        assert!(
            !concavity_check_v(&sq, f(1.0), f(1.0), &default_grid())
                .unwrap()
                .holds
        );
        let (q, s) = (4.0, 2.0);
        let eq = WeightFunction::lorentz(q, s).unwrap(); // V(t) = t^{s/q}
        assert!(
            concavity_check_v(&eq, f(q), f(s), &default_grid())
                .unwrap()
                .holds
        );
    }

    #[test]
    fn weight_condition_values() {
        let g = default_grid();
        let unit = WeightFunction::unit();
        // v = w = 1, s = r'
        let sup = fourier_weight_condition(&unit, &unit, f(3.0), f(1.5), &g).unwrap();
        assert!((sup - 1.0).abs() < 1e-12);
        let sup = fourier_weight_condition(&unit, &unit, f(2.0), f(2.0), &g).unwrap();
        assert!((sup - 1.0).abs() < 1e-12);
        // V(z) = z², W(z) = z: z^{-1/2}, blowing up as the grid reaches 0.
        let v = WeightFunction::power(2.0, 1.0).unwrap();
        let narrow =
            fourier_weight_condition(&v, &unit, f(2.0), f(2.0), &log_grid(1e-2, 1e2, 8).unwrap())
                .unwrap();
        let wide = fourier_weight_condition(&v, &unit, f(2.0), f(2.0), &g).unwrap();
        assert!((narrow - 10.0).abs() < 1e-9);
        assert!((wide - 1e3).abs() < 1e-6);
    }

    #[test]
    fn zero_primitive_is_domain_error() {
        let w = WeightFunction::piecewise(vec![1.0], vec![0.0, 1.0]).unwrap();
        let unit = WeightFunction::unit();
        assert!(matches!(
            fourier_weight_condition(&unit, &w, f(2.0), f(2.0), &[0.5, 2.0]),
            Err(Error::Domain(_))
        ));
    }
}
