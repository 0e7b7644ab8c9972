//! Lattice quasi-norm families and their triangle constants.

use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::quadrature;
use crate::rearrangement::sorted_levels;
use crate::space::{AtomicSpace, LatticeVector};
use crate::weight::WeightFunction;

pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

/// Anything that measures nonnegative functions on a fixed atomic space.
///
/// `eval_abs` receives `|f|` and must be positively homogeneous and monotone.
/// Renormed and dual functionals implement this alongside [`QuasiNorm`], so
/// the estimate searches run on either.
pub trait LatticeFunctional: Sync {
    fn weights(&self) -> &[f64];

    fn eval_abs(&self, f: &[f64]) -> f64;

    fn atom_count(&self) -> usize {
        self.weights().len()
    }
}

impl<T: LatticeFunctional + ?Sized> LatticeFunctional for &T {
    fn weights(&self) -> &[f64] {
        (**self).weights()
    }

    fn eval_abs(&self, f: &[f64]) -> f64 {
        (**self).eval_abs(f)
    }
}

/// Ordered contiguous blocks `[start, end)` covering `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Range<usize>>) -> Result<Self> {
        let mut next = 0;
        for (k, b) in blocks.iter().enumerate() {
            if b.start != next || b.end <= b.start {
                return Err(Error::invalid(format!(
                    "block {k} = [{}, {}) does not continue a contiguous cover at {next}",
                    b.start, b.end
                )));
            }
            next = b.end;
        }
        if blocks.is_empty() {
            return Err(Error::invalid("block partition needs at least one block"));
        }
        Ok(Self { blocks })
    }

    /// `count` blocks of equal size; `n` must be divisible by `count`.
    pub fn equal(n: usize, count: usize) -> Result<Self> {
        if count == 0 || !n.is_multiple_of(count) {
            return Err(Error::invalid(format!(
                "{n} atoms cannot be split into {count} equal blocks"
            )));
        }
        let size = n / count;
        Self::new((0..count).map(|k| k * size..(k + 1) * size).collect())
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|i| i..i + 1).collect(),
        }
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Number of atoms covered.
    pub fn atom_count(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn max_block_len(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).max().unwrap_or(0)
    }
}

impl Serialize for BlockPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[usize; 2]> = self.blocks.iter().map(|b| [b.start, b.end]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[usize; 2]>::deserialize(d)?;
        BlockPartition::new(pairs.into_iter().map(|[a, b]| a..b).collect())
            .map_err(serde::de::Error::custom)
    }
}

fn default_quad_tol() -> f64 {
    DEFAULT_QUAD_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NormFamily {
    /// `(Σ |fᵢ|ᵖ μᵢ)^{1/p}`, or `max |fᵢ|` for `p = ∞`.
    WeightedLp { p: Index },
    /// `(∫ (f*)ʳ w)^{1/r}`.
    LorentzLambda { r: f64, weight: WeightFunction },
    /// `(∫ (f**)ʳ w)^{1/r}`.
    LorentzGamma {
        r: f64,
        weight: WeightFunction,
        #[serde(default = "default_quad_tol")]
        quad_tol: f64,
    },
    /// `L_{p,r}` normalised so that `‖χ_A‖ = μ(A)^{1/p}`.
    ClassicalLorentz { p: f64, r: Index },
    /// Local `Lʳ` on each block, `ℓˢ` across blocks.
    Amalgam {
        r: Index,
        s: Index,
        blocks: BlockPartition,
    },
}

impl NormFamily {
    pub fn name(&self) -> &'static str {
        match self {
            NormFamily::WeightedLp { .. } => "weighted_lp",
            NormFamily::LorentzLambda { .. } => "lorentz_lambda",
            NormFamily::LorentzGamma { .. } => "lorentz_gamma",
            NormFamily::ClassicalLorentz { .. } => "classical_lorentz",
            NormFamily::Amalgam { .. } => "amalgam",
        }
    }
}

/// A quasi-norm family bound to an atomic space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiNorm {
    family: NormFamily,
    space: AtomicSpace,
}

fn check_exponent(name: &str, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!(
            "{name} must be finite and positive, got {r}"
        )));
    }
    Ok(())
}

impl QuasiNorm {
    pub fn new(family: NormFamily, space: AtomicSpace) -> Result<Self> {
        match &family {
            NormFamily::WeightedLp { .. } => {}
            NormFamily::LorentzLambda { r, .. } => check_exponent("r", *r)?,
            NormFamily::LorentzGamma {
                r,
                weight,
                quad_tol,
            } => {
                check_exponent("r", *r)?;
                if !(quad_tol.is_finite() && *quad_tol > 0.0) {
                    return Err(Error::invalid("quadrature tolerance must be positive"));
                }
                // f** decays like 1/t past the support, so the tail must integrate.
                if weight.tail_moment(1.0, *r).is_none() {
                    return Err(Error::Divergent(format!(
                        "∫ t^(-{r}) w(t) dt diverges at infinity; every nonzero f has infinite norm"
                    )));
                }
            }
            NormFamily::ClassicalLorentz { p, .. } => check_exponent("p", *p)?,
            NormFamily::Amalgam { blocks, .. } => space.check_len(blocks.atom_count())?,
        }
        Ok(Self { family, space })
    }

    pub fn lp(space: AtomicSpace, p: impl Into<Index>) -> Self {
        Self::new(NormFamily::WeightedLp { p: p.into() }, space)
            .expect("weighted Lp is always valid")
    }

    pub fn lorentz_lambda(space: AtomicSpace, r: f64, weight: WeightFunction) -> Result<Self> {
        Self::new(NormFamily::LorentzLambda { r, weight }, space)
    }

    pub fn lorentz_gamma(space: AtomicSpace, r: f64, weight: WeightFunction) -> Result<Self> {
        Self::new(
            NormFamily::LorentzGamma {
                r,
                weight,
                quad_tol: DEFAULT_QUAD_TOL,
            },
            space,
        )
    }

    pub fn classical_lorentz(space: AtomicSpace, p: f64, r: impl Into<Index>) -> Result<Self> {
        Self::new(NormFamily::ClassicalLorentz { p, r: r.into() }, space)
    }

    pub fn amalgam(
        space: AtomicSpace,
        r: impl Into<Index>,
        s: impl Into<Index>,
        blocks: BlockPartition,
    ) -> Result<Self> {
        Self::new(
            NormFamily::Amalgam {
                r: r.into(),
                s: s.into(),
                blocks,
            },
            space,
        )
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn space(&self) -> &AtomicSpace {
        &self.space
    }

    /// Same family on another space. Amalgam block partitions must still fit.
    pub fn with_space(&self, space: AtomicSpace) -> Result<Self> {
        Self::new(self.family.clone(), space)
    }

    pub fn eval(&self, f: &LatticeVector) -> Result<f64> {
        self.space.check_len(f.len())?;
        self.eval_values(f.values())
    }

    /// Norm of a raw value slice (signs are ignored).
    pub fn eval_values(&self, f: &[f64]) -> Result<f64> {
        self.space.check_len(f.len())?;
        match &self.family {
            NormFamily::LorentzGamma {
                r,
                weight,
                quad_tol,
            } => gamma_norm(f, self.space.weights(), *r, weight, *quad_tol).map(|(v, _)| v),
            _ => Ok(self.eval_unchecked(f)),
        }
    }

    fn eval_unchecked(&self, f: &[f64]) -> f64 {
        let mu = self.space.weights();
        match &self.family {
            NormFamily::WeightedLp { p } => weighted_lp(f, mu, *p),
            NormFamily::LorentzLambda { r, weight } => {
                let mut acc = 0.0;
                let mut t = 0.0;
                let mut w_prev = 0.0;
                for (level, mass) in sorted_levels(f, mu) {
                    t += mass;
                    let w_now = weight.primitive(t);
                    if level > 0.0 {
                        acc += level.powf(*r) * (w_now - w_prev);
                    }
                    w_prev = w_now;
                }
                acc.powf(1.0 / r)
            }
            NormFamily::LorentzGamma {
                r,
                weight,
                quad_tol,
            } => match gamma_norm(f, mu, *r, weight, *quad_tol) {
                Ok((v, _)) => v,
                Err(Error::QuadratureNotConverged { estimate, .. }) => estimate.powf(1.0 / r),
                Err(_) => f64::INFINITY,
            },
            NormFamily::ClassicalLorentz { p, r } => {
                let levels = sorted_levels(f, mu);
                match r {
                    Index::Infinite => {
                        let mut t = 0.0;
                        let mut sup: f64 = 0.0;
                        for (level, mass) in levels {
                            t += mass;
                            sup = sup.max(level * t.powf(1.0 / p));
                        }
                        sup
                    }
                    Index::Finite(r) => {
                        let e = r / p;
                        let mut acc = 0.0;
                        let mut t = 0.0;
                        for (level, mass) in levels {
                            let t_next = t + mass;
                            if level > 0.0 {
                                acc += level.powf(*r) * (t_next.powf(e) - t.powf(e));
                            }
                            t = t_next;
                        }
                        acc.powf(1.0 / r)
                    }
                }
            }
            NormFamily::Amalgam { r, s, blocks } => s.combine(
                blocks
                    .blocks()
                    .iter()
                    .map(|b| weighted_lp(&f[b.clone()], &mu[b.clone()], *r)),
            ),
        }
    }

    /// Smallest `κ` with `‖f+g‖ ≤ κ(‖f‖+‖g‖)` that the family guarantees.
    pub fn kappa(&self) -> Result<f64> {
        match &self.family {
            NormFamily::WeightedLp { p } => Ok(lp_kappa(*p)),
            NormFamily::LorentzLambda { r, weight } => {
                if weight.is_nonincreasing() {
                    Ok(lp_kappa(Index::finite(*r)))
                } else {
                    Err(Error::UnknownKappa(format!(
                        "Lambda_(r={r}) with a weight that is not nonincreasing"
                    )))
                }
            }
            NormFamily::LorentzGamma { r, .. } => {
                if *r >= 1.0 {
                    Ok(1.0)
                } else {
                    Err(Error::UnknownKappa(format!("Gamma_(r={r}) with r < 1")))
                }
            }
            NormFamily::ClassicalLorentz { p, r } => {
                // For r > p the weight t^{r/p-1} increases; the dilation bound
                // (f+g)*(t) ≤ f*(t/2) + g*(t/2) costs a factor 2^{1/p}.
                let base = lp_kappa(*r);
                if r.value() <= *p {
                    Ok(base)
                } else {
                    Ok(2f64.powf(1.0 / p) * base)
                }
            }
            NormFamily::Amalgam { r, s, .. } => Ok(lp_kappa(*r) * lp_kappa(*s)),
        }
    }

    pub fn is_normed(&self) -> bool {
        self.kappa().is_ok_and(|k| k == 1.0)
    }

    pub fn is_rearrangement_invariant(&self) -> bool {
        !matches!(self.family, NormFamily::Amalgam { .. })
    }

    /// The Köthe dual as a norm of a known family, when one exists.
    ///
    /// Weighted `Lᵖ` with `p ≥ 1` dualises to `L^{p'}` and amalgams with
    /// `r, s ≥ 1` dualise to `W(L^{r'}, ℓ^{s'})` on the same blocks; both
    /// pairings use the measure `μ`.
    pub fn kothe_dual(&self) -> Option<QuasiNorm> {
        let family = match &self.family {
            NormFamily::WeightedLp { p } => NormFamily::WeightedLp {
                p: p.conjugate().ok()?,
            },
            NormFamily::Amalgam { r, s, blocks } => NormFamily::Amalgam {
                r: r.conjugate().ok()?,
                s: s.conjugate().ok()?,
                blocks: blocks.clone(),
            },
            _ => return None,
        };
        Some(QuasiNorm {
            family,
            space: self.space.clone(),
        })
    }

    /// The exponent when this is a weighted Lebesgue norm, including an
    /// amalgam with equal local and global exponents.
    pub fn lp_exponent(&self) -> Option<Index> {
        match self.family {
            NormFamily::WeightedLp { p } => Some(p),
            NormFamily::Amalgam { r, s, .. } if r == s => Some(r),
            _ => None,
        }
    }
}

impl LatticeFunctional for QuasiNorm {
    fn weights(&self) -> &[f64] {
        self.space.weights()
    }

    fn eval_abs(&self, f: &[f64]) -> f64 {
        self.eval_unchecked(f)
    }
}

/// `max(1, 2^{1/p − 1})`.
pub fn lp_kappa(p: Index) -> f64 {
    2f64.powf(p.recip() - 1.0).max(1.0)
}

pub(crate) fn weighted_lp(f: &[f64], mu: &[f64], p: Index) -> f64 {
    match p {
        Index::Infinite => f.iter().fold(0.0, |m, v| m.max(v.abs())),
        Index::Finite(p) => {
            if p == 1.0 {
                return f.iter().zip(mu).map(|(v, w)| v.abs() * w).sum();
            }
            if p == 2.0 {
                return f.iter().zip(mu).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
            }
            f.iter()
                .zip(mu)
                .map(|(v, w)| v.abs().powf(p) * w)
                .sum::<f64>()
                .powf(1.0 / p)
        }
    }
}

/// `(‖f‖_Γ, quadrature error bound on ‖f‖_Γ^r)`.
fn gamma_norm(
    f: &[f64],
    mu: &[f64],
    r: f64,
    weight: &WeightFunction,
    tol: f64,
) -> Result<(f64, f64)> {
    let levels = sorted_levels(f, mu);
    let mut acc = 0.0;
    let mut err = 0.0;
    let mut t = 0.0;
    // ∫₀ᵗ f* at the current t.
    let mut mass = 0.0;
    for (k, &(level, len)) in levels.iter().enumerate() {
        let t_next = t + len;
        if k == 0 {
            // f** equals the top level on the first piece.
            acc += level.powf(r) * weight.primitive(t_next);
        } else {
            let a = mass - level * t;
            let b = level;
            let integrand = |x: f64| ((a + b * x) / x).powf(r) * weight.eval(x);
            let mut cuts = vec![t];
            cuts.extend(weight.breakpoints_between(t, t_next));
            cuts.push(t_next);
            for w in cuts.windows(2) {
                match quadrature::integrate(integrand, w[0], w[1], tol) {
                    Ok((v, e)) => {
                        acc += v;
                        err += e;
                    }
                    Err(Error::QuadratureNotConverged {
                        estimate,
                        error_bound,
                    }) => {
                        return Err(Error::QuadratureNotConverged {
                            estimate: acc + estimate,
                            error_bound: err + error_bound,
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        mass += level * len;
        t = t_next;
    }
    if mass > 0.0 {
        let tail = weight
            .tail_moment(t, r)
            .ok_or_else(|| Error::Divergent("Gamma tail integral diverges".into()))?;
        acc += mass.powf(r) * tail;
    }
    Ok((acc.powf(1.0 / r), err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> AtomicSpace {
        AtomicSpace::uniform(n)
    }

    #[test]
    fn lp_values() {
        let s = AtomicSpace::new(vec![1.0, 2.0]).unwrap();
        let f = s.vector(vec![3.0, -1.0]).unwrap();
        assert_eq!(QuasiNorm::lp(s.clone(), 1.0).eval(&f).unwrap(), 5.0);
        assert!((QuasiNorm::lp(s.clone(), 2.0).eval(&f).unwrap() - 11f64.sqrt()).abs() < 1e-15);
        assert_eq!(QuasiNorm::lp(s, Index::Infinite).eval(&f).unwrap(), 3.0);
    }

    #[test]
    fn lambda_indicator() {
        let s = AtomicSpace::new(vec![0.5, 1.5, 2.0]).unwrap();
        let w = WeightFunction::power(2.0, 0.5).unwrap();
        let n = QuasiNorm::lorentz_lambda(s.clone(), 3.0, w.clone()).unwrap();
        let chi = s.indicator(&[0, 2]).unwrap();
        let expect = w.primitive(2.5).powf(1.0 / 3.0);
        assert!((n.eval(&chi).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn classical_lorentz_indicator() {
        let s = AtomicSpace::new(vec![0.5, 1.5, 2.0]).unwrap();
        let chi = s.indicator(&[1, 2]).unwrap();
        for r in [
            Index::finite(0.5),
            Index::finite(1.0),
            Index::finite(4.0),
            Index::Infinite,
        ] {
            let n = QuasiNorm::classical_lorentz(s.clone(), 2.0, r).unwrap();
            assert!(
                (n.eval(&chi).unwrap() - 3.5f64.sqrt()).abs() < 1e-14,
                "r = {r}"
            );
        }
    }

    #[test]
    fn classical_lorentz_matches_lambda() {
        let s = AtomicSpace::new(vec![0.3, 1.0, 0.7, 2.0]).unwrap();
        let f = s.vector(vec![1.0, -4.0, 2.5, 0.5]).unwrap();
        let cl = QuasiNorm::classical_lorentz(s.clone(), 1.5, 3.0).unwrap();
        let la =
            QuasiNorm::lorentz_lambda(s, 3.0, WeightFunction::lorentz(1.5, 3.0).unwrap()).unwrap();
        let (a, b) = (cl.eval(&f).unwrap(), la.eval(&f).unwrap());
        assert!((a - b).abs() < 1e-13 * a);
    }

    #[test]
    fn amalgam_singletons_is_weighted_ls() {
        let s = unit(4);
        let f = s.vector(vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let am = QuasiNorm::amalgam(s.clone(), 1.5, 3.0, BlockPartition::singletons(4)).unwrap();
        let lp = QuasiNorm::lp(s, 3.0);
        assert!((am.eval(&f).unwrap() - lp.eval(&f).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn amalgam_blocks() {
        let s = unit(4);
        let f = s.vector(vec![3.0, 4.0, 1.0, 1.0]).unwrap();
        let am = QuasiNorm::amalgam(s, 2.0, 1.0, BlockPartition::equal(4, 2).unwrap()).unwrap();
        assert!((am.eval(&f).unwrap() - (5.0 + 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn block_partition_validation() {
        assert!(BlockPartition::new(vec![0..2, 3..4]).is_err());
        assert!(BlockPartition::new(vec![0..2, 2..2]).is_err());
        assert!(BlockPartition::equal(5, 2).is_err());
        let s = unit(5);
        assert!(QuasiNorm::amalgam(s, 1.0, 1.0, BlockPartition::equal(4, 2).unwrap()).is_err());
        let b: BlockPartition = serde_json::from_str("[[0,2],[2,5]]").unwrap();
        assert_eq!(b.blocks(), &[0..2, 2..5]);
    }

    #[test]
    fn kappas() {
        let s = unit(2);
        assert_eq!(QuasiNorm::lp(s.clone(), 2.0).kappa().unwrap(), 1.0);
        assert_eq!(QuasiNorm::lp(s.clone(), 0.5).kappa().unwrap(), 2.0);
        let b = BlockPartition::singletons(2);
        assert_eq!(
            QuasiNorm::amalgam(s.clone(), 0.5, 1.0, b.clone())
                .unwrap()
                .kappa()
                .unwrap(),
            2.0
        );
        assert_eq!(
            QuasiNorm::amalgam(s.clone(), 0.5, 0.5, b)
                .unwrap()
                .kappa()
                .unwrap(),
            4.0
        );
        let inc = WeightFunction::power(1.0, 1.0).unwrap();
        assert!(matches!(
            QuasiNorm::lorentz_lambda(s.clone(), 1.0, inc)
                .unwrap()
                .kappa(),
            Err(Error::UnknownKappa(_))
        ));
        let dec = WeightFunction::power(1.0, -0.5).unwrap();
        assert_eq!(
            QuasiNorm::lorentz_lambda(s, 0.5, dec)
                .unwrap()
                .kappa()
                .unwrap(),
            2.0
        );
    }

    #[test]
    fn gamma_rejects_divergent_tail() {
        let s = unit(2);
        assert!(matches!(
            QuasiNorm::lorentz_gamma(s.clone(), 1.0, WeightFunction::unit()),
            Err(Error::Divergent(_))
        ));
        assert!(QuasiNorm::lorentz_gamma(s, 2.0, WeightFunction::unit()).is_ok());
    }

    #[test]
    fn gamma_unit_weight_closed_form() {
        // f = χ_[0,1): f** = 1 on (0,1), 1/t after; ∫ (f**)² = 1 + 1 = 2.
        let s = unit(3);
        let n = QuasiNorm::lorentz_gamma(s.clone(), 2.0, WeightFunction::unit()).unwrap();
        let f = s.indicator(&[1]).unwrap();
        assert!((n.eval(&f).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        // f = (2,1,0): f** = 2 on (0,1), (1+t)/t on (1,2), 3/t after.
        let g = s.vector(vec![1.0, 2.0, 0.0]).unwrap();
        let middle = 1.0 + 2.0 * 2f64.ln() + 0.5;
        let expect = (4.0 + middle + 4.5).sqrt();
        assert!((n.eval(&g).unwrap() - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn kothe_dual_families() {
        let s = unit(4);
        let d = QuasiNorm::lp(s.clone(), 1.5).kothe_dual().unwrap();
        assert_eq!(d.lp_exponent(), Some(Index::finite(3.0)));
        assert!(QuasiNorm::lp(s.clone(), 0.5).kothe_dual().is_none());
        let am = QuasiNorm::amalgam(s, 1.0, 2.0, BlockPartition::equal(4, 2).unwrap()).unwrap();
        assert!(matches!(
            am.kothe_dual().unwrap().family(),
            NormFamily::Amalgam { r: Index::Infinite, s: Index::Finite(x), .. } if *x == 2.0
        ));
    }
}
