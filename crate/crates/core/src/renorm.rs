//! Disjoint-partition renormings.
//!
//! `‖f‖_{(p)}` is the supremum and `‖f‖^{(q)}` the infimum, over set
//! partitions `(H_j)` of the support of `f`, of `(Σ‖fχ_{H_j}‖ᵖ)^{1/p}`. On a
//! finite support both are attained, and a dynamic program over subsets of the
//! support computes them exactly.

use rand::Rng;

use crate::dual::{dual_search, kothe_dual_functional, DualFunctional};
use crate::error::{Error, Result};
use crate::estimates::{restricted, EstimateResult};
use crate::index::Index;
use crate::norm::{LatticeFunctional, QuasiNorm};
use crate::partition::{blocks_of, random_partition, ENUMERATION_CAP};
use crate::search::{rng_for, SearchConfig, SearchStats};
use crate::space::AtomicSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Sup,
    Inf,
}

/// Optimal value and blocks over all set partitions of `supp f`.
fn partition_dp<F: LatticeFunctional + ?Sized>(
    func: &F,
    e: Index,
    f: &[f64],
    ext: Extremum,
) -> Result<(f64, Vec<Vec<usize>>)> {
    let support: Vec<usize> = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
    let k = support.len();
    if k > ENUMERATION_CAP {
        return Err(Error::SupportTooLarge {
            support: k,
            cap: ENUMERATION_CAP,
        });
    }
    if k == 0 {
        return Ok((0.0, Vec::new()));
    }
    let full = (1usize << k) - 1;
    // φ(mask) in the combining scale: ‖·‖ᵖ for finite p, ‖·‖ for p = ∞.
    let lift = |v: f64| match e {
        Index::Finite(p) => v.powf(p),
        Index::Infinite => v,
    };
    let join = |a: f64, b: f64| match e {
        Index::Finite(_) => a + b,
        Index::Infinite => a.max(b),
    };
    let better = |a: f64, b: f64| match ext {
        Extremum::Sup => a > b,
        Extremum::Inf => a < b,
    };
    let mut phi = vec![0.0; full + 1];
    let mut atoms = Vec::with_capacity(k);
    for (mask, slot) in phi.iter_mut().enumerate().skip(1) {
        atoms.clear();
        atoms.extend((0..k).filter(|b| mask >> b & 1 == 1).map(|b| support[b]));
        *slot = lift(restricted(func, f, &atoms));
    }
    let mut best = vec![0.0; full + 1];
    let mut choice = vec![0usize; full + 1];
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // Submasks of `mask` containing its lowest bit.
        let mut sub = rest;
        let mut init = false;
        loop {
            let block = sub | low;
            let v = join(phi[block], best[mask ^ block]);
            if !init || better(v, best[mask]) {
                best[mask] = v;
                choice[mask] = block;
                init = true;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut blocks = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let block = choice[mask];
        blocks.push(
            (0..k)
                .filter(|b| block >> b & 1 == 1)
                .map(|b| support[b])
                .collect(),
        );
        mask ^= block;
    }
    let value = match e {
        Index::Finite(p) => best[full].powf(1.0 / p),
        Index::Infinite => best[full],
    };
    Ok((value, blocks))
}

/// `‖f‖_{(p)}`: supremum over partitions of the support.
pub fn renorm_lower_p<F: LatticeFunctional + ?Sized>(func: &F, p: Index, f: &[f64]) -> Result<f64> {
    partition_dp(func, p, f, Extremum::Sup).map(|(v, _)| v)
}

/// `‖f‖^{(q)}`: infimum over partitions of the support.
pub fn renorm_upper_q<F: LatticeFunctional + ?Sized>(func: &F, q: Index, f: &[f64]) -> Result<f64> {
    partition_dp(func, q, f, Extremum::Inf).map(|(v, _)| v)
}

/// The optimal partition for `‖f‖_{(p)}`.
pub fn renorm_lower_p_partition<F: LatticeFunctional + ?Sized>(
    func: &F,
    p: Index,
    f: &[f64],
) -> Result<Vec<Vec<usize>>> {
    partition_dp(func, p, f, Extremum::Sup).map(|(_, b)| b)
}

/// The optimal partition for `‖f‖^{(q)}`.
pub fn renorm_upper_q_partition<F: LatticeFunctional + ?Sized>(
    func: &F,
    q: Index,
    f: &[f64],
) -> Result<Vec<Vec<usize>>> {
    partition_dp(func, q, f, Extremum::Inf).map(|(_, b)| b)
}

fn sampled<F: LatticeFunctional + ?Sized>(
    func: &F,
    e: Index,
    f: &[f64],
    ext: Extremum,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    cfg.validate()?;
    let support: Vec<usize> = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
    let whole = restricted(func, f, &support);
    let mut best = whole;
    let count = cfg.restarts * 64;
    let mut rng = rng_for(cfg.seed, &[0x5a17, ext as u64]);
    for _ in 0..count {
        let blocks_max = rng.random_range(2..=support.len().max(2));
        let labels = random_partition(&mut rng, support.len(), blocks_max);
        let v = e.combine(
            blocks_of(&labels, &support)
                .iter()
                .map(|b| restricted(func, f, b)),
        );
        let improves = match ext {
            Extremum::Sup => v > best,
            Extremum::Inf => v < best,
        };
        if improves {
            best = v;
        }
    }
    let trials = SearchStats {
        starts: count,
        evaluations: count as u64,
        subproblems: 1,
    };
    Ok(EstimateResult {
        value: best,
        exact: false,
        witness: None,
        trials,
    })
}

/// Sampled-partition version of [`renorm_lower_p`] for large supports; the
/// value is a lower bound.
pub fn renorm_lower_p_sampled<F: LatticeFunctional + ?Sized>(
    func: &F,
    p: Index,
    f: &[f64],
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    sampled(func, p, f, Extremum::Sup, cfg)
}

/// Sampled-partition version of [`renorm_upper_q`]; the value is an upper
/// bound for the infimum.
pub fn renorm_upper_q_sampled<F: LatticeFunctional + ?Sized>(
    func: &F,
    q: Index,
    f: &[f64],
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    sampled(func, q, f, Extremum::Inf, cfg)
}

/// `‖·‖_{(p)}` of a base functional, as a functional in its own right.
#[derive(Debug, Clone)]
pub struct RenormLowerP<F> {
    base: F,
    p: Index,
}

/// `‖·‖^{(q)}` of a base functional, as a functional in its own right.
#[derive(Debug, Clone)]
pub struct RenormUpperQ<F> {
    base: F,
    q: Index,
}

fn check_cap(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        return Err(Error::SupportTooLarge {
            support: n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

impl<F: LatticeFunctional> RenormLowerP<F> {
    pub fn new(base: F, p: Index) -> Result<Self> {
        check_cap(base.atom_count())?;
        Ok(Self { base, p })
    }
}

impl<F: LatticeFunctional> RenormUpperQ<F> {
    pub fn new(base: F, q: Index) -> Result<Self> {
        check_cap(base.atom_count())?;
        Ok(Self { base, q })
    }
}

impl<F: LatticeFunctional> LatticeFunctional for RenormLowerP<F> {
    fn weights(&self) -> &[f64] {
        self.base.weights()
    }

    fn eval_abs(&self, f: &[f64]) -> f64 {
        renorm_lower_p(&self.base, self.p, f).expect("atom count checked at construction")
    }
}

impl<F: LatticeFunctional> LatticeFunctional for RenormUpperQ<F> {
    fn weights(&self) -> &[f64] {
        self.base.weights()
    }

    fn eval_abs(&self, f: &[f64]) -> f64 {
        renorm_upper_q(&self.base, self.q, f).expect("atom count checked at construction")
    }
}

/// The normed route to an upper-`q` renorming (`q ≥ 1`, `F` normed): the
/// Köthe dual of `(F')_{(q')}`, evaluated at `g` by search over the
/// predual. The result is a lower bound for `sup ∫|fg| / ‖f‖_{(F')_{(q')}}`.
pub fn renorm_upper_q_dual_route(
    norm: &QuasiNorm,
    q: Index,
    g: &[f64],
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    let kappa = norm.kappa()?;
    if kappa != 1.0 {
        return Err(Error::NotNormed(kappa));
    }
    if q < Index::finite(1.0) {
        return Err(Error::invalid("the dual route needs q >= 1"));
    }
    norm.space().check_len(g.len())?;
    cfg.validate()?;
    let DualFunctional::Exact(dual) = kothe_dual_functional(norm, cfg) else {
        return Err(Error::invalid(
            "the dual route needs a closed-form Köthe dual",
        ));
    };
    let lower = RenormLowerP::new(dual, q.conjugate()?)?;
    let out = dual_search(&lower, g, cfg);
    let space = AtomicSpace::new(norm.space().weights().to_vec())?;
    let size = lower.eval_abs(&out.x);
    let f = space.vector(out.x.iter().map(|v| v / size).collect())?;
    Ok(EstimateResult {
        value: out.value,
        exact: false,
        witness: Some(vec![f]),
        trials: out.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::SetPartitions;

    fn brute<F: LatticeFunctional>(func: &F, e: Index, f: &[f64], sup: bool) -> f64 {
        let support: Vec<usize> = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
        let mut best = if sup {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        for labels in SetPartitions::new(support.len(), support.len()) {
            let v = e.combine(
                blocks_of(&labels, &support)
                    .iter()
                    .map(|b| restricted(func, f, b)),
            );
            best = if sup { best.max(v) } else { best.min(v) };
        }
        best
    }

    #[test]
    fn l1_is_partition_invariant() {
        let n = QuasiNorm::lp(AtomicSpace::new(vec![1.0, 2.0, 0.5]).unwrap(), 1.0);
        let f = [1.0, -3.0, 2.0];
        let v = renorm_lower_p(&n, Index::finite(1.0), &f).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn l2_singletons_win() {
        let n = QuasiNorm::lp(AtomicSpace::uniform(2), 2.0);
        let v = renorm_lower_p(&n, Index::finite(1.0), &[1.0, 1.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(
            renorm_lower_p_partition(&n, Index::finite(1.0), &[1.0, 1.0])
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn dp_matches_enumeration() {
        let s = AtomicSpace::new(vec![0.5, 1.0, 1.5, 2.0, 0.25, 1.0]).unwrap();
        let f = [1.0, 0.0, -2.0, 0.5, 3.0, 1.5];
        for p in [0.5, 1.0, 1.5, 3.0] {
            for e in [
                Index::finite(0.7),
                Index::finite(1.0),
                Index::finite(2.5),
                Index::Infinite,
            ] {
                let n = QuasiNorm::lp(s.clone(), p);
                let lo = renorm_lower_p(&n, e, &f).unwrap();
                let up = renorm_upper_q(&n, e, &f).unwrap();
                assert!(
                    (lo - brute(&n, e, &f, true)).abs() < 1e-12 * lo,
                    "p={p} e={e}"
                );
                assert!(
                    (up - brute(&n, e, &f, false)).abs() < 1e-12 * up,
                    "p={p} e={e}"
                );
            }
        }
    }

    #[test]
    fn zero_and_cap() {
        let n = QuasiNorm::lp(AtomicSpace::uniform(13), 2.0);
        assert!(matches!(
            renorm_lower_p(&n, Index::finite(1.0), &[1.0; 13]),
            Err(Error::SupportTooLarge {
                support: 13,
                cap: 12
            })
        ));
        assert_eq!(
            renorm_lower_p(&n, Index::finite(1.0), &[0.0; 13]).unwrap(),
            0.0
        );
        let s =
            renorm_lower_p_sampled(&n, Index::finite(1.0), &[1.0; 13], &SearchConfig::default())
                .unwrap();
        assert!(!s.exact);
        assert!(s.value > 13f64.sqrt() && s.value <= 13.0 + 1e-12);
        assert!(RenormLowerP::new(n, Index::finite(1.0)).is_err());
    }

    #[test]
    fn dual_route_agrees_on_lp() {
        let s = AtomicSpace::new(vec![1.0, 0.5, 2.0]).unwrap();
        let g = [1.0, -2.0, 0.5];
        for (a, q) in [(2.0, 1.0), (2.0, 3.0), (1.5, 2.0)] {
            let n = QuasiNorm::lp(s.clone(), a);
            let direct = renorm_upper_q(&n, Index::finite(q), &g).unwrap();
            let route =
                renorm_upper_q_dual_route(&n, Index::finite(q), &g, &SearchConfig::default())
                    .unwrap();
            assert!(
                route.value <= direct * (1.0 + 1e-9),
                "a={a} q={q}: {} vs {direct}",
                route.value
            );
            assert!(
                route.value >= direct * (1.0 - 1e-6),
                "a={a} q={q}: {} vs {direct}",
                route.value
            );
        }
    }
}
