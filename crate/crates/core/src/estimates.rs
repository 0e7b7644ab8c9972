//! Upper and lower p-estimate constants.
//!
//! `ℓ_{(p),n}(X)` is the best `C` in `(Σ‖f_j‖ᵖ)^{1/p} ≤ C‖Σf_j‖` and
//! `u^{(q),n}(X)` the best `C` in `‖Σf_j‖ ≤ C(Σ‖f_j‖^q)^{1/q}`, both over
//! families of at most `n` disjointly supported functions. On an atomic space
//! a disjoint family is `f·χ_{A_j}` for a set partition `(A_j)` of the atoms,
//! so the search enumerates partitions and ascends in `f` for each one.

use rayon::prelude::*;
use serde::Serialize;

use crate::dual::{kothe_dual_functional, DualFunctional};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::norm::{LatticeFunctional, NormFamily, QuasiNorm};
use crate::partition::{blocks_of, random_partition, SetPartitions, ENUMERATION_CAP};
use crate::search::{derive_seed, rng_for, Outcome, Problem, SearchConfig, SearchStats};
use crate::space::{AtomicSpace, LatticeVector};

/// Partitions sampled when the space is too large to enumerate.
const SAMPLED_PARTITIONS: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct EstimateResult {
    pub value: f64,
    pub exact: bool,
    /// Disjointly supported functions realising `value`.
    pub witness: Option<Vec<LatticeVector>>,
    pub trials: SearchStats,
}

impl EstimateResult {
    pub(crate) fn exact(value: f64) -> Self {
        Self {
            value,
            exact: true,
            witness: None,
            trials: SearchStats::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Lower,
    Upper,
}

impl Direction {
    fn tag(self) -> u64 {
        match self {
            Direction::Lower => 1,
            Direction::Upper => 2,
        }
    }
}

/// `2^{1/p − 1/max{p,r,s}}`.
pub fn amalgam_two_term_lower(p: Index, r: Index, s: Index) -> f64 {
    2f64.powf(p.recip() - p.max(r).max(s).recip())
}

/// `2^{1/min{q,r,s} − 1/q}`.
pub fn amalgam_two_term_upper(q: Index, r: Index, s: Index) -> f64 {
    2f64.powf(q.min(r).min(s).recip() - q.recip())
}

/// Exact where a closed form is known: weighted `L^{p₀}` with `p ≥ p₀` has
/// constant 1, and two-term amalgam constants follow the block formula.
/// Everything else is searched.
pub fn lower_estimate_const(
    norm: &QuasiNorm,
    p: Index,
    n: usize,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    check_n(n)?;
    if norm.lp_exponent().is_some_and(|p0| p >= p0) {
        return Ok(EstimateResult::exact(1.0));
    }
    if let (2, Some(res)) = (n, amalgam_closed_form(norm, p, Direction::Lower)) {
        return Ok(res);
    }
    lower_estimate_search(norm, p, n, cfg)
}

/// Mirror of [`lower_estimate_const`]; `L^{q₀}` with `q ≤ q₀` has constant 1.
pub fn upper_estimate_const(
    norm: &QuasiNorm,
    q: Index,
    n: usize,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    check_n(n)?;
    if norm.lp_exponent().is_some_and(|q0| q <= q0) {
        return Ok(EstimateResult::exact(1.0));
    }
    if let (2, Some(res)) = (n, amalgam_closed_form(norm, q, Direction::Upper)) {
        return Ok(res);
    }
    upper_estimate_search(norm, q, n, cfg)
}

/// Searched lower bound for `ℓ_{(p),n}`, never using a closed form.
pub fn lower_estimate_search<F: LatticeFunctional + ?Sized>(
    func: &F,
    p: Index,
    n: usize,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    search_estimate(func, Direction::Lower, p, n, cfg)
}

/// Searched lower bound for `u^{(q),n}`, never using a closed form.
pub fn upper_estimate_search<F: LatticeFunctional + ?Sized>(
    func: &F,
    q: Index,
    n: usize,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    search_estimate(func, Direction::Upper, q, n, cfg)
}

/// `max over partitions of supp f into ≤ n blocks` of
/// `(Σ‖fχ_{A_j}‖ᵖ)^{1/p} / ‖f‖`, with the maximising blocks.
pub fn lower_ratio_at<F: LatticeFunctional + ?Sized>(
    func: &F,
    p: Index,
    n: usize,
    f: &[f64],
) -> Result<(f64, Vec<Vec<usize>>)> {
    ratio_at(func, Direction::Lower, p, n, f)
}

/// `max over partitions of supp f into ≤ n blocks` of
/// `‖f‖ / (Σ‖fχ_{A_j}‖^q)^{1/q}`, with the maximising blocks.
pub fn upper_ratio_at<F: LatticeFunctional + ?Sized>(
    func: &F,
    q: Index,
    n: usize,
    f: &[f64],
) -> Result<(f64, Vec<Vec<usize>>)> {
    ratio_at(func, Direction::Upper, q, n, f)
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "estimate constants need n >= 2, got {n}"
        )));
    }
    Ok(())
}

pub(crate) fn restricted<F: LatticeFunctional + ?Sized>(
    func: &F,
    x: &[f64],
    atoms: &[usize],
) -> f64 {
    let mut buf = vec![0.0; x.len()];
    for &i in atoms {
        buf[i] = x[i].abs();
    }
    func.eval_abs(&buf)
}

fn ratio<F: LatticeFunctional + ?Sized>(
    func: &F,
    dir: Direction,
    e: Index,
    blocks: &[Vec<usize>],
    x: &[f64],
) -> f64 {
    let whole = func.eval_abs(x);
    let parts = e.combine(blocks.iter().map(|b| restricted(func, x, b)));
    match dir {
        Direction::Lower => parts / whole,
        Direction::Upper => whole / parts,
    }
}

fn ratio_at<F: LatticeFunctional + ?Sized>(
    func: &F,
    dir: Direction,
    e: Index,
    n: usize,
    f: &[f64],
) -> Result<(f64, Vec<Vec<usize>>)> {
    check_n(n)?;
    if f.len() != func.atom_count() {
        return Err(Error::DimensionMismatch {
            expected: func.atom_count(),
            found: f.len(),
        });
    }
    let support: Vec<usize> = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
    if support.len() > ENUMERATION_CAP {
        return Err(Error::SupportTooLarge {
            support: support.len(),
            cap: ENUMERATION_CAP,
        });
    }
    if support.is_empty() {
        return Err(Error::invalid("ratio is undefined for the zero function"));
    }
    let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let mut best = (1.0, vec![support.clone()]);
    for labels in SetPartitions::new(support.len(), n).skip(1) {
        let blocks = blocks_of(&labels, &support);
        let v = ratio(func, dir, e, &blocks, &abs);
        if v > best.0 {
            best = (v, blocks);
        }
    }
    Ok(best)
}

/// Starting points tied to a partition: all ones, single atoms, pairs of
/// atoms normalised to equal size, and one normalised bump per block.
fn structured_starts<F: LatticeFunctional + ?Sized>(
    func: &F,
    blocks: &[Vec<usize>],
) -> Vec<Vec<f64>> {
    let n = func.atom_count();
    let unit = |i: usize| {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        1.0 / func.eval_abs(&d)
    };
    let scales: Vec<f64> = (0..n).map(unit).collect();
    let mut starts = vec![vec![1.0; n]];
    for i in 0..n {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        starts.push(d);
    }
    for a in 0..n {
        for b in a + 1..n {
            let mut d = vec![0.0; n];
            d[a] = scales[a];
            d[b] = scales[b];
            starts.push(d);
        }
    }
    let mut balanced = vec![0.0; n];
    for b in blocks {
        let mut chi = vec![0.0; n];
        for &i in b {
            chi[i] = 1.0;
        }
        let c = 1.0 / func.eval_abs(&chi);
        for &i in b {
            balanced[i] = c;
        }
    }
    starts.push(balanced);
    starts
}

fn label_code(labels: &[u8]) -> u64 {
    if labels.len() <= ENUMERATION_CAP {
        labels.iter().fold(0u64, |h, &l| h * 13 + l as u64)
    } else {
        let tags: Vec<u64> = labels.iter().map(|&l| l as u64).collect();
        derive_seed(0x5eed, &tags)
    }
}

fn search_estimate<F: LatticeFunctional + ?Sized>(
    func: &F,
    dir: Direction,
    e: Index,
    n: usize,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    check_n(n)?;
    cfg.validate()?;
    let dim = func.atom_count();
    let all: Vec<usize> = (0..dim).collect();
    let partitions: Vec<Vec<u8>> = if dim <= ENUMERATION_CAP {
        SetPartitions::new(dim, n).collect()
    } else {
        let mut rng = rng_for(cfg.seed, &[dir.tag(), 0xb10c]);
        let mut v = vec![vec![0u8; dim]];
        v.extend((0..SAMPLED_PARTITIONS).map(|_| random_partition(&mut rng, dim, n)));
        v
    };
    let outcomes: Vec<(Outcome, Vec<Vec<usize>>)> = partitions
        .par_iter()
        .map(|labels| {
            let blocks = blocks_of(labels, &all);
            if blocks.len() == 1 {
                let stats = SearchStats {
                    starts: 0,
                    evaluations: 0,
                    subproblems: 1,
                };
                return (
                    Outcome {
                        x: vec![1.0; dim],
                        value: 1.0,
                        stats,
                    },
                    blocks,
                );
            }
            let obj = |x: &[f64]| ratio(func, dir, e, &blocks, x);
            let problem = Problem {
                objective: &obj,
                dim,
                free: &all,
                signed: false,
            };
            let seed = derive_seed(cfg.seed, &[dir.tag(), label_code(labels)]);
            let mut out = problem.maximize(structured_starts(func, &blocks), cfg, seed);
            out.stats.subproblems = 1;
            (out, blocks)
        })
        .collect();

    let mut stats = SearchStats::default();
    let mut best: Option<(Outcome, Vec<Vec<usize>>)> = None;
    for (o, b) in outcomes {
        stats = stats.merge(o.stats);
        if best.as_ref().is_none_or(|(bo, _)| o.value > bo.value) {
            best = Some((o, b));
        }
    }
    let (best, blocks) = best.expect("at least the trivial partition");
    let space = AtomicSpace::new(func.weights().to_vec())?;
    let pieces: Vec<LatticeVector> = blocks
        .iter()
        .map(|b| {
            let mut v = vec![0.0; dim];
            for &i in b {
                v[i] = best.x[i];
            }
            v
        })
        .filter(|v| v.iter().any(|&x| x != 0.0))
        .map(|v| space.vector(v))
        .collect::<Result<_>>()?;
    let value = if blocks.len() == 1 {
        1.0
    } else {
        witness_ratio(func, dir, e, &pieces)
    };
    Ok(EstimateResult {
        value,
        exact: false,
        witness: Some(pieces),
        trials: stats,
    })
}

/// The estimate ratio realised by a disjoint family.
pub(crate) fn witness_ratio<F: LatticeFunctional + ?Sized>(
    func: &F,
    dir: Direction,
    e: Index,
    pieces: &[LatticeVector],
) -> f64 {
    let n = func.atom_count();
    let mut sum = vec![0.0; n];
    for p in pieces {
        for (s, v) in sum.iter_mut().zip(p.values()) {
            *s += v.abs();
        }
    }
    let whole = func.eval_abs(&sum);
    let parts = e.combine(pieces.iter().map(|p| {
        let a: Vec<f64> = p.values().iter().map(|v| v.abs()).collect();
        func.eval_abs(&a)
    }));
    match dir {
        Direction::Lower => parts / whole,
        Direction::Upper => whole / parts,
    }
}

/// Closed form for two-term amalgam constants, when the block
/// structure can realise the extremal pair.
fn amalgam_closed_form(norm: &QuasiNorm, e: Index, dir: Direction) -> Option<EstimateResult> {
    let NormFamily::Amalgam { r, s, blocks } = norm.family() else {
        return None;
    };
    let (value, extreme) = match dir {
        Direction::Lower => (amalgam_two_term_lower(e, *r, *s), e.max(*r).max(*s)),
        Direction::Upper => (amalgam_two_term_upper(e, *r, *s), e.min(*r).min(*s)),
    };
    if extreme == e {
        return Some(EstimateResult::exact(1.0));
    }
    // Two atoms in one block realise the r-extremal, atoms in two blocks the s-extremal.
    let pair = if extreme == *r && blocks.max_block_len() >= 2 {
        let b = blocks.blocks().iter().find(|b| b.len() >= 2)?;
        (b.start, b.start + 1)
    } else if extreme == *s && blocks.len() >= 2 {
        (blocks.blocks()[0].start, blocks.blocks()[1].start)
    } else {
        return None;
    };
    let space = norm.space();
    let piece = |i: usize| {
        let d = space.indicator(&[i]).ok()?;
        let scale = 1.0 / norm.eval(&d).ok()?;
        Some(d.scale(scale))
    };
    let witness = vec![piece(pair.0)?, piece(pair.1)?];
    Some(EstimateResult {
        value,
        exact: true,
        witness: Some(witness),
        trials: SearchStats::default(),
    })
}

/// Both sides of the duality identities for a normed lattice `E`:
/// `ℓ_{(p),n}(E) = u^{(p'),n}(E')` and `u^{(p),n}(E) = ℓ_{(p'),n}(E')`.
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub p: Index,
    pub p_conjugate: Index,
    pub n: usize,
    pub dual_exact: bool,
    pub lower: EstimateResult,
    pub dual_upper: EstimateResult,
    pub gap: f64,
    pub upper: EstimateResult,
    pub dual_lower: EstimateResult,
    pub mirror_gap: f64,
}

pub fn duality_check(
    norm: &QuasiNorm,
    p: Index,
    n: usize,
    cfg: &SearchConfig,
) -> Result<DualityReport> {
    let kappa = norm.kappa()?;
    if kappa != 1.0 {
        return Err(Error::NotNormed(kappa));
    }
    let pc = p.conjugate()?;
    let lower = lower_estimate_const(norm, p, n, cfg)?;
    let upper = upper_estimate_const(norm, p, n, cfg)?;
    let dual = kothe_dual_functional(norm, cfg);
    let dual_exact = dual.is_exact();
    let (dual_upper, dual_lower) = match &dual {
        DualFunctional::Exact(d) => (
            upper_estimate_const(d, pc, n, cfg)?,
            lower_estimate_const(d, pc, n, cfg)?,
        ),
        other => (
            upper_estimate_search(other, pc, n, cfg)?,
            lower_estimate_search(other, pc, n, cfg)?,
        ),
    };
    Ok(DualityReport {
        p,
        p_conjugate: pc,
        n,
        dual_exact,
        gap: (lower.value - dual_upper.value).abs(),
        mirror_gap: (upper.value - dual_lower.value).abs(),
        lower,
        dual_upper,
        upper,
        dual_lower,
    })
}
