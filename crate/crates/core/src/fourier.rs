//! The unnormalised DFT as a lattice operator, its prefix and interval
//! maximal transforms, and the amalgam Hausdorff–Young maximal check.
//!
//! Signals live on `n` unit-weight atoms. Atom `k` carries the centred index
//! `k − offset`, with `offset = ⌊n/2⌋` unless chosen otherwise; moduli of
//! restricted transforms do not depend on where the phase origin sits, so
//! the matrix itself uses plain `0..n` indices.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::Index;
use crate::norm::{BlockPartition, LatticeFunctional, QuasiNorm};
use crate::operators::{
    ck_verify, maximal_apply, CkOptions, CkReport, Filtration, LinearOp, Scalar, Verdict,
};
use crate::search::rng_for;
use crate::space::{AtomicSpace, LatticeVector};

fn root(n: usize, k: usize) -> Complex64 {
    Complex64::from_polar(
        1.0,
        -2.0 * std::f64::consts::PI * ((k % n) as f64) / n as f64,
    )
}

/// `F_{x,t} = e^{−2πi·xt/n}` on unit weights.
pub fn dft_operator(n: usize) -> Result<LinearOp<Complex64>> {
    if n == 0 {
        return Err(Error::invalid("DFT size must be at least 1"));
    }
    let s = AtomicSpace::uniform(n);
    let entries = (0..n * n).map(|k| root(n, (k / n) * (k % n))).collect();
    LinearOp::new(s.clone(), s, entries)
}

pub fn centered_offset(n: usize) -> usize {
    n / 2
}

/// A complex signal on unit-weight atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexVector {
    values: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("signal must have at least one sample"));
        }
        if let Some(i) = values.iter().position(|z| !z.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { values })
    }

    /// Independent standard complex normal samples.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            values: (0..n.max(1)).map(|_| Complex64::sample(rng)).collect(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn modulus(&self) -> LatticeVector {
        AtomicSpace::uniform(self.len())
            .vector(self.values.iter().map(|z| z.norm()).collect())
            .expect("finite by construction")
    }

    /// `f_t·e^{2πi·mt/n}`.
    pub fn modulate(&self, m: usize) -> Self {
        let n = self.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(t, z)| z * root(n, t * m).conj())
            .collect();
        Self { values }
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Positive,
    Negative,
}

/// `[0, y]` for every `y ≥ 0` (positive side) or `[−y, 0]` (negative side),
/// as atom sets.
pub fn prefix_filtration(n: usize, side: Side, offset: usize) -> Result<Filtration> {
    if offset >= n {
        return Err(Error::invalid(format!(
            "offset {offset} must be below the signal length {n}"
        )));
    }
    let order: Vec<usize> = match side {
        Side::Positive => (offset..n).collect(),
        Side::Negative => (0..=offset).rev().collect(),
    };
    Filtration::prefixes(n, &order)
}

/// `F₊*f` or `F₋*f`.
pub fn maximal_fourier_prefix(
    f: &ComplexVector,
    side: Side,
    offset: usize,
) -> Result<LatticeVector> {
    let n = f.len();
    let a = prefix_filtration(n, side, offset)?;
    let out = maximal_apply(&dft_operator(n)?, &a, f.values())?;
    AtomicSpace::uniform(n).vector(out)
}

/// `F_*f(x) = max_{a≤b} |Σ_{t=a}^{b} e^{−2πi·xt/n} f_t|`, one row of
/// prefix sums per frequency.
pub fn maximal_fourier_intervals(f: &ComplexVector) -> LatticeVector {
    let n = f.len();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut prefix = Vec::with_capacity(n + 1);
            let mut acc = Complex64::new(0.0, 0.0);
            prefix.push(acc);
            for (t, z) in f.values.iter().enumerate() {
                acc += root(n, x * t) * z;
                prefix.push(acc);
            }
            let mut best = 0.0f64;
            for a in 0..n {
                for b in a + 1..=n {
                    best = best.max((prefix[b] - prefix[a]).norm());
                }
            }
            best
        })
        .collect();
    AtomicSpace::uniform(n).vector(out).expect("finite sums")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpzReport {
    pub holds: bool,
    /// `min_x (2F₊* + 2F₋* − F_*)(x)`; negative beyond `tolerance` is a failure.
    pub min_slack: f64,
    pub max_slack: f64,
    pub tolerance: f64,
}

/// Checks `F_* ≤ 2F₊* + 2F₋*` pointwise.
pub fn mpz_check(f: &ComplexVector, offset: usize) -> Result<MpzReport> {
    let plus = maximal_fourier_prefix(f, Side::Positive, offset)?;
    let minus = maximal_fourier_prefix(f, Side::Negative, offset)?;
    let all = maximal_fourier_intervals(f);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for ((s, p), m) in all.values().iter().zip(plus.values()).zip(minus.values()) {
        let slack = 2.0 * p + 2.0 * m - s;
        lo = lo.min(slack);
        hi = hi.max(slack);
    }
    // every quantity is a sum of at most n terms bounded by ‖f‖₁
    let tolerance = 1e-12 * f.l1().max(f64::MIN_POSITIVE);
    Ok(MpzReport {
        holds: lo >= -tolerance,
        min_slack: lo,
        max_slack: hi,
        tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HausdorffYoungReport {
    pub n: usize,
    pub r: f64,
    pub s: f64,
    pub blocks: usize,
    pub offset: usize,
    pub p: Index,
    pub q: Index,
    pub gamma: f64,
    /// `4γ`, the bound on `‖F_*‖/‖F‖`.
    pub interval_constant: f64,
    /// Certified bound `b^{1/r′}B^{1/s′}·B^{1/r′}b^{1/s′}` on `‖F‖` for
    /// `B` blocks of `b` atoms.
    pub op_norm_upper: f64,
    pub positive: CkReport<Complex64>,
    pub negative: CkReport<Complex64>,
    /// `max ‖F_*f‖/‖f‖` over random signals and the prefix witnesses.
    pub interval_max_ratio: f64,
    /// Worst prefix ratio over `γ·(searched or exact ‖F‖)`.
    pub margin: f64,
    /// Prefix ratios `≤ γ·op_norm_upper` and interval ratios
    /// `≤ 4γ·op_norm_upper`.
    pub sanity_holds: bool,
    pub verdict: Verdict,
}

/// `‖F_*f‖`/`‖F_±*f‖` against `γ‖F‖` from `W(Lʳ, ℓˢ)` to `W(L^{s′}, ℓ^{r′})`
/// on `blocks` equal contiguous blocks, with `p = max(r, s)` and
/// `q = min(s′, r′)`.
pub fn hausdorff_young_maximal_check(
    n: usize,
    r: f64,
    s: f64,
    blocks: usize,
    offset: usize,
    opts: &CkOptions,
) -> Result<HausdorffYoungReport> {
    for (name, v) in [("r", r), ("s", s)] {
        if !(v >= 1.0 && v.is_finite()) {
            return Err(Error::invalid(format!(
                "{name} = {v} must be finite and at least 1"
            )));
        }
    }
    let (ri, si) = (Index::finite(r), Index::finite(s));
    let (rc, sc) = (ri.conjugate()?, si.conjugate()?);
    let p = ri.max(si);
    let q = sc.min(rc);
    if p >= q {
        return Err(Error::invalid(format!(
            "need max(r, s) < min(s', r'), got {p} and {q}"
        )));
    }
    if blocks == 0 || n == 0 || !n.is_multiple_of(blocks) {
        return Err(Error::invalid(format!(
            "{n} atoms cannot be split into {blocks} equal blocks"
        )));
    }
    let space = AtomicSpace::uniform(n);
    let partition = BlockPartition::equal(n, blocks)?;
    let dom = QuasiNorm::amalgam(space.clone(), ri, si, partition.clone())?;
    let cod = QuasiNorm::amalgam(space, sc, rc, partition)?;
    let f = dft_operator(n)?;

    let constants = match opts.constants {
        Some(c) => c,
        None => crate::operators::resolve_constants(&dom, &cod, p, q, &opts.search)?,
    };
    let opts = CkOptions {
        constants: Some(constants),
        ..opts.clone()
    };
    let positive = ck_verify(
        &f,
        &dom,
        &cod,
        &prefix_filtration(n, Side::Positive, offset)?,
        p,
        q,
        &opts,
    )?;
    let negative = ck_verify(
        &f,
        &dom,
        &cod,
        &prefix_filtration(n, Side::Negative, offset)?,
        p,
        q,
        &opts,
    )?;
    let gamma = positive.gamma;

    let b = (n / blocks) as f64;
    let big_b = blocks as f64;
    let upper =
        b.powf(rc.recip()) * big_b.powf(sc.recip()) * big_b.powf(rc.recip()) * b.powf(sc.recip());

    let mut signals: Vec<Vec<Complex64>> = vec![
        positive.worst_witness.clone(),
        negative.worst_witness.clone(),
    ];
    signals.extend((0..opts.trials).map(|k| {
        let mut rng = rng_for(opts.search.seed, &[0xf5, k as u64]);
        ComplexVector::random(n, &mut rng).values
    }));
    let interval_max_ratio = signals
        .into_par_iter()
        .map(|v| {
            let g = ComplexVector { values: v };
            let nf = dom.eval_abs(g.modulus().values());
            if nf == 0.0 {
                0.0
            } else {
                cod.eval_abs(maximal_fourier_intervals(&g).values()) / nf
            }
        })
        .reduce(|| 0.0, f64::max);

    let slack = 1.0 + opts.tolerance;
    let prefix_max = positive.max_ratio.max(negative.max_ratio);
    let sanity_holds =
        prefix_max <= gamma * upper * slack && interval_max_ratio <= 4.0 * gamma * upper * slack;
    let margin = positive.margin.max(negative.margin);
    let mut verdict = positive.verdict.combine(negative.verdict);
    if !sanity_holds {
        verdict = Verdict::Fail;
    }
    Ok(HausdorffYoungReport {
        n,
        r,
        s,
        blocks,
        offset,
        p,
        q,
        gamma,
        interval_constant: 4.0 * gamma,
        op_norm_upper: upper,
        positive,
        negative,
        interval_max_ratio,
        margin,
        sanity_holds,
        verdict,
    })
}
