//! Trial harness for `‖T*f‖ ≤ γ‖T‖‖f‖` and its triangular and dual forms.
//!
//! A verdict is only given when `‖T‖` is known exactly: a searched lower
//! bound on `‖T‖` cannot falsify anything, so those runs report the margin
//! and [`Verdict::NoVerdict`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::gamma_ck;
use crate::error::{Error, Result};
use crate::estimates::{lower_estimate_const, upper_estimate_const};
use crate::index::Index;
use crate::norm::{LatticeFunctional, QuasiNorm};
use crate::search::{derive_seed, rng_for, Problem, SearchConfig};

use super::opnorm::check_norms;
use super::{
    from_coords, maximal_apply, moduli, op_norm, to_coords, triangular_apply, Filtration, LinearOp,
    OperatorNorm, Scalar,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkConstants {
    /// Triangle constant of the codomain.
    pub kappa: f64,
    /// `ℓ_{(p),2}` of the domain.
    pub ell: f64,
    /// `u^{(q),2}` of the codomain.
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CkOptions {
    /// Random and structured inputs per run.
    pub trials: usize,
    /// Extra runs of ascent from the worst inputs found.
    pub ascents: usize,
    /// Relative slack before a ratio counts as a violation.
    pub tolerance: f64,
    /// Overrides the constants derived from the norms.
    pub constants: Option<CkConstants>,
    pub search: SearchConfig,
}

impl Default for CkOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            ascents: 2,
            tolerance: 1e-9,
            constants: None,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NoVerdict,
}

impl Verdict {
    /// Fail dominates, then no verdict.
    pub fn combine(self, other: Self) -> Self {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (NoVerdict, _) | (_, NoVerdict) => NoVerdict,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CkReport<S> {
    pub p: Index,
    pub q: Index,
    pub constants: CkConstants,
    pub gamma: f64,
    pub op_norm: OperatorNorm<S>,
    /// `γ·‖T‖`.
    pub bound: f64,
    pub max_ratio: f64,
    pub trial_count: usize,
    pub worst_witness: Vec<S>,
    pub violations: usize,
    /// `max_ratio / bound`.
    pub margin: f64,
    pub pass: bool,
    pub verdict: Verdict,
}

impl<S: Scalar> CkReport<S> {
    /// Max-merge of two runs against the same operator and constants.
    pub fn merge(mut self, other: Self) -> Self {
        if other.max_ratio > self.max_ratio {
            self.max_ratio = other.max_ratio;
            self.worst_witness = other.worst_witness;
        }
        self.trial_count += other.trial_count;
        self.violations += other.violations;
        self.margin = self.margin.max(other.margin);
        self.pass &= other.pass;
        self.verdict = self.verdict.combine(other.verdict);
        self
    }
}

/// `κ` of the codomain and the two-term constants, all of which must be
/// exact.
pub fn resolve_constants(
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    p: Index,
    q: Index,
    cfg: &SearchConfig,
) -> Result<CkConstants> {
    let kappa = cod.kappa()?;
    let ell = lower_estimate_const(dom, p, 2, cfg)?;
    if !ell.exact {
        return Err(Error::invalid(format!(
            "no closed form for the domain's lower {p}-estimate constant; supply constants"
        )));
    }
    let u = upper_estimate_const(cod, q, 2, cfg)?;
    if !u.exact {
        return Err(Error::invalid(format!(
            "no closed form for the codomain's upper {q}-estimate constant; supply constants"
        )));
    }
    Ok(CkConstants {
        kappa,
        ell: ell.value,
        u: u.value,
    })
}

fn finite_p(p: Index) -> Result<f64> {
    p.as_finite()
        .ok_or_else(|| Error::invalid("p must be finite"))
}

fn star_ratio<S: Scalar>(
    t: &LinearOp<S>,
    a: &Filtration,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    f: &[S],
) -> f64 {
    let nf = dom.eval_abs(&moduli(f));
    if nf == 0.0 {
        return 0.0;
    }
    cod.eval_abs(&maximal_apply(t, a, f).expect("dimensions checked")) / nf
}

fn random_input<S: Scalar, R: Rng>(n: usize, kind: usize, a: &Filtration, rng: &mut R) -> Vec<S> {
    let mut f: Vec<S> = match kind {
        0 => (0..n).map(|_| S::sample(rng)).collect(),
        // unimodular sign/phase pattern
        1 => (0..n).map(|_| S::sample(rng).phase()).collect(),
        2 => (0..n)
            .map(|_| {
                if rng.random_bool(0.3) {
                    S::sample(rng)
                } else {
                    S::zero()
                }
            })
            .collect(),
        3 => (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    S::from_real(1.0)
                } else {
                    S::zero()
                }
            })
            .collect(),
        4 => (0..n)
            .map(|_| {
                let z: f64 = rng.random_range(-3.0..3.0);
                S::sample(rng).scale(z.exp())
            })
            .collect(),
        _ => {
            // phases on one increment of the chain
            let inc = a.increments();
            let part = &inc[rng.random_range(0..inc.len())];
            let mut f = vec![S::zero(); n];
            for &i in part {
                f[i] = S::sample(rng).phase();
            }
            f
        }
    };
    if f.iter().all(|z| z.modulus() == 0.0) {
        f[rng.random_range(0..n)] = S::from_real(1.0);
    }
    f
}

/// Deltas, indicators of the chain sets and increments, all ones, the
/// operator-norm witness, then seeded random inputs up to `trials`.
fn trial_inputs<S: Scalar>(
    n: usize,
    a: &Filtration,
    witness: Option<&Vec<S>>,
    opts: &CkOptions,
) -> Vec<Vec<S>> {
    let indicator = |set: &[usize]| {
        let mut f = vec![S::zero(); n];
        for &i in set {
            f[i] = S::from_real(1.0);
        }
        f
    };
    let mut out: Vec<Vec<S>> = (0..n).map(|j| indicator(&[j])).collect();
    for set in a.chain().iter().chain(a.increments().iter()) {
        if !set.is_empty() {
            out.push(indicator(set));
        }
    }
    out.push(vec![S::from_real(1.0); n]);
    if let Some(w) = witness {
        out.push(w.clone());
    }
    out.truncate(opts.trials.max(1));
    let random = opts.trials.saturating_sub(out.len());
    out.extend(
        (0..random)
            .into_par_iter()
            .map(|k| {
                let mut rng = rng_for(opts.search.seed, &[0xc4, k as u64]);
                random_input(n, k % 6, a, &mut rng)
            })
            .collect::<Vec<_>>(),
    );
    out
}

struct Tally<S> {
    max_ratio: f64,
    worst: Vec<S>,
    violations: usize,
    count: usize,
}

fn tally<S: Scalar>(ratios: Vec<(f64, Vec<S>)>, limit: f64) -> Tally<S> {
    let mut t = Tally {
        max_ratio: f64::NEG_INFINITY,
        worst: Vec::new(),
        violations: 0,
        count: ratios.len(),
    };
    for (r, f) in ratios {
        if r > limit {
            t.violations += 1;
        }
        if r > t.max_ratio {
            t.max_ratio = r;
            t.worst = f;
        }
    }
    t
}

#[allow(clippy::too_many_arguments)]
fn finish<S: Scalar>(
    p: Index,
    q: Index,
    constants: CkConstants,
    gamma: f64,
    op_norm: OperatorNorm<S>,
    t: Tally<S>,
    tolerance: f64,
) -> CkReport<S> {
    let bound = gamma * op_norm.value;
    let pass = t.max_ratio <= bound * (1.0 + tolerance);
    let verdict = match (op_norm.exact, pass) {
        (false, _) => Verdict::NoVerdict,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    };
    CkReport {
        p,
        q,
        constants,
        gamma,
        bound,
        margin: if bound > 0.0 {
            t.max_ratio / bound
        } else {
            f64::INFINITY
        },
        max_ratio: t.max_ratio,
        trial_count: t.count,
        worst_witness: t.worst,
        violations: t.violations,
        pass,
        verdict,
        op_norm,
    }
}

/// Samples `‖T*f‖/‖f‖` over structured, random and ascended inputs and
/// compares the worst ratio with `γ‖T‖`.
pub fn ck_verify<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    a: &Filtration,
    p: Index,
    q: Index,
    opts: &CkOptions,
) -> Result<CkReport<S>> {
    check_norms(t, dom, cod)?;
    opts.search.validate()?;
    if a.size() != t.cols() {
        return Err(Error::DimensionMismatch {
            expected: t.cols(),
            found: a.size(),
        });
    }
    let constants = match opts.constants {
        Some(c) => c,
        None => resolve_constants(dom, cod, p, q, &opts.search)?,
    };
    let gamma = gamma_ck(finite_p(p)?, q, constants.kappa, constants.ell, constants.u)?;
    let opn = op_norm(t, dom, cod, &opts.search)?;
    let n = t.cols();

    let inputs = trial_inputs(n, a, opn.witness.as_ref(), opts);
    let mut ratios: Vec<(f64, Vec<S>)> = inputs
        .into_par_iter()
        .map(|f| (star_ratio(t, a, dom, cod, &f), f))
        .collect();

    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&i, &j| ratios[j].0.total_cmp(&ratios[i].0).then(i.cmp(&j)));
    let dim = n * S::DOF;
    let free: Vec<usize> = (0..dim).collect();
    let obj = |x: &[f64]| star_ratio(t, a, dom, cod, &from_coords::<S>(x));
    let problem = Problem {
        objective: &obj,
        dim,
        free: &free,
        signed: true,
    };
    let ascended: Vec<(f64, Vec<S>)> = order
        .iter()
        .take(opts.ascents)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|&i| {
            let x = to_coords(&ratios[i].1);
            let out = problem.ascend(x, &opts.search);
            let f = from_coords::<S>(&out.x);
            (star_ratio(t, a, dom, cod, &f), f)
        })
        .collect();
    ratios.extend(ascended);

    let limit = gamma * opn.value * (1.0 + opts.tolerance);
    Ok(finish(
        p,
        q,
        constants,
        gamma,
        opn,
        tally(ratios, limit),
        opts.tolerance,
    ))
}

/// `‖Σ_{j≤k} χ_{Ω̃_k} T(fχ_{Ω_j})‖ / ‖fχ_{∪Ω_j}‖` (zero when the
/// denominator vanishes, where the numerator vanishes too).
pub fn triangular_ratio<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    omega: &[Vec<usize>],
    tilde: &[Vec<usize>],
    f: &[S],
) -> Result<f64> {
    let tri = triangular_apply(t, omega, tilde, f)?;
    let mut restricted = vec![S::zero(); f.len()];
    for &i in omega.iter().flatten() {
        restricted[i] = f[i];
    }
    let d = dom.eval_abs(&moduli(&restricted));
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(cod.eval_abs(&moduli(&tri)) / d)
}

fn random_parts<R: Rng>(size: usize, parts: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); parts];
    for i in 0..size {
        // label `parts` leaves the atom out
        let k = rng.random_range(0..=parts);
        if k < parts {
            out[k].push(i);
        }
    }
    out
}

/// The triangular inequality on `opts.trials` random disjoint part families
/// (1 to 4 parts on each side) and random inputs.
pub fn triangular_verify<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    p: Index,
    q: Index,
    opts: &CkOptions,
) -> Result<CkReport<S>> {
    check_norms(t, dom, cod)?;
    let constants = match opts.constants {
        Some(c) => c,
        None => resolve_constants(dom, cod, p, q, &opts.search)?,
    };
    let gamma = gamma_ck(finite_p(p)?, q, constants.kappa, constants.ell, constants.u)?;
    let opn = op_norm(t, dom, cod, &opts.search)?;
    let ratios: Vec<(f64, Vec<S>)> = (0..opts.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(opts.search.seed, &[0x7a, k as u64]);
            let parts = rng.random_range(1..=4);
            let omega = random_parts(t.cols(), parts, &mut rng);
            let tilde = random_parts(t.rows(), parts, &mut rng);
            let f: Vec<S> = (0..t.cols()).map(|_| S::sample(&mut rng)).collect();
            let r = triangular_ratio(t, dom, cod, &omega, &tilde, &f)
                .expect("parts are disjoint by construction");
            (r, f)
        })
        .collect();
    let limit = gamma * opn.value * (1.0 + opts.tolerance);
    Ok(finish(
        p,
        q,
        constants,
        gamma,
        opn,
        tally(ratios, limit),
        opts.tolerance,
    ))
}

/// Largest relative error of `Σ g·(Tf)·ν = Σ f·(T′g)·μ` over seeded samples.
pub fn pairing_error<S: Scalar>(t: &LinearOp<S>, seed: u64, samples: usize) -> f64 {
    let td = t.kothe_dual();
    let (mu, nu) = (t.domain().weights(), t.codomain().weights());
    (0..samples)
        .map(|k| {
            let mut rng = rng_for(seed, &[0x9a, k as u64]);
            let f: Vec<S> = (0..t.cols()).map(|_| S::sample(&mut rng)).collect();
            let g: Vec<S> = (0..t.rows()).map(|_| S::sample(&mut rng)).collect();
            let tf = t.apply(&f).expect("sized");
            let tg = td.apply(&g).expect("sized");
            let mut lhs = S::zero();
            let mut scale = 0.0;
            for ((a, b), w) in tf.iter().zip(&g).zip(nu) {
                lhs += (*a * *b).scale(*w);
                scale += a.modulus() * b.modulus() * w;
            }
            let mut rhs = S::zero();
            for ((a, b), w) in tg.iter().zip(&f).zip(mu) {
                rhs += (*a * *b).scale(*w);
            }
            (lhs + rhs.scale(-1.0)).modulus() / scale.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct DualReport<S> {
    /// The harness run for `T′: F′ → E′` with exponents `(q′, p′)`.
    pub report: CkReport<S>,
    /// `‖T‖_{E→F}`.
    pub primal_op_norm: OperatorNorm<S>,
    /// `‖T′‖ ≤ ‖T‖`, checked when both norms are exact.
    pub dual_norm_consistent: Option<bool>,
    pub pairing_error: f64,
}

/// Runs [`ck_verify`] on the Köthe dual operator `T′` between the dual
/// lattices, with `ℓ_{(q′),2}(F′) = u^{(q),2}(F)` and
/// `u^{(p′),2}(E′) = ℓ_{(p),2}(E)`. `a_dual` is a filtration of the
/// codomain of `T`.
pub fn dual_maximal_verify<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    a_dual: &Filtration,
    p: Index,
    q: Index,
    opts: &CkOptions,
) -> Result<DualReport<S>> {
    check_norms(t, dom, cod)?;
    if p < Index::Finite(1.0) || q <= p {
        return Err(Error::invalid(format!(
            "dual harness needs 1 <= p < q, got p = {p}, q = {q}"
        )));
    }
    for n in [dom, cod] {
        let k = n.kappa()?;
        if k != 1.0 {
            return Err(Error::NotNormed(k));
        }
    }
    let (Some(dom_dual), Some(cod_dual)) = (dom.kothe_dual(), cod.kothe_dual()) else {
        return Err(Error::invalid(
            "no closed-form Köthe dual for these norm families",
        ));
    };
    let constants = match opts.constants {
        Some(c) => c,
        None => {
            let primal = resolve_constants(dom, cod, p, q, &opts.search)?;
            CkConstants {
                kappa: 1.0,
                ell: primal.u,
                u: primal.ell,
            }
        }
    };
    let td = t.kothe_dual();
    let dual_opts = CkOptions {
        constants: Some(constants),
        ..opts.clone()
    };
    let report = ck_verify(
        &td,
        &cod_dual,
        &dom_dual,
        a_dual,
        q.conjugate()?,
        p.conjugate()?,
        &dual_opts,
    )?;
    let primal = op_norm(t, dom, cod, &opts.search)?;
    let dual_norm_consistent = (primal.exact && report.op_norm.exact)
        .then_some(report.op_norm.value <= primal.value * (1.0 + opts.tolerance));
    let pairing_error = pairing_error(t, derive_seed(opts.search.seed, &[0xd0]), 16);
    Ok(DualReport {
        report,
        primal_op_norm: primal,
        dual_norm_consistent,
        pairing_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::corollary_pq_gamma;
    use crate::space::AtomicSpace;

    fn quick() -> CkOptions {
        CkOptions {
            trials: 60,
            ascents: 1,
            search: SearchConfig {
                iterations: 60,
                ..SearchConfig::with_seed(3)
            },
            ..CkOptions::default()
        }
    }

    #[test]
    fn identity_passes() {
        let s = AtomicSpace::uniform(5);
        let t = LinearOp::<f64>::identity(s.clone());
        let e = QuasiNorm::lp(s.clone(), 1.0);
        let f = QuasiNorm::lp(s.clone(), 2.0);
        let rep = ck_verify(
            &t,
            &e,
            &f,
            &Filtration::prefix(5),
            Index::finite(1.0),
            Index::finite(2.0),
            &quick(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.max_ratio <= 1.0 + 1e-12);
        assert!((rep.gamma - corollary_pq_gamma(1.0, Index::finite(2.0)).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn searched_norm_gives_no_verdict() {
        let s = AtomicSpace::uniform(4);
        let mut rng = rng_for(1, &[]);
        let t: LinearOp<f64> = LinearOp::random(s.clone(), s.clone(), &mut rng);
        let e = QuasiNorm::lp(s.clone(), 1.5);
        let f = QuasiNorm::lp(s.clone(), 3.0);
        let rep = ck_verify(
            &t,
            &e,
            &f,
            &Filtration::random(4, &mut rng),
            Index::finite(1.5),
            Index::finite(3.0),
            &quick(),
        )
        .unwrap();
        assert!(!rep.op_norm.exact);
        assert_eq!(rep.verdict, Verdict::NoVerdict);
    }

    #[test]
    fn unresolvable_constants_are_reported() {
        let s = AtomicSpace::uniform(3);
        let t = LinearOp::<f64>::identity(s.clone());
        let e = QuasiNorm::lp(s.clone(), 2.0);
        let f = QuasiNorm::lp(s.clone(), 3.0);
        // ℓ_{(1),2}(ℓ²) = √2 has no closed form here
        let err = ck_verify(
            &t,
            &e,
            &f,
            &Filtration::prefix(3),
            Index::finite(1.0),
            Index::finite(3.0),
            &quick(),
        );
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
        // 1.6 exceeds (1+1)^{2/3}
        let opts = CkOptions {
            constants: Some(CkConstants {
                kappa: 1.0,
                ell: 1.6,
                u: 1.0,
            }),
            ..quick()
        };
        let err = ck_verify(
            &t,
            &e,
            &f,
            &Filtration::prefix(3),
            Index::finite(1.0),
            Index::finite(3.0),
            &opts,
        );
        assert!(matches!(err, Err(Error::FeasibilityViolated { .. })));
    }

    #[test]
    fn triangular_and_dual_runs() {
        let mut rng = rng_for(6, &[]);
        let s = AtomicSpace::uniform(6);
        let t: LinearOp<f64> = LinearOp::random(s.clone(), s.clone(), &mut rng);
        let e = QuasiNorm::lp(s.clone(), 1.0);
        let f = QuasiNorm::lp(s.clone(), 2.0);
        let tri = triangular_verify(&t, &e, &f, Index::finite(1.0), Index::finite(2.0), &quick())
            .unwrap();
        assert_eq!(tri.verdict, Verdict::Pass);
        let d = dual_maximal_verify(
            &t,
            &e,
            &f,
            &Filtration::random(6, &mut rng),
            Index::finite(1.0),
            Index::finite(2.0),
            &quick(),
        )
        .unwrap();
        assert_eq!(d.report.verdict, Verdict::Pass);
        assert_eq!(d.report.p, Index::finite(2.0));
        assert_eq!(d.report.q, Index::Infinite);
        assert!((d.report.gamma - corollary_pq_gamma(2.0, Index::Infinite).unwrap()).abs() < 1e-12);
        assert_eq!(d.dual_norm_consistent, Some(true));
        assert!(d.pairing_error < 1e-12);
    }

    #[test]
    fn merge_is_max_and_sum() {
        let s = AtomicSpace::uniform(3);
        let t = LinearOp::<f64>::identity(s.clone());
        let e = QuasiNorm::lp(s.clone(), 1.0);
        let a = ck_verify(
            &t,
            &e,
            &e.with_space(s.clone()).unwrap(),
            &Filtration::prefix(3),
            Index::finite(1.0),
            Index::Infinite,
            &quick(),
        );
        // ℓ¹ → ℓ¹ with q = ∞: upper ∞-estimate of ℓ¹ is not 1, so this is rejected
        assert!(a.is_err());
        let linf = QuasiNorm::lp(s.clone(), Index::Infinite);
        let x = ck_verify(
            &t,
            &e,
            &linf,
            &Filtration::prefix(3),
            Index::finite(1.0),
            Index::Infinite,
            &quick(),
        )
        .unwrap();
        let y = ck_verify(
            &t,
            &e,
            &linf,
            &Filtration::new(3, vec![vec![2]]).unwrap(),
            Index::finite(1.0),
            Index::Infinite,
            &quick(),
        )
        .unwrap();
        let m = x.clone().merge(y.clone());
        assert_eq!(m.trial_count, x.trial_count + y.trial_count);
        assert_eq!(m.max_ratio, x.max_ratio.max(y.max_ratio));
        assert_eq!(m.verdict, Verdict::Pass);
    }
}
