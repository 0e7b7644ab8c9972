use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::Index;
use crate::norm::{LatticeFunctional, QuasiNorm};
use crate::search::{derive_seed, Problem, SearchConfig, SearchStats};

use super::{from_coords, moduli, LinearOp, Scalar};

#[derive(Debug, Clone, Serialize)]
pub struct OperatorNorm<S> {
    pub value: f64,
    pub exact: bool,
    /// An input attaining `value` (up to rounding), when one is known.
    pub witness: Option<Vec<S>>,
    pub trials: SearchStats,
}

pub(crate) fn check_norms<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
) -> Result<()> {
    for (space, norm, what) in [(t.domain(), dom, "domain"), (t.codomain(), cod, "codomain")] {
        space.check_len(norm.space().len())?;
        if space != norm.space() {
            return Err(Error::invalid(format!(
                "{what} norm lives on different atom weights than the operator"
            )));
        }
    }
    Ok(())
}

/// `‖T‖` between weighted Lebesgue spaces in the two cases with a closed form.
///
/// * `p ≤ min(1, q)`: the unit ball of `L^p` is the closed hull (absolutely
///   `q`-convex when `q < 1`) of normalised deltas, so
///   `‖T‖ = max_j ‖T e_j‖ / μ_j^{1/p}`.
/// * `q = ∞`: `‖Tf‖_∞ = max_y |Σ_j (T_{y,j}/μ_j) f_j μ_j|`, a dual norm per row.
pub fn op_norm_exact<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
) -> Result<Option<f64>> {
    Ok(exact_with_witness(t, dom, cod)?.map(|(v, _)| v))
}

fn exact_with_witness<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
) -> Result<Option<(f64, Vec<S>)>> {
    check_norms(t, dom, cod)?;
    let (Some(p), Some(q)) = (dom.lp_exponent(), cod.lp_exponent()) else {
        return Ok(None);
    };
    let mu = t.domain().weights();
    let n = t.cols();
    let delta = |j: usize, c: f64| {
        let mut v = vec![S::zero(); n];
        v[j] = S::from_real(c);
        v
    };
    if p <= Index::Finite(1.0).min(q) {
        let pr = p.recip();
        let mut best = (0.0, 0);
        for j in 0..n {
            let v = cod.eval_abs(&moduli(&t.column(j))) / mu[j].powf(pr);
            if v > best.0 {
                best = (v, j);
            }
        }
        return Ok(Some((best.0, delta(best.1, mu[best.1].powf(-pr)))));
    }
    if q.is_infinite() {
        // Here p > 1 (p ≤ 1 took the branch above).
        let pc = p.conjugate()?;
        let mut best = (0.0, 0);
        for y in 0..t.rows() {
            let g: Vec<f64> = t
                .row(y)
                .iter()
                .zip(mu)
                .map(|(z, m)| z.modulus() / m)
                .collect();
            let v = crate::norm::weighted_lp(&g, mu, pc);
            if v > best.0 {
                best = (v, y);
            }
        }
        let (value, y) = best;
        if value == 0.0 {
            return Ok(Some((0.0, delta(0, mu[0].powf(-p.recip())))));
        }
        // Hölder extremal: f_j = conj(phase(g_j))·|g_j|^{p'−1}, normalised.
        let row = t.row(y);
        let mut f: Vec<S> = row
            .iter()
            .zip(mu)
            .map(|(z, m)| {
                let mag = z.modulus() / m;
                let w = match pc {
                    Index::Infinite => 1.0,
                    Index::Finite(pc) => mag.powf(pc - 1.0),
                };
                z.phase().conj().scale(w)
            })
            .collect();
        let nf = dom.eval_abs(&moduli(&f));
        if nf > 0.0 {
            f.iter_mut().for_each(|z| *z = z.scale(1.0 / nf));
        }
        return Ok(Some((value, f)));
    }
    Ok(None)
}

fn ratio<S: Scalar>(t: &LinearOp<S>, dom: &QuasiNorm, cod: &QuasiNorm, f: &[S]) -> f64 {
    let nf = dom.eval_abs(&moduli(f));
    if nf == 0.0 {
        return 0.0;
    }
    let tf = t.apply(f).expect("dimensions checked");
    cod.eval_abs(&moduli(&tf)) / nf
}

/// Searched lower bound on `sup ‖Tf‖/‖f‖` with its witness.
pub fn op_norm_search<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    cfg: &SearchConfig,
) -> Result<OperatorNorm<S>> {
    check_norms(t, dom, cod)?;
    cfg.validate()?;
    let n = t.cols();
    let dim = n * S::DOF;
    let free: Vec<usize> = (0..dim).collect();
    let obj = |x: &[f64]| ratio(t, dom, cod, &from_coords::<S>(x));
    let mut starts = vec![];
    let mut ones = vec![0.0; dim];
    for j in 0..n {
        let mut d = vec![0.0; dim];
        d[j * S::DOF] = 1.0;
        starts.push(d);
        ones[j * S::DOF] = 1.0;
    }
    starts.push(ones);
    let problem = Problem {
        objective: &obj,
        dim,
        free: &free,
        signed: true,
    };
    let out = problem.maximize(starts, cfg, derive_seed(cfg.seed, &[0x0b]));
    let witness = from_coords::<S>(&out.x);
    let value = ratio(t, dom, cod, &witness);
    Ok(OperatorNorm {
        value,
        exact: false,
        witness: Some(witness),
        trials: out.stats,
    })
}

/// The closed form when available, otherwise the searched lower bound.
pub fn op_norm<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    cfg: &SearchConfig,
) -> Result<OperatorNorm<S>> {
    match exact_with_witness(t, dom, cod)? {
        Some((value, w)) => Ok(OperatorNorm {
            value,
            exact: true,
            witness: Some(w),
            trials: SearchStats::default(),
        }),
        None => op_norm_search(t, dom, cod, cfg),
    }
}
