//! Köthe dual norms `‖g‖' = sup{ ∫|fg| dμ : ‖f‖ ≤ 1 }`.

use crate::error::Result;
use crate::estimates::EstimateResult;
use crate::index::Index;
use crate::norm::{LatticeFunctional, NormFamily, QuasiNorm};
use crate::search::{Outcome, Problem, SearchConfig};
use crate::space::{AtomicSpace, LatticeVector};

/// The Köthe dual of a lattice functional, in the best form available.
#[derive(Debug, Clone)]
pub enum DualFunctional {
    /// A closed-form family (Hölder conjugates, amalgam conjugates).
    Exact(QuasiNorm),
    /// `max_i |g_i| μ_i^{1−1/p}`, the dual of weighted `Lᵖ` for `p < 1`.
    LpBelowOne { space: AtomicSpace, p: f64 },
    /// Evaluated by search; values are lower bounds.
    Searched(SearchedDual<QuasiNorm>),
}

impl DualFunctional {
    pub fn is_exact(&self) -> bool {
        !matches!(self, DualFunctional::Searched(_))
    }
}

impl LatticeFunctional for DualFunctional {
    fn weights(&self) -> &[f64] {
        match self {
            DualFunctional::Exact(n) => n.weights(),
            DualFunctional::LpBelowOne { space, .. } => space.weights(),
            DualFunctional::Searched(d) => d.weights(),
        }
    }

    fn eval_abs(&self, g: &[f64]) -> f64 {
        match self {
            DualFunctional::Exact(n) => n.eval_abs(g),
            DualFunctional::LpBelowOne { space, p } => lp_below_one_dual(g, space.weights(), *p),
            DualFunctional::Searched(d) => d.eval_abs(g),
        }
    }
}

pub fn kothe_dual_functional(norm: &QuasiNorm, cfg: &SearchConfig) -> DualFunctional {
    if let Some(d) = norm.kothe_dual() {
        return DualFunctional::Exact(d);
    }
    if let NormFamily::WeightedLp {
        p: Index::Finite(p),
    } = norm.family()
    {
        return DualFunctional::LpBelowOne {
            space: norm.space().clone(),
            p: *p,
        };
    }
    DualFunctional::Searched(SearchedDual {
        base: norm.clone(),
        cfg: *cfg,
    })
}

fn lp_below_one_dual(g: &[f64], mu: &[f64], p: f64) -> f64 {
    g.iter()
        .zip(mu)
        .fold(0.0, |m, (v, w)| m.max(v.abs() * w.powf(1.0 - 1.0 / p)))
}

/// Dual functional whose every evaluation runs a search over `f ≥ 0`.
#[derive(Debug, Clone)]
pub struct SearchedDual<F> {
    pub base: F,
    pub cfg: SearchConfig,
}

impl<F: LatticeFunctional> LatticeFunctional for SearchedDual<F> {
    fn weights(&self) -> &[f64] {
        self.base.weights()
    }

    fn eval_abs(&self, g: &[f64]) -> f64 {
        dual_search(&self.base, g, &self.cfg).value
    }
}

/// Maximises `∫ f|g| dμ / ‖f‖` over `f ≥ 0` supported where `g ≠ 0`.
pub(crate) fn dual_search<F: LatticeFunctional + ?Sized>(
    func: &F,
    g: &[f64],
    cfg: &SearchConfig,
) -> Outcome {
    let mu = func.weights();
    let n = mu.len();
    let free: Vec<usize> = (0..n).filter(|&i| g[i] != 0.0).collect();
    if free.is_empty() {
        return Outcome {
            x: vec![0.0; n],
            value: 0.0,
            stats: Default::default(),
        };
    }
    let obj = |x: &[f64]| {
        let pairing: f64 = free.iter().map(|&i| x[i] * g[i].abs() * mu[i]).sum();
        pairing / func.eval_abs(x)
    };
    let problem = Problem {
        objective: &obj,
        dim: n,
        free: &free,
        signed: false,
    };
    let mut starts = Vec::new();
    for k in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let mut s = vec![0.0; n];
        for &i in &free {
            s[i] = g[i].abs().powf(k);
        }
        starts.push(s);
    }
    for &i in &free {
        let mut s = vec![0.0; n];
        s[i] = 1.0;
        starts.push(s);
    }
    problem.maximize(starts, cfg, cfg.seed)
}

/// `‖g‖'` for a quasi-norm: exact for weighted `Lᵖ` and conjugate amalgams,
/// otherwise a certified lower bound with the maximising `f` (scaled to
/// `‖f‖ = 1`) as witness.
pub fn kothe_dual_norm(
    norm: &QuasiNorm,
    g: &LatticeVector,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    norm.space().check_len(g.len())?;
    match kothe_dual_functional(norm, cfg) {
        DualFunctional::Searched(_) => {
            cfg.validate()?;
            let out = dual_search(norm, g.values(), cfg);
            let size = norm.eval_abs(&out.x);
            let f = if size > 0.0 {
                out.x.iter().map(|v| v / size).collect()
            } else {
                out.x
            };
            let f = norm.space().vector(f)?;
            let value = f.abs().pairing(&g.abs())?;
            Ok(EstimateResult {
                value,
                exact: false,
                witness: Some(vec![f]),
                trials: out.stats,
            })
        }
        exact => {
            let abs: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
            Ok(EstimateResult::exact(exact.eval_abs(&abs)))
        }
    }
}
