//! Closed-form Christ–Kiselev constants.
//!
//! All functions take a finite `p` and a possibly infinite `q` with `p < q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::Index;

fn check_pq(p: f64, q: Index) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid(format!(
            "p must be finite and positive, got {p}"
        )));
    }
    if q <= Index::Finite(p) {
        return Err(Error::invalid(format!("need p < q, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `τ` with `1/τ = 1/p − 1/q`; equals `p` when `q = ∞`.
pub fn tau(p: f64, q: Index) -> Result<f64> {
    check_pq(p, q)?;
    Ok(1.0 / (1.0 / p - q.recip()))
}

/// `(1 + κ^{−τ})^{1/τ}`, the strict upper limit for `ℓ·u`.
pub fn feasibility_bound(p: f64, q: Index, kappa: f64) -> Result<f64> {
    let t = tau(p, q)?;
    Ok((1.0 + kappa.powf(-t)).powf(1.0 / t))
}

/// The maximal-operator constant `γ(p, q, κ, ℓ, u)`.
///
/// For `q = ∞` this is the limiting value `uκ / (1 − κ((ℓu)^p − 1)^{1/p})`.
pub fn gamma_ck(p: f64, q: Index, kappa: f64, ell: f64, u: f64) -> Result<f64> {
    check_pq(p, q)?;
    if !(kappa >= 1.0 && ell >= 1.0 && u >= 1.0)
        || !(kappa.is_finite() && ell.is_finite() && u.is_finite())
    {
        return Err(Error::invalid(format!(
            "need finite kappa, ell, u >= 1, got {kappa}, {ell}, {u}"
        )));
    }
    let bound = feasibility_bound(p, q, kappa)?;
    let lu = ell * u;
    if lu >= bound {
        return Err(Error::FeasibilityViolated { ell_u: lu, bound });
    }
    let gamma = match q {
        Index::Infinite => {
            let excess = (lu.powf(p) - 1.0).max(0.0).powf(1.0 / p);
            u * kappa / (1.0 - kappa * excess)
        }
        Index::Finite(q) => {
            let k = kappa.powf(-tau(p, Index::Finite(q))?);
            let excess = (lu.powf(p) * (1.0 + k).powf(p / q) - 1.0)
                .max(0.0)
                .powf(1.0 / p);
            u * (1.0 + k).powf(1.0 / q) / (k.powf(1.0 / p) - excess)
        }
    };
    // Rounding can push the denominator to zero right at the boundary.
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::FeasibilityViolated { ell_u: lu, bound });
    }
    Ok(gamma)
}

/// `κ_q = max(2, 2^{1/q})`.
pub fn kappa_q(q: Index) -> f64 {
    2f64.max(2f64.powf(q.recip()))
}

/// The constant for the triangular operator, scaled by the full estimate
/// constants `ℓ_{(p)}(E)` and `u^{(q)}(F)`.
pub fn delta_ck(p: f64, q: Index, ell_full: f64, u_full: f64, banach: bool) -> Result<f64> {
    check_pq(p, q)?;
    let base = if banach && q >= Index::Finite(1.0) {
        banach_gamma(p, q)
    } else {
        gamma_ck(p, q, kappa_q(q), 1.0, 1.0)?
    };
    Ok(base * ell_full * u_full)
}

/// `2^{1/q} / (1 − (2^{p/q} − 1)^{1/p})`.
fn banach_gamma(p: f64, q: Index) -> f64 {
    let excess = (2f64.powf(p * q.recip()) - 1.0).powf(1.0 / p);
    2f64.powf(q.recip()) / (1.0 - excess)
}

/// `(1 − 2^{1/q − 1/p})^{−1}` for `1 ≤ p < q ≤ ∞`.
pub fn classical_ck(p: f64, q: Index) -> Result<f64> {
    check_pq(p, q)?;
    if p < 1.0 {
        return Err(Error::invalid("classical constant needs p >= 1"));
    }
    Ok(1.0 / (1.0 - 2f64.powf(q.recip() - 1.0 / p)))
}

/// γ for Lebesgue spaces, `ℓ = u = 1`, in its two explicit branches.
pub fn corollary_pq_gamma(p: f64, q: Index) -> Result<f64> {
    check_pq(p, q)?;
    match q {
        Index::Finite(q) if q < 1.0 => {
            let k = 2f64.powf((q - 1.0) * p / (q - p));
            let excess = ((1.0 + k).powf(p / q) - 1.0).powf(1.0 / p);
            Ok((1.0 + k).powf(1.0 / q) / (2f64.powf((q - 1.0) / (q - p)) - excess))
        }
        _ => Ok(banach_gamma(p, q)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub p: Index,
    pub q: Index,
    pub tau: f64,
    pub kappa: f64,
    pub ell: f64,
    pub u: f64,
    pub feasibility_bound: f64,
    pub feasible: bool,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    /// Only defined for `p ≥ 1`.
    pub classical: Option<f64>,
    /// `corollary_pq_gamma(p, q)` for comparison.
    pub lebesgue_gamma: f64,
}

pub fn report(p: f64, q: Index, kappa: f64, ell: f64, u: f64) -> Result<ConstantsReport> {
    let tau = tau(p, q)?;
    let bound = feasibility_bound(p, q, kappa)?;
    let gamma = match gamma_ck(p, q, kappa, ell, u) {
        Ok(g) => Some(g),
        Err(Error::FeasibilityViolated { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ConstantsReport {
        p: Index::Finite(p),
        q,
        tau,
        kappa,
        ell,
        u,
        feasibility_bound: bound,
        feasible: gamma.is_some(),
        gamma,
        delta: Some(delta_ck(p, q, ell, u, kappa == 1.0)?),
        classical: if p >= 1.0 {
            Some(classical_ck(p, q)?)
        } else {
            None
        },
        lebesgue_gamma: corollary_pq_gamma(p, q)?,
    })
}
