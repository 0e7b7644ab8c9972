use crate::error::{Error, Result};
use crate::space::LatticeVector;

use super::{Filtration, LinearOp, Scalar};

/// `cum[k] = T(f·χ_{Ω₁ ∪ … ∪ Ω_k})`, accumulated one atom at a time in part
/// order. Maximal and triangular operators share this so that they agree
/// bit for bit.
fn cumulative<S: Scalar>(t: &LinearOp<S>, parts: &[Vec<usize>], f: &[S]) -> Vec<Vec<S>> {
    let mut b = vec![S::zero(); t.rows()];
    let mut out = Vec::with_capacity(parts.len());
    for part in parts {
        for &i in part {
            let fi = f[i];
            for (y, acc) in b.iter_mut().enumerate() {
                *acc += t.entry(y, i) * fi;
            }
        }
        out.push(b.clone());
    }
    out
}

fn check_domain<S: Scalar>(t: &LinearOp<S>, a: &Filtration, f: &[S]) -> Result<()> {
    t.domain().check_len(f.len())?;
    if a.size() != t.cols() {
        return Err(Error::DimensionMismatch {
            expected: t.cols(),
            found: a.size(),
        });
    }
    Ok(())
}

/// `T*f = max_α |T(f·χ_{A_α})|` pointwise.
pub fn maximal_apply<S: Scalar>(t: &LinearOp<S>, a: &Filtration, f: &[S]) -> Result<Vec<f64>> {
    check_domain(t, a, f)?;
    let mut out = vec![0.0f64; t.rows()];
    for b in cumulative(t, &a.increments(), f) {
        for (o, z) in out.iter_mut().zip(b) {
            *o = o.max(z.modulus());
        }
    }
    Ok(out)
}

pub fn maximal_apply_vector(
    t: &LinearOp<f64>,
    a: &Filtration,
    f: &LatticeVector,
) -> Result<LatticeVector> {
    t.codomain().vector(maximal_apply(t, a, f.values())?)
}

fn check_disjoint(parts: &[Vec<usize>], size: usize) -> Result<()> {
    let mut seen = vec![false; size];
    for &i in parts.iter().flatten() {
        if i >= size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: i + 1,
            });
        }
        if seen[i] {
            return Err(Error::Overlap(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `Σ_{1≤j≤k≤n} χ_{Ω̃_k} T(f·χ_{Ω_j})`.
pub fn triangular_apply<S: Scalar>(
    t: &LinearOp<S>,
    omega: &[Vec<usize>],
    tilde: &[Vec<usize>],
    f: &[S],
) -> Result<Vec<S>> {
    t.domain().check_len(f.len())?;
    if omega.len() != tilde.len() {
        return Err(Error::invalid(format!(
            "{} domain parts but {} codomain parts",
            omega.len(),
            tilde.len()
        )));
    }
    check_disjoint(omega, t.cols())?;
    check_disjoint(tilde, t.rows())?;
    let cum = cumulative(t, omega, f);
    let mut out = vec![S::zero(); t.rows()];
    for (k, set) in tilde.iter().enumerate() {
        for &y in set {
            out[y] = cum[k][y];
        }
    }
    Ok(out)
}

/// `Ω̃_k`: the codomain atoms where the `k`-th set of the chain is the first
/// to attain the maximum. With the chain increments as domain parts,
/// `|triangular_apply| = T*f` exactly.
pub fn selector_sets<S: Scalar>(
    t: &LinearOp<S>,
    a: &Filtration,
    f: &[S],
) -> Result<Vec<Vec<usize>>> {
    check_domain(t, a, f)?;
    let cum = cumulative(t, &a.increments(), f);
    let mut sets = vec![Vec::new(); a.len()];
    for y in 0..t.rows() {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, b) in cum.iter().enumerate() {
            let m = b[y].modulus();
            if m > best.1 {
                best = (k, m);
            }
        }
        sets[best.0].push(y);
    }
    Ok(sets)
}
