//! Dense linear operators between atomic spaces, filtrations, and the
//! maximal/triangular operators built from them.

mod filtration;
mod harness;
mod maximal;
mod opnorm;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{AtomicSpace, LatticeVector};

pub use filtration::Filtration;
pub use harness::{
    ck_verify, dual_maximal_verify, pairing_error, resolve_constants, triangular_ratio,
    triangular_verify, CkConstants, CkOptions, CkReport, DualReport, Verdict,
};
pub use maximal::{maximal_apply, maximal_apply_vector, selector_sets, triangular_apply};
pub use opnorm::{op_norm, op_norm_exact, op_norm_search, OperatorNorm};

/// Field of matrix entries: `f64`, or `Complex64` for Fourier operators.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Serialize
    + Add<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + 'static
{
    /// Real coordinates per entry (1 or 2); the searches work in these.
    const DOF: usize;

    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn scale(self, c: f64) -> Self;
    fn conj(self) -> Self;
    /// `z/|z|`, or zero.
    fn phase(self) -> Self;
    fn from_coords(c: &[f64]) -> Self;
    fn push_coords(self, out: &mut Vec<f64>);
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const DOF: usize = 1;

    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn conj(self) -> Self {
        self
    }
    fn phase(self) -> Self {
        if self == 0.0 {
            0.0
        } else {
            self.signum()
        }
    }
    fn from_coords(c: &[f64]) -> Self {
        c[0]
    }
    fn push_coords(self, out: &mut Vec<f64>) {
        out.push(self);
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const DOF: usize = 2;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn phase(self) -> Self {
        let m = self.norm();
        if m == 0.0 {
            Self::zero()
        } else {
            self / m
        }
    }
    fn from_coords(c: &[f64]) -> Self {
        Complex64::new(c[0], c[1])
    }
    fn push_coords(self, out: &mut Vec<f64>) {
        out.extend([self.re, self.im]);
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

pub(crate) fn moduli<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(|z| z.modulus()).collect()
}

pub(crate) fn from_coords<S: Scalar>(x: &[f64]) -> Vec<S> {
    x.chunks(S::DOF).map(S::from_coords).collect()
}

pub(crate) fn to_coords<S: Scalar>(v: &[S]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() * S::DOF);
    v.iter().for_each(|z| z.push_coords(&mut out));
    out
}

/// A dense matrix `T: domain → codomain`, stored row-major (one row per
/// codomain atom). Measures are carried by the norms, not the entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearOp<S> {
    rows: usize,
    cols: usize,
    entries: Vec<S>,
    domain: AtomicSpace,
    codomain: AtomicSpace,
}

impl<S: Scalar> LinearOp<S> {
    pub fn new(domain: AtomicSpace, codomain: AtomicSpace, entries: Vec<S>) -> Result<Self> {
        let (rows, cols) = (codomain.len(), domain.len());
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(k) = entries.iter().position(|z| !z.is_finite()) {
            return Err(Error::invalid(format!(
                "entry ({}, {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
            domain,
            codomain,
        })
    }

    pub fn from_rows(
        domain: AtomicSpace,
        codomain: AtomicSpace,
        rows: Vec<Vec<S>>,
    ) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != domain.len()) {
            return Err(Error::DimensionMismatch {
                expected: domain.len(),
                found: r.len(),
            });
        }
        Self::new(domain, codomain, rows.into_iter().flatten().collect())
    }

    pub fn identity(space: AtomicSpace) -> Self {
        let n = space.len();
        let mut entries = vec![S::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = S::from_real(1.0);
        }
        Self {
            rows: n,
            cols: n,
            entries,
            domain: space.clone(),
            codomain: space,
        }
    }

    /// Independent standard normal entries.
    pub fn random<R: Rng + ?Sized>(
        domain: AtomicSpace,
        codomain: AtomicSpace,
        rng: &mut R,
    ) -> Self {
        let entries = (0..domain.len() * codomain.len())
            .map(|_| S::sample(rng))
            .collect();
        Self {
            rows: codomain.len(),
            cols: domain.len(),
            entries,
            domain,
            codomain,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> &AtomicSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &AtomicSpace {
        &self.codomain
    }

    pub fn entry(&self, row: usize, col: usize) -> S {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[S] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.entry(r, col)).collect()
    }

    pub fn apply(&self, f: &[S]) -> Result<Vec<S>> {
        self.domain.check_len(f.len())?;
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for (a, b) in self.row(r).iter().zip(f) {
                    acc += *a * *b;
                }
                acc
            })
            .collect())
    }

    /// `T′` with `T′_{i,j} = (ν_j/μ_i)·T_{j,i}`, so that
    /// `Σ_j g_j (Tf)_j ν_j = Σ_i f_i (T′g)_i μ_i`.
    pub fn kothe_dual(&self) -> Self {
        let (mu, nu) = (self.domain.weights(), self.codomain.weights());
        let mut entries = Vec::with_capacity(self.entries.len());
        for i in 0..self.cols {
            for j in 0..self.rows {
                entries.push(self.entry(j, i).scale(nu[j] / mu[i]));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
        }
    }
}

impl LinearOp<f64> {
    pub fn apply_vector(&self, f: &LatticeVector) -> Result<LatticeVector> {
        self.codomain.vector(self.apply(f.values())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::rng_for;

    #[test]
    fn apply_small_cases() {
        let s = AtomicSpace::uniform(2);
        let swap = LinearOp::from_rows(s.clone(), s.clone(), vec![vec![0.0, 1.0], vec![1.0, 0.0]])
            .unwrap();
        assert_eq!(swap.apply(&[3.0, -2.0]).unwrap(), vec![-2.0, 3.0]);
        let id = LinearOp::<f64>::identity(s.clone());
        assert_eq!(id.apply(&[3.0, -2.0]).unwrap(), vec![3.0, -2.0]);
        let zero = LinearOp::new(s.clone(), s.clone(), vec![0.0; 4]).unwrap();
        assert_eq!(zero.apply(&[3.0, -2.0]).unwrap(), vec![0.0, 0.0]);
        assert!(swap.apply(&[1.0]).is_err());
        assert!(LinearOp::new(s.clone(), s, vec![0.0; 3]).is_err());
    }

    #[test]
    fn kothe_dual_pairing_and_involution() {
        let mut rng = rng_for(4, &[]);
        let dom = AtomicSpace::new(vec![0.5, 1.0, 2.0]).unwrap();
        let cod = AtomicSpace::new(vec![3.0, 0.25, 1.0, 1.5]).unwrap();
        let t: LinearOp<f64> = LinearOp::random(dom.clone(), cod.clone(), &mut rng);
        let td = t.kothe_dual();
        assert_eq!(td.domain(), &cod);
        let f: Vec<f64> = (0..3).map(|_| f64::sample(&mut rng)).collect();
        let g: Vec<f64> = (0..4).map(|_| f64::sample(&mut rng)).collect();
        let lhs: f64 = t
            .apply(&f)
            .unwrap()
            .iter()
            .zip(&g)
            .zip(cod.weights())
            .map(|((a, b), w)| a * b * w)
            .sum();
        let rhs: f64 = td
            .apply(&g)
            .unwrap()
            .iter()
            .zip(&f)
            .zip(dom.weights())
            .map(|((a, b), w)| a * b * w)
            .sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        let back = td.kothe_dual();
        for (a, b) in back.entries.iter().zip(&t.entries) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
        // unit weights: plain transpose
        let u = AtomicSpace::uniform(3);
        let t: LinearOp<f64> = LinearOp::random(u.clone(), u, &mut rng);
        let td = t.kothe_dual();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(td.entry(i, j), t.entry(j, i));
            }
        }
    }

    #[test]
    fn complex_scalar_helpers() {
        let z = Complex64::new(3.0, -4.0);
        assert_eq!(z.modulus(), 5.0);
        assert!((Scalar::phase(z) - Complex64::new(0.6, -0.8)).norm() < 1e-15);
        assert_eq!(Scalar::phase(Complex64::zero()), Complex64::zero());
        let v = vec![Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.0)];
        assert_eq!(to_coords(&v), vec![1.0, 2.0, -3.0, 0.0]);
        assert_eq!(from_coords::<Complex64>(&to_coords(&v)), v);
    }
}
