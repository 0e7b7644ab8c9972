//! Finite atomic measure spaces and real-valued functions on them.

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite, purely atomic measure space: atom `i` carries measure `μ_i > 0`.
///
/// Cloning is cheap; the weights are shared.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSpace {
    weights: Arc<[f64]>,
}

impl AtomicSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("atomic space needs at least one atom"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::invalid(format!(
                "atom {i} has non-positive or non-finite weight {w}"
            )));
        }
        Ok(Self {
            weights: weights.into(),
        })
    }

    /// `n` atoms of measure one (counting measure).
    pub fn uniform(n: usize) -> Self {
        Self::new(vec![1.0; n.max(1)]).expect("unit weights are valid")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Measure of a set of atom indices.
    pub fn measure_of(&self, atoms: &[usize]) -> f64 {
        atoms.iter().map(|&i| self.weights[i]).sum()
    }

    pub fn zeros(&self) -> LatticeVector {
        LatticeVector {
            space: self.clone(),
            values: vec![0.0; self.len()],
        }
    }

    pub fn indicator(&self, atoms: &[usize]) -> Result<LatticeVector> {
        let mut v = vec![0.0; self.len()];
        for &i in atoms {
            if i >= self.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.len(),
                    found: i + 1,
                });
            }
            v[i] = 1.0;
        }
        Ok(LatticeVector {
            space: self.clone(),
            values: v,
        })
    }

    pub fn vector(&self, values: Vec<f64>) -> Result<LatticeVector> {
        LatticeVector::new(self.clone(), values)
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

impl Serialize for AtomicSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.weights.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomicSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Vec::<f64>::deserialize(d)?;
        AtomicSpace::new(w).map_err(serde::de::Error::custom)
    }
}

/// A real function on an [`AtomicSpace`], one finite value per atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeVector {
    #[serde(skip)]
    space: AtomicSpace,
    values: Vec<f64>,
}

impl LatticeVector {
    pub fn new(space: AtomicSpace, values: Vec<f64>) -> Result<Self> {
        space.check_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("value at atom {i} is not finite")));
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &AtomicSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.check_len(other.len())?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            space: self.space.clone(),
            values,
        })
    }

    /// `f·χ_A` for a set of atom indices `A`.
    pub fn restrict(&self, atoms: &[usize]) -> Self {
        let mut values = vec![0.0; self.len()];
        for &i in atoms {
            values[i] = self.values[i];
        }
        Self {
            space: self.space.clone(),
            values,
        }
    }

    /// Indices of the atoms where the function is nonzero.
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.values)
    }

    /// `∫ f g dμ`.
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        self.space.check_len(other.len())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.space.weights())
            .map(|((a, b), w)| a * b * w)
            .sum())
    }
}

pub(crate) fn support_of(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// `true` when no atom is in the support of two different vectors.
pub fn pairwise_disjoint(vectors: &[LatticeVector]) -> bool {
    let Some(first) = vectors.first() else {
        return true;
    };
    (0..first.len()).all(|i| vectors.iter().filter(|v| v.values()[i] != 0.0).count() <= 1)
}
