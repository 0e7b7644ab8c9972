use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite chain `A₁ ⊆ A₂ ⊆ … ⊆ A_Q` of atom-index sets over a domain of
/// `size` atoms. Sets are stored sorted; empty sets and repeats are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFiltration")]
pub struct Filtration {
    size: usize,
    chain: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawFiltration {
    size: usize,
    chain: Vec<Vec<usize>>,
}

impl TryFrom<RawFiltration> for Filtration {
    type Error = Error;

    fn try_from(raw: RawFiltration) -> Result<Self> {
        Filtration::new(raw.size, raw.chain)
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    // both sorted
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

impl Filtration {
    pub fn new(size: usize, chain: Vec<Vec<usize>>) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::EmptyFiltration);
        }
        let mut sorted = Vec::with_capacity(chain.len());
        for mut set in chain {
            set.sort_unstable();
            set.dedup();
            if let Some(&bad) = set.iter().find(|&&i| i >= size) {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: bad + 1,
                });
            }
            sorted.push(set);
        }
        for k in 1..sorted.len() {
            if !is_subset(&sorted[k - 1], &sorted[k]) {
                return Err(Error::NotNested(k));
            }
        }
        Ok(Self {
            size,
            chain: sorted,
        })
    }

    /// All nonempty prefixes of `order`.
    pub fn prefixes(size: usize, order: &[usize]) -> Result<Self> {
        Self::new(
            size,
            (1..=order.len()).map(|k| order[..k].to_vec()).collect(),
        )
    }

    /// `{0}, {0,1}, …, {0..size}`.
    pub fn prefix(size: usize) -> Self {
        let order: Vec<usize> = (0..size).collect();
        Self::prefixes(size, &order).expect("prefix chain is nested")
    }

    /// Prefixes of a uniformly random permutation, each prefix length kept
    /// with probability one half (at least one is kept).
    pub fn random<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..size).collect();
        order.shuffle(rng);
        let mut chain: Vec<Vec<usize>> = (1..=size)
            .filter(|_| rng.random_bool(0.5))
            .map(|k| order[..k].to_vec())
            .collect();
        if chain.is_empty() {
            let k = rng.random_range(1..=size.max(1));
            chain.push(order[..k.min(size)].to_vec());
        }
        Self::new(size, chain).expect("prefixes are nested")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn chain(&self) -> &[Vec<usize>] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// `Ω₁ = A₁`, `Ω_k = A_k \ A_{k−1}`.
    pub fn increments(&self) -> Vec<Vec<usize>> {
        let mut prev: &[usize] = &[];
        self.chain
            .iter()
            .map(|set| {
                let inc: Vec<usize> = set
                    .iter()
                    .copied()
                    .filter(|i| prev.binary_search(i).is_err())
                    .collect();
                prev = set;
                inc
            })
            .collect()
    }

    /// The chain with `set` inserted wherever it nests.
    pub fn insert(&self, mut set: Vec<usize>) -> Result<Self> {
        set.sort_unstable();
        set.dedup();
        let pos = self
            .chain
            .iter()
            .position(|a| is_subset(&set, a))
            .unwrap_or(self.chain.len());
        let mut chain = self.chain.clone();
        chain.insert(pos, set);
        Self::new(self.size, chain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::rng_for;

    #[test]
    fn validation() {
        assert_eq!(Filtration::new(3, vec![]), Err(Error::EmptyFiltration));
        assert_eq!(
            Filtration::new(3, vec![vec![0, 1], vec![1, 2]]),
            Err(Error::NotNested(1))
        );
        assert!(matches!(
            Filtration::new(3, vec![vec![3]]),
            Err(Error::DimensionMismatch { .. })
        ));
        let f = Filtration::new(4, vec![vec![], vec![2, 0], vec![0, 2], vec![3, 2, 1, 0]]).unwrap();
        assert_eq!(f.chain()[1], vec![0, 2]);
        assert_eq!(f.increments(), vec![vec![], vec![0, 2], vec![], vec![1, 3]]);
    }

    #[test]
    fn random_chains_are_nested_prefixes() {
        let mut rng = rng_for(1, &[]);
        for _ in 0..50 {
            let f = Filtration::random(7, &mut rng);
            assert!(!f.is_empty());
            let inc = f.increments();
            let total: usize = inc.iter().map(Vec::len).sum();
            assert_eq!(total, f.chain().last().unwrap().len());
        }
    }

    #[test]
    fn insert_keeps_nesting() {
        let f = Filtration::prefix(4);
        let g = f.insert(vec![0, 1, 2]).unwrap();
        assert_eq!(g.len(), 5);
        assert!(f.insert(vec![1]).is_err());
        let h = Filtration::new(4, vec![vec![0]])
            .unwrap()
            .insert(vec![0, 3])
            .unwrap();
        assert_eq!(h.chain(), &[vec![0], vec![0, 3]]);
    }

    #[test]
    fn serde_round_trip_validates() {
        let f = Filtration::prefix(3);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Filtration>(&s).unwrap(), f);
        assert!(serde_json::from_str::<Filtration>(r#"{"size":2,"chain":[[1],[0]]}"#).is_err());
    }
}
