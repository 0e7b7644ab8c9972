//! Seeded derivative-free maximisation used by every searched constant.
//!
//! The searches only ever produce lower bounds for suprema: whatever point
//! they return is an explicit witness. Determinism matters more than speed,
//! so each start gets its own RNG stream and results are reduced in start
//! order regardless of how rayon schedules the work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub initial: f64,
    /// Factor applied to the step after a sweep without improvement.
    pub decay: f64,
    /// The search stops once the step falls below this.
    pub min: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self {
            initial: 0.5,
            decay: 0.5,
            min: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub seed: u64,
    /// Random starts on top of the structured ones.
    pub restarts: usize,
    /// Maximum coordinate sweeps per start.
    pub iterations: usize,
    pub step: StepSchedule,
    /// Relative slack used when a searched value is compared to a bound.
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 4,
            iterations: 200,
            step: StepSchedule::default(),
            tolerance: 1e-6,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.iterations == 0 {
            return Err(Error::invalid("restarts and iterations must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let s = self.step;
        if !(s.initial > 0.0 && s.decay > 0.0 && s.decay < 1.0 && s.min > 0.0 && s.min <= s.initial)
        {
            return Err(Error::invalid(
                "step schedule needs 0 < min <= initial and decay in (0, 1)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub starts: usize,
    pub evaluations: u64,
    /// Number of independent sub-searches (partitions, filtrations, ...).
    pub subproblems: usize,
}

impl SearchStats {
    pub fn merge(self, other: Self) -> Self {
        Self {
            starts: self.starts + other.starts,
            evaluations: self.evaluations + other.evaluations,
            subproblems: self.subproblems + other.subproblems,
        }
    }
}

/// SplitMix64 finaliser, used to derive independent seeds from a base seed
/// and a path of integer tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut z = base;
    for &t in tags {
        z = z
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(t.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

pub fn rng_for(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub stats: SearchStats,
}

/// A maximisation problem over the coordinates in `free`; other coordinates
/// stay at zero.
pub(crate) struct Problem<'a, F> {
    pub objective: &'a F,
    pub dim: usize,
    pub free: &'a [usize],
    pub signed: bool,
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Problem<'_, F> {
    /// Random start on the free coordinates.
    pub fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        let sparse = rng.random_bool(0.3);
        for &i in self.free {
            if sparse && rng.random_bool(0.5) {
                continue;
            }
            x[i] = if self.signed {
                StandardNormal.sample(rng)
            } else {
                let e: f64 = Exp1.sample(rng);
                e
            };
        }
        if self.free.iter().all(|&i| x[i] == 0.0) {
            let k = self.free[rng.random_range(0..self.free.len())];
            x[k] = 1.0;
        }
        x
    }

    /// Compass search from `x`: each coordinate takes its best move, and the
    /// step shrinks after a sweep without improvement.
    pub fn ascend(&self, mut x: Vec<f64>, cfg: &SearchConfig) -> Outcome {
        let f = self.objective;
        let mut value = score(f(&x));
        let mut evaluations = 1u64;
        let mut h = cfg.step.initial;
        for _ in 0..cfg.iterations {
            let scale = self.free.iter().fold(0.0f64, |m, &i| m.max(x[i].abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let mut improved = false;
            for &i in self.free {
                let xi = x[i];
                let candidates = [
                    xi * (1.0 + h),
                    xi * (1.0 - h),
                    xi + h * scale,
                    xi - h * scale,
                    0.0,
                ];
                let mut best = xi;
                for c in candidates {
                    if c == xi || (!self.signed && c < 0.0) {
                        continue;
                    }
                    x[i] = c;
                    let v = score(f(&x));
                    evaluations += 1;
                    if v > value {
                        value = v;
                        best = c;
                        improved = true;
                    }
                }
                x[i] = best;
            }
            if !improved {
                h *= cfg.step.decay;
                if h < cfg.step.min {
                    break;
                }
            }
        }
        Outcome {
            x,
            value,
            stats: SearchStats {
                starts: 1,
                evaluations,
                subproblems: 0,
            },
        }
    }

    /// Ascends from every structured start plus `cfg.restarts` random ones
    /// and returns the best, earliest start winning ties.
    pub fn maximize(&self, structured: Vec<Vec<f64>>, cfg: &SearchConfig, seed: u64) -> Outcome {
        let mut starts = structured;
        for k in 0..cfg.restarts {
            let mut rng = rng_for(seed, &[k as u64]);
            starts.push(self.random_start(&mut rng));
        }
        let outcomes: Vec<Outcome> = starts
            .into_par_iter()
            .map(|s| self.ascend(s, cfg))
            .collect();
        best_of(outcomes)
    }
}

pub(crate) fn best_of(outcomes: Vec<Outcome>) -> Outcome {
    let mut stats = SearchStats::default();
    let mut best: Option<Outcome> = None;
    for o in outcomes {
        stats = stats.merge(o.stats);
        if best.as_ref().is_none_or(|b| o.value > b.value) {
            best = Some(o);
        }
    }
    let mut best = best.expect("at least one start");
    best.stats = stats;
    best
}
