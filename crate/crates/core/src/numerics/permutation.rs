use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest partition count enumerated exactly.
pub const EXACT_PARTITION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PermutationMode {
    Exact,
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
    /// Exact when the partition count is within [`EXACT_PARTITION_LIMIT`],
    /// otherwise Monte Carlo.
    Auto {
        samples: usize,
        seed: u64,
    },
}

/// One-sided exact p-value: the fraction of `distribution` at or above
/// `observed`. The distribution must include the identity permutation.
pub fn permutation_p_value(observed: f64, distribution: &[f64]) -> Result<f64> {
    if distribution.is_empty() {
        return Err(Error::invalid("empty permutation distribution"));
    }
    let hits = distribution.iter().filter(|&&v| v >= observed).count();
    Ok(hits as f64 / distribution.len() as f64)
}

/// Add-one Monte Carlo estimate `(c + 1) / (m + 1)` from `m` sampled
/// statistics, `c` of which reach `observed`.
pub fn monte_carlo_p_value(observed: f64, samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("empty permutation sample"));
    }
    let hits = samples.iter().filter(|&&v| v >= observed).count();
    Ok((hits + 1) as f64 / (samples.len() + 1) as f64)
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionTest {
    pub statistic: f64,
    pub p_value: f64,
    /// Number of partitions evaluated (all of them in exact mode).
    pub partitions: u64,
    pub exact: bool,
}

/// Sum over the first group minus sum over the second, each accumulated in
/// ascending index order so every route computes bit-identical values.
fn split_statistic(scores: &[f64], in_first: &[bool]) -> f64 {
    let mut first = 0.0;
    let mut second = 0.0;
    for (s, &f) in scores.iter().zip(in_first) {
        if f {
            first += s;
        } else {
            second += s;
        }
    }
    first - second
}

/// Permutation test over balanced repartitions of `scores` into two groups of
/// `group_size`. The observed split puts the first `group_size` scores in the
/// first group; the statistic is `Σ first − Σ second` and the p-value is
/// one-sided (`>=`).
pub fn balanced_partition_test(
    scores: &[f64],
    group_size: usize,
    mode: PermutationMode,
) -> Result<PartitionTest> {
    if group_size == 0 || scores.len() != 2 * group_size {
        return Err(Error::invalid(format!(
            "balanced partition needs 2×{group_size} scores, got {}",
            scores.len()
        )));
    }
    let n = scores.len();
    let mut membership: Vec<bool> = (0..n).map(|i| i < group_size).collect();
    let observed = split_statistic(scores, &membership);
    let total = binomial(n as u64, group_size as u64);
    let exact = match mode {
        PermutationMode::Exact => {
            if total > u128::from(EXACT_PARTITION_LIMIT) {
                return Err(Error::invalid(format!(
                    "{total} partitions exceed the exact-enumeration limit"
                )));
            }
            true
        }
        PermutationMode::MonteCarlo { .. } => false,
        PermutationMode::Auto { .. } => total <= u128::from(EXACT_PARTITION_LIMIT),
    };

    if exact {
        // Lexicographic walk over index combinations.
        let mut combo: Vec<usize> = (0..group_size).collect();
        let mut distribution = Vec::with_capacity(total as usize);
        loop {
            membership.iter_mut().for_each(|m| *m = false);
            for &c in &combo {
                membership[c] = true;
            }
            distribution.push(split_statistic(scores, &membership));
            let Some(pos) = (0..group_size)
                .rev()
                .find(|&i| combo[i] < n - group_size + i)
            else {
                break;
            };
            combo[pos] += 1;
            for i in pos + 1..group_size {
                combo[i] = combo[i - 1] + 1;
            }
        }
        let p_value = permutation_p_value(observed, &distribution)?;
        return Ok(PartitionTest {
            statistic: observed,
            p_value,
            partitions: distribution.len() as u64,
            exact: true,
        });
    }

    let (samples, seed) = match mode {
        PermutationMode::MonteCarlo { samples, seed } | PermutationMode::Auto { samples, seed } => {
            (samples, seed)
        }
        PermutationMode::Exact => unreachable!(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut sampled = Vec::with_capacity(samples);
    for _ in 0..samples {
        order.shuffle(&mut rng);
        membership.iter_mut().for_each(|m| *m = false);
        for &i in &order[..group_size] {
            membership[i] = true;
        }
        sampled.push(split_statistic(scores, &membership));
    }
    let p_value = monte_carlo_p_value(observed, &sampled)?;
    Ok(PartitionTest {
        statistic: observed,
        p_value,
        partitions: samples as u64,
        exact: false,
    })
}
