//! Exact (O(n²)) t-SNE to two dimensions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::squared_distance;
use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 2_500;
const PERPLEXITY_TOL: f64 = 1e-5;
const BANDWIDTH_STEPS: usize = 200;
const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;
const MOMENTUM_SWITCH: usize = 250;
const MIN_GAIN: f64 = 0.01;
const P_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1_000,
            learning_rate: 200.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneOutput {
    pub coords: Vec<[f64; 2]>,
    /// KL(P || Q) at each iteration, against the unexaggerated P.
    pub kl_history: Vec<f64>,
}

/// Conditional affinities for one row, with the Gaussian precision found by
/// bisection so the row's entropy matches `ln(perplexity)`.
fn row_affinities(dist: &[f64], self_index: usize, target_entropy: f64) -> Vec<f64> {
    let min = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != self_index)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = dist.iter().map(|d| d - min).collect();
    let mut beta = 1.0;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut p = vec![0.0; dist.len()];
    for _ in 0..BANDWIDTH_STEPS {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for (j, (pj, &d)) in p.iter_mut().zip(&shifted).enumerate() {
            *pj = if j == self_index {
                0.0
            } else {
                (-d * beta).exp()
            };
            sum += *pj;
            weighted += d * *pj;
        }
        let entropy = sum.ln() + beta * weighted / sum;
        p.iter_mut().for_each(|v| *v /= sum);
        let diff = entropy - target_entropy;
        if diff.abs() < PERPLEXITY_TOL {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() {
                (beta + hi) / 2.0
            } else {
                beta * 2.0
            };
        } else {
            hi = beta;
            beta = if lo.is_finite() {
                (beta + lo) / 2.0
            } else {
                beta / 2.0
            };
        }
    }
    p
}

pub fn tsne2d(points: &[Vec<f64>], config: TsneConfig) -> Result<TsneOutput> {
    let n = points.len();
    if config.perplexity.is_nan() || config.perplexity <= 0.0 {
        return Err(Error::invalid("perplexity must be positive"));
    }
    if 3.0 * config.perplexity >= n as f64 {
        return Err(Error::invalid(format!(
            "t-SNE needs more than {} points for perplexity {}, got {n}",
            3.0 * config.perplexity,
            config.perplexity
        )));
    }
    if n > MAX_POINTS {
        return Err(Error::invalid(format!(
            "exact t-SNE is limited to {MAX_POINTS} points, got {n}"
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("t-SNE points must share a dimension"));
    }

    let dist: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| squared_distance(&points[i], &points[j]))
                .collect()
        })
        .collect();
    if dist.iter().flatten().all(|&d| d == 0.0) {
        return Err(Error::degenerate(
            "degenerate distances: all points coincide",
        ));
    }

    let target = config.perplexity.ln();
    let conditional: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| row_affinities(&dist[i], i, target))
        .collect();
    let scale = 1.0 / (2.0 * n as f64);
    let p: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        ((conditional[i][j] + conditional[j][i]) * scale).max(P_FLOOR)
                    }
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1e-4).unwrap();
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0; 2]; n];
    let mut kl_history = Vec::with_capacity(config.iterations);

    for iter in 0..config.iterations {
        let exaggeration = if iter < EXAGGERATION_ITERS {
            EXAGGERATION
        } else {
            1.0
        };
        let momentum = if iter < MOMENTUM_SWITCH { 0.5 } else { 0.8 };

        // Student-t kernel rows and their sums; summed sequentially.
        let kernel: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            0.0
                        } else {
                            let dx = y[i][0] - y[j][0];
                            let dy = y[i][1] - y[j][1];
                            1.0 / (1.0 + dx * dx + dy * dy)
                        }
                    })
                    .collect()
            })
            .collect();
        let row_sums: Vec<f64> = kernel.par_iter().map(|r| r.iter().sum()).collect();
        let z: f64 = row_sums.iter().sum();

        let kl_rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        let q = (kernel[i][j] / z).max(P_FLOOR);
                        p[i][j] * (p[i][j] / q).ln()
                    })
                    .sum()
            })
            .collect();
        kl_history.push(kl_rows.iter().sum());

        let grad: Vec<[f64; 2]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut g = [0.0; 2];
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let w = (exaggeration * p[i][j] - kernel[i][j] / z) * kernel[i][j];
                    g[0] += w * (y[i][0] - y[j][0]);
                    g[1] += w * (y[i][1] - y[j][1]);
                }
                [4.0 * g[0], 4.0 * g[1]]
            })
            .collect();

        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (velocity[i][d] > 0.0);
                let gain: f64 = if same_sign {
                    gains[i][d] * 0.8
                } else {
                    gains[i][d] + 0.2
                };
                gains[i][d] = gain.max(MIN_GAIN);
                velocity[i][d] =
                    momentum * velocity[i][d] - config.learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += velocity[i][d];
            }
        }
        let mean = y.iter().fold([0.0; 2], |m, p| [m[0] + p[0], m[1] + p[1]]);
        let mean = [mean[0] / n as f64, mean[1] / n as f64];
        for p in &mut y {
            p[0] -= mean[0];
            p[1] -= mean[1];
        }
    }

    Ok(TsneOutput {
        coords: y,
        kl_history,
    })
}
