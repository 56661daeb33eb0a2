//! Binary soft-margin SVM with an RBF kernel, trained by SMO with
//! second-order working-set selection.
//!
//! The dual is solved in its minimization form
//! `f(α) = ½ αᵀQα − eᵀα`, `Q_ij = y_i y_j K(x_i, x_j)`, subject to
//! `0 ≤ α_i ≤ C` and `yᵀα = 0`. The gradient `G = Qα − e` is maintained
//! incrementally. Training stops once the maximal KKT violation
//! `max_{I_up} −y_t G_t + max_{I_low} y_t G_t` drops below the tolerance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::squared_distance;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    /// `None` means `1 / dim`.
    pub gamma: Option<f64>,
    pub tolerance: f64,
    /// `None` means `max(1_000_000, 100 n)`.
    pub max_iterations: Option<usize>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            tolerance: 1e-3,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` for each support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias_term: f64,
    pub gamma: f64,
    pub c: f64,
    /// `class_labels[0]` is the +1 class (the label of the first training
    /// point); a decision value of exactly zero predicts it.
    pub class_labels: [i32; 2],
    /// Maximized dual objective `Σα − ½ αᵀQα`.
    pub dual_objective: f64,
    pub iterations: usize,
    /// Full α vector over the training set.
    pub alphas: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

impl SvmModel {
    pub fn decision_value(&self, point: &[f64]) -> Result<f64> {
        let dim = self.support_vectors.first().map_or(point.len(), Vec::len);
        if point.len() != dim {
            return Err(Error::invalid(format!(
                "SVM expects {dim}-dimensional points, got {}",
                point.len()
            )));
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, coef)| coef * rbf(sv, point, self.gamma))
            .sum::<f64>()
            + self.bias_term)
    }
}

pub fn svm_predict(model: &SvmModel, point: &[f64]) -> Result<i32> {
    let f = model.decision_value(point)?;
    Ok(if f >= 0.0 {
        model.class_labels[0]
    } else {
        model.class_labels[1]
    })
}

/// Trains an RBF-kernel SVM on two-class data. Working-set ties are broken
/// by lowest index, so training is fully deterministic.
pub fn svm_rbf_train(points: &[Vec<f64>], labels: &[i32], config: SvmConfig) -> Result<SvmModel> {
    let n = points.len();
    if n != labels.len() {
        return Err(Error::invalid(format!(
            "{n} points but {} labels",
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("SVM needs training points"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("SVM training points must share a dimension"));
    }
    let positive = labels[0];
    let Some(&negative) = labels.iter().find(|&&l| l != positive) else {
        return Err(Error::invalid("SVM needs two classes, got one"));
    };
    if labels.iter().any(|&l| l != positive && l != negative) {
        return Err(Error::invalid("SVM supports exactly two classes"));
    }
    if config.c.is_nan() || config.c <= 0.0 {
        return Err(Error::invalid("SVM C must be positive"));
    }
    let gamma = config.gamma.unwrap_or(1.0 / dim as f64);
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::invalid("SVM gamma must be positive"));
    }
    let c = config.c;
    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l == positive { 1.0 } else { -1.0 })
        .collect();

    let kernel: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| rbf(&points[i], &points[j], gamma)).collect())
        .collect();

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iterations = config.max_iterations.unwrap_or((100 * n).max(1_000_000));
    let in_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
    let in_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);

    let mut iterations = 0;
    loop {
        // i: maximal −y G over I_up.
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(t, &alpha) {
                let v = -y[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i_sel = Some(t);
                }
            }
        }
        // j: second-order selection over I_low.
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(t, &alpha) {
                    continue;
                }
                let ygt = y[t] * grad[t];
                if ygt > g_max2 {
                    g_max2 = ygt;
                }
                let b = g_max + ygt;
                if b > 0.0 {
                    let mut a = kernel[i][i] + kernel[t][t] - 2.0 * kernel[i][t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let violation = g_max + g_max2;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if violation < config.tolerance {
            break;
        }
        if iterations >= max_iterations {
            return Err(Error::NotConverged {
                iterations,
                violation,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (d_i, d_j) = (alpha[i] - old_i, alpha[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += y[i] * y[k] * kernel[i][k] * d_i + y[j] * y[k] * kernel[j][k] * d_j;
        }
    }

    // Offset from free support vectors, or the midpoint of the feasible
    // interval when every α sits at a bound.
    let (mut upper, mut lower) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (upper + lower) / 2.0
    };

    let dual_objective = alpha
        .iter()
        .zip(&grad)
        .map(|(a, g)| a - 0.5 * a * (g + 1.0))
        .sum();
    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(points[t].clone());
            dual_coefficients.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        support_vectors,
        dual_coefficients,
        bias_term: -rho,
        gamma,
        c,
        class_labels: [positive, negative],
        dual_objective,
        iterations,
        alphas: alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(model: &SvmModel, pts: &[Vec<f64>], labels: &[i32]) -> f64 {
        let hits = pts
            .iter()
            .zip(labels)
            .filter(|(p, &l)| svm_predict(model, p).unwrap() == l)
            .count();
        hits as f64 / pts.len() as f64
    }

    #[test]
    fn separable_pair() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let labels = [1, -1];
        let m = svm_rbf_train(&pts, &labels, SvmConfig::default()).unwrap();
        assert_eq!(accuracy(&m, &pts, &labels), 1.0);
    }

    #[test]
    fn xor() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ];
        let labels = [1, 1, 0, 0];
        let config = SvmConfig {
            c: 10.0,
            gamma: Some(1.0),
            ..Default::default()
        };
        let m = svm_rbf_train(&pts, &labels, config).unwrap();
        assert_eq!(accuracy(&m, &pts, &labels), 1.0);
        assert_eq!(m.class_labels, [1, 0]);
    }

    #[test]
    fn constraints_hold() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()])
            .collect();
        let labels: Vec<i32> = (0..40)
            .map(|i| if (i * 7) % 5 < 2 { 1 } else { -1 })
            .collect();
        let config = SvmConfig {
            c: 2.0,
            gamma: Some(3.0),
            ..Default::default()
        };
        let m = svm_rbf_train(&pts, &labels, config).unwrap();
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == labels[0] { 1.0 } else { -1.0 })
            .collect();
        let balance: f64 = m.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-6, "{balance}");
        assert!(m.alphas.iter().all(|&a| (0.0..=2.0).contains(&a)));
        assert_eq!(m, svm_rbf_train(&pts, &labels, config).unwrap());
    }

    #[test]
    fn far_points_follow_bias() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let labels = [3, 7, 7];
        let m = svm_rbf_train(
            &pts,
            &labels,
            SvmConfig {
                gamma: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        let expect = if m.bias_term >= 0.0 { 3 } else { 7 };
        assert_eq!(svm_predict(&m, &[1e3, 1e3]).unwrap(), expect);
        assert!(svm_predict(&m, &[1.0]).is_err());
    }

    #[test]
    fn errors() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(svm_rbf_train(&pts, &[1, 1], SvmConfig::default()).is_err());
        assert!(svm_rbf_train(&pts, &[1], SvmConfig::default()).is_err());
        assert!(svm_rbf_train(
            &[vec![0.0], vec![1.0], vec![2.0]],
            &[1, 2, 3],
            SvmConfig::default()
        )
        .is_err());
        let stuck = SvmConfig {
            max_iterations: Some(0),
            ..Default::default()
        };
        assert!(matches!(
            svm_rbf_train(&pts, &[1, -1], stuck),
            Err(Error::NotConverged { .. })
        ));
    }
}
