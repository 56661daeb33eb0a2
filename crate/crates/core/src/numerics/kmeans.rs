use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::squared_distance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iterations: 300,
        }
    }
}

/// A two-way partition. `inertia_history` holds the inertia after every
/// Lloyd update of the winning restart.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabels {
    pub labels: Vec<u8>,
    pub centroids: [Vec<f64>; 2],
    pub inertia: f64,
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn nearest(point: &[f64], centroids: &[Vec<f64>; 2]) -> (u8, f64) {
    let d0 = squared_distance(point, &centroids[0]);
    let d1 = squared_distance(point, &centroids[1]);
    if d1 < d0 {
        (1, d1)
    } else {
        (0, d0)
    }
}

fn inertia(points: &[Vec<f64>], labels: &[u8], centroids: &[Vec<f64>; 2]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, &centroids[l as usize]))
        .sum()
}

fn plus_plus_seeds(points: &[Vec<f64>], rng: &mut ChaCha8Rng) -> [Vec<f64>; 2] {
    let first = rng.random_range(0..points.len());
    let weights: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &points[first]))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    let mut second = weights.iter().rposition(|&w| w > 0.0).unwrap();
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 && target < w {
            second = i;
            break;
        }
        target -= w;
    }
    [points[first].clone(), points[second].clone()]
}

fn lloyd(
    points: &[Vec<f64>],
    mut centroids: [Vec<f64>; 2],
    max_iterations: usize,
) -> ClusterLabels {
    let dim = points[0].len();
    let mut labels: Vec<u8> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        let mut sums = [vec![0.0; dim], vec![0.0; dim]];
        let mut counts = [0usize; 2];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l as usize] += 1;
            for (s, v) in sums[l as usize].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..2 {
            // An empty cluster keeps its previous centroid.
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        history.push(inertia(points, &labels, &centroids));
        let next: Vec<u8> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }
    if !converged {
        labels = points.iter().map(|p| nearest(p, &centroids).0).collect();
    }
    let inertia = inertia(points, &labels, &centroids);
    ClusterLabels {
        labels,
        centroids,
        inertia,
        inertia_history: history,
        iterations,
    }
}

/// Two-cluster Lloyd's algorithm with k-means++ seeding, keeping the restart
/// with the lowest inertia (earliest restart on ties).
pub fn kmeans2(points: &[Vec<f64>], seed: u64, config: KMeansConfig) -> Result<ClusterLabels> {
    let Some(first) = points.first() else {
        return Err(Error::invalid("k-means needs at least 2 distinct points"));
    };
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(Error::invalid("k-means points must share a dimension"));
    }
    if points.iter().all(|p| p == first) {
        return Err(Error::degenerate(
            "k-means needs at least 2 distinct points",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<ClusterLabels> = None;
    for _ in 0..config.restarts.max(1) {
        let seeds = plus_plus_seeds(points, &mut rng);
        let run = lloyd(points, seeds, config.max_iterations);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// Agreement between cluster labels and gold labels under the better of the
/// two label assignments.
pub fn cluster_alignment_accuracy(labels: &[u8], gold: &[u8]) -> Result<f64> {
    if labels.len() != gold.len() {
        return Err(Error::invalid(format!(
            "alignment: {} labels vs {} gold",
            labels.len(),
            gold.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("alignment: no labels"));
    }
    let matched = labels.iter().zip(gold).filter(|(a, b)| a == b).count();
    let n = labels.len();
    Ok(matched.max(n - matched) as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn separated_pairs() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 0.0],
            vec![10.0, 1.0],
        ];
        let c = kmeans2(&pts, 1, KMeansConfig::default()).unwrap();
        assert_eq!(c.labels[0], c.labels[1]);
        assert_eq!(c.labels[2], c.labels[3]);
        assert_ne!(c.labels[0], c.labels[2]);
        assert!((c.inertia - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(kmeans2(&[], 0, KMeansConfig::default()).is_err());
        assert!(kmeans2(
            &[vec![1.0, 1.0], vec![1.0, 1.0]],
            0,
            KMeansConfig::default()
        )
        .is_err());
    }

    #[test]
    fn invariants_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let c = kmeans2(&pts, 8, KMeansConfig::default()).unwrap();
        for (p, &l) in pts.iter().zip(&c.labels) {
            let own = squared_distance(p, &c.centroids[l as usize]);
            let other = squared_distance(p, &c.centroids[1 - l as usize]);
            assert!(own <= other + 1e-9);
        }
        let recomputed = inertia(&pts, &c.labels, &c.centroids);
        assert!((recomputed - c.inertia).abs() < 1e-9);
        for w in c.inertia_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert_eq!(c, kmeans2(&pts, 8, KMeansConfig::default()).unwrap());
    }

    #[test]
    fn alignment_cases() {
        let gold = [0, 0, 1, 1];
        assert_eq!(cluster_alignment_accuracy(&gold, &gold).unwrap(), 1.0);
        assert_eq!(
            cluster_alignment_accuracy(&[1, 1, 0, 0], &gold).unwrap(),
            1.0
        );
        assert_eq!(
            cluster_alignment_accuracy(&[0, 1, 0, 1], &gold).unwrap(),
            0.5
        );
        assert!(cluster_alignment_accuracy(&[0], &gold).is_err());
    }

    proptest! {
        #[test]
        fn alignment_complement_invariant(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..60)) {
            let (labels, gold): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
            let a = cluster_alignment_accuracy(&labels, &gold).unwrap();
            prop_assert_eq!(a, cluster_alignment_accuracy(&flipped, &gold).unwrap());
            prop_assert!((0.5..=1.0).contains(&a));
        }
    }
}
