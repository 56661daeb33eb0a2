//! Bias-by-neighbors: the share of a word's nearest neighbors whose biased
//! projection is male.

use crate::embedding::neighbors::{neighbor_indices, neighbor_indices_many};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::{projections, GenderDirection};
use crate::numerics::pearson;

use super::{AuditContext, Experiment, ExperimentResult};

/// Male/female labels for the rows of `space`, taken from the sign of each
/// word's projection in `biased`. Words absent from `biased` get `None`.
pub(crate) fn male_labels(
    space: &EmbeddingSet,
    biased: &EmbeddingSet,
    g: &GenderDirection,
) -> Result<Vec<Option<bool>>> {
    let proj = projections(biased, g)?;
    Ok(space
        .words()
        .iter()
        .map(|w| biased.index_of(w).map(|i| proj[i] > 0.0))
        .collect())
}

/// `(male, counted)` over a neighbor list; unlabeled neighbors are skipped.
pub(crate) fn count_male(neighbors: &[(usize, f64)], labels: &[Option<bool>]) -> (usize, usize) {
    neighbors
        .iter()
        .filter_map(|&(j, _)| labels[j])
        .fold((0, 0), |(m, c), male| (m + usize::from(male), c + 1))
}

/// Fraction of `word`'s `k` nearest neighbors in `debiased` that lean male
/// in `biased`.
pub fn bias_by_neighbors(
    debiased: &EmbeddingSet,
    biased: &EmbeddingSet,
    g: &GenderDirection,
    word: &str,
    k: usize,
) -> Result<f64> {
    let qi = debiased
        .index_of(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    if !biased.contains(word) {
        return Err(Error::UnknownWord(word.to_string()));
    }
    if !debiased.is_normalized() {
        return Err(Error::invalid("embedding set must be normalized"));
    }
    if k == 0 || k >= debiased.len() {
        return Err(Error::invalid(format!(
            "k must be in 1..{}",
            debiased.len()
        )));
    }
    let labels = male_labels(debiased, biased, g)?;
    let (male, counted) = count_male(&neighbor_indices(debiased, qi, k), &labels);
    if counted == 0 {
        return Err(Error::invalid(format!(
            "none of the {k} neighbors of {word} are in the biased vocabulary"
        )));
    }
    Ok(male as f64 / counted as f64)
}

/// Male-neighbor fractions for `queries` (rows of `space`), with words whose
/// neighbors are all unlabeled dropped. Returns `(query row, fraction, male
/// count)`.
pub(crate) fn neighbor_scores(
    space: &EmbeddingSet,
    labels: &[Option<bool>],
    queries: &[usize],
    k: usize,
) -> Result<Vec<(usize, f64, usize)>> {
    let lists = neighbor_indices_many(space, queries, k)?;
    Ok(queries
        .iter()
        .zip(lists)
        .filter_map(|(&q, list)| {
            let (male, counted) = count_male(&list, labels);
            (counted > 0).then(|| (q, male as f64 / counted as f64, male))
        })
        .collect())
}

/// Pearson correlation between original projection bias and bias-by-neighbors
/// over the whole shared vocabulary, with neighbors taken from the debiased
/// set (`*_after`) and from the biased set (`*_before`).
pub fn neighbor_correlation_experiment(
    debiased: &EmbeddingSet,
    biased: &EmbeddingSet,
    g: &GenderDirection,
    k: usize,
) -> Result<ExperimentResult> {
    let proj = projections(biased, g)?;
    let original =
        |space: &EmbeddingSet, row: usize| proj[biased.index_of(space.word(row)).unwrap()];

    let mut result = ExperimentResult::new("neighbors");
    result.setting("k", k);
    for (phase, space) in [("before", biased), ("after", debiased)] {
        let labels = male_labels(space, biased, g)?;
        let queries: Vec<usize> = (0..space.len()).filter(|&i| labels[i].is_some()).collect();
        let scores = neighbor_scores(space, &labels, &queries, k)?;
        let xs: Vec<f64> = scores.iter().map(|&(q, _, _)| original(space, q)).collect();
        let ys: Vec<f64> = scores.iter().map(|&(_, f, _)| f).collect();
        let corr = pearson(&xs, &ys)?;
        result
            .scalar(format!("r_{phase}"), corr.r)
            .scalar(format!("p_{phase}"), corr.p_two_sided)
            .scalar(format!("n_{phase}"), corr.n as f64);
    }
    Ok(result)
}

pub struct NeighborCorrelationExperiment;

impl Experiment for NeighborCorrelationExperiment {
    fn name(&self) -> &'static str {
        "neighbors"
    }

    fn description(&self) -> &'static str {
        "correlation of projection bias with the male share of k nearest neighbors"
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<ExperimentResult> {
        neighbor_correlation_experiment(ctx.debiased, ctx.biased, ctx.direction, ctx.config.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DirectionMethod;

    fn axis_g(dim: usize) -> GenderDirection {
        let mut direction = vec![0.0; dim];
        direction[0] = 1.0;
        GenderDirection {
            direction,
            method: DirectionMethod::PairDifference,
            source_pairs: vec![],
        }
    }

    /// Query at the origin of axis 2, ten neighbors near it whose gender sign
    /// is planted on axis 0, and far-away filler.
    fn planted(male_neighbors: usize) -> EmbeddingSet {
        let mut words = vec!["q".to_string()];
        let mut rows = vec![vec![0.0, 0.0, 1.0, 0.0]];
        for i in 0..10 {
            let sign = if i < male_neighbors { 1.0 } else { -1.0 };
            words.push(format!("n{i}"));
            rows.push(vec![sign * 0.05, 0.01 * i as f64, 1.0, 0.0]);
        }
        for i in 0..10 {
            words.push(format!("far{i}"));
            rows.push(vec![0.1, 0.0, 0.0, 1.0 + i as f64]);
        }
        EmbeddingSet::new(words, rows).unwrap().normalize().unwrap()
    }

    #[test]
    fn counts_planted_share() {
        let e = planted(6);
        let g = axis_g(4);
        assert!((bias_by_neighbors(&e, &e, &g, "q", 10).unwrap() - 0.6).abs() < 1e-15);
        let all = planted(10);
        assert_eq!(bias_by_neighbors(&all, &all, &g, "q", 10).unwrap(), 1.0);
        assert!(bias_by_neighbors(&e, &e, &g, "zz", 10).is_err());
    }

    #[test]
    fn skips_neighbors_missing_from_biased() {
        let e = planted(6);
        let g = axis_g(4);
        // Drop n0 (male) from the labeling vocabulary.
        let biased = e.retain_indices(|_, w| w != "n0");
        let frac = bias_by_neighbors(&e, &biased, &g, "q", 10).unwrap();
        assert!((frac - 5.0 / 9.0).abs() < 1e-15);
        let only_query = e.retain_indices(|_, w| w == "q" || w.starts_with("far"));
        assert!(bias_by_neighbors(&e, &only_query, &g, "q", 10).is_err());
    }

    #[test]
    fn fraction_complements() {
        let e = planted(3);
        let g = axis_g(4);
        let male = bias_by_neighbors(&e, &e, &g, "q", 10).unwrap();
        let female = bias_by_neighbors(&e, &e, &g.negated(), "q", 10).unwrap();
        assert!((male + female - 1.0).abs() < 1e-15);
    }
}
