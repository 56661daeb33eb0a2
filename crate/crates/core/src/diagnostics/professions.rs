use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::{projections, GenderDirection};
use crate::numerics::pearson;
use crate::wordlists::WordList;

use super::neighbors::{male_labels, neighbor_scores};
use super::{AuditContext, Experiment, ExperimentResult, WordRecord};

/// For each profession present in both sets: its original projection bias
/// and the number of male-leaning words among its `k` nearest neighbors in
/// each set. Correlations use the raw counts.
pub fn professions_experiment(
    debiased: &EmbeddingSet,
    biased: &EmbeddingSet,
    g: &GenderDirection,
    professions: &WordList,
    k: usize,
) -> Result<ExperimentResult> {
    let words: Vec<&str> = professions
        .words()
        .iter()
        .map(String::as_str)
        .filter(|w| biased.contains(w) && debiased.contains(w))
        .collect();
    if words.is_empty() {
        return Err(Error::invalid("no profession words in both vocabularies"));
    }
    let proj = projections(biased, g)?;
    let original: Vec<f64> = words
        .iter()
        .map(|w| proj[biased.index_of(w).unwrap()])
        .collect();

    let counts = |space: &EmbeddingSet| -> Result<Vec<f64>> {
        let labels = male_labels(space, biased, g)?;
        let queries: Vec<usize> = words.iter().map(|w| space.index_of(w).unwrap()).collect();
        let scores = neighbor_scores(space, &labels, &queries, k)?;
        if scores.len() != queries.len() {
            return Err(Error::invalid("a profession has no labeled neighbors"));
        }
        Ok(scores.iter().map(|&(_, _, male)| male as f64).collect())
    };
    let before = counts(biased)?;
    let after = counts(debiased)?;

    let mut result = ExperimentResult::new("professions");
    result
        .setting("k", k)
        .setting("professions_used", words.len());
    for (phase, ys) in [("before", &before), ("after", &after)] {
        let corr = pearson(&original, ys)?;
        result
            .scalar(format!("r_{phase}"), corr.r)
            .scalar(format!("p_{phase}"), corr.p_two_sided);
    }
    result.scalar("n", words.len() as f64);
    result.per_word = words
        .iter()
        .enumerate()
        .map(|(i, w)| WordRecord {
            word: w.to_string(),
            original_bias: original[i],
            metrics: [
                ("male_neighbors_before".to_string(), before[i]),
                ("male_neighbors_after".to_string(), after[i]),
            ]
            .into_iter()
            .collect(),
        })
        .collect();
    Ok(result)
}

pub struct ProfessionsExperiment;

impl Experiment for ProfessionsExperiment {
    fn name(&self) -> &'static str {
        "professions"
    }

    fn description(&self) -> &'static str {
        "male-neighbor counts of profession words against their projection bias"
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<ExperimentResult> {
        professions_experiment(
            ctx.debiased,
            ctx.biased,
            ctx.direction,
            ctx.professions,
            ctx.config.k,
        )
    }
}
