//! k-means on the most gender-biased words, before and after debiasing.

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::Result;
use crate::geometry::{most_biased_words, projections, GenderDirection};
use crate::numerics::{cluster_alignment_accuracy, kmeans2, tsne2d, KMeansConfig, TsneConfig};

use super::{AuditContext, Experiment, ExperimentResult, WordRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub n_per_side: usize,
    pub seed: u64,
    pub kmeans: KMeansConfig,
    /// `None` skips the 2-D layout.
    pub tsne: Option<TsneConfig>,
}

/// Perplexity lowered, if needed, to what `n` points can support.
fn fitted_perplexity(requested: f64, n: usize) -> f64 {
    requested.min((n as f64 - 1.0) / 3.0)
}

pub fn cluster_experiment(
    biased: &EmbeddingSet,
    debiased: &EmbeddingSet,
    g: &GenderDirection,
    config: &ClusterConfig,
) -> Result<ExperimentResult> {
    let (male, female) = most_biased_words(biased, g, config.n_per_side)?;
    let words: Vec<&String> = male.words().iter().chain(female.words()).collect();
    let gold: Vec<u8> = (0..words.len()).map(|i| u8::from(i < male.len())).collect();
    let proj = projections(biased, g)?;
    let original: Vec<f64> = words
        .iter()
        .map(|w| proj[biased.index_of(w).unwrap()])
        .collect();

    let mut result = ExperimentResult::new("cluster");
    result
        .setting("n_per_side", config.n_per_side)
        .setting("seed", config.seed)
        .setting("kmeans", config.kmeans);
    let mut per_word: Vec<WordRecord> = words
        .iter()
        .zip(&original)
        .map(|(w, &b)| WordRecord {
            word: w.to_string(),
            original_bias: b,
            metrics: Default::default(),
        })
        .collect();

    let mut tsne_config = config.tsne;
    if let Some(t) = tsne_config.as_mut() {
        t.perplexity = fitted_perplexity(t.perplexity, words.len());
        result.setting("tsne", *t);
    }
    for (phase, emb) in [("before", biased), ("after", debiased)] {
        let points = emb.rows_for(&words)?;
        let clusters = kmeans2(&points, config.seed, config.kmeans)?;
        let accuracy = cluster_alignment_accuracy(&clusters.labels, &gold)?;
        result
            .scalar(format!("accuracy_{phase}"), accuracy)
            .scalar(format!("inertia_{phase}"), clusters.inertia);
        for (rec, &label) in per_word.iter_mut().zip(&clusters.labels) {
            rec.metrics
                .insert(format!("cluster_{phase}"), f64::from(label));
        }
        if let Some(t) = tsne_config {
            let layout = tsne2d(&points, t)?;
            for (rec, c) in per_word.iter_mut().zip(&layout.coords) {
                rec.metrics.insert(format!("tsne_{phase}_x"), c[0]);
                rec.metrics.insert(format!("tsne_{phase}_y"), c[1]);
            }
            if let Some(&kl) = layout.kl_history.last() {
                result.scalar(format!("tsne_kl_{phase}"), kl);
            }
        }
    }
    result.per_word = per_word;
    Ok(result)
}

pub struct ClusterExperiment;

impl Experiment for ClusterExperiment {
    fn name(&self) -> &'static str {
        "cluster"
    }

    fn description(&self) -> &'static str {
        "k-means alignment with gender of the most biased words"
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<ExperimentResult> {
        let config = ClusterConfig {
            n_per_side: ctx.config.n_per_side,
            seed: ctx.config.seed,
            kmeans: ctx.config.kmeans,
            tsne: ctx.config.tsne,
        };
        cluster_experiment(ctx.biased, ctx.debiased, ctx.direction, &config)
    }
}
