//! RBF-SVM recovery of original gender labels from (debiased) vectors.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::{most_biased_words, GenderDirection};
use crate::numerics::{svm_predict, svm_rbf_train, SvmConfig};

use super::{AuditContext, Experiment, ExperimentResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub n_top: usize,
    pub n_train: usize,
    pub seed: u64,
    pub svm: SvmConfig,
}

/// `(train, test)` row positions: a seeded sample of `per_side` from each
/// half of `0..2·side`, males (first half) before females, each in sampled
/// order; the test set is the rest in ascending order.
fn stratified_split(side: usize, per_side: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train: Vec<usize> = sample(&mut rng, side, per_side).into_vec();
    train.extend(
        sample(&mut rng, side, per_side)
            .into_iter()
            .map(|i| i + side),
    );
    let mut chosen = vec![false; 2 * side];
    train.iter().for_each(|&i| chosen[i] = true);
    let test = (0..2 * side).filter(|&i| !chosen[i]).collect();
    (train, test)
}

pub fn classifier_experiment(
    biased: &EmbeddingSet,
    debiased: &EmbeddingSet,
    g: &GenderDirection,
    config: &ClassifierConfig,
) -> Result<ExperimentResult> {
    let ClassifierConfig { n_top, n_train, .. } = *config;
    if n_top % 2 != 0 || n_train % 2 != 0 || n_train == 0 || n_train >= n_top {
        return Err(Error::invalid(format!(
            "classifier needs even counts with 0 < n_train < n_top, got {n_train} and {n_top}"
        )));
    }
    let (male, female) = most_biased_words(biased, g, n_top / 2)?;
    let words: Vec<&String> = male.words().iter().chain(female.words()).collect();
    let labels: Vec<i32> = (0..words.len())
        .map(|i| if i < n_top / 2 { 1 } else { -1 })
        .collect();
    let (train, test) = stratified_split(n_top / 2, n_train / 2, config.seed);

    let mut result = ExperimentResult::new("classify");
    result
        .setting("n_top", n_top)
        .setting("n_train", n_train)
        .setting("seed", config.seed)
        .setting("svm", config.svm);
    for (phase, emb) in [("before", biased), ("after", debiased)] {
        let points = emb.rows_for(&words)?;
        let train_x: Vec<Vec<f64>> = train.iter().map(|&i| points[i].clone()).collect();
        let train_y: Vec<i32> = train.iter().map(|&i| labels[i]).collect();
        let model = svm_rbf_train(&train_x, &train_y, config.svm)?;
        let mut correct = 0usize;
        for &i in &test {
            correct += usize::from(svm_predict(&model, &points[i])? == labels[i]);
        }
        result
            .scalar(
                format!("accuracy_{phase}"),
                correct as f64 / test.len() as f64,
            )
            .scalar(
                format!("support_vectors_{phase}"),
                model.support_vectors.len() as f64,
            );
        result.setting(&format!("gamma_{phase}"), model.gamma);
    }
    result.scalar("n_test", test.len() as f64);
    Ok(result)
}

pub struct ClassifierExperiment;

impl Experiment for ClassifierExperiment {
    fn name(&self) -> &'static str {
        "classify"
    }

    fn description(&self) -> &'static str {
        "RBF-SVM accuracy at predicting original gender from word vectors"
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<ExperimentResult> {
        let config = ClassifierConfig {
            n_top: ctx.config.n_top,
            n_train: ctx.config.n_train,
            seed: ctx.config.seed,
            svm: ctx.config.svm,
        };
        classifier_experiment(ctx.biased, ctx.debiased, ctx.direction, &config)
    }
}
