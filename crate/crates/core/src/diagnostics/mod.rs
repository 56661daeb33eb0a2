//! Bias diagnostics over a (biased, debiased) embedding pair.
//!
//! Each diagnostic is an [`Experiment`] registered by name in a [`Registry`].
//! The audit pipeline builds one [`AuditContext`] and hands it to whichever
//! experiments were requested.

pub mod classifier;
pub mod cluster;
pub mod neighbors;
pub mod professions;
pub mod projection;
pub mod weat;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use classifier::{classifier_experiment, ClassifierConfig, ClassifierExperiment};
pub use cluster::{cluster_experiment, ClusterConfig, ClusterExperiment};
pub use neighbors::{
    bias_by_neighbors, neighbor_correlation_experiment, NeighborCorrelationExperiment,
};
pub use professions::{professions_experiment, ProfessionsExperiment};
pub use projection::{projection_summary, ProjectionExperiment};
pub use weat::{weat, WeatExperiment, WeatOutcome, WeatSpec};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::GenderDirection;
use crate::numerics::{KMeansConfig, PermutationMode, SvmConfig, TsneConfig};
use crate::wordlists::WordList;

/// One word's row in a per-word table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordRecord {
    pub word: String,
    /// Projection on the gender direction in the biased embedding.
    pub original_bias: f64,
    pub metrics: BTreeMap<String, f64>,
}

/// Outcome of one diagnostic. Scalar names follow a prefix convention:
/// `p_*` are probabilities and `accuracy_*` are fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub scalars: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_word: Vec<WordRecord>,
    pub config: BTreeMap<String, serde_json::Value>,
}

impl ExperimentResult {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            scalars: BTreeMap::new(),
            per_word: Vec::new(),
            config: BTreeMap::new(),
        }
    }

    pub fn scalar(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.scalars.insert(key.into(), value);
        self
    }

    pub fn setting(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).expect("config values serialize");
        self.config.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.scalars.get(key).copied()
    }

    pub fn validate(&self) -> Result<()> {
        for (key, &v) in &self.scalars {
            let bad = !v.is_finite()
                || ((key.starts_with("p_") || key.starts_with("accuracy_"))
                    && !(0.0..=1.0).contains(&v));
            if bad {
                return Err(Error::Report(format!(
                    "{}: scalar {key} = {v} out of range",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Experiment parameters. Defaults follow the published setup where it gives
/// one (500 words per side, 5,000/1,000 classifier split) and common choices
/// elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub k: usize,
    pub n_per_side: usize,
    pub n_top: usize,
    pub n_train: usize,
    pub seed: u64,
    pub svm: SvmConfig,
    pub kmeans: KMeansConfig,
    /// `None` skips the t-SNE layout in the cluster experiment.
    pub tsne: Option<TsneConfig>,
    pub weat_mode: PermutationMode,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MONTE_CARLO_SAMPLES: usize = 100_000;

impl AuditConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            k: 100,
            n_per_side: 500,
            n_top: 5_000,
            n_train: 1_000,
            seed,
            svm: SvmConfig::default(),
            kmeans: KMeansConfig::default(),
            tsne: Some(TsneConfig {
                seed,
                ..TsneConfig::default()
            }),
            weat_mode: PermutationMode::Auto {
                samples: DEFAULT_MONTE_CARLO_SAMPLES,
                seed,
            },
        }
    }
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self::with_seed(DEFAULT_SEED)
    }
}

/// Everything an experiment may read. The reduced sets are normalized and
/// restricted to the audited vocabulary; the full sets are normalized but
/// unfiltered (WEAT uses them).
pub struct AuditContext<'a> {
    pub biased: &'a EmbeddingSet,
    pub debiased: &'a EmbeddingSet,
    pub biased_full: &'a EmbeddingSet,
    pub debiased_full: &'a EmbeddingSet,
    pub direction: &'a GenderDirection,
    pub professions: &'a WordList,
    pub weat_specs: &'a [WeatSpec],
    pub config: &'a AuditConfig,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, ctx: &AuditContext<'_>) -> Result<ExperimentResult>;
}

/// Name-keyed experiment lookup; registration order is run order.
#[derive(Default)]
pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every built-in diagnostic.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(ProjectionExperiment);
        r.register(ClusterExperiment);
        r.register(NeighborCorrelationExperiment);
        r.register(ProfessionsExperiment);
        r.register(WeatExperiment);
        r.register(ClassifierExperiment);
        r
    }

    /// Adds an experiment, replacing any existing one with the same name.
    pub fn register<E: Experiment + 'static>(&mut self, experiment: E) {
        if let Some(slot) = self
            .entries
            .iter_mut()
            .find(|e| e.name() == experiment.name())
        {
            *slot = Box::new(experiment);
        } else {
            self.entries.push(Box::new(experiment));
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|e| e.as_ref())
    }

    pub fn resolve(&self, names: &[String]) -> Result<Vec<&dyn Experiment>> {
        names
            .iter()
            .map(|n| {
                self.get(n).ok_or_else(|| {
                    Error::invalid(format!(
                        "unknown experiment {n} (available: {})",
                        self.names().join(", ")
                    ))
                })
            })
            .collect()
    }
}
