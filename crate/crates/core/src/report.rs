//! The audit pipeline and its JSON report.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    AuditConfig, AuditContext, Experiment, ExperimentResult, Registry, WeatSpec,
};
use crate::embedding::{load_embeddings, reduce_vocabulary, EmbeddingFormat, EmbeddingSet};
use crate::error::{Error, Result};
use crate::geometry::{gender_direction, DirectionMethod, GenderDirection};
use crate::synthetic::gendered_words;
use crate::wordlists::{
    builtin_definitional_pairs, builtin_professions, builtin_weat_specs, WordList,
};

pub const DEFAULT_MAX_RANK: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub path: String,
    pub format: EmbeddingFormat,
    pub dim: usize,
    pub vocabulary_loaded: usize,
    /// After reduction and restriction to the shared vocabulary.
    pub vocabulary_audited: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub biased: InputSummary,
    pub debiased: InputSummary,
    pub direction: DirectionMethod,
    pub direction_pairs: usize,
    pub max_rank: usize,
    pub strip_last_coordinate: bool,
    pub experiments: Vec<String>,
    pub config: AuditConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentFailure {
    pub experiment: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub metadata: ReportMetadata,
    pub results: Vec<ExperimentResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ExperimentFailure>,
}

impl AuditReport {
    pub fn result(&self, name: &str) -> Option<&ExperimentResult> {
        self.results.iter().find(|r| r.name == name)
    }

    /// True when every requested experiment produced a block.
    pub fn is_complete(&self) -> bool {
        self.errors.is_empty()
            && self
                .metadata
                .experiments
                .iter()
                .all(|n| self.result(n).is_some())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Everything the pipeline needs besides the two embedding files.
#[derive(Debug, Clone)]
pub struct AuditSettings {
    pub direction: DirectionMethod,
    pub definitional_pairs: WordList,
    /// Removed from the audited vocabulary.
    pub exclusions: WordList,
    pub professions: WordList,
    pub weat_specs: Vec<WeatSpec>,
    pub max_rank: usize,
    /// Drop the debiased set's last coordinate before anything else.
    pub strip_last_coordinate: bool,
    pub config: AuditConfig,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self {
            direction: DirectionMethod::PairDifference,
            definitional_pairs: builtin_definitional_pairs(),
            exclusions: gendered_words(),
            professions: builtin_professions(),
            weat_specs: builtin_weat_specs(),
            max_rank: DEFAULT_MAX_RANK,
            strip_last_coordinate: false,
            config: AuditConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingInput {
    pub path: PathBuf,
    pub format: EmbeddingFormat,
}

/// Normalized full and audited sets plus the gender direction.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    pub biased_full: EmbeddingSet,
    pub debiased_full: EmbeddingSet,
    pub biased: EmbeddingSet,
    pub debiased: EmbeddingSet,
    pub direction: GenderDirection,
}

/// Normalizes both sets, takes the gender direction from the full biased
/// set, and reduces both to their shared plain-token vocabulary.
pub fn prepare_pair(
    biased: &EmbeddingSet,
    debiased: &EmbeddingSet,
    settings: &AuditSettings,
) -> Result<PreparedPair> {
    if settings.max_rank == 0 {
        return Err(Error::invalid("max rank must be at least 1"));
    }
    let debiased = if settings.strip_last_coordinate {
        debiased.drop_last_coordinate()?
    } else {
        debiased.clone()
    };
    let biased_full = biased.normalize()?;
    let debiased_full = debiased.normalize()?;
    let direction = gender_direction(
        &biased_full,
        settings.direction,
        &settings.definitional_pairs,
    )?;

    let b = reduce_vocabulary(&biased_full, settings.max_rank, &settings.exclusions);
    let d = reduce_vocabulary(&debiased_full, settings.max_rank, &settings.exclusions);
    let biased = b.retain_indices(|_, w| d.contains(w));
    let debiased = d.retain_indices(|_, w| biased.contains(w));
    if biased.is_empty() {
        return Err(Error::invalid(
            "the two embedding sets share no audited words",
        ));
    }
    log::info!(
        "audited vocabulary: {} words ({} biased, {} debiased after reduction)",
        biased.len(),
        b.len(),
        d.len()
    );
    Ok(PreparedPair {
        biased_full,
        debiased_full,
        biased,
        debiased,
        direction,
    })
}

/// Runs `experiments` in order. Failures are collected, not raised.
pub fn run_experiments(
    prepared: &PreparedPair,
    settings: &AuditSettings,
    experiments: &[&dyn Experiment],
) -> (Vec<ExperimentResult>, Vec<ExperimentFailure>) {
    let ctx = AuditContext {
        biased: &prepared.biased,
        debiased: &prepared.debiased,
        biased_full: &prepared.biased_full,
        debiased_full: &prepared.debiased_full,
        direction: &prepared.direction,
        professions: &settings.professions,
        weat_specs: &settings.weat_specs,
        config: &settings.config,
    };
    let mut results = Vec::new();
    let mut errors = Vec::new();
    for e in experiments {
        log::info!("running {}", e.name());
        match e.run(&ctx).and_then(|r| r.validate().map(|_| r)) {
            Ok(r) => results.push(r),
            Err(err) => {
                log::error!("{} failed: {err}", e.name());
                errors.push(ExperimentFailure {
                    experiment: e.name().to_string(),
                    message: err.to_string(),
                });
            }
        }
    }
    (results, errors)
}

/// Loads both files and runs the named experiments (all registered ones when
/// `names` is empty). Load and preparation errors are returned; experiment
/// errors land in the report.
pub fn run_audit(
    biased: &EmbeddingInput,
    debiased: &EmbeddingInput,
    settings: &AuditSettings,
    registry: &Registry,
    names: &[String],
) -> Result<AuditReport> {
    let experiments: Vec<&dyn Experiment> = if names.is_empty() {
        registry.iter().collect()
    } else {
        registry.resolve(names)?
    };
    let b = load_embeddings(&biased.path, biased.format)?;
    let d = load_embeddings(&debiased.path, debiased.format)?;
    let prepared = prepare_pair(&b, &d, settings)?;
    let (results, errors) = run_experiments(&prepared, settings, &experiments);
    let summary =
        |input: &EmbeddingInput, loaded: &EmbeddingSet, audited: &EmbeddingSet| InputSummary {
            path: input.path.display().to_string(),
            format: input.format,
            dim: audited.dim(),
            vocabulary_loaded: loaded.len(),
            vocabulary_audited: audited.len(),
        };
    Ok(AuditReport {
        metadata: ReportMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            biased: summary(biased, &b, &prepared.biased),
            debiased: summary(debiased, &d, &prepared.debiased),
            direction: settings.direction,
            direction_pairs: prepared.direction.source_pairs.len(),
            max_rank: settings.max_rank,
            strip_last_coordinate: settings.strip_last_coordinate,
            experiments: experiments.iter().map(|e| e.name().to_string()).collect(),
            config: settings.config.clone(),
        },
        results,
        errors,
    })
}
