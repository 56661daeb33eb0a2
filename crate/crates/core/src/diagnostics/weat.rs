//! Word Embedding Association Test with a balanced permutation p-value.

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, EmbeddingSet};
use crate::error::{Error, Result};
use crate::numerics::{balanced_partition_test, PermutationMode};
use crate::wordlists::WordList;

use super::{AuditContext, Experiment, ExperimentResult};

/// Two equally sized target sets and two attribute sets.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatSpec {
    pub label: String,
    pub target_x: WordList,
    pub target_y: WordList,
    pub attribute_a: WordList,
    pub attribute_b: WordList,
}

impl WeatSpec {
    /// Lists must be non-empty, `|X| == |Y|`, and pairwise disjoint. The one
    /// exception is `A == B` (identical lists), kept as a null control.
    pub fn new(
        label: &str,
        target_x: WordList,
        target_y: WordList,
        attribute_a: WordList,
        attribute_b: WordList,
    ) -> Result<Self> {
        let lists = [&target_x, &target_y, &attribute_a, &attribute_b];
        if let Some(l) = lists.iter().find(|l| l.is_empty()) {
            return Err(Error::invalid(format!(
                "WEAT {label}: list {} is empty",
                l.name()
            )));
        }
        if target_x.len() != target_y.len() {
            return Err(Error::invalid(format!(
                "WEAT {label}: target sets differ in size ({} vs {})",
                target_x.len(),
                target_y.len()
            )));
        }
        let same_attributes = attribute_a.words() == attribute_b.words();
        for i in 0..lists.len() {
            for j in i + 1..lists.len() {
                if (i, j) == (2, 3) && same_attributes {
                    continue;
                }
                let other = lists[j].token_set();
                if let Some(w) = lists[i].words().iter().find(|w| other.contains(w.as_str())) {
                    return Err(Error::invalid(format!(
                        "WEAT {label}: {w} appears in both {} and {}",
                        lists[i].name(),
                        lists[j].name()
                    )));
                }
            }
        }
        Ok(Self {
            label: label.to_string(),
            target_x,
            target_y,
            attribute_a,
            attribute_b,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatOutcome {
    /// `Σ_X s(x,A,B) − Σ_Y s(y,A,B)`.
    pub statistic: f64,
    /// One-sided, counting repartitions with statistic `>=` the observed one.
    pub p_value: f64,
    /// `(mean_X s − mean_Y s) / sd_{X∪Y} s`, sample standard deviation; 0
    /// when every score is equal.
    pub effect_size: f64,
    pub partitions: u64,
    pub exact: bool,
}

fn vectors<'a>(emb: &'a EmbeddingSet, spec: &WeatSpec) -> Result<[Vec<&'a [f64]>; 4]> {
    let lists = [
        &spec.target_x,
        &spec.target_y,
        &spec.attribute_a,
        &spec.attribute_b,
    ];
    let missing: Vec<String> = lists
        .iter()
        .flat_map(|l| l.words())
        .filter(|w| !emb.contains(w))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingWords(missing));
    }
    Ok(lists.map(|l| l.words().iter().map(|w| emb.vector(w).unwrap()).collect()))
}

fn mean_cosine(w: &[f64], set: &[&[f64]]) -> f64 {
    set.iter().map(|v| cosine(w, v)).sum::<f64>() / set.len() as f64
}

pub fn weat(emb: &EmbeddingSet, spec: &WeatSpec, mode: PermutationMode) -> Result<WeatOutcome> {
    let [x, y, a, b] = vectors(emb, spec)?;
    let scores: Vec<f64> = x
        .iter()
        .chain(&y)
        .map(|w| mean_cosine(w, &a) - mean_cosine(w, &b))
        .collect();
    let test = balanced_partition_test(&scores, x.len(), mode)?;

    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let mean_x = scores[..x.len()].iter().sum::<f64>() / x.len() as f64;
    let mean_y = scores[x.len()..].iter().sum::<f64>() / y.len() as f64;
    let effect_size = if var > 0.0 {
        (mean_x - mean_y) / var.sqrt()
    } else {
        0.0
    };

    Ok(WeatOutcome {
        statistic: test.statistic,
        p_value: test.p_value,
        effect_size,
        partitions: test.partitions,
        exact: test.exact,
    })
}

/// Every configured spec on both full vocabularies.
pub struct WeatExperiment;

impl Experiment for WeatExperiment {
    fn name(&self) -> &'static str {
        "weat"
    }

    fn description(&self) -> &'static str {
        "association tests of stereotyped targets with male and female names"
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<ExperimentResult> {
        let mut result = ExperimentResult::new("weat");
        result.setting("mode", ctx.config.weat_mode);
        let labels: Vec<&str> = ctx.weat_specs.iter().map(|s| s.label.as_str()).collect();
        result.setting("specs", &labels);
        for spec in ctx.weat_specs {
            for (phase, emb) in [("before", ctx.biased_full), ("after", ctx.debiased_full)] {
                let out = weat(emb, spec, ctx.config.weat_mode)?;
                let l = &spec.label;
                result
                    .scalar(format!("statistic_{phase}_{l}"), out.statistic)
                    .scalar(format!("p_{phase}_{l}"), out.p_value)
                    .scalar(format!("effect_size_{phase}_{l}"), out.effect_size);
                result.setting(&format!("exact_{phase}_{l}"), out.exact);
            }
        }
        Ok(result)
    }
}
