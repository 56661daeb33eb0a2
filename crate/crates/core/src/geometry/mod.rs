//! Gender directions, bias-by-projection and hard-debias.

mod debias;

pub use debias::{equalize, hard_debias, neutralize};

use serde::{Deserialize, Serialize};

use crate::embedding::{dot, l2_norm, EmbeddingSet};
use crate::error::{Error, Result};
use crate::numerics::top_principal_component;
use crate::wordlists::WordList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DirectionMethod {
    /// Normalized `he − she`.
    #[value(name = "pair")]
    PairDifference,
    /// Top principal component of centered definitional-pair halves.
    #[value(name = "pca")]
    PcaPairs,
}

/// A unit vector oriented so that male words project positively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderDirection {
    pub direction: Vec<f64>,
    pub method: DirectionMethod,
    /// `(female, male)` pairs that contributed.
    pub source_pairs: Vec<(String, String)>,
}

impl GenderDirection {
    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn negated(&self) -> Self {
        Self {
            direction: self.direction.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn project(&self, v: &[f64]) -> f64 {
        dot(v, &self.direction)
    }

    fn check_against(&self, emb: &EmbeddingSet) -> Result<()> {
        if !emb.is_normalized() {
            return Err(Error::invalid("embedding set must be normalized"));
        }
        if emb.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "gender direction has dimension {} but embeddings have {}",
                self.dim(),
                emb.dim()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasScore {
    pub word: String,
    /// Positive leans male.
    pub projection: f64,
}

fn unit(mut v: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    let norm = l2_norm(&v);
    if norm == 0.0 {
        return Err(Error::degenerate(format!("{what}: zero direction")));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// The normalized `he − she` difference.
pub fn gender_direction_pair(emb: &EmbeddingSet) -> Result<GenderDirection> {
    if !emb.is_normalized() {
        return Err(Error::invalid("embedding set must be normalized"));
    }
    let he = emb.vector("he")?;
    let she = emb.vector("she")?;
    let diff: Vec<f64> = he.iter().zip(she).map(|(a, b)| a - b).collect();
    Ok(GenderDirection {
        direction: unit(diff, "he - she")?,
        method: DirectionMethod::PairDifference,
        source_pairs: vec![("she".into(), "he".into())],
    })
}

/// Top principal component of the pair halves `f − μ`, `m − μ` (μ the pair
/// midpoint). Pairs with a word missing from `emb` are skipped.
pub fn gender_direction_pca(emb: &EmbeddingSet, pairs: &WordList) -> Result<GenderDirection> {
    if !emb.is_normalized() {
        return Err(Error::invalid("embedding set must be normalized"));
    }
    let mut rows = Vec::new();
    let mut used = Vec::new();
    let mut skipped = 0usize;
    for (f, m) in pairs.pairs_iter() {
        let (Ok(fv), Ok(mv)) = (emb.vector(f), emb.vector(m)) else {
            skipped += 1;
            continue;
        };
        let center: Vec<f64> = fv.iter().zip(mv).map(|(a, b)| (a + b) / 2.0).collect();
        rows.push(
            fv.iter()
                .zip(&center)
                .map(|(a, c)| a - c)
                .collect::<Vec<_>>(),
        );
        rows.push(
            mv.iter()
                .zip(&center)
                .map(|(a, c)| a - c)
                .collect::<Vec<_>>(),
        );
        used.push((f.to_string(), m.to_string()));
    }
    if skipped > 0 {
        log::warn!("gender direction: skipped {skipped} pairs with out-of-vocabulary words");
    }
    if used.len() < 2 {
        return Err(Error::invalid(format!(
            "gender direction needs at least 2 usable pairs, found {}",
            used.len()
        )));
    }
    let mut direction = top_principal_component(&rows)?;

    // Orient male-positive: by he − she when available, else by the summed
    // pair differences.
    let orientation = match (emb.vector("he"), emb.vector("she")) {
        (Ok(he), Ok(she)) => dot(&direction, he) - dot(&direction, she),
        _ => used
            .iter()
            .map(|(f, m)| {
                dot(&direction, emb.vector(m).unwrap()) - dot(&direction, emb.vector(f).unwrap())
            })
            .sum(),
    };
    if orientation < 0.0 {
        direction.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(GenderDirection {
        direction,
        method: DirectionMethod::PcaPairs,
        source_pairs: used,
    })
}

pub fn gender_direction(
    emb: &EmbeddingSet,
    method: DirectionMethod,
    pairs: &WordList,
) -> Result<GenderDirection> {
    match method {
        DirectionMethod::PairDifference => gender_direction_pair(emb),
        DirectionMethod::PcaPairs => gender_direction_pca(emb, pairs),
    }
}

pub fn bias_by_projection(
    emb: &EmbeddingSet,
    g: &GenderDirection,
    word: &str,
) -> Result<BiasScore> {
    g.check_against(emb)?;
    Ok(BiasScore {
        word: word.to_string(),
        projection: g.project(emb.vector(word)?),
    })
}

/// Projection of every row onto `g`, in vocabulary order.
pub fn projections(emb: &EmbeddingSet, g: &GenderDirection) -> Result<Vec<f64>> {
    g.check_against(emb)?;
    Ok(emb.rows().map(|r| g.project(r)).collect())
}

/// The `n_per_side` most male-leaning and most female-leaning words, each
/// sorted by decreasing |projection| with ties broken by vocabulary index.
pub fn most_biased_words(
    emb: &EmbeddingSet,
    g: &GenderDirection,
    n_per_side: usize,
) -> Result<(WordList, WordList)> {
    if n_per_side == 0 || emb.len() < 2 * n_per_side {
        return Err(Error::invalid(format!(
            "need a vocabulary of at least {} words, have {}",
            2 * n_per_side,
            emb.len()
        )));
    }
    let proj = projections(emb, g)?;
    let mut order: Vec<usize> = (0..emb.len()).collect();
    order.sort_by(|&a, &b| proj[b].total_cmp(&proj[a]).then(a.cmp(&b)));
    let male = order[..n_per_side].iter().map(|&i| emb.word(i));
    let mut female_idx: Vec<usize> = order[order.len() - n_per_side..].to_vec();
    female_idx.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]).then(a.cmp(&b)));
    let female = female_idx.iter().map(|&i| emb.word(i));
    Ok((
        WordList::flat("male_biased", male)?,
        WordList::flat("female_biased", female)?,
    ))
}
