use std::collections::HashSet;

use rayon::prelude::*;

use super::GenderDirection;
use crate::embedding::{dot, l2_norm, EmbeddingSet};
use crate::error::{Error, Result};
use crate::wordlists::WordList;

/// Residual norms at or below this count as "parallel to g".
const PARALLEL_EPS: f64 = 1e-12;

fn neutralize_indices(
    emb: &EmbeddingSet,
    g: &GenderDirection,
    targets: &[bool],
) -> Result<EmbeddingSet> {
    g.check_against(emb)?;
    let dir = &g.direction;
    let updated: Vec<Option<Vec<f64>>> = (0..emb.len())
        .into_par_iter()
        .map(|i| {
            if !targets[i] {
                return None;
            }
            let row = emb.row(i);
            let proj = dot(row, dir);
            Some(row.iter().zip(dir).map(|(w, d)| w - proj * d).collect())
        })
        .collect();
    let mut out = emb.clone();
    for (i, new) in updated.into_iter().enumerate() {
        let Some(mut v) = new else { continue };
        let norm = l2_norm(&v);
        if norm <= PARALLEL_EPS {
            return Err(Error::degenerate(format!(
                "{} is parallel to the gender direction",
                emb.word(i)
            )));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.row_mut(i).copy_from_slice(&v);
    }
    out.set_normalized(true);
    Ok(out)
}

/// Removes the component along `g` from every word in `neutral_words` and
/// re-normalizes; other words are untouched.
pub fn neutralize(
    emb: &EmbeddingSet,
    g: &GenderDirection,
    neutral_words: &WordList,
) -> Result<EmbeddingSet> {
    let mut targets = vec![false; emb.len()];
    let mut missing = Vec::new();
    for w in neutral_words.words() {
        match emb.index_of(w) {
            Some(i) => targets[i] = true,
            None => missing.push(w.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingWords(missing));
    }
    neutralize_indices(emb, g, &targets)
}

/// For each pair, moves both members to `ν ± sqrt(1 − |ν|²) g`, where `ν` is
/// the pair midpoint with its `g` component removed. Each member keeps the
/// sign of its own offset from the midpoint along `g` (the first member gets
/// `+` on an exact tie).
pub fn equalize(
    emb: &EmbeddingSet,
    g: &GenderDirection,
    equality_pairs: &WordList,
) -> Result<EmbeddingSet> {
    g.check_against(emb)?;
    let dir = &g.direction;
    let mut out = emb.clone();
    for (a, b) in equality_pairs.pairs_iter() {
        let ia = out
            .index_of(a)
            .ok_or_else(|| Error::UnknownWord(a.to_string()))?;
        let ib = out
            .index_of(b)
            .ok_or_else(|| Error::UnknownWord(b.to_string()))?;
        let (va, vb) = (out.row(ia).to_vec(), out.row(ib).to_vec());
        if va == vb {
            return Err(Error::degenerate(format!(
                "equalize: {a} and {b} are identical"
            )));
        }
        let mid: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| (x + y) / 2.0).collect();
        let mid_proj = dot(&mid, dir);
        let nu: Vec<f64> = mid.iter().zip(dir).map(|(m, d)| m - mid_proj * d).collect();
        let nu_sq = dot(&nu, &nu);
        if nu_sq >= 1.0 {
            return Err(Error::degenerate(format!(
                "equalize: off-direction midpoint of {a}/{b} has norm >= 1"
            )));
        }
        let z = (1.0 - nu_sq).sqrt();
        let offset_a = dot(&va, dir) - mid_proj;
        let sign_a = if offset_a >= 0.0 { 1.0 } else { -1.0 };
        for (idx, sign) in [(ia, sign_a), (ib, -sign_a)] {
            let row = out.row_mut(idx);
            for ((r, n), d) in row.iter_mut().zip(&nu).zip(dir) {
                *r = n + sign * z * d;
            }
        }
    }
    Ok(out)
}

/// Neutralizes every word outside `gendered_words`, then equalizes the pairs
/// in `equality_pairs` whose members are both in the vocabulary.
pub fn hard_debias(
    emb: &EmbeddingSet,
    g: &GenderDirection,
    gendered_words: &WordList,
    equality_pairs: &WordList,
) -> Result<EmbeddingSet> {
    let gendered: HashSet<&str> = gendered_words.token_set();
    let targets: Vec<bool> = emb
        .words()
        .iter()
        .map(|w| !gendered.contains(w.as_str()))
        .collect();
    let neutralized = neutralize_indices(emb, g, &targets)?;

    let present: Vec<(&str, &str)> = equality_pairs
        .pairs_iter()
        .filter(|(a, b)| emb.contains(a) && emb.contains(b))
        .collect();
    let skipped = equality_pairs.len() - present.len();
    if skipped > 0 {
        log::info!("hard-debias: {skipped} equality pairs not in vocabulary");
    }
    let pairs = WordList::pairs(equality_pairs.name(), present)?;
    equalize(&neutralized, g, &pairs)
}
