//! Planted-bias embeddings for tests and desk-scale runs.
//!
//! Axis 0 carries gender: every word gets a signed bias `b` and a component
//! `gender_strength · b` there. Axis 1 carries a community signal
//! `community_strength · sign(b)` (pair words excepted) that debiasing
//! leaves in place, so previously biased words stay clustered by gender
//! after hard-debias. The remaining axes are Gaussian noise. The vocabulary contains every builtin
//! word list (definitional and equality pairs, gender-specific words,
//! professions, WEAT targets and attributes) followed by neutral filler.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::{gender_direction_pca, hard_debias};
use crate::wordlists::{
    builtin_definitional_pairs, builtin_equalize_pairs, builtin_gender_specific,
    builtin_professions, builtin_weat_specs, WordList,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Filler words appended after the word-list vocabulary.
    pub n_filler: usize,
    pub dim: usize,
    pub seed: u64,
    pub gender_strength: f64,
    pub community_strength: f64,
    /// Per-coordinate standard deviation on axes 2 and up.
    pub noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_filler: 1_000,
            dim: 50,
            seed: 42,
            gender_strength: 0.6,
            community_strength: 0.6,
            noise: 0.1,
        }
    }
}

/// Letters-only filler token `zq` + base-26 digits, so it survives
/// vocabulary reduction and never collides with list words.
pub fn filler_word(i: usize) -> String {
    let mut s = Vec::new();
    let mut n = i;
    loop {
        s.push(b'a' + (n % 26) as u8);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    s.extend_from_slice(b"qz");
    s.reverse();
    String::from_utf8(s).unwrap()
}

struct Builder {
    config: SyntheticConfig,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    seen: HashSet<String>,
    words: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Builder {
    fn base(&mut self) -> Vec<f64> {
        let mut v = vec![0.0; self.config.dim];
        for x in &mut v[2..] {
            *x = self.noise.sample(&mut self.rng);
        }
        v
    }

    fn push(&mut self, word: &str, mut v: Vec<f64>, bias: f64, community: bool) {
        if !self.seen.insert(word.to_string()) {
            return;
        }
        v[0] += self.config.gender_strength * bias;
        if community {
            v[1] += self.config.community_strength * bias.signum();
        }
        self.words.push(word.to_string());
        self.rows.push(v);
    }

    fn word(&mut self, word: &str, bias: f64) {
        let v = self.base();
        self.push(word, v, bias, true);
    }

    /// Female and male members share everything but the sign of the bias,
    /// so pair differences lie on axis 0 alone.
    fn pair(&mut self, female: &str, male: &str, bias: f64) {
        let v = self.base();
        self.push(female, v.clone(), -bias, false);
        self.push(male, v, bias, false);
    }
}

/// The biased (unnormalized) planted set.
pub fn planted_bias_set(config: &SyntheticConfig) -> Result<EmbeddingSet> {
    if config.dim < 3 {
        return Err(Error::invalid(
            "synthetic embeddings need at least 3 dimensions",
        ));
    }
    let mut b = Builder {
        config: *config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        noise: Normal::new(0.0, config.noise).map_err(|e| Error::invalid(e.to_string()))?,
        seen: HashSet::new(),
        words: Vec::new(),
        rows: Vec::new(),
    };
    for (f, m) in builtin_definitional_pairs().pairs_iter() {
        b.pair(f, m, 1.0);
    }
    for (f, m) in builtin_equalize_pairs().pairs_iter() {
        b.pair(f, m, 0.8);
    }
    for (i, w) in builtin_gender_specific().words().iter().enumerate() {
        b.word(w, if i % 2 == 0 { 0.9 } else { -0.9 });
    }
    for w in builtin_professions().words() {
        let bias = b.rng.random_range(-0.6..0.6);
        b.word(w, bias);
    }
    for spec in builtin_weat_specs() {
        for (list, bias) in [
            (&spec.target_x, 0.5),
            (&spec.target_y, -0.5),
            (&spec.attribute_a, 1.0),
            (&spec.attribute_b, -1.0),
        ] {
            for w in list.words() {
                b.word(w, bias);
            }
        }
    }
    for i in 0..config.n_filler {
        let bias = b.rng.random_range(-1.0..1.0);
        b.word(&filler_word(i), bias);
    }
    EmbeddingSet::new(b.words, b.rows)
}

/// Words hard-debias must leave unneutralized, and the vocabulary-reduction
/// exclusion list.
pub fn gendered_words() -> WordList {
    WordList::union(
        "gendered",
        &[
            &builtin_gender_specific(),
            &builtin_definitional_pairs(),
            &builtin_equalize_pairs(),
        ],
    )
    .expect("builtin lists are valid")
}

/// `(biased, debiased)`, both normalized, the second produced by hard-debias
/// along the PCA direction of the builtin definitional pairs.
pub fn planted_bias_pair(config: &SyntheticConfig) -> Result<(EmbeddingSet, EmbeddingSet)> {
    let biased = planted_bias_set(config)?.normalize()?;
    let g = gender_direction_pca(&biased, &builtin_definitional_pairs())?;
    let debiased = hard_debias(&biased, &g, &gendered_words(), &builtin_equalize_pairs())?;
    Ok((biased, debiased))
}
