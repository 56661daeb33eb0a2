//! Embedding storage, file formats, vocabulary filtering and neighbor search.

mod format;
pub(crate) mod neighbors;
mod vocab;

use std::collections::HashMap;

pub use format::{
    load_embeddings, load_embeddings_with, read_embeddings, write_embeddings, write_embeddings_to,
    EmbeddingFormat, LoadOptions, LoadStats, TextPrecision,
};
pub use neighbors::{nearest_neighbors, NeighborList};
pub use vocab::{is_plain_token, reduce_vocabulary, MAX_TOKEN_CHARS};

use crate::error::{Error, Result};

const UNIT_NORM_TOL: f64 = 1e-9;

/// An ordered vocabulary with one dense row per word.
///
/// Rows are stored contiguously. Word order is file order, which is taken to
/// be frequency order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
    normalized: bool,
}

impl EmbeddingSet {
    /// Builds a set from parallel word and row lists.
    ///
    /// Duplicate words, ragged rows, non-finite values and zero rows are
    /// rejected; the loaders handle duplicates before reaching this point.
    pub fn new(words: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if words.len() != rows.len() {
            return Err(Error::invalid(format!(
                "{} words but {} rows",
                words.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (word, row) in words.iter().zip(&rows) {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    word: word.clone(),
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(words, dim, data)
    }

    pub(crate) fn from_flat(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if !words.is_empty() && dim < 2 {
            return Err(Error::invalid(format!("dimensionality {dim} is below 2")));
        }
        debug_assert_eq!(data.len(), words.len() * dim);
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate word {w}")));
            }
        }
        for (i, w) in words.iter().enumerate() {
            let row = &data[i * dim..(i + 1) * dim];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(w.clone()));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroVector(w.clone()));
            }
        }
        Ok(Self {
            words,
            index,
            dim,
            data,
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Result<&[f64]> {
        self.index_of(word)
            .map(|i| self.row(i))
            .ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Copies the rows of `words` in the given order, erroring with the full
    /// list of absent words.
    pub fn rows_for<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<Vec<f64>>> {
        let missing: Vec<String> = words
            .iter()
            .filter(|w| !self.contains(w.as_ref()))
            .map(|w| w.as_ref().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingWords(missing));
        }
        Ok(words
            .iter()
            .map(|w| self.vector(w.as_ref()).unwrap().to_vec())
            .collect())
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn set_normalized(&mut self, normalized: bool) {
        self.normalized = normalized;
    }

    /// Keeps rows whose index satisfies `keep`, preserving order.
    pub(crate) fn retain_indices(&self, mut keep: impl FnMut(usize, &str) -> bool) -> Self {
        let mut words = Vec::new();
        let mut data = Vec::new();
        for (i, w) in self.words.iter().enumerate() {
            if keep(i, w) {
                words.push(w.clone());
                data.extend_from_slice(self.row(i));
            }
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self {
            words,
            index,
            dim: self.dim,
            data,
            normalized: self.normalized,
        }
    }

    /// Scales every row to unit L2 norm.
    pub fn normalize(&self) -> Result<Self> {
        let mut out = self.clone();
        for i in 0..out.len() {
            let norm = l2_norm(out.row(i));
            if norm == 0.0 {
                return Err(Error::ZeroVector(out.words[i].clone()));
            }
            out.row_mut(i).iter_mut().for_each(|v| *v /= norm);
        }
        out.normalized = true;
        Ok(out)
    }

    /// Drops the final coordinate of every row, as used for embeddings that
    /// reserve their last dimension for gender information. The result is not
    /// normalized.
    pub fn drop_last_coordinate(&self) -> Result<Self> {
        if self.dim < 3 {
            return Err(Error::invalid(format!(
                "cannot drop a coordinate from {}-dimensional vectors",
                self.dim
            )));
        }
        let dim = self.dim - 1;
        let data: Vec<f64> = self
            .rows()
            .flat_map(|row| row[..dim].iter().copied())
            .collect();
        Self::from_flat(self.words.clone(), dim, data)
    }

    /// Checks the unit-norm invariant when the set claims to be normalized.
    pub fn check_normalized(&self) -> Result<()> {
        if !self.normalized {
            return Err(Error::invalid("embedding set is not normalized"));
        }
        for (i, row) in self.rows().enumerate() {
            if (l2_norm(row) - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::invalid(format!(
                    "row for {} is not unit length",
                    self.words[i]
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (l2_norm(a) * l2_norm(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(rows: &[&[f64]]) -> EmbeddingSet {
        let words = (0..rows.len()).map(|i| format!("w{i}")).collect();
        EmbeddingSet::new(words, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn normalize_three_four_five() {
        let e = set(&[&[3.0, 4.0]]).normalize().unwrap();
        assert_eq!(e.row(0), &[0.6, 0.8]);
        assert!(e.is_normalized());
    }

    #[test]
    fn normalize_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..10).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let words = (0..20).map(|i| format!("w{i}")).collect();
        let once = EmbeddingSet::new(words, rows).unwrap().normalize().unwrap();
        for row in once.rows() {
            assert!((l2_norm(row) - 1.0).abs() <= 1e-9);
        }
        once.check_normalized().unwrap();
        let twice = once.normalize().unwrap();
        for (a, b) in once.rows().zip(twice.rows()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_rows_are_rejected() {
        let err = EmbeddingSet::new(vec!["z".into()], vec![vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::ZeroVector(w) if w == "z"));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = EmbeddingSet::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap_err();
        assert_eq!(
            err.to_string(),
            "dimension mismatch at word b: expected 3, found 2"
        );
    }

    #[test]
    fn drop_last_coordinate_slices() {
        let e = set(&[&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]]);
        let d = e.drop_last_coordinate().unwrap();
        assert_eq!(d.dim(), 3);
        assert_eq!(d.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(d.row(1), &[5.0, 6.0, 7.0]);
        assert!(!d.is_normalized());

        let five = set(&[&[1.0, 2.0, 3.0, 4.0, 5.0]]);
        let twice = five
            .drop_last_coordinate()
            .unwrap()
            .drop_last_coordinate()
            .unwrap();
        assert_eq!(twice.dim(), 3);
        assert!(set(&[&[1.0, 2.0]]).drop_last_coordinate().is_err());
    }

    #[test]
    fn rows_for_lists_missing_words() {
        let e = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        match e.rows_for(&["w0", "x", "y"]).unwrap_err() {
            Error::MissingWords(m) => assert_eq!(m, vec!["x", "y"]),
            other => panic!("{other}"),
        }
    }
}
