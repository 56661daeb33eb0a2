use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dot, EmbeddingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborList {
    pub query: String,
    pub k: usize,
    /// `(word, cosine)` in descending similarity; ties by vocabulary index.
    pub neighbors: Vec<(String, f64)>,
}

fn by_similarity(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Exhaustive cosine scan returning `(index, similarity)` for the `k`
/// nearest rows to row `query`, excluding `query` itself.
pub(crate) fn neighbor_indices(emb: &EmbeddingSet, query: usize, k: usize) -> Vec<(usize, f64)> {
    let q = emb.row(query);
    let mut scored: Vec<(f64, usize)> = emb
        .rows()
        .enumerate()
        .filter(|&(j, _)| j != query)
        .map(|(j, row)| (dot(q, row), j))
        .collect();
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_similarity);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_similarity);
    scored.into_iter().map(|(s, j)| (j, s)).collect()
}

fn check_query(emb: &EmbeddingSet, k: usize) -> Result<()> {
    if !emb.is_normalized() {
        return Err(Error::invalid(
            "nearest-neighbor search requires normalized vectors",
        ));
    }
    if k == 0 || k >= emb.len() {
        return Err(Error::invalid(format!(
            "k must satisfy 1 <= k < {} (vocabulary size), got {k}",
            emb.len()
        )));
    }
    Ok(())
}

/// The `k` most cosine-similar words to `query`, excluding the query.
pub fn nearest_neighbors(emb: &EmbeddingSet, query: &str, k: usize) -> Result<NeighborList> {
    check_query(emb, k)?;
    let qi = emb
        .index_of(query)
        .ok_or_else(|| Error::UnknownWord(query.to_string()))?;
    let neighbors = neighbor_indices(emb, qi, k)
        .into_iter()
        .map(|(j, s)| (emb.word(j).to_string(), s))
        .collect();
    Ok(NeighborList {
        query: query.to_string(),
        k,
        neighbors,
    })
}

/// Neighbor indices for many query rows, computed in parallel and returned
/// in query order.
pub(crate) fn neighbor_indices_many(
    emb: &EmbeddingSet,
    queries: &[usize],
    k: usize,
) -> Result<Vec<Vec<(usize, f64)>>> {
    check_query(emb, k)?;
    Ok(queries
        .par_iter()
        .map(|&q| neighbor_indices(emb, q, k))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_hot() -> EmbeddingSet {
        EmbeddingSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap()
        .normalize()
        .unwrap()
    }

    #[test]
    fn orthogonal_tie_goes_to_lower_index() {
        let n = nearest_neighbors(&one_hot(), "a", 1).unwrap();
        assert_eq!(n.neighbors, vec![("b".to_string(), 0.0)]);
    }

    #[test]
    fn preconditions() {
        let e = one_hot();
        assert!(matches!(
            nearest_neighbors(&e, "zz", 1),
            Err(Error::UnknownWord(_))
        ));
        assert!(nearest_neighbors(&e, "a", 0).is_err());
        assert!(nearest_neighbors(&e, "a", 3).is_err());
        let raw = EmbeddingSet::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![0.0, 2.0]],
        )
        .unwrap();
        assert!(nearest_neighbors(&raw, "a", 1).is_err());
    }

    fn planted(seed: u64) -> EmbeddingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 16;
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut words = Vec::new();
        let mut rows = Vec::new();
        for i in 0..50 {
            words.push(format!("r{i}"));
            rows.push((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        for i in 0..5 {
            words.push(format!("c{i}"));
            rows.push(
                center
                    .iter()
                    .map(|c| c + rng.random_range(-1e-3..1e-3))
                    .collect(),
            );
        }
        EmbeddingSet::new(words, rows).unwrap().normalize().unwrap()
    }

    #[test]
    fn planted_cluster_matches_exhaustive_scan() {
        for seed in 0..5 {
            let e = planted(seed);
            let n = nearest_neighbors(&e, "c0", 4).unwrap();
            let mut got: Vec<&str> = n.neighbors.iter().map(|(w, _)| w.as_str()).collect();
            got.sort();
            assert_eq!(got, vec!["c1", "c2", "c3", "c4"]);

            // Oracle: full sort of every similarity.
            let q = e.vector("c0").unwrap();
            let mut all: Vec<(f64, usize)> = (0..e.len())
                .filter(|&j| e.word(j) != "c0")
                .map(|j| (q.iter().zip(e.row(j)).map(|(a, b)| a * b).sum(), j))
                .collect();
            all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            let expect: Vec<String> = all[..4]
                .iter()
                .map(|&(_, j)| e.word(j).to_string())
                .collect();
            let got: Vec<String> = n.neighbors.iter().map(|(w, _)| w.clone()).collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn prefix_property_and_ordering() {
        let e = planted(11);
        for q in ["r0", "r17", "c3"] {
            let mut prev: Option<NeighborList> = None;
            for k in 1..20 {
                let n = nearest_neighbors(&e, q, k).unwrap();
                assert!(n.neighbors.iter().all(|(w, _)| w != q));
                assert!(n.neighbors.windows(2).all(|w| w[0].1 >= w[1].1));
                if let Some(p) = prev {
                    assert_eq!(&n.neighbors[..k - 1], p.neighbors.as_slice());
                }
                prev = Some(n);
            }
        }
    }

    #[test]
    fn batch_matches_single_queries() {
        let e = planted(3);
        let queries: Vec<usize> = (0..e.len()).collect();
        let batch = neighbor_indices_many(&e, &queries, 7).unwrap();
        for (q, got) in queries.iter().zip(batch) {
            assert_eq!(got, neighbor_indices(&e, *q, 7));
        }
    }
}
