use embias::diagnostics::{
    classifier_experiment, neighbor_correlation_experiment, professions_experiment, AuditConfig,
    ClassifierConfig, Registry,
};
use embias::geometry::{DirectionMethod, GenderDirection};
use embias::numerics::SvmConfig;
use embias::report::{prepare_pair, run_experiments, AuditSettings};
use embias::synthetic::{planted_bias_pair, SyntheticConfig};
use embias::{EmbeddingSet, WordList};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn axis(dim: usize) -> GenderDirection {
    let mut direction = vec![0.0; dim];
    direction[0] = 1.0;
    GenderDirection {
        direction,
        method: DirectionMethod::PairDifference,
        source_pairs: vec![],
    }
}

/// Words on a half circle in axes 1-2 (which decide neighborhoods) with a
/// tiny axis-0 component set to the male share of each word's k-neighborhood
/// on the circle, so neighbor bias is an exact monotone function of
/// projection.
#[test]
fn monotone_neighbor_bias_correlates() {
    let n = 300;
    let k = 25;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // Jittered grid: no distance ties, and shares near the middle stay
    // within one neighbor of one half.
    let angles: Vec<f64> = (0..n)
        .map(|i| std::f64::consts::PI * (i as f64 + 0.5 + rng.random_range(-1e-3..1e-3)) / n as f64)
        .collect();
    let male: Vec<bool> = (0..n).map(|i| i >= n / 2).collect();
    let share: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| ((angles[i] - angles[j]).abs(), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            d[..k].iter().filter(|&&(_, j)| male[j]).count() as f64 / k as f64
        })
        .collect();
    let eps = 1e-4;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            // Keeps the projection sign equal to the planted label.
            let shift = if male[i] { 0.03 } else { -0.03 };
            vec![
                eps * (share[i] - 0.5 + shift),
                angles[i].cos(),
                angles[i].sin(),
            ]
        })
        .collect();
    let words = (0..n).map(|i| format!("w{i}")).collect();
    let e = EmbeddingSet::new(words, rows).unwrap().normalize().unwrap();
    let res = neighbor_correlation_experiment(&e, &e, &axis(3), k).unwrap();
    let r = res.get("r_after").unwrap();
    assert!(r >= 0.99, "r = {r}");
    assert_eq!(res.get("r_before"), res.get("r_after"));
    assert_eq!(res.get("n_after"), Some(n as f64));
}

#[test]
fn planted_separable_classifier() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 400;
    let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let side = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut v: Vec<f64> = (0..8).map(|_| rng.random_range(-0.1..0.1)).collect();
            v[0] += side * rng.random_range(0.05..0.5);
            v[1] += side;
            v[2] += 1.0;
            v
        })
        .collect();
    let biased = EmbeddingSet::new(words, rows).unwrap().normalize().unwrap();
    let g = axis(8);
    let debiased = embias::geometry::neutralize(
        &biased,
        &g,
        &WordList::flat("all", biased.words().to_vec()).unwrap(),
    )
    .unwrap();
    let config = ClassifierConfig {
        n_top: 200,
        n_train: 100,
        seed: 1,
        svm: SvmConfig::default(),
    };
    let res = classifier_experiment(&biased, &debiased, &g, &config).unwrap();
    assert!(res.get("accuracy_before").unwrap() >= 0.99);
    assert!(res.get("accuracy_after").unwrap() >= 0.99);
    assert_eq!(res.get("n_test"), Some(100.0));
}

#[test]
fn professions_on_planted_pair() {
    let cfg = SyntheticConfig {
        n_filler: 600,
        dim: 20,
        ..SyntheticConfig::default()
    };
    let (b, d) = planted_bias_pair(&cfg).unwrap();
    let settings = AuditSettings::default();
    let p = prepare_pair(&b, &d, &settings).unwrap();
    let res = professions_experiment(
        &p.debiased,
        &p.biased,
        &p.direction,
        &settings.professions,
        30,
    )
    .unwrap();
    assert!(res.get("r_before").unwrap() > 0.5);
    assert!(res.get("p_after").unwrap() < 1e-6);
    for rec in &res.per_word {
        for key in ["male_neighbors_before", "male_neighbors_after"] {
            let v = rec.metrics[key];
            assert!(v.fract() == 0.0 && (0.0..=30.0).contains(&v));
        }
    }
    let empty = WordList::flat("none", ["notaword"]).unwrap();
    assert!(professions_experiment(&p.debiased, &p.biased, &p.direction, &empty, 30).is_err());
}

fn small_settings() -> AuditSettings {
    let mut config = AuditConfig::with_seed(9);
    config.k = 15;
    config.n_per_side = 60;
    config.n_top = 240;
    config.n_train = 80;
    config.tsne.as_mut().unwrap().iterations = 250;
    AuditSettings {
        config,
        ..AuditSettings::default()
    }
}

#[test]
fn experiments_identical_across_thread_counts() {
    let cfg = SyntheticConfig {
        n_filler: 500,
        dim: 16,
        seed: 3,
        ..SyntheticConfig::default()
    };
    let (b, d) = planted_bias_pair(&cfg).unwrap();
    let settings = small_settings();
    let registry = Registry::with_defaults();
    let all: Vec<_> = registry.iter().collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let p = prepare_pair(&b, &d, &settings).unwrap();
            run_experiments(&p, &settings, &all)
        })
    };
    let (one, errors) = run(1);
    assert!(errors.is_empty(), "{errors:?}");
    let (four, _) = run(4);
    assert_eq!(one.len(), 6);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(
            serde_json::to_string(a).unwrap(),
            serde_json::to_string(b).unwrap(),
            "{}",
            a.name
        );
    }
}

#[test]
fn identical_inputs_give_identical_phases() {
    let cfg = SyntheticConfig {
        n_filler: 500,
        dim: 16,
        seed: 8,
        ..SyntheticConfig::default()
    };
    let (b, _) = planted_bias_pair(&cfg).unwrap();
    let settings = small_settings();
    let registry = Registry::with_defaults();
    let all: Vec<_> = registry.iter().collect();
    let p = prepare_pair(&b, &b, &settings).unwrap();
    let (results, errors) = run_experiments(&p, &settings, &all);
    assert!(errors.is_empty(), "{errors:?}");
    for res in &results {
        for (key, &v) in &res.scalars {
            if key.contains("before") {
                let twin = key.replace("before", "after");
                assert_eq!(res.scalars.get(&twin), Some(&v), "{} {key}", res.name);
            }
        }
    }
}
