use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use embias::embedding::{load_embeddings, write_embeddings, TextPrecision};
use embias::report::AuditReport;
use embias::synthetic::{planted_bias_set, SyntheticConfig};
use embias::EmbeddingFormat;

const SMALL: [&str; 10] = [
    "--k",
    "15",
    "--n-per-side",
    "50",
    "--n-top",
    "200",
    "--n-train",
    "60",
    "--tsne-iterations",
    "250",
];

fn embias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embias"))
        .args(args)
        .env_remove("EMBIAS_SEED")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A planted biased file plus its hard-debiased counterpart made by the CLI.
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = SyntheticConfig {
        n_filler: 700,
        dim: 20,
        seed: 2,
        ..SyntheticConfig::default()
    };
    let biased = dir.join("biased.bin");
    write_embeddings(
        &biased,
        &planted_bias_set(&cfg).unwrap(),
        EmbeddingFormat::Word2vecBinary,
        TextPrecision::RoundTrip,
    )
    .unwrap();
    let debiased = dir.join("debiased.bin");
    let out = embias(&["debias", "--input", s(&biased), "--output", s(&debiased)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (biased, debiased)
}

fn audit(extra: &[&str]) -> Output {
    let mut args = extra.to_vec();
    args.extend(SMALL);
    embias(&args)
}

#[test]
fn debias_then_audit_reports_zero_projection() {
    let dir = tempfile::tempdir().unwrap();
    let (b, d) = fixture(dir.path());
    let reloaded = load_embeddings(&d, EmbeddingFormat::Word2vecBinary).unwrap();
    assert_eq!(
        reloaded.len(),
        load_embeddings(&b, EmbeddingFormat::Word2vecBinary)
            .unwrap()
            .len()
    );

    let report = dir.path().join("report.json");
    let out = audit(&[
        "audit",
        "--biased",
        s(&b),
        "--debiased",
        s(&d),
        "--direction",
        "pca",
        "--out",
        s(&report),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = AuditReport::load(&report).unwrap();
    assert!(r.is_complete());
    let names: Vec<&str> = r.results.iter().map(|x| x.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "projection",
            "cluster",
            "neighbors",
            "professions",
            "weat",
            "classify"
        ]
    );
    assert!(
        r.result("projection")
            .unwrap()
            .get("max_abs_projection_after")
            .unwrap()
            <= 1e-6
    );
    assert!(r.metadata.biased.vocabulary_audited > 0);
    assert_eq!(
        r.metadata.biased.vocabulary_audited,
        r.metadata.debiased.vocabulary_audited
    );
}

#[test]
fn same_file_twice_gives_equal_phases() {
    let dir = tempfile::tempdir().unwrap();
    let (b, _) = fixture(dir.path());
    let out = audit(&["audit", "--biased", s(&b), "--debiased", s(&b)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = AuditReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    for res in &r.results {
        for (key, v) in &res.scalars {
            if key.contains("before") {
                assert_eq!(
                    res.scalars.get(&key.replace("before", "after")),
                    Some(v),
                    "{} {key}",
                    res.name
                );
            }
        }
    }
}

#[test]
fn missing_file_fails_with_path() {
    let out = embias(&[
        "audit",
        "--biased",
        "/nonexistent/b.bin",
        "--debiased",
        "/nonexistent/d.bin",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/b.bin"));
}

#[test]
fn failing_experiment_sets_exit_code_but_keeps_report() {
    let dir = tempfile::tempdir().unwrap();
    let (b, d) = fixture(dir.path());
    let report = dir.path().join("r.json");
    let out = embias(&[
        "audit",
        "--biased",
        s(&b),
        "--debiased",
        s(&d),
        "--experiments",
        "projection,classify",
        "--n-top",
        "1000000",
        "--out",
        s(&report),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("classify"));
    let r = AuditReport::load(&report).unwrap();
    assert!(r.result("projection").is_some());
    assert_eq!(r.errors[0].experiment, "classify");

    let out = embias(&[
        "audit",
        "--biased",
        s(&b),
        "--debiased",
        s(&d),
        "--experiments",
        "bogus",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment bogus"));
}

#[test]
fn single_experiment_subcommands_and_seed_env() {
    let dir = tempfile::tempdir().unwrap();
    let (b, d) = fixture(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_embias"))
        .args([
            "weat",
            "--biased",
            s(&b),
            "--debiased",
            s(&d),
            "--weat-mode",
            "exact",
        ])
        .env("EMBIAS_SEED", "7")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = AuditReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(r.metadata.experiments, ["weat"]);
    assert_eq!(r.metadata.config.seed, 7);
    let weat = r.result("weat").unwrap();
    assert_eq!(
        weat.config["exact_after_career_family"],
        serde_json::Value::Bool(true)
    );
    assert!(weat.get("p_after_math_arts").is_some());

    for cmd in ["cluster", "neighbors", "professions", "classify"] {
        let out = audit(&[cmd, "--biased", s(&b), "--debiased", s(&d), "--no-tsne"]);
        assert!(
            out.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let r = AuditReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
        assert_eq!(r.results.len(), 1);
        assert_eq!(r.results[0].name, cmd);
    }
}

#[test]
fn plot_data_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (b, d) = fixture(dir.path());
    let report = dir.path().join("report.json");
    let out = audit(&[
        "audit",
        "--biased",
        s(&b),
        "--debiased",
        s(&d),
        "--out",
        s(&report),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let plots = dir.path().join("plots");
    for which in ["cluster", "professions"] {
        let out = embias(&[
            "plot-data",
            "--report",
            s(&report),
            "--which",
            which,
            "--out-dir",
            s(&plots),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let cluster = std::fs::read_to_string(plots.join("cluster.csv")).unwrap();
    let lines: Vec<&str> = cluster.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 50);
    assert_eq!(
        lines[0],
        "word,original_bias,cluster_before,cluster_after,tsne_before_x,tsne_before_y,tsne_after_x,tsne_after_y,gender"
    );
    let professions = std::fs::read_to_string(plots.join("professions.csv")).unwrap();
    assert_eq!(
        professions.lines().next().unwrap(),
        "word,original_bias,male_neighbors_before,male_neighbors_after"
    );
    for which in ["cluster", "professions"] {
        let svg = std::fs::read_to_string(plots.join(format!("{which}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(
            doc.descendants()
                .filter(|n| n.has_tag_name("circle"))
                .count()
                > 2
        );
    }

    // Same report, same bytes.
    let again = dir.path().join("again");
    embias(&[
        "plot-data",
        "--report",
        s(&report),
        "--which",
        "cluster",
        "--out-dir",
        s(&again),
    ]);
    assert_eq!(
        std::fs::read(plots.join("cluster.svg")).unwrap(),
        std::fs::read(again.join("cluster.svg")).unwrap()
    );
    assert_eq!(
        std::fs::read(plots.join("cluster.csv")).unwrap(),
        std::fs::read(again.join("cluster.csv")).unwrap()
    );

    let partial = dir.path().join("partial.json");
    let out = audit(&[
        "audit",
        "--biased",
        s(&b),
        "--debiased",
        s(&d),
        "--experiments",
        "weat",
        "--out",
        s(&partial),
    ]);
    assert!(out.status.success());
    let out = embias(&[
        "plot-data",
        "--report",
        s(&partial),
        "--which",
        "cluster",
        "--out-dir",
        s(&plots),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no cluster block"));
}

#[test]
fn text_format_round_trip_through_debias() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SyntheticConfig {
        n_filler: 100,
        dim: 10,
        ..SyntheticConfig::default()
    };
    let input = dir.path().join("in.txt");
    let set = planted_bias_set(&cfg).unwrap();
    write_embeddings(
        &input,
        &set,
        EmbeddingFormat::GloveText,
        TextPrecision::RoundTrip,
    )
    .unwrap();
    let output = dir.path().join("out.bin");
    let out = embias(&[
        "debias",
        "--input",
        s(&input),
        "--format",
        "glove-text",
        "--output-format",
        "word2vec-binary",
        "--output",
        s(&output),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let back = load_embeddings(&output, EmbeddingFormat::Word2vecBinary).unwrap();
    assert_eq!(back.words(), set.words());
}
