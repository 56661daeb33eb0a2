use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use embias::diagnostics::{AuditConfig, Registry, DEFAULT_MONTE_CARLO_SAMPLES, DEFAULT_SEED};
use embias::embedding::{load_embeddings, write_embeddings, EmbeddingFormat, TextPrecision};
use embias::geometry::{gender_direction, hard_debias, projections, DirectionMethod};
use embias::numerics::{PermutationMode, TsneConfig};
use embias::plot::{write_plot_data, PlotKind};
use embias::report::{
    run_audit, write_atomic, AuditReport, AuditSettings, EmbeddingInput, DEFAULT_MAX_RANK,
};
use embias::synthetic::{gendered_words, planted_bias_pair, SyntheticConfig};
use embias::wordlists::{
    builtin_definitional_pairs, builtin_equalize_pairs, load_wordlist, WordListKind,
};
use embias::{Error, Result};

#[derive(Parser)]
#[command(
    name = "embias",
    version,
    about = "Audit gender bias left in debiased word embeddings"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every diagnostic and write a JSON report.
    Audit(AuditArgs),
    /// Hard-debias an embedding file.
    Debias(DebiasArgs),
    /// k-means alignment of the most biased words.
    Cluster(AuditArgs),
    /// Correlation of projection bias with neighbor bias.
    Neighbors(AuditArgs),
    /// Male-neighbor counts of professions.
    Professions(AuditArgs),
    /// Word Embedding Association Tests.
    Weat(AuditArgs),
    /// RBF-SVM gender classification.
    Classify(AuditArgs),
    /// CSV and SVG scatter data from a report.
    PlotData(PlotArgs),
    /// Write a planted-bias (biased, debiased) pair for trying the tool out.
    Fixture(FixtureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WeatMode {
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Args)]
struct AuditArgs {
    /// Original (biased) embeddings.
    #[arg(long)]
    biased: PathBuf,
    /// Debiased embeddings.
    #[arg(long)]
    debiased: PathBuf,
    #[arg(long, value_enum, default_value = "word2vec-binary")]
    format: EmbeddingFormat,
    /// Format of the debiased file, if different.
    #[arg(long, value_enum)]
    debiased_format: Option<EmbeddingFormat>,
    /// Drop the debiased set's last coordinate (GN-GloVe's gender slot).
    #[arg(long)]
    strip_last_coordinate: bool,
    #[arg(long, value_enum, default_value = "pair")]
    direction: DirectionMethod,
    /// Definitional pairs for `--direction pca` (female<TAB>male per line).
    #[arg(long)]
    definitional: Option<PathBuf>,
    /// Words removed from the audited vocabulary.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    #[arg(long)]
    professions: Option<PathBuf>,
    /// Only the most frequent (first) words are audited.
    #[arg(long, default_value_t = DEFAULT_MAX_RANK)]
    max_rank: usize,
    /// Nearest neighbors per word.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Most biased words per gender for clustering.
    #[arg(long, default_value_t = 500)]
    n_per_side: usize,
    /// Most biased words (both genders) for the classifier.
    #[arg(long, default_value_t = 5_000)]
    n_top: usize,
    /// Classifier training words (both genders).
    #[arg(long, default_value_t = 1_000)]
    n_train: usize,
    /// SVM box constraint.
    #[arg(long = "svm-c", default_value_t = 1.0)]
    svm_c: f64,
    /// RBF width (default 1/dimension).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, env = "EMBIAS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    weat_mode: WeatMode,
    #[arg(long, default_value_t = DEFAULT_MONTE_CARLO_SAMPLES)]
    weat_samples: usize,
    /// Skip the 2-D layout of the cluster experiment.
    #[arg(long)]
    no_tsne: bool,
    #[arg(long, default_value_t = 30.0)]
    tsne_perplexity: f64,
    #[arg(long, default_value_t = 1_000)]
    tsne_iterations: usize,
    /// Experiments to run (audit only; default all).
    #[arg(long, value_delimiter = ',')]
    experiments: Vec<String>,
    /// Report path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DebiasArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "word2vec-binary")]
    format: EmbeddingFormat,
    /// Output format (default: the input's).
    #[arg(long, value_enum)]
    output_format: Option<EmbeddingFormat>,
    #[arg(long, value_enum, default_value = "pca")]
    direction: DirectionMethod,
    #[arg(long)]
    definitional: Option<PathBuf>,
    /// Words left unneutralized.
    #[arg(long)]
    gendered: Option<PathBuf>,
    /// Pairs to equalize (female<TAB>male per line).
    #[arg(long)]
    equalize: Option<PathBuf>,
    /// Decimal places for text output (default: exact round trip).
    #[arg(long)]
    decimals: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// Report written by `audit`.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, value_enum)]
    which: PlotKind,
    /// Directory for `<which>.csv` and `<which>.svg`.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 2_000)]
    filler: usize,
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, env = "EMBIAS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "word2vec-binary")]
    format: EmbeddingFormat,
}

fn list_or(
    path: &Option<PathBuf>,
    kind: WordListKind,
    default: impl FnOnce() -> embias::WordList,
) -> Result<embias::WordList> {
    match path {
        Some(p) => load_wordlist(p, kind),
        None => Ok(default()),
    }
}

fn settings(args: &AuditArgs) -> Result<AuditSettings> {
    let mut config = AuditConfig::with_seed(args.seed);
    config.k = args.k;
    config.n_per_side = args.n_per_side;
    config.n_top = args.n_top;
    config.n_train = args.n_train;
    config.svm.c = args.svm_c;
    config.svm.gamma = args.gamma;
    config.tsne = (!args.no_tsne).then_some(TsneConfig {
        perplexity: args.tsne_perplexity,
        iterations: args.tsne_iterations,
        seed: args.seed,
        ..TsneConfig::default()
    });
    config.weat_mode = match args.weat_mode {
        WeatMode::Exact => PermutationMode::Exact,
        WeatMode::MonteCarlo => PermutationMode::MonteCarlo {
            samples: args.weat_samples,
            seed: args.seed,
        },
        WeatMode::Auto => PermutationMode::Auto {
            samples: args.weat_samples,
            seed: args.seed,
        },
    };
    let defaults = AuditSettings::default();
    Ok(AuditSettings {
        direction: args.direction,
        definitional_pairs: list_or(
            &args.definitional,
            WordListKind::Pairs,
            builtin_definitional_pairs,
        )?,
        exclusions: list_or(&args.exclusions, WordListKind::Flat, gendered_words)?,
        professions: list_or(&args.professions, WordListKind::Flat, || {
            defaults.professions.clone()
        })?,
        weat_specs: defaults.weat_specs,
        max_rank: args.max_rank,
        strip_last_coordinate: args.strip_last_coordinate,
        config,
    })
}

fn emit(report: &AuditReport, out: Option<&Path>) -> Result<()> {
    let json = report.to_json()?;
    match out {
        Some(path) => write_atomic(path, json.as_bytes()),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn audit(args: &AuditArgs, only: Option<&str>) -> Result<bool> {
    let settings = settings(args)?;
    let names: Vec<String> = match only {
        Some(n) => vec![n.to_string()],
        None => args.experiments.clone(),
    };
    let biased = EmbeddingInput {
        path: args.biased.clone(),
        format: args.format,
    };
    let debiased = EmbeddingInput {
        path: args.debiased.clone(),
        format: args.debiased_format.unwrap_or(args.format),
    };
    let report = run_audit(
        &biased,
        &debiased,
        &settings,
        &Registry::with_defaults(),
        &names,
    )?;
    emit(&report, args.out.as_deref())?;
    for failure in &report.errors {
        eprintln!("error: {} failed: {}", failure.experiment, failure.message);
    }
    Ok(report.is_complete())
}

fn debias(args: &DebiasArgs) -> Result<()> {
    let emb = load_embeddings(&args.input, args.format)?.normalize()?;
    let pairs = list_or(
        &args.definitional,
        WordListKind::Pairs,
        builtin_definitional_pairs,
    )?;
    let gendered = list_or(&args.gendered, WordListKind::Flat, gendered_words)?;
    let equalize = list_or(&args.equalize, WordListKind::Pairs, builtin_equalize_pairs)?;
    let g = gender_direction(&emb, args.direction, &pairs)?;
    let out = hard_debias(&emb, &g, &gendered, &equalize)?;

    let keep = gendered.token_set();
    let residual = projections(&out, &g)?
        .iter()
        .zip(out.words())
        .filter(|(_, w)| !keep.contains(w.as_str()))
        .fold(0.0f64, |m, (p, _)| m.max(p.abs()));
    log::info!("max |projection| over neutralized words: {residual:e}");

    let precision = args
        .decimals
        .map_or(TextPrecision::RoundTrip, TextPrecision::Decimals);
    write_embeddings(
        &args.output,
        &out,
        args.output_format.unwrap_or(args.format),
        precision,
    )
}

fn fixture(args: &FixtureArgs) -> Result<()> {
    let config = SyntheticConfig {
        n_filler: args.filler,
        dim: args.dim,
        seed: args.seed,
        ..SyntheticConfig::default()
    };
    let (biased, debiased) = planted_bias_pair(&config)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let ext = if args.format == EmbeddingFormat::Word2vecBinary {
        "bin"
    } else {
        "txt"
    };
    for (name, emb) in [("biased", &biased), ("debiased", &debiased)] {
        let path = args.out_dir.join(format!("{name}.{ext}"));
        write_embeddings(&path, emb, args.format, TextPrecision::RoundTrip)?;
        eprintln!("wrote {} ({} words)", path.display(), emb.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    match &cli.command {
        Command::Audit(a) => audit(a, None),
        Command::Cluster(a) => audit(a, Some("cluster")),
        Command::Neighbors(a) => audit(a, Some("neighbors")),
        Command::Professions(a) => audit(a, Some("professions")),
        Command::Weat(a) => audit(a, Some("weat")),
        Command::Classify(a) => audit(a, Some("classify")),
        Command::Debias(a) => debias(a).map(|_| true),
        Command::Fixture(a) => fixture(a).map(|_| true),
        Command::PlotData(a) => {
            let report = AuditReport::load(&a.report)?;
            let (csv, svg) = write_plot_data(&report, a.which, &a.out_dir)?;
            eprintln!("wrote {} and {}", csv.display(), svg.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
