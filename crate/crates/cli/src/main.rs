//! Command-line front end: each subcommand reads a JSON config, runs the
//! corresponding core workflow, and writes plain CSV/JSON files.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.

use clap::{Parser, Subcommand};
use qaed_core::data::{CsvSchema, FeatureKind, Label};
use qaed_core::error::Error;
use qaed_core::harness::{
    emit_report, evaluate_model, grid_search, run_experiment_full, DataSource, ExperimentConfig,
    SavedModel, SearchSpace,
};
use qaed_core::metrics::{sample_metric_distribution, MetricDistribution, MetricKind, ThetaSource};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "qaed",
    version,
    about = "Quantum-autoencoder anomaly detection: train, evaluate, search, analyze"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config for the subcommand (see configs/ for samples).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the config's primary seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train per an experiment config; writes reports and per-fold models
    Train,
    /// Score a labeled dataset with a saved model
    Evaluate,
    /// Randomized hyperparameter search ranked by validation loss
    Gridsearch,
    /// Entanglement / magic distributions for a saved circuit model
    Metrics,
    /// Generate a synthetic dataset as CSV plus a loader schema
    Synth,
}

/// Failures split by phase so the exit code matches the cause.
enum CmdError {
    /// The config file itself could not be read or parsed.
    Config(String),
    Run(Error),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Run(e)
    }
}

fn exit_code(err: &CmdError) -> i32 {
    let e = match err {
        CmdError::Config(_) => return 2,
        CmdError::Run(e) => e,
    };
    // Classify by the root cause, not the fold wrapper.
    let mut root = e;
    while let Error::Fold { source, .. } = root {
        root = source;
    }
    if root.is_data_error() {
        3
    } else {
        match root {
            Error::Argument(_)
            | Error::Partition(_)
            | Error::Composition(_)
            | Error::Size(_)
            | Error::Index(_)
            | Error::Arity(_)
            | Error::UnsupportedGate(_)
            | Error::Consistency(_) => 2,
            _ => 4,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            match &err {
                CmdError::Config(msg) => eprintln!("error: {msg}"),
                CmdError::Run(e) => eprintln!("error: {e}"),
            }
            std::process::exit(exit_code(&err));
        }
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CmdError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CmdError::Config(format!("thread pool: {e}")))?;
    }
    let config_path = cli
        .config
        .ok_or_else(|| CmdError::Config("--config <path> is required".into()))?;
    let raw = fs::read_to_string(&config_path)
        .map_err(|e| CmdError::Config(format!("{}: {e}", config_path.display())))?;
    let parse_context = config_path.display().to_string();
    fs::create_dir_all(&cli.out).map_err(|e| {
        CmdError::Run(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", cli.out.display()),
        )))
    })?;
    match cli.command {
        Command::Train => cmd_train(&raw, &parse_context, cli.seed, &cli.out),
        Command::Evaluate => cmd_evaluate(&raw, &parse_context, cli.seed, &cli.out),
        Command::Gridsearch => cmd_gridsearch(&raw, &parse_context, cli.seed, &cli.out),
        Command::Metrics => cmd_metrics(&raw, &parse_context, cli.seed, &cli.out),
        Command::Synth => cmd_synth(&raw, &parse_context, cli.seed, &cli.out),
    }
}

fn parse_config<'a, T: Deserialize<'a>>(raw: &'a str, context: &str) -> Result<T, CmdError> {
    serde_json::from_str(raw).map_err(|e| CmdError::Config(format!("{context}: {e}")))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn cmd_train(
    raw: &str,
    context: &str,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CmdError> {
    let mut config: ExperimentConfig = parse_config(raw, context)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let started = Instant::now();
    let run = run_experiment_full(&config)?;
    let mut files = emit_report(&run.report, out).map_err(CmdError::Run)?;
    for (f, model) in run.models.iter().enumerate() {
        let path = out.join(format!("model_fold{f}.json"));
        model.save(&path)?;
        files.push(path);
    }
    println!(
        "auc {:.4} ± {:.4} over {} folds",
        run.report.auc_mean,
        run.report.auc_std,
        run.report.folds.len()
    );
    for file in &files {
        println!("wrote {}", file.display());
    }
    eprintln!("trained in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

#[derive(Deserialize)]
struct EvaluateConfig {
    model: PathBuf,
    data: DataSource,
}

fn cmd_evaluate(
    raw: &str,
    context: &str,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CmdError> {
    let config: EvaluateConfig = parse_config(raw, context)?;
    if seed.is_some() {
        eprintln!("note: --seed has no effect on evaluate");
    }
    let model = SavedModel::load(&config.model)?;
    let dataset = config.data.load()?;
    let outcome = evaluate_model(&model, &dataset)?;
    let json_path = out.join("evaluation.json");
    write_json(&json_path, &outcome).map_err(CmdError::Run)?;
    let mut text = String::from("fpr,tpr\n");
    for &(fpr, tpr) in &outcome.roc.points {
        text.push_str(&format!("{fpr},{tpr}\n"));
    }
    let roc_path = out.join("roc.csv");
    write_text(&roc_path, &text).map_err(CmdError::Run)?;
    println!(
        "auc {:.4} on {} background / {} signal events",
        outcome.roc.auc, outcome.roc.n_background, outcome.roc.n_signal
    );
    println!("wrote {}", json_path.display());
    println!("wrote {}", roc_path.display());
    Ok(())
}

#[derive(Deserialize)]
struct GridSearchConfig {
    base: ExperimentConfig,
    space: SearchSpace,
    budget: usize,
    seed: u64,
}

fn cmd_gridsearch(
    raw: &str,
    context: &str,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CmdError> {
    let mut config: GridSearchConfig = parse_config(raw, context)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let started = Instant::now();
    let ranked = grid_search(&config.base, &config.space, config.budget, config.seed)?;
    let json_path = out.join("candidates.json");
    write_json(&json_path, &ranked).map_err(CmdError::Run)?;
    let mut text =
        String::from("rank,batch_size,epochs,effective_params,bucket,mean_val_loss,auc_mean,auc_std\n");
    for c in &ranked {
        let bucket = c.bucket.map(|b| format!("{b:?}").to_lowercase()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.rank, c.batch_size, c.epochs, c.effective_params, bucket, c.mean_val_loss,
            c.auc_mean, c.auc_std
        ));
    }
    let csv_path = out.join("candidates.csv");
    write_text(&csv_path, &text).map_err(CmdError::Run)?;
    let best = &ranked[0];
    println!(
        "best of {}: val loss {:.5}, auc {:.4} ± {:.4}",
        ranked.len(),
        best.mean_val_loss,
        best.auc_mean,
        best.auc_std
    );
    println!("wrote {}", json_path.display());
    println!("wrote {}", csv_path.display());
    eprintln!("searched in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

#[derive(Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
enum ThetaChoice {
    /// Use the saved model's trained parameters.
    Trained,
    /// Draw parameter vectors uniformly from [0, 2π).
    Uniform { n_draws: usize, seed: u64 },
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum MetricChoice {
    Q,
    M2,
}

#[derive(Deserialize)]
struct MetricsConfig {
    model: PathBuf,
    data: DataSource,
    theta: ThetaChoice,
    metrics: Vec<MetricChoice>,
}

fn cmd_metrics(
    raw: &str,
    context: &str,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CmdError> {
    let config: MetricsConfig = parse_config(raw, context)?;
    if config.metrics.is_empty() {
        return Err(CmdError::Config(format!("{context}: metrics list is empty")));
    }
    let (model, scaler) = match SavedModel::load(&config.model)? {
        SavedModel::Qae { model, scaler } => (model, scaler),
        SavedModel::Cae { .. } => {
            return Err(CmdError::Run(Error::Argument(
                "metrics needs a circuit model; this file holds the classical baseline".into(),
            )))
        }
    };
    let dataset = config.data.load()?;
    let bg_rows = dataset.rows(&dataset.rows_with_label(Label::Background))?;
    let scaled = qaed_core::data::transform(&scaler, &bg_rows)?;
    let theta = match config.theta {
        ThetaChoice::Trained => {
            if seed.is_some() {
                eprintln!("note: --seed has no effect with trained parameters");
            }
            ThetaSource::Trained(model.theta().to_vec())
        }
        ThetaChoice::Uniform { n_draws, seed: cfg_seed } => ThetaSource::Uniform {
            n_draws,
            seed: seed.unwrap_or(cfg_seed),
        },
    };
    let mut distributions: BTreeMap<&str, MetricDistribution> = BTreeMap::new();
    for metric in &config.metrics {
        let (kind, name) = match metric {
            MetricChoice::Q => (MetricKind::Q, "q"),
            MetricChoice::M2 => (MetricKind::M2, "m2"),
        };
        if distributions.contains_key(name) {
            continue;
        }
        let dist = sample_metric_distribution(model.encoder(), &scaled, &theta, kind)?;
        println!("{name}: mean {:.6} ± {:.6} over {} samples", dist.mean, dist.std, dist.samples.len());
        distributions.insert(name, dist);
    }
    let json_path = out.join("metrics.json");
    write_json(&json_path, &distributions).map_err(CmdError::Run)?;
    println!("wrote {}", json_path.display());
    for (name, dist) in &distributions {
        let mut text = String::from("value\n");
        for v in &dist.samples {
            text.push_str(&format!("{v}\n"));
        }
        let path = out.join(format!("{name}_hist.csv"));
        write_text(&path, &text).map_err(CmdError::Run)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Deserialize)]
struct SynthConfig {
    data: DataSource,
}

fn cmd_synth(
    raw: &str,
    context: &str,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CmdError> {
    let config: SynthConfig = parse_config(raw, context)?;
    let mut source = config.data;
    match &mut source {
        DataSource::Bundled { seed: s, .. } | DataSource::Synth { seed: s, .. } => {
            if let Some(over) = seed {
                *s = over;
            }
        }
        DataSource::Csv { .. } => {
            return Err(CmdError::Config(format!(
                "{context}: synth needs a generator source, not a csv source"
            )))
        }
    }
    let dataset = source.load()?;
    let names: Vec<String> = (0..dataset.n_features()).map(|i| format!("f{i}")).collect();
    let mut text = names.join(",");
    text.push_str(",label\n");
    for (row, label) in dataset.features.iter().zip(&dataset.labels) {
        for v in row {
            text.push_str(&format!("{v},"));
        }
        text.push_str(match label {
            Label::Background => "background\n",
            Label::Signal => "signal\n",
        });
    }
    let csv_path = out.join("dataset.csv");
    write_text(&csv_path, &text).map_err(CmdError::Run)?;
    let schema = CsvSchema {
        feature_columns: names
            .into_iter()
            .zip(dataset.feature_kinds.iter().copied())
            .collect::<Vec<(String, FeatureKind)>>(),
        label_column: "label".into(),
    };
    let schema_path = out.join("schema.json");
    write_json(&schema_path, &schema).map_err(CmdError::Run)?;
    let n_bg = dataset.labels.iter().filter(|&&l| l == Label::Background).count();
    println!(
        "generated {} rows ({} background, {} signal)",
        dataset.labels.len(),
        n_bg,
        dataset.labels.len() - n_bg
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", schema_path.display());
    Ok(())
}
