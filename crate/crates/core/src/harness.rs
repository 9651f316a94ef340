//! Experiment orchestration: ROC/AUC evaluation, per-fold training runs,
//! randomized grid search, report emission, and model save/load.
//!
//! Everything here is deterministic under a fixed config and seed; the
//! only nondeterministic values (wall-clock timings) stay out of the
//! serialized reports.

use crate::cae::{param_count, train_cae, MlpAutoencoder};
use crate::circuits::{
    ansatz_all_to_all, ansatz_hea, ansatz_new, feature_map_g, feature_map_rx, Circuit,
    QaePartition,
};
use crate::data::{
    eight_feature_benchmark_spec, fit_scaler, load_csv, make_folds, synth_dataset, CsvSchema,
    Dataset, Label, ScaleTarget, ScalerSpec, SynthSpec, transform,
};
use crate::error::{Error, Result};
use crate::metrics::{sample_metric_distribution, MetricDistribution, MetricKind, ThetaSource};
use crate::optim::{train, MetricSnapshot, TrainConfig};
use crate::qae::{FidelityMode, QaeModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// ROC curve with its area.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RocResult {
    /// (false-positive rate, true-positive rate), from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub n_signal: usize,
    pub n_background: usize,
}

/// ROC over anomaly scores; signal is the positive class and higher
/// scores are more signal-like.
///
/// The sweep walks thresholds down through the union of observed scores,
/// including tied scores simultaneously. The area comes from the
/// trapezoid rule and equals the rank statistic
/// P(sig > bg) + ½·P(sig = bg).
pub fn roc_auc(scores_bg: &[f64], scores_sig: &[f64]) -> Result<RocResult> {
    if scores_bg.is_empty() || scores_sig.is_empty() {
        return Err(Error::Argument("roc needs scores from both classes".into()));
    }
    if scores_bg.iter().chain(scores_sig).any(|s| !s.is_finite()) {
        return Err(Error::Argument("scores must be finite".into()));
    }
    let mut bg = scores_bg.to_vec();
    bg.sort_by(|a, b| b.total_cmp(a));
    let mut sig = scores_sig.to_vec();
    sig.sort_by(|a, b| b.total_cmp(a));
    let mut thresholds: Vec<f64> = bg.iter().chain(&sig).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let mut points = vec![(0.0, 0.0)];
    let (mut bi, mut si) = (0usize, 0usize);
    for &t in &thresholds {
        while bi < bg.len() && bg[bi] >= t {
            bi += 1;
        }
        while si < sig.len() && sig[si] >= t {
            si += 1;
        }
        points.push((bi as f64 / bg.len() as f64, si as f64 / sig.len() as f64));
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Ok(RocResult { points, auc, n_signal: sig.len(), n_background: bg.len() })
}

/// Which feature map encodes the event into the register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMapKind {
    /// One R_x rotation per feature; one qubit per feature.
    Rx,
    /// Paired-angle map; one qubit per two features.
    G,
}

impl FeatureMapKind {
    pub fn n_qubits_for(self, n_features: usize) -> Result<usize> {
        match self {
            FeatureMapKind::Rx => Ok(n_features),
            FeatureMapKind::G => {
                if !n_features.is_multiple_of(2) {
                    return Err(Error::Argument(format!(
                        "paired feature map needs an even feature count, got {n_features}"
                    )));
                }
                Ok(n_features / 2)
            }
        }
    }

    pub fn build(self, n_features: usize) -> Result<Circuit> {
        match self {
            FeatureMapKind::Rx => feature_map_rx(n_features),
            FeatureMapKind::G => feature_map_g(n_features),
        }
    }
}

/// Which entangling ansatz follows the feature map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    AllToAll,
    HardwareEfficient,
    /// Layered ansatz with trash-to-latent transfer CNOTs.
    LatentAware,
}

/// Build the requested ansatz; only the latent-aware family is layered.
pub fn build_ansatz(
    kind: AnsatzKind,
    n_qubits: usize,
    latent: usize,
    layers: usize,
) -> Result<Circuit> {
    match kind {
        AnsatzKind::AllToAll | AnsatzKind::HardwareEfficient => {
            if layers != 1 {
                return Err(Error::Argument(format!(
                    "{kind:?} is a single-layer ansatz; got {layers} layers"
                )));
            }
            match kind {
                AnsatzKind::AllToAll => ansatz_all_to_all(n_qubits),
                _ => ansatz_hea(n_qubits),
            }
        }
        AnsatzKind::LatentAware => ansatz_new(n_qubits, latent, layers),
    }
}

/// Model family and shape for one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Qae {
        feature_map: FeatureMapKind,
        ansatz: AnsatzKind,
        latent: usize,
        layers: usize,
    },
    Cae {
        /// Encoder widths with the latent width last; mirrored into the
        /// full network.
        encoder_layers: Vec<usize>,
        sparsity: f64,
    },
}

impl ModelSpec {
    pub fn scale_target(&self) -> ScaleTarget {
        match self {
            ModelSpec::Qae { .. } => ScaleTarget::Qae,
            ModelSpec::Cae { .. } => ScaleTarget::Cae,
        }
    }
}

/// Where the experiment's events come from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// The bundled eight-feature collider-style generator.
    Bundled {
        separation: f64,
        n_background: usize,
        n_signal: usize,
        seed: u64,
    },
    Synth { spec: SynthSpec, seed: u64 },
    Csv { path: String, schema: CsvSchema },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Bundled { separation, n_background, n_signal, seed } => synth_dataset(
                &eight_feature_benchmark_spec(*separation, *n_background, *n_signal),
                *seed,
            ),
            DataSource::Synth { spec, seed } => synth_dataset(spec, *seed),
            DataSource::Csv { path, schema } => load_csv(Path::new(path), schema),
        }
    }
}

/// Fold sampling counts.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FoldSpec {
    pub n_train_bg: usize,
    pub n_test: usize,
    pub n_folds: usize,
}

impl Default for FoldSpec {
    /// The published protocol: 1000 training backgrounds and 10000 test
    /// events per fold, five folds.
    fn default() -> Self {
        FoldSpec { n_train_bg: 1000, n_test: 10000, n_folds: 5 }
    }
}

/// Epoch/batch schedule for configs; the per-fold seed is derived from
/// the experiment seed, so it is not a field here.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub snapshot_every: usize,
    pub snapshot_q: bool,
    pub snapshot_m2: bool,
}

impl TrainSettings {
    pub fn qae_default() -> Self {
        let c = TrainConfig::for_qae();
        TrainSettings {
            epochs: c.epochs,
            batch_size: c.batch_size,
            lr: c.lr,
            snapshot_every: c.snapshot_every,
            snapshot_q: false,
            snapshot_m2: false,
        }
    }

    pub fn cae_default() -> Self {
        let c = TrainConfig::for_cae();
        TrainSettings {
            epochs: c.epochs,
            batch_size: c.batch_size,
            lr: c.lr,
            snapshot_every: 0,
            snapshot_q: false,
            snapshot_m2: false,
        }
    }

    pub fn to_config(self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            seed,
            snapshot_every: self.snapshot_every,
            snapshot_q: self.snapshot_q,
            snapshot_m2: self.snapshot_m2,
        }
    }
}

/// Full description of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub model: ModelSpec,
    pub train: TrainSettings,
    pub folds: FoldSpec,
    pub seed: u64,
}

/// Results from one fold.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub loss_trace: Vec<f64>,
    pub snapshots: Vec<MetricSnapshot>,
    pub roc: RocResult,
    /// Mean anomaly score over the fold's test background; the
    /// validation loss used for ranking.
    pub mean_bg_score: f64,
    pub q_samples: Option<MetricDistribution>,
    pub m2_samples: Option<MetricDistribution>,
}

/// Wall-clock timings; kept out of serialized reports so reruns are
/// byte-identical.
#[derive(Clone, Debug, Default)]
pub struct Timings {
    pub total_seconds: f64,
    pub per_fold_seconds: Vec<f64>,
}

/// Everything an experiment produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub folds: Vec<FoldReport>,
    pub auc_mean: f64,
    pub auc_std: f64,
    #[serde(skip)]
    pub timings: Timings,
}

/// Trained model plus the scaler it was trained behind.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SavedModel {
    Qae { model: QaeModel, scaler: ScalerSpec },
    Cae { model: MlpAutoencoder, scaler: ScalerSpec },
}

impl SavedModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(with_path(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(with_path(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Scale raw feature rows and score each one; higher = more anomalous.
    pub fn score(&self, raw_rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        match self {
            SavedModel::Qae { model, scaler } => {
                let scaled = transform(scaler, raw_rows)?;
                scaled.par_iter().map(|x| model.anomaly_score(x)).collect()
            }
            SavedModel::Cae { model, scaler } => {
                let scaled = transform(scaler, raw_rows)?;
                scaled.par_iter().map(|x| model.reconstruction_error(x)).collect()
            }
        }
    }
}

/// Scores and ROC of a saved model over a labeled dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub roc: RocResult,
    pub mean_bg_score: f64,
    pub mean_sig_score: f64,
}

pub fn evaluate_model(saved: &SavedModel, dataset: &Dataset) -> Result<EvalOutcome> {
    let bg_rows = dataset.rows(&dataset.rows_with_label(Label::Background))?;
    let sig_rows = dataset.rows(&dataset.rows_with_label(Label::Signal))?;
    if bg_rows.is_empty() || sig_rows.is_empty() {
        return Err(Error::Data("evaluation needs rows of both classes".into()));
    }
    let bg_scores = saved.score(&bg_rows)?;
    let sig_scores = saved.score(&sig_rows)?;
    let roc = roc_auc(&bg_scores, &sig_scores)?;
    Ok(EvalOutcome {
        roc,
        mean_bg_score: bg_scores.iter().sum::<f64>() / bg_scores.len() as f64,
        mean_sig_score: sig_scores.iter().sum::<f64>() / sig_scores.len() as f64,
    })
}

fn population_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct FoldRun {
    report: FoldReport,
    model: SavedModel,
    seconds: f64,
}

fn run_fold(
    config: &ExperimentConfig,
    dataset: &Dataset,
    fold_index: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<FoldRun> {
    let started = Instant::now();
    let target = config.model.scale_target();
    let train_raw = dataset.rows(train_idx)?;
    let scaler = fit_scaler(&train_raw, &dataset.feature_kinds, target)?;
    let train_scaled = transform(&scaler, &train_raw)?;
    let test_bg_idx: Vec<usize> = test_idx
        .iter()
        .copied()
        .filter(|&i| dataset.labels[i] == Label::Background)
        .collect();
    let test_sig_idx: Vec<usize> = test_idx
        .iter()
        .copied()
        .filter(|&i| dataset.labels[i] == Label::Signal)
        .collect();
    let test_bg = transform(&scaler, &dataset.rows(&test_bg_idx)?)?;
    let test_sig = transform(&scaler, &dataset.rows(&test_sig_idx)?)?;

    // One training stream per fold, decoupled from the fold sampler.
    let fold_seed = config.seed.wrapping_add(fold_index as u64 + 1);

    let (loss_trace, snapshots, model, bg_scores, sig_scores, q_samples, m2_samples) =
        match &config.model {
            ModelSpec::Qae { feature_map, ansatz, latent, layers } => {
                let n_qubits = feature_map.n_qubits_for(dataset.n_features())?;
                let fm = feature_map.build(dataset.n_features())?;
                let an = build_ansatz(*ansatz, n_qubits, *latent, *layers)?;
                let partition = QaePartition::standard(n_qubits, *latent)?;
                let mut model = QaeModel::new(fm, an, partition, FidelityMode::Exact)?;
                let cfg = config.train.to_config(fold_seed);
                let outcome = train(&mut model, &train_scaled, &cfg)?;
                let bg: Vec<f64> =
                    test_bg.par_iter().map(|x| model.anomaly_score(x)).collect::<Result<_>>()?;
                let sig: Vec<f64> =
                    test_sig.par_iter().map(|x| model.anomaly_score(x)).collect::<Result<_>>()?;
                let theta = ThetaSource::Trained(model.theta().to_vec());
                let q_samples = if config.train.snapshot_q {
                    Some(sample_metric_distribution(
                        model.encoder(),
                        &train_scaled,
                        &theta,
                        MetricKind::Q,
                    )?)
                } else {
                    None
                };
                let m2_samples = if config.train.snapshot_m2 {
                    Some(sample_metric_distribution(
                        model.encoder(),
                        &train_scaled,
                        &theta,
                        MetricKind::M2,
                    )?)
                } else {
                    None
                };
                (
                    outcome.loss_trace,
                    outcome.snapshots,
                    SavedModel::Qae { model, scaler },
                    bg,
                    sig,
                    q_samples,
                    m2_samples,
                )
            }
            ModelSpec::Cae { encoder_layers, sparsity } => {
                let mut model = MlpAutoencoder::from_encoder_layers(
                    dataset.n_features(),
                    encoder_layers,
                    fold_seed,
                )?;
                model.apply_magnitude_pruning(*sparsity)?;
                let cfg = config.train.to_config(fold_seed);
                let outcome = train_cae(&mut model, &train_scaled, &cfg)?;
                let bg: Vec<f64> = test_bg
                    .par_iter()
                    .map(|x| model.reconstruction_error(x))
                    .collect::<Result<_>>()?;
                let sig: Vec<f64> = test_sig
                    .par_iter()
                    .map(|x| model.reconstruction_error(x))
                    .collect::<Result<_>>()?;
                (
                    outcome.loss_trace,
                    outcome.snapshots,
                    SavedModel::Cae { model, scaler },
                    bg,
                    sig,
                    None,
                    None,
                )
            }
        };

    let roc = roc_auc(&bg_scores, &sig_scores)?;
    let mean_bg_score = bg_scores.iter().sum::<f64>() / bg_scores.len() as f64;
    Ok(FoldRun {
        report: FoldReport {
            fold: fold_index,
            loss_trace,
            snapshots,
            roc,
            mean_bg_score,
            q_samples,
            m2_samples,
        },
        model,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// A run's report plus the per-fold trained models.
pub struct ExperimentRun {
    pub report: RunReport,
    pub models: Vec<SavedModel>,
}

/// Train and evaluate per fold, returning the report and trained models.
pub fn run_experiment_full(config: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    let dataset = config.data.load()?;
    let folds = make_folds(
        &dataset,
        config.folds.n_train_bg,
        config.folds.n_test,
        config.folds.n_folds,
        config.seed,
    )?;
    let runs: Vec<FoldRun> = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            run_fold(config, &dataset, f, &fold.train, &fold.test)
                .map_err(|e| Error::Fold { fold: f, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let aucs: Vec<f64> = runs.iter().map(|r| r.report.roc.auc).collect();
    let (auc_mean, auc_std) = population_stats(&aucs);
    let mut fold_reports = Vec::with_capacity(runs.len());
    let mut models = Vec::with_capacity(runs.len());
    let mut per_fold_seconds = Vec::with_capacity(runs.len());
    for run in runs {
        fold_reports.push(run.report);
        models.push(run.model);
        per_fold_seconds.push(run.seconds);
    }
    Ok(ExperimentRun {
        report: RunReport {
            config: config.clone(),
            folds: fold_reports,
            auc_mean,
            auc_std,
            timings: Timings {
                total_seconds: started.elapsed().as_secs_f64(),
                per_fold_seconds,
            },
        },
        models,
    })
}

/// As [`run_experiment_full`], keeping only the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    Ok(run_experiment_full(config)?.report)
}

/// Randomized-search ranges for circuit models.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QaeSearchSpace {
    pub batch_sizes: Vec<usize>,
    /// Inclusive layer range.
    pub layers: (usize, usize),
    pub epochs: Vec<usize>,
    /// Inclusive latent range; clamped below the register size.
    pub latent: (usize, usize),
}

impl QaeSearchSpace {
    /// The published search ranges.
    pub fn standard() -> Self {
        QaeSearchSpace {
            batch_sizes: vec![50, 500, 1000],
            layers: (1, 10),
            epochs: vec![40, 60, 80],
            latent: (1, 5),
        }
    }
}

/// Randomized-search ranges for the classical baseline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaeSearchSpace {
    pub batch_sizes: Vec<usize>,
    /// Inclusive range for the encoder width-list length, latent included.
    pub hidden_layers: (usize, usize),
    /// Inclusive width range of each non-latent encoder layer.
    pub neurons: (usize, usize),
    /// Inclusive latent range; clamped below the input width.
    pub latent: (usize, usize),
    /// Pruned weight fraction range, sampled in [lo, hi).
    pub prune: (f64, f64),
}

impl CaeSearchSpace {
    /// The published search ranges.
    pub fn standard() -> Self {
        CaeSearchSpace {
            batch_sizes: vec![50, 500, 1000],
            hidden_layers: (1, 5),
            neurons: (1, 32),
            latent: (1, 4),
            prune: (0.0, 1.0),
        }
    }
}

/// Search space for either model family.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SearchSpace {
    Qae(QaeSearchSpace),
    Cae(CaeSearchSpace),
}

/// Classical candidates are split by effective parameter budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaeBucket {
    /// At most 100 effective parameters.
    Shallow,
    /// At most 1000 effective parameters.
    Deep,
}

/// One evaluated grid-search candidate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridCandidate {
    pub rank: usize,
    pub model: ModelSpec,
    pub batch_size: usize,
    pub epochs: usize,
    pub bucket: Option<CaeBucket>,
    pub effective_params: usize,
    pub mean_val_loss: f64,
    pub auc_mean: f64,
    pub auc_std: f64,
}

/// Effective parameters of a mirrored network after pruning: stored
/// scalars minus the masked weight count.
fn cae_effective_params(n_input: usize, encoder_layers: &[usize], sparsity: f64) -> Result<usize> {
    let mut sizes = Vec::with_capacity(2 * encoder_layers.len() + 1);
    sizes.push(n_input);
    sizes.extend_from_slice(encoder_layers);
    sizes.extend(encoder_layers.iter().rev().skip(1));
    sizes.push(n_input);
    let total = param_count(&sizes)?;
    let weights: usize = sizes.windows(2).map(|w| w[0] * w[1]).sum();
    let masked = (sparsity * weights as f64).floor() as usize;
    Ok(total - masked)
}

/// Draw `budget` candidates from the space, run each, and rank them by
/// mean validation loss (mean anomaly score over test background,
/// averaged over folds).
///
/// Classical candidates that exceed 1000 effective parameters are
/// rejected and redrawn; survivors land in the shallow (≤100) or deep
/// (≤1000) bucket. Candidates reuse the base config's data, folds, and
/// seed, so every candidate sees identical splits.
pub fn grid_search(
    base: &ExperimentConfig,
    space: &SearchSpace,
    budget: usize,
    seed: u64,
) -> Result<Vec<GridCandidate>> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    if budget == 0 {
        return Err(Error::Argument("grid search needs a positive budget".into()));
    }
    let n_features = base.data.load()?.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn: Vec<(ModelSpec, usize, usize, Option<CaeBucket>, usize)> = Vec::new();
    let max_attempts = budget.saturating_mul(1000);
    let mut attempts = 0usize;
    while drawn.len() < budget {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Argument(
                "grid search space rejected too many candidates; no valid region".into(),
            ));
        }
        match space {
            SearchSpace::Qae(s) => {
                if s.batch_sizes.is_empty() || s.epochs.is_empty() {
                    return Err(Error::Argument("search space has an empty list".into()));
                }
                let (fm, ansatz) = match &base.model {
                    ModelSpec::Qae { feature_map, ansatz, .. } => (*feature_map, *ansatz),
                    _ => {
                        return Err(Error::Argument(
                            "base config model family does not match the search space".into(),
                        ))
                    }
                };
                let n_qubits = fm.n_qubits_for(n_features)?;
                let latent_hi = s.latent.1.min(n_qubits - 1);
                if s.latent.0 > latent_hi {
                    return Err(Error::Argument(format!(
                        "latent range starts at {} but the register only allows up to {latent_hi}",
                        s.latent.0
                    )));
                }
                let batch = s.batch_sizes[rng.random_range(0..s.batch_sizes.len())];
                let layers = rng.random_range(s.layers.0..=s.layers.1);
                let epochs = s.epochs[rng.random_range(0..s.epochs.len())];
                let latent = rng.random_range(s.latent.0..=latent_hi);
                drawn.push((
                    ModelSpec::Qae { feature_map: fm, ansatz, latent, layers },
                    batch,
                    epochs,
                    None,
                    layers * n_qubits,
                ));
            }
            SearchSpace::Cae(s) => {
                if s.batch_sizes.is_empty() {
                    return Err(Error::Argument("search space has an empty list".into()));
                }
                let latent_hi = s.latent.1.min(n_features - 1);
                if s.latent.0 > latent_hi {
                    return Err(Error::Argument(format!(
                        "latent range starts at {} but the input only allows up to {latent_hi}",
                        s.latent.0
                    )));
                }
                let batch = s.batch_sizes[rng.random_range(0..s.batch_sizes.len())];
                let len = rng.random_range(s.hidden_layers.0..=s.hidden_layers.1);
                let latent = rng.random_range(s.latent.0..=latent_hi);
                let mut encoder: Vec<usize> = (0..len - 1)
                    .map(|_| rng.random_range(s.neurons.0..=s.neurons.1))
                    .collect();
                encoder.push(latent);
                let hi = s.prune.1.min(1.0);
                let sparsity = s.prune.0 + rng.random::<f64>() * (hi - s.prune.0);
                let effective = cae_effective_params(n_features, &encoder, sparsity)?;
                let bucket = if effective <= 100 {
                    CaeBucket::Shallow
                } else if effective <= 1000 {
                    CaeBucket::Deep
                } else {
                    continue; // over budget; redraw
                };
                // The classical grid has no epochs dimension; keep the base schedule.
                drawn.push((
                    ModelSpec::Cae { encoder_layers: encoder, sparsity },
                    batch,
                    base.train.epochs,
                    Some(bucket),
                    effective,
                ));
            }
        }
    }

    let mut candidates: Vec<GridCandidate> = drawn
        .into_iter()
        .map(|(model, batch_size, epochs, bucket, effective_params)| {
            let mut config = base.clone();
            config.model = model.clone();
            config.train.batch_size = batch_size;
            config.train.epochs = epochs;
            let report = run_experiment(&config)?;
            let val_losses: Vec<f64> = report.folds.iter().map(|f| f.mean_bg_score).collect();
            let (mean_val_loss, _) = population_stats(&val_losses);
            Ok(GridCandidate {
                rank: 0,
                model,
                batch_size,
                epochs,
                bucket,
                effective_params,
                mean_val_loss,
                auc_mean: report.auc_mean,
                auc_std: report.auc_std,
            })
        })
        .collect::<Result<_>>()?;
    candidates.sort_by(|a, b| a.mean_val_loss.total_cmp(&b.mean_val_loss));
    for (i, c) in candidates.iter_mut().enumerate() {
        c.rank = i + 1;
    }
    Ok(candidates)
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn with_path(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(with_path(path))
}

/// Write report.json, roc.csv, loss.csv, and any metric histograms into
/// `out_dir`; returns the files written.
pub fn emit_report(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(with_path(out_dir))?;
    let mut written = Vec::new();

    let path = out_dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_text(&path, &text)?;
    written.push(path);

    let path = out_dir.join("roc.csv");
    let mut text = String::from("fold,fpr,tpr\n");
    for fold in &report.folds {
        for &(fpr, tpr) in &fold.roc.points {
            text.push_str(&format!("{},{},{}\n", fold.fold, fmt_f64(fpr), fmt_f64(tpr)));
        }
    }
    write_text(&path, &text)?;
    written.push(path);

    let path = out_dir.join("loss.csv");
    let mut text = String::from("fold,epoch,mean_loss,mean_q,mean_m2\n");
    for fold in &report.folds {
        let snap = |epoch: usize| fold.snapshots.iter().find(|s| s.epoch == epoch);
        let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        if let Some(s) = snap(0) {
            text.push_str(&format!(
                "{},0,,{},{}\n",
                fold.fold,
                cell(s.mean_q),
                cell(s.mean_m2)
            ));
        }
        for (i, loss) in fold.loss_trace.iter().enumerate() {
            let epoch = i + 1;
            let s = snap(epoch);
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                fold.fold,
                epoch,
                fmt_f64(*loss),
                cell(s.and_then(|s| s.mean_q)),
                cell(s.and_then(|s| s.mean_m2)),
            ));
        }
    }
    write_text(&path, &text)?;
    written.push(path);

    let hist = |pick: fn(&FoldReport) -> Option<&MetricDistribution>| -> Option<String> {
        if report.folds.iter().all(|f| pick(f).is_none()) {
            return None;
        }
        let mut text = String::from("fold,value\n");
        for fold in &report.folds {
            if let Some(dist) = pick(fold) {
                for &v in &dist.samples {
                    text.push_str(&format!("{},{}\n", fold.fold, fmt_f64(v)));
                }
            }
        }
        Some(text)
    };
    if let Some(text) = hist(|f| f.q_samples.as_ref()) {
        let path = out_dir.join("q_hist.csv");
        write_text(&path, &text)?;
        written.push(path);
    }
    if let Some(text) = hist(|f| f.m2_samples.as_ref()) {
        let path = out_dir.join("m2_hist.csv");
        write_text(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}
