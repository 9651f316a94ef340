//! Event data handling: feature scaling, CSV ingestion, train/test fold
//! sampling, and seeded synthetic dataset generation.
//!
//! Non-angular kinematic features (energies, momenta) are scaled against
//! a fixed [0, 1000] range; angular features use the empirical range of
//! the training data. Scaled values land in [0, π] for circuit models and
//! [0, 1] for the classical baseline.

use crate::error::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Class label of one event row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Background,
    Signal,
}

/// Whether a column is an angle or an unbounded kinematic quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Angular,
    NonAngular,
}

/// Labeled feature matrix with per-column kinds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub feature_kinds: Vec<FeatureKind>,
}

impl Dataset {
    pub fn new(
        name: String,
        features: Vec<Vec<f64>>,
        labels: Vec<Label>,
        feature_kinds: Vec<FeatureKind>,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != feature_kinds.len() {
                return Err(Error::Data(format!(
                    "row {i} has {} features, expected {}",
                    row.len(),
                    feature_kinds.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite value at row {i}, column {j}")));
            }
        }
        Ok(Dataset { name, features, labels, feature_kinds })
    }

    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_kinds.len()
    }

    /// Indices of rows with the given label, in row order.
    pub fn rows_with_label(&self, label: Label) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Materialize the feature rows at `indices`.
    pub fn rows(&self, indices: &[usize]) -> Result<Vec<Vec<f64>>> {
        indices
            .iter()
            .map(|&i| {
                self.features
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Index(format!("row {i} out of range")))
            })
            .collect()
    }
}

/// Which interval scaled features land in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleTarget {
    /// Circuit input angles, [0, π].
    Qae,
    /// Classical network input, [0, 1].
    Cae,
}

impl ScaleTarget {
    pub fn span(self) -> f64 {
        match self {
            ScaleTarget::Qae => PI,
            ScaleTarget::Cae => 1.0,
        }
    }
}

/// Range of every non-angular column, regardless of the observed data.
pub const NON_ANGULAR_RANGE: (f64, f64) = (0.0, 1000.0);

/// Fitted per-column scaling ranges.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalerSpec {
    pub target: ScaleTarget,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

/// Fit column ranges on training data.
///
/// Non-angular columns are pinned to [`NON_ANGULAR_RANGE`]; angular
/// columns take their empirical training min/max.
pub fn fit_scaler(
    train_features: &[Vec<f64>],
    feature_kinds: &[FeatureKind],
    target: ScaleTarget,
) -> Result<ScalerSpec> {
    if train_features.is_empty() {
        return Err(Error::Argument("scaler needs a nonempty training matrix".into()));
    }
    let d = feature_kinds.len();
    for row in train_features {
        if row.len() != d {
            return Err(Error::Argument(format!(
                "training row has {} columns, expected {d}",
                row.len()
            )));
        }
    }
    let mut mins = vec![0.0; d];
    let mut maxs = vec![0.0; d];
    for (col, kind) in feature_kinds.iter().enumerate() {
        match kind {
            FeatureKind::NonAngular => {
                mins[col] = NON_ANGULAR_RANGE.0;
                maxs[col] = NON_ANGULAR_RANGE.1;
            }
            FeatureKind::Angular => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for row in train_features {
                    lo = lo.min(row[col]);
                    hi = hi.max(row[col]);
                }
                if hi <= lo {
                    return Err(Error::DegenerateRange(format!(
                        "angular column {col} is constant at {lo}; cannot fit a range"
                    )));
                }
                mins[col] = lo;
                maxs[col] = hi;
            }
        }
    }
    Ok(ScalerSpec { target, mins, maxs })
}

/// Scale features into the target interval, clipping overflow.
pub fn transform(scaler: &ScalerSpec, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = scaler.mins.len();
    let span = scaler.target.span();
    features
        .iter()
        .map(|row| {
            if row.len() != d {
                return Err(Error::Argument(format!(
                    "row has {} columns, scaler was fitted on {d}",
                    row.len()
                )));
            }
            Ok(row
                .iter()
                .enumerate()
                .map(|(col, &v)| {
                    let unit = (v - scaler.mins[col]) / (scaler.maxs[col] - scaler.mins[col]);
                    (unit * span).clamp(0.0, span)
                })
                .collect())
        })
        .collect()
}

/// One train/test split as index lists into a dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fold {
    /// Background rows for training.
    pub train: Vec<usize>,
    /// Test rows, half background and half signal.
    pub test: Vec<usize>,
}

/// Sample `n_folds` independent splits.
///
/// Each fold draws `n_train_bg` background rows for training plus a test
/// set of `n_test`/2 background and `n_test`/2 signal rows, disjoint from
/// that fold's training rows. Fold f uses stream f of the seeded
/// generator, so a fold's content does not depend on how many folds are
/// requested.
pub fn make_folds(
    dataset: &Dataset,
    n_train_bg: usize,
    n_test: usize,
    n_folds: usize,
    seed: u64,
) -> Result<Vec<Fold>> {
    if n_folds == 0 {
        return Err(Error::Argument("need at least one fold".into()));
    }
    if !n_test.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "test size {n_test} must be even to split equally between classes"
        )));
    }
    let bg = dataset.rows_with_label(Label::Background);
    let sig = dataset.rows_with_label(Label::Signal);
    let test_half = n_test / 2;
    if n_train_bg + test_half > bg.len() {
        return Err(Error::Capacity(format!(
            "fold wants {n_train_bg} training + {test_half} test background rows, dataset has {}",
            bg.len()
        )));
    }
    if test_half > sig.len() {
        return Err(Error::Capacity(format!(
            "fold wants {test_half} test signal rows, dataset has {}",
            sig.len()
        )));
    }
    let mut folds = Vec::with_capacity(n_folds);
    for f in 0..n_folds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(f as u64);
        let mut bg_pool = bg.clone();
        bg_pool.shuffle(&mut rng);
        let mut sig_pool = sig.clone();
        sig_pool.shuffle(&mut rng);
        let train: Vec<usize> = bg_pool[..n_train_bg].to_vec();
        let mut test: Vec<usize> = bg_pool[n_train_bg..n_train_bg + test_half].to_vec();
        test.extend_from_slice(&sig_pool[..test_half]);
        folds.push(Fold { train, test });
    }
    Ok(folds)
}

/// One synthetic feature column: background distribution plus how far the
/// signal mean moves per unit of separation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthColumn {
    pub kind: FeatureKind,
    pub bg_mean: f64,
    pub bg_std: f64,
    /// Signal mean = bg_mean + separation · shift_units · bg_std.
    pub shift_units: f64,
}

/// Generator config for a two-class synthetic dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthSpec {
    pub name: String,
    pub columns: Vec<SynthColumn>,
    pub n_background: usize,
    pub n_signal: usize,
    /// Global knob scaling every column's signal shift, in units of that
    /// column's standard deviation.
    pub separation: f64,
}

/// Draw a dataset from a generator config.
///
/// Values are normal draws clamped to the column's scaling range:
/// [0, 1000] for non-angular columns, [0, π] for angular ones. All
/// background rows are generated before any signal row, column by column
/// within a row, so output is byte-stable for a given seed.
pub fn synth_dataset(spec: &SynthSpec, seed: u64) -> Result<Dataset> {
    if spec.columns.is_empty() {
        return Err(Error::Argument("generator needs at least one column".into()));
    }
    if spec.n_background == 0 || spec.n_signal == 0 {
        return Err(Error::Argument("generator needs rows of both classes".into()));
    }
    for (i, col) in spec.columns.iter().enumerate() {
        // NaN std/mean/shift must fail, so test the accepting ranges.
        let std_ok = col.bg_std.is_finite() && col.bg_std > 0.0;
        if !std_ok || !col.bg_mean.is_finite() || !col.shift_units.is_finite() {
            return Err(Error::Argument(format!("column {i} has an invalid distribution")));
        }
    }
    let sep_ok = spec.separation.is_finite() && spec.separation >= 0.0;
    if !sep_ok {
        return Err(Error::Argument(format!(
            "separation must be nonnegative, got {}",
            spec.separation
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clamp_range = |kind: FeatureKind| match kind {
        FeatureKind::NonAngular => NON_ANGULAR_RANGE,
        FeatureKind::Angular => (0.0, PI),
    };
    let draw_rows = |n: usize, signal: bool, rng: &mut ChaCha8Rng| -> Result<Vec<Vec<f64>>> {
        (0..n)
            .map(|_| {
                spec.columns
                    .iter()
                    .map(|col| {
                        let mean = if signal {
                            col.bg_mean + spec.separation * col.shift_units * col.bg_std
                        } else {
                            col.bg_mean
                        };
                        let dist = Normal::new(mean, col.bg_std)
                            .map_err(|e| Error::Argument(e.to_string()))?;
                        let (lo, hi) = clamp_range(col.kind);
                        Ok(dist.sample(rng).clamp(lo, hi))
                    })
                    .collect()
            })
            .collect()
    };
    let mut features = draw_rows(spec.n_background, false, &mut rng)?;
    features.extend(draw_rows(spec.n_signal, true, &mut rng)?);
    let mut labels = vec![Label::Background; spec.n_background];
    labels.extend(vec![Label::Signal; spec.n_signal]);
    let kinds = spec.columns.iter().map(|c| c.kind).collect();
    Dataset::new(spec.name.clone(), features, labels, kinds)
}

/// Bundled eight-feature generator shaped like a collider search: missing
/// energy, four transverse momenta, and three angles, with the signal
/// shifted on half the columns.
pub fn eight_feature_benchmark_spec(
    separation: f64,
    n_background: usize,
    n_signal: usize,
) -> SynthSpec {
    let col = |kind, bg_mean, bg_std, shift_units| SynthColumn { kind, bg_mean, bg_std, shift_units };
    SynthSpec {
        name: "eight-feature-benchmark".into(),
        columns: vec![
            col(FeatureKind::NonAngular, 140.0, 45.0, 1.0), // missing transverse energy
            col(FeatureKind::NonAngular, 110.0, 35.0, 1.0), // leading b-jet pT
            col(FeatureKind::NonAngular, 70.0, 25.0, 0.0),  // leading lepton pT
            col(FeatureKind::NonAngular, 45.0, 18.0, 0.0),  // subleading lepton pT
            col(FeatureKind::Angular, 1.4, 0.45, 1.0),      // lepton polar angle
            col(FeatureKind::NonAngular, 65.0, 22.0, 0.0),  // subleading b-jet pT
            col(FeatureKind::Angular, 1.7, 0.5, 1.0),       // b-jet polar angle
            col(FeatureKind::Angular, 1.2, 0.4, 0.0),       // lepton-jet separation
        ],
        n_background,
        n_signal,
        separation,
    }
}

/// Schema mapping CSV columns to features and the label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CsvSchema {
    /// Feature columns in output order, with their kinds.
    pub feature_columns: Vec<(String, FeatureKind)>,
    /// Column holding `background` / `signal`.
    pub label_column: String,
}

/// Load a dataset from a headered CSV file.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    if schema.feature_columns.is_empty() {
        return Err(Error::Parse {
            row: 0,
            col: "<schema>".into(),
            msg: "schema names no feature columns".into(),
        });
    }
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            row: 0,
            col: name.into(),
            msg: "column not found in header".into(),
        })
    };
    let label_idx = find(&schema.label_column)?;
    let feature_idx: Vec<usize> = schema
        .feature_columns
        .iter()
        .map(|(name, _)| find(name))
        .collect::<Result<_>>()?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        let mut x = Vec::with_capacity(feature_idx.len());
        for (&col, (name, _)) in feature_idx.iter().zip(&schema.feature_columns) {
            let cell = record.get(col).ok_or_else(|| Error::Parse {
                row,
                col: name.clone(),
                msg: "row too short for this column".into(),
            })?;
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row,
                col: name.clone(),
                msg: format!("'{cell}' is not a number"),
            })?;
            x.push(v);
        }
        let label_cell = record.get(label_idx).ok_or_else(|| Error::Parse {
            row,
            col: schema.label_column.clone(),
            msg: "row too short for the label column".into(),
        })?;
        let label = match label_cell.trim() {
            "background" => Label::Background,
            "signal" => Label::Signal,
            other => {
                return Err(Error::Parse {
                    row,
                    col: schema.label_column.clone(),
                    msg: format!("unknown label '{other}'; expected background or signal"),
                })
            }
        };
        features.push(x);
        labels.push(label);
    }
    let kinds = schema.feature_columns.iter().map(|(_, k)| *k).collect();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    Dataset::new(name, features, labels, kinds)
}
