//! Gradient computation and training for the quantum autoencoder:
//! parameter-shift gradients, Adam updates, and the epoch/batch loop with
//! optional entanglement/magic snapshots.

use crate::error::{Error, Result};
use crate::metrics::{sample_metric_distribution, MetricKind, ThetaSource};
use crate::qae::QaeModel;
use crate::statevec::{AngleSource, GateKind};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Adam optimizer state with the usual bias-corrected moments.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(dim: usize, lr: f64) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(state: &mut AdamState, theta: &mut [f64], grad: &[f64]) -> Result<()> {
    if theta.len() != state.m.len() || grad.len() != state.m.len() {
        return Err(Error::Argument(format!(
            "adam dimensions disagree: state {}, theta {}, grad {}",
            state.m.len(),
            theta.len(),
            grad.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for k in 0..theta.len() {
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * grad[k];
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * grad[k] * grad[k];
        let m_hat = state.m[k] / bc1;
        let v_hat = state.v[k] / bc2;
        theta[k] -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

/// Epoch/batch schedule and snapshot switches for a training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    /// Record metric snapshots every this many epochs (0 = endpoints only).
    pub snapshot_every: usize,
    pub snapshot_q: bool,
    pub snapshot_m2: bool,
}

impl TrainConfig {
    /// Autoencoder-circuit defaults: 100 epochs, batches of 50, lr 0.005.
    pub fn for_qae() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 50,
            lr: 0.005,
            seed: 0,
            snapshot_every: 2,
            snapshot_q: false,
            snapshot_m2: false,
        }
    }

    /// Classical-baseline defaults: 500 epochs, batches of 500, lr 0.001.
    pub fn for_cae() -> Self {
        TrainConfig {
            epochs: 500,
            batch_size: 500,
            lr: 0.001,
            seed: 0,
            snapshot_every: 0,
            snapshot_q: false,
            snapshot_m2: false,
        }
    }
}

/// Data-averaged diagnostics at one point of the training schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSnapshot {
    pub epoch: usize,
    pub mean_q: Option<f64>,
    pub mean_m2: Option<f64>,
}

/// Loss trace and snapshots from one training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainOutcome {
    /// Mean per-event loss seen during each epoch.
    pub loss_trace: Vec<f64>,
    pub snapshots: Vec<MetricSnapshot>,
    pub n_steps: u64,
}

/// Confirm every parameter slot sits in exactly one single-angle rotation.
///
/// The two-point shift rule needs each slot to feed one R_x/R_y/R_z gate;
/// anything else (a slot reused across gates, or bound inside a composite
/// rotation) has a different derivative structure.
fn validate_shiftable(model: &QaeModel) -> Result<()> {
    let mut counts = vec![0usize; model.n_params()];
    for gate in model.encoder().gates() {
        for src in &gate.angles {
            if let AngleSource::Param(slot) = *src {
                let rotation = matches!(gate.kind, GateKind::Rx | GateKind::Ry | GateKind::Rz);
                if !rotation {
                    return Err(Error::UnsupportedGate(format!(
                        "parameter slot {slot} feeds a {:?} gate; shift rule needs a plain rotation",
                        gate.kind
                    )));
                }
                counts[slot] += 1;
            }
        }
    }
    if let Some(slot) = counts.iter().position(|&c| c != 1) {
        return Err(Error::UnsupportedGate(format!(
            "parameter slot {slot} appears {} times; shift rule needs exactly one",
            counts[slot]
        )));
    }
    Ok(())
}

/// Gradient of the batch loss by the two-point parameter-shift rule:
/// grad_k = [C(θ_k + π/2) − C(θ_k − π/2)] / 2.
pub fn parameter_shift_grad(model: &QaeModel, batch: &[Vec<f64>]) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::Argument("gradient needs a nonempty batch".into()));
    }
    validate_shiftable(model)?;
    let theta = model.theta();
    let grad: Vec<f64> = (0..theta.len())
        .into_par_iter()
        .map(|k| {
            let mut plus = theta.to_vec();
            plus[k] += FRAC_PI_2;
            let mut minus = theta.to_vec();
            minus[k] -= FRAC_PI_2;
            let up = model.batch_loss_with(&plus, batch)?;
            let down = model.batch_loss_with(&minus, batch)?;
            Ok((up - down) / 2.0)
        })
        .collect::<Result<_>>()?;
    Ok(grad)
}

fn check_scaled_for_circuit(data: &[Vec<f64>]) -> Result<()> {
    for (row, x) in data.iter().enumerate() {
        for (col, &v) in x.iter().enumerate() {
            if !(-1e-9..=PI + 1e-9).contains(&v) {
                return Err(Error::Data(format!(
                    "feature at row {row}, column {col} is {v}; expected the scaled range [0, π]"
                )));
            }
        }
    }
    Ok(())
}

fn snapshot(model: &QaeModel, data: &[Vec<f64>], epoch: usize, cfg: &TrainConfig) -> Result<MetricSnapshot> {
    let theta = ThetaSource::Trained(model.theta().to_vec());
    let mean_q = if cfg.snapshot_q {
        Some(sample_metric_distribution(model.encoder(), data, &theta, MetricKind::Q)?.mean)
    } else {
        None
    };
    let mean_m2 = if cfg.snapshot_m2 {
        Some(sample_metric_distribution(model.encoder(), data, &theta, MetricKind::M2)?.mean)
    } else {
        None
    };
    Ok(MetricSnapshot { epoch, mean_q, mean_m2 })
}

/// Train the model on scaled background events.
///
/// θ is (re)initialized uniformly on [0,2π) from the config seed, the
/// training set is reshuffled each epoch with the same generator, and the
/// last partial batch is kept. Identical config and seed give an
/// identical final θ and loss trace. Snapshots are taken before training
/// (epoch 0), every `snapshot_every` epochs, and after the final epoch.
pub fn train(model: &mut QaeModel, train_data: &[Vec<f64>], cfg: &TrainConfig) -> Result<TrainOutcome> {
    if cfg.epochs < 1 {
        return Err(Error::Argument("training needs at least one epoch".into()));
    }
    if cfg.batch_size < 1 || cfg.batch_size > train_data.len() {
        return Err(Error::Argument(format!(
            "batch size {} invalid for {} training rows",
            cfg.batch_size,
            train_data.len()
        )));
    }
    for x in train_data {
        if x.len() != model.n_features() {
            return Err(Error::Argument(format!(
                "training row has {} features, model wants {}",
                x.len(),
                model.n_features()
            )));
        }
    }
    check_scaled_for_circuit(train_data)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init: Vec<f64> = (0..model.n_params()).map(|_| rng.random::<f64>() * TAU).collect();
    model.set_theta(init)?;

    let want_snapshots = cfg.snapshot_q || cfg.snapshot_m2;
    let mut snapshots = Vec::new();
    if want_snapshots {
        snapshots.push(snapshot(model, train_data, 0, cfg)?);
    }

    let mut adam = AdamState::new(model.n_params(), cfg.lr);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Vec<f64>> = chunk.iter().map(|&i| train_data[i].clone()).collect();
            let loss = model.batch_loss(&batch)?;
            epoch_loss_sum += loss * batch.len() as f64;
            let grad = parameter_shift_grad(model, &batch)?;
            let mut theta = model.theta().to_vec();
            adam_step(&mut adam, &mut theta, &grad)?;
            model.set_theta(theta)?;
        }
        loss_trace.push(epoch_loss_sum / train_data.len() as f64);
        let scheduled = cfg.snapshot_every > 0 && epoch % cfg.snapshot_every == 0;
        if want_snapshots && (scheduled || epoch == cfg.epochs) {
            snapshots.push(snapshot(model, train_data, epoch, cfg)?);
        }
    }
    Ok(TrainOutcome { loss_trace, snapshots, n_steps: adam.step })
}
