//! Quantum autoencoder model: trash-fidelity evaluation, batch loss, and
//! per-event anomaly scores.
//!
//! The encoder is the feature map followed by the ansatz on the data
//! register. Compression quality is the fidelity between the trash
//! subsystem and |0…0⟩, available two ways: read directly off the
//! statevector, or measured by the SWAP-test circuit against reference
//! qubits. Both give the same number; the SWAP test exists to validate
//! the measurable construction.

use crate::circuits::{assemble_qae_circuit, Circuit, QaePartition};
use crate::error::{Error, Result};
use crate::statevec::StateVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How trash fidelity is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMode {
    /// ⟨0…0|ρ_trash|0…0⟩ read from the post-encoder statevector.
    #[default]
    Exact,
    /// 2·P(ancilla = 0) − 1 from the full SWAP-test circuit.
    SwapTest,
}

/// Encoder circuit pieces plus the trained parameter vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "QaeModelParts", into = "QaeModelParts")]
pub struct QaeModel {
    feature_map: Circuit,
    ansatz: Circuit,
    partition: QaePartition,
    theta: Vec<f64>,
    fidelity_mode: FidelityMode,
    encoder: Circuit,
    swap_test: Circuit,
}

/// Serialized form; derived circuits are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct QaeModelParts {
    feature_map: Circuit,
    ansatz: Circuit,
    partition: QaePartition,
    theta: Vec<f64>,
    fidelity_mode: FidelityMode,
}

impl TryFrom<QaeModelParts> for QaeModel {
    type Error = Error;

    fn try_from(p: QaeModelParts) -> Result<Self> {
        let mut model =
            QaeModel::new(p.feature_map, p.ansatz, p.partition, p.fidelity_mode)?;
        model.set_theta(p.theta)?;
        Ok(model)
    }
}

impl From<QaeModel> for QaeModelParts {
    fn from(m: QaeModel) -> Self {
        QaeModelParts {
            feature_map: m.feature_map,
            ansatz: m.ansatz,
            partition: m.partition,
            theta: m.theta,
            fidelity_mode: m.fidelity_mode,
        }
    }
}

impl QaeModel {
    /// Assemble a model; θ starts at all zeros.
    pub fn new(
        feature_map: Circuit,
        ansatz: Circuit,
        partition: QaePartition,
        fidelity_mode: FidelityMode,
    ) -> Result<Self> {
        let swap_test = assemble_qae_circuit(&feature_map, &ansatz, &partition)?;
        let mut encoder_gates = feature_map.gates().to_vec();
        encoder_gates.extend(ansatz.gates().iter().cloned());
        let encoder = Circuit::new(partition.n_data_qubits(), encoder_gates)?;
        let theta = vec![0.0; ansatz.n_params()];
        Ok(QaeModel {
            feature_map,
            ansatz,
            partition,
            theta,
            fidelity_mode,
            encoder,
            swap_test,
        })
    }

    pub fn n_features(&self) -> usize {
        self.encoder.n_data()
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn set_theta(&mut self, theta: Vec<f64>) -> Result<()> {
        if theta.len() != self.ansatz.n_params() {
            return Err(Error::Argument(format!(
                "theta length {} does not match the ansatz's {} parameters",
                theta.len(),
                self.ansatz.n_params()
            )));
        }
        self.theta = theta;
        Ok(())
    }

    pub fn partition(&self) -> &QaePartition {
        &self.partition
    }

    pub fn fidelity_mode(&self) -> FidelityMode {
        self.fidelity_mode
    }

    pub fn set_fidelity_mode(&mut self, mode: FidelityMode) {
        self.fidelity_mode = mode;
    }

    /// Feature map followed by ansatz, over the data register only.
    pub fn encoder(&self) -> &Circuit {
        &self.encoder
    }

    /// Post-encoder state of the data register for one event.
    pub fn encode(&self, x: &[f64]) -> Result<StateVector> {
        self.encoder.execute(&self.theta, x)
    }

    /// As `encode`, with an explicit parameter vector.
    pub fn encode_with(&self, theta: &[f64], x: &[f64]) -> Result<StateVector> {
        self.encoder.execute(theta, x)
    }

    /// Fidelity between the trash subsystem and |0…0⟩, in [0,1].
    pub fn trash_fidelity(&self, x: &[f64]) -> Result<f64> {
        self.trash_fidelity_with(&self.theta, x)
    }

    /// As `trash_fidelity`, with an explicit parameter vector.
    pub fn trash_fidelity_with(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        let f = match self.fidelity_mode {
            FidelityMode::Exact => {
                let state = self.encoder.execute(theta, x)?;
                state.probability_all_zero(&self.partition.trash)?
            }
            FidelityMode::SwapTest => {
                let state = self.swap_test.execute(theta, x)?;
                let p0 = state.basis_probability(self.partition.ancilla, 0)?;
                2.0 * p0 - 1.0
            }
        };
        Ok(f.clamp(0.0, 1.0))
    }

    /// Mean of (1 − fidelity) over a batch of events.
    pub fn batch_loss(&self, batch: &[Vec<f64>]) -> Result<f64> {
        self.batch_loss_with(&self.theta, batch)
    }

    /// As `batch_loss`, with an explicit parameter vector.
    pub fn batch_loss_with(&self, theta: &[f64], batch: &[Vec<f64>]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Argument("batch must be nonempty".into()));
        }
        let fidelities: Vec<f64> = batch
            .par_iter()
            .map(|x| self.trash_fidelity_with(theta, x))
            .collect::<Result<_>>()?;
        // Sum in index order so the result does not depend on thread scheduling.
        let total: f64 = fidelities.iter().map(|f| 1.0 - f).sum();
        Ok(total / batch.len() as f64)
    }

    /// Per-event anomaly score, 1 − fidelity; higher = more anomalous.
    pub fn anomaly_score(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 - self.trash_fidelity(x)?)
    }
}
