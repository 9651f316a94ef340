//! Circuit builders: feature maps, ansatz families, and the assembled
//! SWAP-test autoencoder circuit.
//!
//! Latent qubits occupy the lowest wire indices and trash qubits the
//! highest, so the top wires of a diagram are the latent space. Parameter
//! and data slots are separate namespaces; a circuit binds them at run time.

use crate::error::{Error, Result};
use crate::statevec::{AngleSource, Gate, GateKind, StateVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Ordered gate list plus the slot bookkeeping needed to run it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
    n_data: usize,
}

impl Circuit {
    /// Build a circuit, validating gates and slot contiguity.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut param_seen: Vec<bool> = Vec::new();
        let mut data_seen: Vec<bool> = Vec::new();
        for gate in &gates {
            gate.validate(n_qubits)?;
            for src in &gate.angles {
                match *src {
                    AngleSource::Param(i) => {
                        if i >= param_seen.len() {
                            param_seen.resize(i + 1, false);
                        }
                        param_seen[i] = true;
                    }
                    AngleSource::Data(i) => {
                        if i >= data_seen.len() {
                            data_seen.resize(i + 1, false);
                        }
                        data_seen[i] = true;
                    }
                    AngleSource::Literal(_) => {}
                }
            }
        }
        if let Some(hole) = param_seen.iter().position(|&s| !s) {
            return Err(Error::Argument(format!("parameter slot {hole} is never used")));
        }
        if let Some(hole) = data_seen.iter().position(|&s| !s) {
            return Err(Error::Argument(format!("data slot {hole} is never used")));
        }
        Ok(Circuit {
            n_qubits,
            gates,
            n_params: param_seen.len(),
            n_data: data_seen.len(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    /// Resolve a gate's angle bindings against parameter and data vectors.
    pub fn resolve_angles(gate: &Gate, params: &[f64], data: &[f64]) -> Result<Vec<f64>> {
        gate.angles
            .iter()
            .map(|src| match *src {
                AngleSource::Literal(v) => Ok(v),
                AngleSource::Param(i) => params.get(i).copied().ok_or_else(|| {
                    Error::Argument(format!("parameter slot {i} unbound ({} given)", params.len()))
                }),
                AngleSource::Data(i) => data.get(i).copied().ok_or_else(|| {
                    Error::Argument(format!("data slot {i} unbound ({} given)", data.len()))
                }),
            })
            .collect()
    }

    /// Apply every gate in order to `state`.
    pub fn run(&self, state: &mut StateVector, params: &[f64], data: &[f64]) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Size(format!(
                "state has {} qubits, circuit wants {}",
                state.n_qubits(),
                self.n_qubits
            )));
        }
        if params.len() != self.n_params {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        if data.len() != self.n_data {
            return Err(Error::Argument(format!(
                "expected {} data values, got {}",
                self.n_data,
                data.len()
            )));
        }
        for gate in &self.gates {
            let angles = Self::resolve_angles(gate, params, data)?;
            state.apply(gate, &angles)?;
        }
        Ok(())
    }

    /// Run from |0…0⟩ and return the resulting state.
    pub fn execute(&self, params: &[f64], data: &[f64]) -> Result<StateVector> {
        let mut state = StateVector::zero(self.n_qubits)?;
        self.run(&mut state, params, data)?;
        Ok(state)
    }

    /// Gates of a given kind, for structural checks.
    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }
}

/// Wire assignment of the autoencoder register: latent, trash, reference
/// qubits, plus the SWAP-test ancilla.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaePartition {
    pub latent: Vec<usize>,
    pub trash: Vec<usize>,
    pub reference: Vec<usize>,
    pub ancilla: usize,
}

impl QaePartition {
    /// Canonical layout: latent wires first, then trash, then reference,
    /// ancilla last.
    pub fn standard(n_data_qubits: usize, latent_size: usize) -> Result<Self> {
        if latent_size == 0 || latent_size >= n_data_qubits {
            return Err(Error::Partition(format!(
                "latent size {latent_size} invalid for {n_data_qubits} data qubits"
            )));
        }
        let trash_size = n_data_qubits - latent_size;
        Ok(QaePartition {
            latent: (0..latent_size).collect(),
            trash: (latent_size..n_data_qubits).collect(),
            reference: (n_data_qubits..n_data_qubits + trash_size).collect(),
            ancilla: n_data_qubits + trash_size,
        })
    }

    pub fn n_data_qubits(&self) -> usize {
        self.latent.len() + self.trash.len()
    }

    /// Total wires of the assembled SWAP-test circuit.
    pub fn total_qubits(&self) -> usize {
        self.n_data_qubits() + self.reference.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent.is_empty() || self.trash.is_empty() {
            return Err(Error::Partition("latent and trash must both be nonempty".into()));
        }
        if self.reference.len() != self.trash.len() {
            return Err(Error::Partition(format!(
                "reference size {} must equal trash size {}",
                self.reference.len(),
                self.trash.len()
            )));
        }
        let mut all: Vec<usize> = self
            .latent
            .iter()
            .chain(&self.trash)
            .chain(&self.reference)
            .copied()
            .chain(std::iter::once(self.ancilla))
            .collect();
        let expected = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != expected {
            return Err(Error::Partition("wire sets overlap".into()));
        }
        // Data qubits must be exactly 0..n_data, the contract the builders assume.
        let mut data: Vec<usize> = self.latent.iter().chain(&self.trash).copied().collect();
        data.sort_unstable();
        if data != (0..data.len()).collect::<Vec<_>>() {
            return Err(Error::Partition(
                "latent ∪ trash must cover wires 0..n_data_qubits".into(),
            ));
        }
        Ok(())
    }
}

/// One R_x data rotation per qubit; feature i on wire i.
pub fn feature_map_rx(n_features: usize) -> Result<Circuit> {
    if n_features < 1 {
        return Err(Error::Argument("feature map needs at least one feature".into()));
    }
    let gates = (0..n_features)
        .map(|i| Gate::rx(i, AngleSource::Data(i)))
        .collect();
    Circuit::new(n_features, gates)
}

/// Two-feature-per-qubit map: a G layer, a nearest-neighbour CNOT chain,
/// then a second G layer.
pub fn feature_map_g(n_features: usize) -> Result<Circuit> {
    if n_features < 2 || !n_features.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "this feature map packs two features per qubit; got {n_features}"
        )));
    }
    let n_qubits = n_features / 2;
    let mut gates = Vec::new();
    for i in 0..n_qubits {
        gates.push(Gate::g(
            i,
            AngleSource::Literal(FRAC_PI_2),
            AngleSource::Data(2 * i),
            AngleSource::Data(2 * i + 1),
        ));
    }
    for i in 0..n_qubits.saturating_sub(1) {
        gates.push(Gate::cnot(i, i + 1));
    }
    for i in 0..n_qubits {
        gates.push(Gate::g(
            i,
            AngleSource::Data(2 * i),
            AngleSource::Data(2 * i + 1),
            AngleSource::Literal(0.0),
        ));
    }
    Circuit::new(n_qubits, gates)
}

/// R_y layer followed by CNOTs over every qubit pair (i→j, i<j).
pub fn ansatz_all_to_all(n_qubits: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::Argument("all-to-all ansatz needs at least 2 qubits".into()));
    }
    let mut gates: Vec<Gate> = (0..n_qubits)
        .map(|i| Gate::ry(i, AngleSource::Param(i)))
        .collect();
    for i in 0..n_qubits {
        for j in i + 1..n_qubits {
            gates.push(Gate::cnot(i, j));
        }
    }
    Circuit::new(n_qubits, gates)
}

/// Hardware-efficient ansatz: R_y layer plus a nearest-neighbour CNOT chain.
pub fn ansatz_hea(n_qubits: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::Argument("hardware-efficient ansatz needs at least 2 qubits".into()));
    }
    let mut gates: Vec<Gate> = (0..n_qubits)
        .map(|i| Gate::ry(i, AngleSource::Param(i)))
        .collect();
    for i in 0..n_qubits - 1 {
        gates.push(Gate::cnot(i, i + 1));
    }
    Circuit::new(n_qubits, gates)
}

/// Latent-aware ansatz.
///
/// Each layer opens with CNOTs whose controls walk down the trash wires
/// and whose targets cycle through the latent wires, then applies one R_y
/// per qubit (slot `layer·N + wire`). The last layer closes with CNOTs
/// targeting the trash wires. Latent wires are 0..latent_size.
///
/// For a few shapes (e.g. 3 wires with 1 latent) the closing walk lands
/// control and target on the same wire; a same-wire CNOT is not a
/// unitary operation, so that step emits nothing while the walk itself
/// advances unchanged.
pub fn ansatz_new(n_qubits: usize, latent_size: usize, layers: usize) -> Result<Circuit> {
    if latent_size == 0 || latent_size >= n_qubits {
        return Err(Error::Partition(format!(
            "latent size must be in 1..{n_qubits}, got {latent_size}"
        )));
    }
    if layers < 1 {
        return Err(Error::Argument("ansatz needs at least one layer".into()));
    }
    let n = n_qubits;
    let trash = n - latent_size;
    let mut gates = Vec::new();
    for layer in 0..layers {
        let mut counter = 0usize;
        for t in 0..trash {
            if counter >= latent_size {
                counter = 0;
            }
            gates.push(Gate::cnot(n - 1 - t, counter));
            counter += 1;
        }
        for j in 0..n {
            gates.push(Gate::ry(j, AngleSource::Param(layer * n + j)));
        }
        if layer == layers - 1 {
            let mut counter = 0usize;
            for t in 0..trash {
                let target = n - 1 - t;
                if target < counter {
                    counter = 0;
                }
                if counter != target {
                    gates.push(Gate::cnot(counter, target));
                }
                counter += 1;
            }
        }
    }
    Circuit::new(n, gates)
}

/// Compose feature map, ansatz and the SWAP test into one runnable circuit.
///
/// Gate order: feature map, ansatz, H on the ancilla, one CSWAP per trash
/// qubit against its reference partner, H on the ancilla.
pub fn assemble_qae_circuit(
    feature_map: &Circuit,
    ansatz: &Circuit,
    partition: &QaePartition,
) -> Result<Circuit> {
    partition.validate().map_err(|e| Error::Composition(e.to_string()))?;
    let n_data_qubits = partition.n_data_qubits();
    if feature_map.n_qubits() != n_data_qubits || ansatz.n_qubits() != n_data_qubits {
        return Err(Error::Composition(format!(
            "feature map ({}q) and ansatz ({}q) must both span the {} data qubits",
            feature_map.n_qubits(),
            ansatz.n_qubits(),
            n_data_qubits
        )));
    }
    let total = partition.total_qubits();
    let mut gates: Vec<Gate> = Vec::new();
    gates.extend(feature_map.gates().iter().cloned());
    gates.extend(ansatz.gates().iter().cloned());
    gates.push(Gate::h(partition.ancilla));
    let mut trash = partition.trash.clone();
    trash.sort_unstable();
    let mut reference = partition.reference.clone();
    reference.sort_unstable();
    for (&t, &r) in trash.iter().zip(&reference) {
        gates.push(Gate::cswap(partition.ancilla, t, r));
    }
    gates.push(Gate::h(partition.ancilla));
    Circuit::new(total, gates)
}
