//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of the basis index, so the top wire
//! of a circuit diagram maps to the leading bit. Rotation gates follow the
//! half-angle convention R_a(θ) = exp(−iθσ_a/2). Global phase is left
//! untouched; every observable exposed here is phase-insensitive.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Hard cap on register width: 2^24 amplitudes (256 MiB of complex doubles).
pub const MAX_QUBITS: usize = 24;

/// Where a gate angle comes from when the circuit is run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSource {
    /// Fixed value in radians.
    Literal(f64),
    /// Trainable parameter slot.
    Param(usize),
    /// Classical feature slot.
    Data(usize),
}

/// Gate alphabet used by the feature maps, ansatze and the SWAP test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    /// G(φ,θ,ω): R_z(φ), then R_y(θ), then R_z(ω) on one wire.
    G,
    H,
    Cnot,
    Cswap,
}

impl GateKind {
    /// Number of angles the gate carries.
    pub fn angle_arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::G => 3,
            GateKind::H | GateKind::Cnot | GateKind::Cswap => 0,
        }
    }

    /// Number of wires the gate acts on.
    pub fn wire_arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::G | GateKind::H => 1,
            GateKind::Cnot => 2,
            GateKind::Cswap => 3,
        }
    }
}

/// One gate instance: kind, target wires, and angle bindings.
///
/// CNOT wires are (control, target); CSWAP wires are (control, a, b).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    pub angles: Vec<AngleSource>,
}

impl Gate {
    pub fn rx(wire: usize, angle: AngleSource) -> Self {
        Gate { kind: GateKind::Rx, wires: vec![wire], angles: vec![angle] }
    }

    pub fn ry(wire: usize, angle: AngleSource) -> Self {
        Gate { kind: GateKind::Ry, wires: vec![wire], angles: vec![angle] }
    }

    pub fn rz(wire: usize, angle: AngleSource) -> Self {
        Gate { kind: GateKind::Rz, wires: vec![wire], angles: vec![angle] }
    }

    pub fn g(wire: usize, phi: AngleSource, theta: AngleSource, omega: AngleSource) -> Self {
        Gate { kind: GateKind::G, wires: vec![wire], angles: vec![phi, theta, omega] }
    }

    pub fn h(wire: usize) -> Self {
        Gate { kind: GateKind::H, wires: vec![wire], angles: vec![] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, wires: vec![control, target], angles: vec![] }
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Cswap, wires: vec![control, a, b], angles: vec![] }
    }

    /// Check wire distinctness/bounds and angle arity against a register width.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.wires.len() != self.kind.wire_arity() {
            return Err(Error::Arity(format!(
                "{:?} takes {} wires, got {}",
                self.kind,
                self.kind.wire_arity(),
                self.wires.len()
            )));
        }
        if self.angles.len() != self.kind.angle_arity() {
            return Err(Error::Arity(format!(
                "{:?} takes {} angles, got {}",
                self.kind,
                self.kind.angle_arity(),
                self.angles.len()
            )));
        }
        for &w in &self.wires {
            if w >= n_qubits {
                return Err(Error::Index(format!(
                    "wire {w} out of range for {n_qubits} qubits"
                )));
            }
        }
        for (i, &a) in self.wires.iter().enumerate() {
            if self.wires[i + 1..].contains(&a) {
                return Err(Error::Index(format!("duplicate wire {a} in {:?}", self.kind)));
            }
        }
        Ok(())
    }
}

/// Dense complex amplitude vector over `n_qubits` qubits.
#[derive(Clone, Debug)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// All-zero computational basis state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wrap raw amplitudes; the vector must already be normalized.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if amps.len() != 1 << n_qubits {
            return Err(Error::Size(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << n_qubits,
                n_qubits,
                amps.len()
            )));
        }
        let state = StateVector { n_qubits, amps };
        if (state.norm_sqr() - 1.0).abs() > 1e-8 {
            return Err(Error::State(format!(
                "amplitudes not normalized: |ψ|² = {}",
                state.norm_sqr()
            )));
        }
        Ok(state)
    }

    /// Wrap amplitudes without the norm check; test scaffolding only.
    #[cfg(test)]
    pub(crate) fn from_amplitudes_unchecked(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask selecting `qubit` inside a basis index (qubit 0 = MSB).
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// Apply `gate` with its angles already resolved to radians.
    pub fn apply(&mut self, gate: &Gate, resolved_angles: &[f64]) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if resolved_angles.len() != gate.kind.angle_arity() {
            return Err(Error::Arity(format!(
                "{:?} takes {} resolved angles, got {}",
                gate.kind,
                gate.kind.angle_arity(),
                resolved_angles.len()
            )));
        }
        match gate.kind {
            GateKind::Rx => self.apply_1q(gate.wires[0], rx_matrix(resolved_angles[0])),
            GateKind::Ry => self.apply_1q(gate.wires[0], ry_matrix(resolved_angles[0])),
            GateKind::Rz => self.apply_1q(gate.wires[0], rz_matrix(resolved_angles[0])),
            GateKind::G => {
                // G(φ,θ,ω) = R_z(ω) R_y(θ) R_z(φ): rightmost factor acts first.
                let [phi, theta, omega] = [resolved_angles[0], resolved_angles[1], resolved_angles[2]];
                self.apply_1q(gate.wires[0], rz_matrix(phi));
                self.apply_1q(gate.wires[0], ry_matrix(theta));
                self.apply_1q(gate.wires[0], rz_matrix(omega));
            }
            GateKind::H => self.apply_1q(gate.wires[0], h_matrix()),
            GateKind::Cnot => self.apply_cnot(gate.wires[0], gate.wires[1]),
            GateKind::Cswap => self.apply_cswap(gate.wires[0], gate.wires[1], gate.wires[2]),
        }
        Ok(())
    }

    fn apply_1q(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_cswap(&mut self, control: usize, a: usize, b: usize) {
        let cm = self.mask(control);
        let am = self.mask(a);
        let bm = self.mask(b);
        for i in 0..self.amps.len() {
            // Visit each swapped pair once: bit a set, bit b clear.
            if i & cm != 0 && i & am != 0 && i & bm == 0 {
                self.amps.swap(i, (i & !am) | bm);
            }
        }
    }

    /// Reduced density matrix over `keep`, tracing out everything else.
    ///
    /// Kept qubits appear in ascending qubit-index order, the lowest index
    /// taking the most significant bit of the reduced index.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::Argument("keep set must be nonempty".into()));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() {
            return Err(Error::Argument("keep set contains duplicates".into()));
        }
        for &q in &kept {
            if q >= self.n_qubits {
                return Err(Error::Index(format!(
                    "kept qubit {q} out of range for {} qubits",
                    self.n_qubits
                )));
            }
        }
        let env: Vec<usize> = (0..self.n_qubits).filter(|q| !kept.contains(q)).collect();
        let k = kept.len();
        let dim = 1usize << k;
        let env_dim = 1usize << env.len();

        // Basis index from a (kept bits, env bits) pair.
        let compose = |kept_bits: usize, env_bits: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in kept.iter().enumerate() {
                if kept_bits & (1 << (k - 1 - pos)) != 0 {
                    idx |= self.mask(q);
                }
            }
            for (pos, &q) in env.iter().enumerate() {
                if env_bits & (1 << (env.len() - 1 - pos)) != 0 {
                    idx |= self.mask(q);
                }
            }
            idx
        };

        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for row in 0..dim {
            for col in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for e in 0..env_dim {
                    acc += self.amps[compose(row, e)] * self.amps[compose(col, e)].conj();
                }
                rho[row * dim + col] = acc;
            }
        }
        Ok(DensityMatrix { dim, data: rho })
    }

    /// Tr(ρ²) of the reduced state over `keep`.
    pub fn subsystem_purity(&self, keep: &[usize]) -> Result<f64> {
        Ok(self.reduced_density(keep)?.purity())
    }

    /// Probability of measuring `outcome` on `qubit` in the computational basis.
    pub fn basis_probability(&self, qubit: usize, outcome: u8) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::Index(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        if outcome > 1 {
            return Err(Error::Argument(format!("outcome must be 0 or 1, got {outcome}")));
        }
        let mask = self.mask(qubit);
        let want = if outcome == 1 { mask } else { 0 };
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Probability that every qubit in `qubits` reads 0.
    pub fn probability_all_zero(&self, qubits: &[usize]) -> Result<f64> {
        if qubits.is_empty() {
            return Err(Error::Argument("qubit set must be nonempty".into()));
        }
        let mut mask = 0usize;
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::Index(format!(
                    "qubit {q} out of range for {} qubits",
                    self.n_qubits
                )));
            }
            mask |= self.mask(q);
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

/// Row-major density matrix over a kept subsystem.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.element(i, i)).sum()
    }

    /// Tr(ρ²); real for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                // Tr(ρ²) = Σ_{rc} ρ_{rc} ρ_{cr} = Σ_{rc} |ρ_{rc}|² for Hermitian ρ.
                acc += self.element(r, c).norm_sqr();
            }
        }
        acc
    }
}

pub(crate) fn rx_matrix(theta: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

pub(crate) fn ry_matrix(theta: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub(crate) fn rz_matrix(theta: f64) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    [
        [Complex64::from_polar(1.0, -theta / 2.0), zero],
        [zero, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

pub(crate) fn h_matrix() -> [[Complex64; 2]; 2] {
    let x = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[x, x], [x, -x]]
}
