//! State diagnostics: Meyer-Wallach global entanglement Q and the
//! stabilizer 2-Rényi magic M₂, plus data/parameter-averaged
//! distributions of either quantity.

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::statevec::StateVector;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const NORM_TOL: f64 = 1e-8;

fn check_normalized(state: &StateVector) -> Result<()> {
    let norm_sq = state.norm_sqr();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::State(format!(
            "state norm² = {norm_sq}, expected 1 within {NORM_TOL}"
        )));
    }
    Ok(())
}

/// Meyer-Wallach global entanglement, Q = 2·(1 − mean single-qubit purity).
///
/// 0 for product states, 1 for maximally entangled ones.
pub fn meyer_wallach_q(state: &StateVector) -> Result<f64> {
    check_normalized(state)?;
    let n = state.n_qubits();
    let mut purity_sum = 0.0;
    for q in 0..n {
        purity_sum += state.subsystem_purity(&[q])?;
    }
    Ok(2.0 * (1.0 - purity_sum / n as f64))
}

/// Literal construction of Q from qubit-deletion maps.
///
/// For each qubit j, project onto bit value b and drop the qubit, giving
/// u = l_j(0)|ψ⟩ and v = l_j(1)|ψ⟩; accumulate the pairwise distance
/// D(u,v) = ½·Σ|uᵢvₖ − uₖvᵢ|² and return (4/n)·Σⱼ D. Quadratic in the
/// state size; kept as a cross-check for the purity form above.
pub fn meyer_wallach_q_literal(state: &StateVector) -> Result<f64> {
    check_normalized(state)?;
    let n = state.n_qubits();
    let amps = state.amplitudes();
    let half = 1usize << (n - 1);
    let mut total = 0.0;
    for q in 0..n {
        let pos = n - 1 - q;
        let mut u = vec![Complex64::new(0.0, 0.0); half];
        let mut v = vec![Complex64::new(0.0, 0.0); half];
        for (i, &amp) in amps.iter().enumerate() {
            let low = i & ((1usize << pos) - 1);
            let high = i >> (pos + 1);
            let reduced = (high << pos) | low;
            if (i >> pos) & 1 == 0 {
                u[reduced] = amp;
            } else {
                v[reduced] = amp;
            }
        }
        let mut d = 0.0;
        for i in 0..half {
            for k in 0..half {
                d += (u[i] * v[k] - u[k] * v[i]).norm_sqr();
            }
        }
        total += 0.5 * d;
    }
    Ok(4.0 / n as f64 * total)
}

/// Largest register the 4ⁿ Pauli-string enumeration will accept.
pub const MAX_MAGIC_QUBITS: usize = 8;

/// Expectation ⟨ψ|P|ψ⟩ of one Pauli string.
///
/// `digits` holds one base-4 code per qubit (0=I, 1=X, 2=Y, 3=Z), qubit 0
/// first.
fn pauli_expectation(amps: &[Complex64], n: usize, digits: &[u8]) -> f64 {
    let mut x_mask = 0usize; // bits flipped (X and Y)
    let mut z_mask = 0usize; // bits phased (Z and Y)
    let mut y_count = 0u32;
    for (q, &d) in digits.iter().enumerate() {
        let bit = 1usize << (n - 1 - q);
        match d {
            1 => x_mask |= bit,
            2 => {
                x_mask |= bit;
                z_mask |= bit;
                y_count += 1;
            }
            3 => z_mask |= bit,
            _ => {}
        }
    }
    // Per Y factor: Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩. Writing the output index j,
    // the source is j⊕x_mask and each Y contributes i·(−1)^{source bit},
    // each Z contributes (−1)^{output bit} with output = source for Z.
    let y_phase = match y_count % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &aj) in amps.iter().enumerate() {
        let src = j ^ x_mask;
        let phased_bits = (src & z_mask).count_ones();
        let sign = if phased_bits.is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += aj.conj() * amps[src] * sign;
    }
    (acc * y_phase).re
}

/// Stabilizer 2-Rényi magic, M₂ = −log₂( Σ_P ⟨ψ|P|ψ⟩⁴ / d ).
///
/// Zero exactly on stabilizer states and bounded by log₂(d+1) − 1.
/// Enumerates all 4ⁿ Pauli strings, so the register is capped at
/// [`MAX_MAGIC_QUBITS`].
pub fn stabilizer_renyi_m2(state: &StateVector) -> Result<f64> {
    let n = state.n_qubits();
    if n > MAX_MAGIC_QUBITS {
        return Err(Error::Size(format!(
            "magic enumeration covers 4^{n} Pauli strings; max {MAX_MAGIC_QUBITS} qubits"
        )));
    }
    check_normalized(state)?;
    let amps = state.amplitudes();
    let n_strings = 1usize << (2 * n);
    let fourths: Vec<f64> = (0..n_strings)
        .into_par_iter()
        .map(|code| {
            let mut digits = [0u8; MAX_MAGIC_QUBITS];
            let mut c = code;
            // Base-4 expansion, qubit 0 in the most significant digit.
            for q in (0..n).rev() {
                digits[q] = (c & 3) as u8;
                c >>= 2;
            }
            let e = pauli_expectation(amps, n, &digits[..n]);
            e.powi(4)
        })
        .collect();
    let sum: f64 = fourths.iter().sum();
    let d = (1usize << n) as f64;
    let m2 = -(sum / d).log2();
    if m2 > -1e-12 && m2 < 0.0 {
        Ok(0.0)
    } else {
        Ok(m2)
    }
}

/// Which diagnostic a distribution holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Q,
    M2,
}

impl MetricKind {
    pub fn evaluate(self, state: &StateVector) -> Result<f64> {
        match self {
            MetricKind::Q => meyer_wallach_q(state),
            MetricKind::M2 => stabilizer_renyi_m2(state),
        }
    }
}

/// Where the circuit parameters come from when sampling a distribution.
#[derive(Clone, Debug)]
pub enum ThetaSource {
    /// A fixed (trained) parameter vector; one sample per data point.
    Trained(Vec<f64>),
    /// Uniform draws from [0,2π)^dim; one data-averaged sample per draw.
    Uniform { n_draws: usize, seed: u64 },
}

/// Labels which sampling mode produced a distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    TrainedThetaOverData,
    RandomThetaOverData,
}

/// Samples of Q or M₂ with their summary statistics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricDistribution {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub provenance: Provenance,
    pub n_theta_draws: usize,
    pub n_data_points: usize,
}

impl MetricDistribution {
    fn summarize(
        samples: Vec<f64>,
        provenance: Provenance,
        n_theta_draws: usize,
        n_data_points: usize,
    ) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        MetricDistribution {
            samples,
            mean,
            std: var.sqrt(),
            provenance,
            n_theta_draws,
            n_data_points,
        }
    }
}

/// Metric value of the circuit output for one (θ, x) binding.
fn metric_at(circuit: &Circuit, theta: &[f64], x: &[f64], metric: MetricKind) -> Result<f64> {
    let state = circuit.execute(theta, x)?;
    metric.evaluate(&state)
}

/// Sample a Q or M₂ distribution for a circuit over a dataset.
///
/// Trained mode yields one value per data point at the given θ. Uniform
/// mode draws `n_draws` parameter vectors up front from one seeded
/// generator (row by row, in draw order) and yields the data-averaged
/// metric per draw.
pub fn sample_metric_distribution(
    circuit: &Circuit,
    data: &[Vec<f64>],
    theta_source: &ThetaSource,
    metric: MetricKind,
) -> Result<MetricDistribution> {
    if data.is_empty() {
        return Err(Error::Argument("metric sampling needs at least one data point".into()));
    }
    match theta_source {
        ThetaSource::Trained(theta) => {
            let samples: Vec<f64> = data
                .par_iter()
                .map(|x| metric_at(circuit, theta, x, metric))
                .collect::<Result<_>>()?;
            Ok(MetricDistribution::summarize(
                samples,
                Provenance::TrainedThetaOverData,
                1,
                data.len(),
            ))
        }
        ThetaSource::Uniform { n_draws, seed } => {
            if *n_draws == 0 {
                return Err(Error::Argument("uniform sampling needs at least one draw".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let dim = circuit.n_params();
            let thetas: Vec<Vec<f64>> = (0..*n_draws)
                .map(|_| (0..dim).map(|_| rng.random::<f64>() * TAU).collect())
                .collect();
            let samples: Vec<f64> = thetas
                .iter()
                .map(|theta| {
                    let values: Vec<f64> = data
                        .par_iter()
                        .map(|x| metric_at(circuit, theta, x, metric))
                        .collect::<Result<_>>()?;
                    Ok(values.iter().sum::<f64>() / values.len() as f64)
                })
                .collect::<Result<_>>()?;
            Ok(MetricDistribution::summarize(
                samples,
                Provenance::RandomThetaOverData,
                *n_draws,
                data.len(),
            ))
        }
    }
}
