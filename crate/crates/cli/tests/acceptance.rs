//! Release acceptance suite: nine numbered end-to-end checks covering the
//! simulator, gradients, the circuit diagnostics, the latent-aware layer
//! recipe, the classical baseline, the bundled benchmark, and CLI
//! reproducibility. Each check prints one `criterion N: PASS` line on
//! success (visible with `--nocapture`); an assertion failure marks that
//! criterion as failed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use qaed_core::cae::{param_count, CaeGradients, MlpAutoencoder};
use qaed_core::circuits::{
    ansatz_all_to_all, ansatz_hea, ansatz_new, assemble_qae_circuit, feature_map_rx, Circuit,
    QaePartition,
};
use qaed_core::harness::{run_experiment, ExperimentConfig, RunReport};
use qaed_core::metrics::{meyer_wallach_q, meyer_wallach_q_literal, stabilizer_renyi_m2};
use qaed_core::optim::parameter_shift_grad;
use qaed_core::qae::{FidelityMode, QaeModel};
use qaed_core::statevec::{AngleSource, Gate, GateKind, StateVector};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lit(v: f64) -> AngleSource {
    AngleSource::Literal(v)
}

/// Haar-ish random pure state: i.i.d. complex amplitudes, normalized.
fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let dim = 1usize << n;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(n, amps).unwrap()
}

/// Random sequence over the Clifford generators H, S (R_z(π/2) up to a
/// global phase) and CNOT.
fn random_clifford_gates(n: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(len);
    for _ in 0..len {
        match if n == 1 { rng.random_range(0..2) } else { rng.random_range(0..3) } {
            0 => gates.push(Gate::h(rng.random_range(0..n))),
            1 => gates.push(Gate::rz(rng.random_range(0..n), lit(FRAC_PI_2))),
            _ => {
                let control = rng.random_range(0..n);
                let mut target = rng.random_range(0..n);
                while target == control {
                    target = rng.random_range(0..n);
                }
                gates.push(Gate::cnot(control, target));
            }
        }
    }
    gates
}

/// One random single-qubit R_z·R_y·R_z block per wire.
fn random_local_rotations(n: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(3 * n);
    for q in 0..n {
        gates.push(Gate::rz(q, lit(rng.random::<f64>() * TAU)));
        gates.push(Gate::ry(q, lit(rng.random::<f64>() * TAU)));
        gates.push(Gate::rz(q, lit(rng.random::<f64>() * TAU)));
    }
    gates
}

fn run_gates(n: usize, gates: Vec<Gate>) -> StateVector {
    Circuit::new(n, gates).unwrap().execute(&[], &[]).unwrap()
}

fn apply_gates(state: &mut StateVector, gates: Vec<Gate>) {
    let circuit = Circuit::new(state.n_qubits(), gates).unwrap();
    circuit.run(state, &[], &[]).unwrap();
}

/// Random valid autoencoder built from its encoder half: up to two hidden
/// layers plus a latent width strictly below the input.
fn random_autoencoder(rng: &mut ChaCha8Rng, seed: u64) -> MlpAutoencoder {
    let n_input = rng.random_range(2..=6usize);
    let n_hidden = rng.random_range(0..=2usize);
    let mut encoder: Vec<usize> = (0..n_hidden).map(|_| rng.random_range(1..=8usize)).collect();
    encoder.push(rng.random_range(1..n_input));
    MlpAutoencoder::from_encoder_layers(n_input, &encoder, seed).unwrap()
}

/// Flatten gradients in `flat_params` order: weights then biases per layer.
fn flatten_gradients(grads: &CaeGradients) -> Vec<f64> {
    let mut flat = Vec::new();
    for (w, b) in grads.d_weights.iter().zip(&grads.d_biases) {
        flat.extend_from_slice(w);
        flat.extend_from_slice(b);
    }
    flat
}

#[test]
fn criterion_1_exact_fidelity_matches_swap_test() {
    let started = Instant::now();
    let mut rng = rng(101);
    for &(n, latent, layers) in &[(4usize, 2usize, 2usize), (8, 5, 1)] {
        let feature_map = feature_map_rx(n).unwrap();
        let ansatz = ansatz_new(n, latent, layers).unwrap();
        let partition = QaePartition::standard(n, latent).unwrap();
        let full = assemble_qae_circuit(&feature_map, &ansatz, &partition).unwrap();
        let exact = QaeModel::new(
            feature_map.clone(),
            ansatz.clone(),
            partition.clone(),
            FidelityMode::Exact,
        )
        .unwrap();
        let swapped =
            QaeModel::new(feature_map, ansatz, partition.clone(), FidelityMode::SwapTest).unwrap();
        let n_params = exact.n_params();
        for draw in 0..500 {
            let theta: Vec<f64> = (0..n_params).map(|_| rng.random::<f64>() * TAU).collect();
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * PI).collect();
            let f_exact = exact.trash_fidelity_with(&theta, &x).unwrap();
            // Oracle: simulate the assembled SWAP-test circuit directly.
            let state = full.execute(&theta, &x).unwrap();
            let f_circuit = 2.0 * state.basis_probability(partition.ancilla, 0).unwrap() - 1.0;
            assert!(
                (f_exact - f_circuit).abs() < 1e-10,
                "{n} qubits draw {draw}: exact {f_exact} vs circuit {f_circuit}"
            );
            let f_mode = swapped.trash_fidelity_with(&theta, &x).unwrap();
            assert!(
                (f_mode - f_circuit).abs() < 1e-10,
                "{n} qubits draw {draw}: swap mode {f_mode} vs circuit {f_circuit}"
            );
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    assert!(seconds < 60.0, "fidelity comparison took {seconds:.1}s, budget is 60s");
    println!("criterion 1: PASS (500 draws at 4 and 8 data qubits, {seconds:.1}s)");
}

#[test]
fn criterion_2_gradients_match_finite_differences() {
    let mut rng = rng(202);
    let h = 1e-5;
    // Circuit models: two-point shift rule against central differences.
    for i in 0..50usize {
        let n = rng.random_range(2..=4usize);
        let latent = rng.random_range(1..n);
        let feature_map = feature_map_rx(n).unwrap();
        let ansatz = match i % 3 {
            0 => ansatz_all_to_all(n).unwrap(),
            1 => ansatz_hea(n).unwrap(),
            _ => ansatz_new(n, latent, rng.random_range(1..=2usize)).unwrap(),
        };
        let partition = QaePartition::standard(n, latent).unwrap();
        let mode = if i % 2 == 0 { FidelityMode::Exact } else { FidelityMode::SwapTest };
        let mut model = QaeModel::new(feature_map, ansatz, partition, mode).unwrap();
        let theta: Vec<f64> = (0..model.n_params()).map(|_| rng.random::<f64>() * TAU).collect();
        model.set_theta(theta.clone()).unwrap();
        let batch: Vec<Vec<f64>> =
            (0..2).map(|_| (0..n).map(|_| rng.random::<f64>() * PI).collect()).collect();
        let grad = parameter_shift_grad(&model, &batch).unwrap();
        for k in 0..theta.len() {
            let mut plus = theta.clone();
            plus[k] += h;
            let mut minus = theta.clone();
            minus[k] -= h;
            let fd = (model.batch_loss_with(&plus, &batch).unwrap()
                - model.batch_loss_with(&minus, &batch).unwrap())
                / (2.0 * h);
            assert!(
                (grad[k] - fd).abs() < 1e-6,
                "model {i} slot {k}: shift {} vs difference {fd}",
                grad[k]
            );
        }
    }
    // Classical baseline: analytic backprop against the same differences.
    for i in 0..50u64 {
        let mut model = random_autoencoder(&mut rng, 5000 + i);
        let x: Vec<f64> = (0..model.n_inputs()).map(|_| rng.random::<f64>()).collect();
        let (_, cache) = model.forward(&x).unwrap();
        let flat_grad = flatten_gradients(&model.backward(&x, &cache).unwrap());
        let base = model.flat_params();
        assert_eq!(flat_grad.len(), base.len());
        for k in 0..base.len() {
            let mut plus = base.clone();
            plus[k] += h;
            model.set_flat_params(&plus).unwrap();
            let loss_plus = model.reconstruction_error(&x).unwrap();
            let mut minus = base.clone();
            minus[k] -= h;
            model.set_flat_params(&minus).unwrap();
            let loss_minus = model.reconstruction_error(&x).unwrap();
            let fd = (loss_plus - loss_minus) / (2.0 * h);
            assert!(
                (flat_grad[k] - fd).abs() < 1e-6,
                "network {i} param {k}: backprop {} vs difference {fd}",
                flat_grad[k]
            );
        }
    }
    println!("criterion 2: PASS (50 circuit models and 50 baseline networks)");
}

#[test]
fn criterion_3_entanglement_measure_reference_values() {
    let mut rng = rng(303);
    // Product states carry no entanglement.
    for _ in 0..100 {
        let n = rng.random_range(2..=5usize);
        let state = run_gates(n, random_local_rotations(n, &mut rng));
        let q = meyer_wallach_q(&state).unwrap();
        assert!(q.abs() <= 1e-10, "product state gave Q = {q:e}");
    }
    // Bell (n = 2) and the larger GHZ states saturate the measure.
    for n in 2..=5usize {
        let mut gates = vec![Gate::h(0)];
        for target in 1..n {
            gates.push(Gate::cnot(0, target));
        }
        let q = meyer_wallach_q(&run_gates(n, gates)).unwrap();
        assert!((q - 1.0).abs() <= 1e-10, "GHZ on {n} qubits gave Q = {q}");
    }
    // Three-qubit W state: Q = 8/9.
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let w = StateVector::from_amplitudes(3, vec![zero, a, a, zero, a, zero, zero, zero]).unwrap();
    let q_w = meyer_wallach_q(&w).unwrap();
    assert!((q_w - 8.0 / 9.0).abs() <= 1e-10, "W state gave Q = {q_w}, want 8/9");
    // Invariance under local rotations.
    for _ in 0..25 {
        let n = rng.random_range(2..=4usize);
        let mut state = random_state(n, &mut rng);
        let before = meyer_wallach_q(&state).unwrap();
        apply_gates(&mut state, random_local_rotations(n, &mut rng));
        let after = meyer_wallach_q(&state).unwrap();
        assert!(
            (before - after).abs() <= 1e-10,
            "local rotations moved Q from {before} to {after}"
        );
    }
    // The purity form agrees with the direct distance form.
    for _ in 0..200 {
        let state = random_state(3, &mut rng);
        let fast = meyer_wallach_q(&state).unwrap();
        let literal = meyer_wallach_q_literal(&state).unwrap();
        assert!((fast - literal).abs() <= 1e-10, "purity {fast} vs distance {literal}");
    }
    println!("criterion 3: PASS (product, GHZ, W, rotation invariance, both forms)");
}

#[test]
fn criterion_4_magic_measure_reference_values() {
    let mut rng = rng(404);
    // Stabilizer states have zero magic.
    for _ in 0..100 {
        let n = rng.random_range(1..=4usize);
        let state = run_gates(n, random_clifford_gates(n, 30, &mut rng));
        let m2 = stabilizer_renyi_m2(&state).unwrap();
        assert!(m2.abs() <= 1e-9, "stabilizer state gave M2 = {m2:e}");
    }
    // The T state: M2 = log2(4/3).
    let t_state = run_gates(1, vec![Gate::h(0), Gate::rz(0, lit(FRAC_PI_4))]);
    let m2_t = stabilizer_renyi_m2(&t_state).unwrap();
    let expected = (4.0f64 / 3.0).log2();
    assert!((m2_t - expected).abs() <= 1e-10, "T state gave M2 = {m2_t}, want {expected}");
    // Invariance under Clifford circuits, magic states included.
    for _ in 0..10 {
        let n = rng.random_range(2..=3usize);
        let mut state = random_state(n, &mut rng);
        let before = stabilizer_renyi_m2(&state).unwrap();
        apply_gates(&mut state, random_clifford_gates(n, 30, &mut rng));
        let after = stabilizer_renyi_m2(&state).unwrap();
        assert!(
            (before - after).abs() <= 1e-9,
            "Clifford circuit moved M2 from {before} to {after}"
        );
    }
    // Range bound: 0 <= M2 <= log2(d + 1) - 1.
    for _ in 0..1000 {
        let n = rng.random_range(1..=4usize);
        let state = random_state(n, &mut rng);
        let m2 = stabilizer_renyi_m2(&state).unwrap();
        let upper = ((1u64 << n) as f64 + 1.0).log2() - 1.0;
        assert!(
            m2 >= -1e-12 && m2 <= upper + 1e-9,
            "M2 = {m2} outside [0, {upper}] on {n} qubits"
        );
    }
    println!("criterion 4: PASS (stabilizer zeros, T state, Clifford invariance, bounds)");
}

/// One step of the latent-aware layer recipe, for comparing the builder
/// against an independent transcription.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Step {
    Cnot(usize, usize),
    Ry { wire: usize, slot: usize },
}

/// Literal transcription of the latent-aware layer recipe: per layer the
/// CNOT controls walk down the trash wires while the targets cycle through
/// the latent wires, one R_y per wire follows, and the last layer closes
/// with a CNOT walk back onto the trash wires. When the closing walk lands
/// control and target on the same wire there is no gate to apply, so that
/// step emits nothing while the counter still advances.
fn recipe_steps(n: usize, latent: usize, layers: usize) -> Vec<Step> {
    let trash = n - latent;
    let mut steps = Vec::new();
    for layer in 0..layers {
        let mut counter = 0usize;
        for t in 0..trash {
            if counter >= latent {
                counter = 0;
            }
            steps.push(Step::Cnot(n - 1 - t, counter));
            counter += 1;
        }
        for wire in 0..n {
            steps.push(Step::Ry { wire, slot: layer * n + wire });
        }
        if layer == layers - 1 {
            let mut counter = 0usize;
            for t in 0..trash {
                let target = n - 1 - t;
                if target < counter {
                    counter = 0;
                }
                if counter != target {
                    steps.push(Step::Cnot(counter, target));
                }
                counter += 1;
            }
        }
    }
    steps
}

fn circuit_steps(circuit: &Circuit) -> Vec<Step> {
    circuit
        .gates()
        .iter()
        .map(|g| match g.kind {
            GateKind::Cnot => Step::Cnot(g.wires[0], g.wires[1]),
            GateKind::Ry => match g.angles[0] {
                AngleSource::Param(slot) => Step::Ry { wire: g.wires[0], slot },
                ref other => panic!("R_y angle bound to {other:?}, expected a parameter slot"),
            },
            other => panic!("unexpected {other:?} gate in the latent-aware ansatz"),
        })
        .collect()
}

#[test]
fn criterion_5_latent_aware_ansatz_matches_recipe() {
    for n in 2..=8usize {
        for latent in 1..n {
            for layers in 1..=6usize {
                let built = circuit_steps(&ansatz_new(n, latent, layers).unwrap());
                assert_eq!(
                    built,
                    recipe_steps(n, latent, layers),
                    "gate walk diverges at ({n} wires, latent {latent}, {layers} layers)"
                );
            }
        }
    }
    // Worked example: 4 wires, latent 2, one layer.
    let expected = vec![
        Step::Cnot(3, 0),
        Step::Cnot(2, 1),
        Step::Ry { wire: 0, slot: 0 },
        Step::Ry { wire: 1, slot: 1 },
        Step::Ry { wire: 2, slot: 2 },
        Step::Ry { wire: 3, slot: 3 },
        Step::Cnot(0, 3),
        Step::Cnot(1, 2),
    ];
    assert_eq!(circuit_steps(&ansatz_new(4, 2, 1).unwrap()), expected);
    assert_eq!(ansatz_new(4, 2, 3).unwrap().n_params(), 12);
    assert_eq!(ansatz_new(8, 5, 6).unwrap().n_params(), 48);
    println!("criterion 5: PASS (all shapes to 8 wires and 6 layers, worked example)");
}

#[test]
fn criterion_6_parameter_count_matches_stored_scalars() {
    let mut rng = rng(606);
    for i in 0..100u64 {
        let model = random_autoencoder(&mut rng, 7000 + i);
        let counted = param_count(model.layer_sizes()).unwrap();
        assert_eq!(
            counted,
            model.flat_params().len(),
            "closed form disagrees with stored scalars for {:?}",
            model.layer_sizes()
        );
        assert_eq!(counted, model.stored_param_count());
    }
    assert_eq!(param_count(&[5, 4, 3, 2, 3, 4, 5]).unwrap(), 97);
    println!("criterion 6: PASS (100 random shapes, worked example 97)");
}

struct TimedRun {
    report: RunReport,
    seconds: f64,
}

static BENCHMARK: OnceLock<TimedRun> = OnceLock::new();

fn shipped_config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let raw = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading {} failed: {e}", path.display()));
    serde_json::from_str(&raw).unwrap_or_else(|e| panic!("parsing {name} failed: {e}"))
}

/// The separated benchmark run, shared between criteria 7 and 8.
fn benchmark_run() -> &'static TimedRun {
    BENCHMARK.get_or_init(|| {
        let config = shipped_config("synth-benchmark.json");
        let started = Instant::now();
        let report = run_experiment(&config).expect("benchmark experiment runs");
        TimedRun { report, seconds: started.elapsed().as_secs_f64() }
    })
}

#[test]
fn criterion_7_benchmark_separates_and_null_is_chance() {
    let bench = benchmark_run();
    assert!(
        bench.report.auc_mean > 0.9,
        "separated benchmark mean auc {} is not above 0.9",
        bench.report.auc_mean
    );
    let started = Instant::now();
    let null = run_experiment(&shipped_config("synth-null.json")).expect("null experiment runs");
    let null_seconds = started.elapsed().as_secs_f64();
    assert!(
        (null.auc_mean - 0.5).abs() <= 0.05,
        "null benchmark mean auc {} strays from chance",
        null.auc_mean
    );
    let total = bench.seconds + null_seconds;
    assert!(total < 900.0, "benchmark pair took {total:.0}s, budget is 900s");
    println!(
        "criterion 7: PASS (separated auc {:.4}, null auc {:.4}, {total:.0}s)",
        bench.report.auc_mean, null.auc_mean
    );
}

#[test]
fn criterion_8_diagnostics_decrease_during_training() {
    let bench = benchmark_run();
    for fold in &bench.report.folds {
        let first = fold.snapshots.first().expect("fold carries snapshots");
        let last = fold.snapshots.last().expect("fold carries snapshots");
        assert_eq!(first.epoch, 0, "first snapshot must precede training");
        assert_eq!(last.epoch, bench.report.config.train.epochs);
        let (q_start, q_end) = (first.mean_q.unwrap(), last.mean_q.unwrap());
        let (m_start, m_end) = (first.mean_m2.unwrap(), last.mean_m2.unwrap());
        assert!(q_end < q_start, "fold {}: Q went {q_start:.4} -> {q_end:.4}", fold.fold);
        assert!(m_end < m_start, "fold {}: M2 went {m_start:.4} -> {m_end:.4}", fold.fold);
    }
    println!("criterion 8: PASS (trained Q and M2 below their starting values on every fold)");
}

const TRAIN_CONFIG: &str = r#"{
  "data": {"kind": "bundled", "separation": 3.0, "n_background": 120, "n_signal": 60, "seed": 9},
  "model": {"family": "qae", "feature_map": "g", "ansatz": "latent_aware", "latent": 2, "layers": 1},
  "train": {"epochs": 2, "batch_size": 10, "lr": 0.005, "snapshot_every": 1, "snapshot_q": true, "snapshot_m2": true},
  "folds": {"n_train_bg": 40, "n_test": 40, "n_folds": 2},
  "seed": 3
}"#;

const SYNTH_CONFIG: &str = r#"{
  "data": {"kind": "bundled", "separation": 1.5, "n_background": 50, "n_signal": 30, "seed": 21}
}"#;

const EVAL_CONFIG: &str = r#"{
  "model": "model.json",
  "data": {"kind": "bundled", "separation": 3.0, "n_background": 80, "n_signal": 40, "seed": 99}
}"#;

const METRICS_CONFIG: &str = r#"{
  "model": "model.json",
  "data": {"kind": "bundled", "separation": 3.0, "n_background": 60, "n_signal": 20, "seed": 99},
  "theta": {"source": "uniform", "n_draws": 4, "seed": 12},
  "metrics": ["q", "m2"]
}"#;

const GRID_CONFIG: &str = r#"{
  "base": {
    "data": {"kind": "bundled", "separation": 3.0, "n_background": 120, "n_signal": 60, "seed": 9},
    "model": {"family": "cae", "encoder_layers": [4, 2], "sparsity": 0.0},
    "train": {"epochs": 3, "batch_size": 10, "lr": 0.001, "snapshot_every": 0, "snapshot_q": false, "snapshot_m2": false},
    "folds": {"n_train_bg": 40, "n_test": 40, "n_folds": 2},
    "seed": 3
  },
  "space": {"family": "cae", "batch_sizes": [10], "hidden_layers": [1, 2], "neurons": [2, 6], "latent": [1, 3], "prune": [0.0, 0.5]},
  "budget": 2,
  "seed": 99
}"#;

fn qaed_in(dir: &Path, args: &[&str]) -> std::process::Output {
    let output = Command::new(env!("CARGO_BIN_EXE_qaed"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("qaed binary runs");
    assert!(
        output.status.success(),
        "qaed {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

/// Collect (name, bytes) for every file in a directory, sorted by name.
fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|entry| {
            let entry = entry.unwrap();
            (entry.file_name().into_string().unwrap(), fs::read(entry.path()).unwrap())
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

/// Run one subcommand twice in fresh working directories and demand
/// identical stdout plus byte-identical output files.
fn assert_reproducible(command: &str, config: &str, extra_files: &[(&str, &[u8])]) {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("config.json"), config).unwrap();
        for (name, bytes) in extra_files {
            fs::write(dir.path().join(name), bytes).unwrap();
        }
        let output = qaed_in(dir.path(), &[command, "--config", "config.json", "--out", "out"]);
        let files = dir_contents(&dir.path().join("out"));
        assert!(!files.is_empty(), "{command} wrote no output files");
        runs.push((output.stdout, files));
    }
    let (stdout_a, files_a) = &runs[0];
    let (stdout_b, files_b) = &runs[1];
    assert_eq!(stdout_a, stdout_b, "{command}: stdout differs between reruns");
    let names_a: Vec<&str> = files_a.iter().map(|(n, _)| n.as_str()).collect();
    let names_b: Vec<&str> = files_b.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names_a, names_b, "{command}: output file sets differ");
    for ((name, bytes_a), (_, bytes_b)) in files_a.iter().zip(files_b) {
        assert!(bytes_a == bytes_b, "{command}: {name} differs between reruns");
    }
}

#[test]
fn criterion_9_cli_outputs_are_reproducible() {
    // Train once to produce the saved model that evaluate/metrics consume.
    let prep = tempfile::tempdir().unwrap();
    fs::write(prep.path().join("config.json"), TRAIN_CONFIG).unwrap();
    qaed_in(prep.path(), &["train", "--config", "config.json", "--out", "out"]);
    let model_bytes = fs::read(prep.path().join("out/model_fold0.json")).unwrap();

    assert_reproducible("synth", SYNTH_CONFIG, &[]);
    assert_reproducible("train", TRAIN_CONFIG, &[]);
    assert_reproducible("evaluate", EVAL_CONFIG, &[("model.json", &model_bytes)]);
    assert_reproducible("metrics", METRICS_CONFIG, &[("model.json", &model_bytes)]);
    assert_reproducible("gridsearch", GRID_CONFIG, &[]);
    println!("criterion 9: PASS (five commands, byte-identical reruns)");
}
