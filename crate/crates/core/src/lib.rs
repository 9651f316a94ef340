//! Anomaly detection on tabular event data with quantum-circuit
//! autoencoders, plus the classical baselines and diagnostics needed to
//! compare against them.
//!
//! The crate is organized bottom-up:
//!
//! - [`statevec`]: dense statevector simulation and the gate alphabet.
//! - [`circuits`]: feature maps, ansatz families, and the compression
//!   circuit with its SWAP-test readout.
//! - [`qae`]: the trainable circuit model and its fidelity-based loss.
//! - [`metrics`]: entanglement (Meyer-Wallach Q) and nonstabilizerness
//!   (2-Rényi magic) diagnostics.
//! - [`optim`]: parameter-shift gradients, Adam, and the training loop.
//! - [`cae`]: the classical MLP autoencoder baseline with magnitude
//!   pruning.
//! - [`data`]: scaling, fold sampling, synthetic generators, CSV loading.
//! - [`harness`]: end-to-end experiments, ROC/AUC, randomized grid
//!   search, and report emission.
//!
//! Everything is deterministic for a fixed seed: the same config produces
//! byte-identical reports across runs and thread counts.

pub mod cae;
pub mod circuits;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod optim;
pub mod qae;
pub mod statevec;

pub use error::{Error, Result};
