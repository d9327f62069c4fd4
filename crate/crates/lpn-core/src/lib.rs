//! Simulation and analysis library for learning-parity-with-noise (LPN)
//! experiments on a small noisy quantum processor.
//!
//! The library is organized around the lifecycle of one benchmark campaign:
//!
//! * [`oracle`] builds the logical parity-oracle circuit for a hidden key and
//!   samples noisy measurement outcomes (Pauli-frame Monte Carlo), with an
//!   exact density-operator reference for validation.
//! * [`readout`] turns measurement bits into analog homodyne-style voltages,
//!   models calibration, and computes discrimination thresholds.
//! * [`solvers`] implements the five key-learning strategies (digital and
//!   analog, classical and quantum, with and without postselection).
//! * [`bounds`] evaluates the closed-form query-count bounds for the analog
//!   quantum solvers.
//! * [`stats`] estimates error curves by resampling, with Jeffreys credible
//!   intervals, antitonic regression and query-count intercepts.
//! * [`harness`] orchestrates full campaigns from a JSON config and persists
//!   plot-ready outputs deterministically.
//!
//! Everything downstream of a master seed is deterministic, including under
//! multi-threaded execution; see [`rng`] for the stream-splitting scheme.

pub mod bounds;
pub mod harness;
pub mod oracle;
pub mod readout;
pub mod rng;
pub mod solvers;
pub mod stats;

pub use oracle::{Key, NoiseModel, OracleMode};
pub use readout::{CalibrationSet, QueryRecord, ReadoutParams};
pub use solvers::{KeyEstimate, QueryBatch, SolverId};
