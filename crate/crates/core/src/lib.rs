//! Adaptive quantum state, detector and process tomography, the fidelity
//! measures used to score it, and a seeded Monte-Carlo harness for infidelity
//! scaling studies.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod fidelity;
pub mod linalg;
pub mod measurement_sim;
pub mod quantum_objects;
pub mod selftest;

pub use error::{Error, Result};
