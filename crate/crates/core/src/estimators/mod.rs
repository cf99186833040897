//! Reconstruction algorithms for states, detectors and processes.

pub mod aapt;
pub mod basis;
pub mod lre;
pub mod qdt;
pub mod qpt;
pub mod qst;

pub use aapt::{aapt_reconstruct, adaptive_aapt, nonadaptive_aapt, AaptEstimate, AaptSetup};
pub use basis::HermitianBasis;
pub use lre::{lre_estimate, LinearInversion};
pub use qdt::{adaptive_qdt, qdt_stage1, static_qdt, QdtSetup};
pub use qpt::{qpt_stage2_ntp, qpt_stage2_tp};
pub use qst::{adaptive_qpst, adaptive_qst, physical_projection_fast, static_qst, QstSetup};

use crate::error::{Error, Result};

/// A physical estimate together with the uncorrected operator(s) it was
/// built from.
#[derive(Clone, Debug)]
pub struct TomographyEstimate<T> {
    pub value: T,
    /// Pre-correction Hermitian operator(s), one per reconstructed object.
    pub raw: Vec<crate::linalg::CMatrix>,
    pub shots_used: u64,
    pub method_tag: &'static str,
}

/// `⌊αN⌋`, the Step-1 budget of the two-step algorithms.
pub fn step_one_shots(n_total: u64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must lie strictly between 0 and 1"
        )));
    }
    Ok((alpha * n_total as f64).floor() as u64)
}

/// Equal split over `settings`, remainder to the last one.
pub fn split_shots(total: u64, settings: usize) -> Vec<u64> {
    assert!(settings > 0);
    let each = total / settings as u64;
    let mut shots = vec![each; settings];
    shots[settings - 1] += total - each * settings as u64;
    shots
}
