//! Ancilla-assisted process tomography: state tomography on
//! `σ_out = (E ⊗ I)(|Φ⟩⟨Φ|)`, inversion of the known input, then the
//! stage-2 correction.

use super::qpt::{qpt_stage2_ntp, qpt_stage2_tp};
use super::qst::{
    adaptive_qpst, adaptive_qst, physical_projection_fast, truncate_to_trace, QstSetup,
};
use super::TomographyEstimate;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, kron, CMatrix};
use crate::measurement_sim::{SeededRng, StateSampler};
use crate::quantum_objects::{BipartitePureState, DensityMatrix, ProcessMatrix, SCHMIDT_TOL};

/// Inverts `σ_out = (I ⊗ K) X (I ⊗ K†)` with `K = V H Uᵀ` from the Schmidt
/// form of the input:
/// `X̃₀ = (I ⊗ U* H⁻¹ V†) σ_out (I ⊗ V H⁻¹ Uᵀ)`.
pub fn aapt_reconstruct(sigma_out: &CMatrix, input: &BipartitePureState) -> Result<CMatrix> {
    let d = input.local_dim();
    if sigma_out.nrows() != d * d || sigma_out.ncols() != d * d {
        return Err(Error::dims(d * d, sigma_out.nrows()));
    }
    let s = input.schmidt();
    let smallest = s.coefficients.iter().copied().fold(f64::INFINITY, f64::min);
    if smallest <= SCHMIDT_TOL {
        return Err(Error::DegenerateInput {
            coefficient: smallest,
        });
    }
    let h_inv: Vec<f64> = s.coefficients.iter().map(|h| 1.0 / h).collect();
    let k_inv = s.u.conjugate() * linalg::from_real_diagonal(&h_inv) * s.v.adjoint();
    let lifted = kron(&identity(d), &k_inv);
    let x = &lifted * sigma_out * lifted.adjoint();
    Ok((&x + x.adjoint()).scale(0.5))
}

/// Fixed input state and the Cube battery on the joint output.
#[derive(Clone, Debug)]
pub struct AaptSetup {
    input: BipartitePureState,
    qst: QstSetup,
}

impl AaptSetup {
    pub fn new(input: BipartitePureState) -> Result<Self> {
        let d = input.local_dim();
        let qst = QstSetup::cube(d * d)?;
        Ok(AaptSetup { input, qst })
    }

    pub fn input(&self) -> &BipartitePureState {
        &self.input
    }

    pub fn dim(&self) -> usize {
        self.input.local_dim()
    }

    pub fn qst(&self) -> &QstSetup {
        &self.qst
    }
}

#[derive(Clone, Debug)]
pub struct AaptEstimate {
    /// Physical process matrix; `raw` holds the reconstruction before the
    /// stage-2 correction.
    pub process: TomographyEstimate<ProcessMatrix>,
    /// Estimated joint output state.
    pub sigma_out: DensityMatrix,
}

fn finish(
    sigma_out: DensityMatrix,
    setup: &AaptSetup,
    n_total: u64,
    tp_flag: bool,
    method_tag: &'static str,
) -> Result<AaptEstimate> {
    let d = setup.dim();
    let g = aapt_reconstruct(sigma_out.mat(), &setup.input)?;
    let value = if tp_flag {
        qpt_stage2_tp(&g, d)?
    } else {
        qpt_stage2_ntp(&g, d, n_total)?
    };
    Ok(AaptEstimate {
        process: TomographyEstimate {
            value,
            raw: vec![g],
            shots_used: n_total,
            method_tag,
        },
        sigma_out,
    })
}

/// Adaptive two-step tomography of `σ_out` (pseudo-state variant when the
/// channel is trace-decreasing), reconstruction, and stage-2 correction.
pub fn adaptive_aapt(
    sampler: &dyn StateSampler,
    setup: &AaptSetup,
    n_total: u64,
    alpha: f64,
    tp_flag: bool,
    rng: &mut SeededRng,
) -> Result<AaptEstimate> {
    let state = if tp_flag {
        adaptive_qst(sampler, &setup.qst, n_total, alpha, rng)?
    } else {
        adaptive_qpst(sampler, &setup.qst, n_total, alpha, rng)?
    };
    finish(state.value, setup, n_total, tp_flag, "adaptive-aapt")
}

/// Cube LRE of `σ_out` with all `N` shots. Trace-preserving channels use the
/// physical projection; trace-decreasing ones clip negative eigenvalues and
/// rescale to the known output trace.
pub fn nonadaptive_aapt(
    sampler: &dyn StateSampler,
    setup: &AaptSetup,
    n_total: u64,
    tp_flag: bool,
    known_trace: Option<f64>,
    rng: &mut SeededRng,
) -> Result<AaptEstimate> {
    let sigma_out = if tp_flag {
        let raw = setup.qst.measure_and_invert(sampler, n_total, true, rng)?;
        physical_projection_fast(&raw)?
    } else {
        let trace = known_trace.ok_or_else(|| {
            Error::InvalidParameter("trace-decreasing channel needs its output trace".into())
        })?;
        let raw = setup.qst.measure_and_invert(sampler, n_total, false, rng)?;
        truncate_to_trace(&raw, trace)?
    };
    finish(sigma_out, setup, n_total, tp_flag, "nonadaptive-aapt")
}
