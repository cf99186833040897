//! State tomography: static LRE with physical projection, and the two-step
//! adaptive scheme that re-measures in the estimated eigenbasis.

use super::basis::HermitianBasis;
use super::lre::LinearInversion;
use super::{split_shots, step_one_shots, TomographyEstimate};
use crate::error::Result;
use crate::linalg::{hermitian_eig, real_trace, CMatrix};
use crate::measurement_sim::{cube_povm, qubit_count, MeasurementRecord, SeededRng, StateSampler};
use crate::quantum_objects::{DensityMatrix, Povm};

/// Cube measurement battery on `log2(d)` qubits with its precomputed
/// trace-constrained and free least-squares solvers.
#[derive(Clone, Debug)]
pub struct QstSetup {
    d: usize,
    battery: Vec<Povm>,
    constrained: LinearInversion,
    free: LinearInversion,
}

impl QstSetup {
    pub fn cube(d: usize) -> Result<Self> {
        let battery = cube_povm(qubit_count(d)?);
        Self::with_battery(d, battery)
    }

    pub fn with_battery(d: usize, battery: Vec<Povm>) -> Result<Self> {
        let basis = HermitianBasis::gell_mann(d);
        let constrained = LinearInversion::for_povms(basis.clone(), &battery, true)?;
        let free = LinearInversion::for_povms(basis, &battery, false)?;
        Ok(QstSetup {
            d,
            battery,
            constrained,
            free,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn battery(&self) -> &[Povm] {
        &self.battery
    }

    pub fn inversion(&self, constrain_trace: bool) -> &LinearInversion {
        if constrain_trace {
            &self.constrained
        } else {
            &self.free
        }
    }

    /// Measures every battery setting with an equal share of `shots` and
    /// returns the least-squares operator.
    pub fn measure_and_invert(
        &self,
        sampler: &dyn StateSampler,
        shots: u64,
        constrain_trace: bool,
        rng: &mut SeededRng,
    ) -> Result<CMatrix> {
        let records = self.measure_battery(sampler, shots, rng)?;
        self.inversion(constrain_trace).estimate(&records)
    }

    fn measure_battery(
        &self,
        sampler: &dyn StateSampler,
        shots: u64,
        rng: &mut SeededRng,
    ) -> Result<Vec<MeasurementRecord>> {
        split_shots(shots, self.battery.len())
            .into_iter()
            .zip(&self.battery)
            .enumerate()
            .map(|(i, (n, povm))| {
                let mut rec = sampler.measure(povm, n, rng)?;
                rec.povm_id = i;
                Ok(rec)
            })
            .collect()
    }
}

/// Projects a unit-trace Hermitian matrix onto density matrices with the
/// same eigenvectors: keep the `k` largest eigenvalues, where `k` is maximal
/// with `λ_k + (1 − Σ_{i≤k} λ_i)/k ≥ 0`, shift them equally so the trace is
/// one, and zero the rest.
pub fn physical_projection_fast(h: &CMatrix) -> Result<DensityMatrix> {
    let eig = hermitian_eig(h)?;
    let lambda = &eig.eigenvalues;
    let target = 1.0;
    let mut k = 1;
    let mut partial = 0.0;
    let mut shift_at_k = target - lambda[0];
    for (j, &l) in lambda.iter().enumerate() {
        partial += l;
        let shift = (target - partial) / (j + 1) as f64;
        if l + shift >= 0.0 {
            k = j + 1;
            shift_at_k = shift;
        }
    }
    let projected: Vec<f64> = lambda
        .iter()
        .enumerate()
        .map(|(j, &l)| if j < k { l + shift_at_k } else { 0.0 })
        .collect();
    DensityMatrix::new(eig.compose(&projected))
}

fn two_step(
    sampler: &dyn StateSampler,
    setup: &QstSetup,
    n_total: u64,
    alpha: f64,
    constrain_trace: bool,
    rng: &mut SeededRng,
) -> Result<(CMatrix, DensityMatrix)> {
    let n0 = step_one_shots(n_total, alpha)?;
    // Step 1: plain LRE, deliberately without any positivity correction.
    let rough = setup.measure_and_invert(sampler, n0, constrain_trace, rng)?;
    let eig = hermitian_eig(&rough)?;
    // Step 2: measure in the estimated eigenbasis; frequencies become the
    // eigenvalues. A trace-decreasing sampler leaves mass on the null outcome.
    let povm = Povm::from_basis(&eig.eigenvectors)?;
    let record = sampler.measure(&povm, n_total - n0, rng)?;
    let estimate = DensityMatrix::with_any_trace(eig.compose(&record.frequencies))?;
    Ok((rough, estimate))
}

/// Two-step adaptive state tomography with `⌊αN⌋` Cube shots in Step 1.
pub fn adaptive_qst(
    sampler: &dyn StateSampler,
    setup: &QstSetup,
    n_total: u64,
    alpha: f64,
    rng: &mut SeededRng,
) -> Result<TomographyEstimate<DensityMatrix>> {
    let (rough, value) = two_step(sampler, setup, n_total, alpha, true, rng)?;
    Ok(TomographyEstimate {
        value,
        raw: vec![rough],
        shots_used: n_total,
        method_tag: "adaptive-qst",
    })
}

/// Adaptive pseudo-state tomography for outputs of trace-decreasing
/// channels: Step 1 fits the trace freely and Step 2's eigenvalues sum to
/// less than one.
pub fn adaptive_qpst(
    sampler: &dyn StateSampler,
    setup: &QstSetup,
    n_total: u64,
    alpha: f64,
    rng: &mut SeededRng,
) -> Result<TomographyEstimate<DensityMatrix>> {
    let (rough, value) = two_step(sampler, setup, n_total, alpha, false, rng)?;
    Ok(TomographyEstimate {
        value,
        raw: vec![rough],
        shots_used: n_total,
        method_tag: "adaptive-qpst",
    })
}

/// All `N` shots on the Cube battery, LRE, then physical projection.
pub fn static_qst(
    sampler: &dyn StateSampler,
    setup: &QstSetup,
    n_total: u64,
    rng: &mut SeededRng,
) -> Result<TomographyEstimate<DensityMatrix>> {
    let raw = setup.measure_and_invert(sampler, n_total, true, rng)?;
    let value = physical_projection_fast(&raw)?;
    Ok(TomographyEstimate {
        value,
        raw: vec![raw],
        shots_used: n_total,
        method_tag: "static-qst",
    })
}

/// Clips negative eigenvalues and rescales the rest to `trace`.
pub fn truncate_to_trace(h: &CMatrix, trace: f64) -> Result<DensityMatrix> {
    let eig = hermitian_eig(h)?;
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let scaled: Vec<f64> = if total > 0.0 {
        clipped.iter().map(|l| l * trace / total).collect()
    } else {
        // Nothing survived; fall back to the maximally mixed operator.
        vec![trace / clipped.len() as f64; clipped.len()]
    };
    let m = eig.compose(&scaled);
    debug_assert!((real_trace(&m) - trace).abs() < 1e-9);
    DensityMatrix::with_any_trace(m)
}
