//! Finite-shot measurement simulation.
//!
//! Randomness comes from [`SeededRng`], a ChaCha20 stream selected by
//! `(seed, stream_id)`. ChaCha20 output is specified bit-for-bit, so a given
//! pair reproduces the same samples on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, CMatrix};
use crate::quantum_objects::{born_probabilities, DensityMatrix, Povm};

/// Probabilities below this are rejected rather than clamped.
pub const NEGATIVE_PROB_TOL: f64 = 1e-9;
/// Total mass at or above `1 - COMPLETE_MASS_TOL` is treated as complete.
pub const COMPLETE_MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        SeededRng {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Outcome counts of one POVM applied `shots` times.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub povm_id: usize,
    pub counts: Vec<u64>,
    pub shots: u64,
    /// Shots that landed on no declared outcome (trace-decreasing states).
    pub null_count: u64,
    /// `counts / shots` over the declared outcomes.
    pub frequencies: Vec<f64>,
}

impl MeasurementRecord {
    pub fn from_counts(povm_id: usize, counts: Vec<u64>, null_count: u64) -> Self {
        let shots = counts.iter().sum::<u64>() + null_count;
        let frequencies = if shots == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|&k| k as f64 / shots as f64).collect()
        };
        MeasurementRecord {
            povm_id,
            counts,
            shots,
            null_count,
            frequencies,
        }
    }

    /// Infinite-shot record whose frequencies equal the given probabilities.
    pub fn exact(povm_id: usize, probabilities: Vec<f64>) -> Self {
        MeasurementRecord {
            povm_id,
            counts: vec![0; probabilities.len()],
            shots: 0,
            null_count: 0,
            frequencies: probabilities,
        }
    }

    pub fn n_outcomes(&self) -> usize {
        self.frequencies.len()
    }
}

/// Multinomial sample over `probs` plus an implicit null outcome carrying
/// `1 - Σ probs`. Returns `(counts, null_count)`.
pub fn sample_counts<R: RngCore + ?Sized>(
    probs: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<(Vec<u64>, u64)> {
    if let Some(&bad) = probs
        .iter()
        .find(|&&p| p < -NEGATIVE_PROB_TOL || !p.is_finite())
    {
        return Err(Error::NegativeProbability(bad));
    }
    let probs: Vec<f64> = probs.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    if total > 1.0 + NEGATIVE_PROB_TOL {
        return Err(Error::InvalidParameter(format!(
            "probabilities sum to {total} > 1"
        )));
    }
    let complete = total >= 1.0 - COMPLETE_MASS_TOL;
    let mut remaining_mass = if complete { total } else { 1.0 };
    let mut remaining = shots;
    let mut counts = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let last = complete && i + 1 == probs.len();
        let k = if last {
            remaining
        } else if remaining_mass <= 0.0 {
            0
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("conditional probability in [0, 1]")
                .sample(rng)
        };
        counts[i] = k;
        remaining -= k;
        remaining_mass -= p;
    }
    Ok((counts, remaining))
}

/// Born-rule measurement of `rho` with `shots` copies.
pub fn measure_state<R: RngCore + ?Sized>(
    rho: &DensityMatrix,
    povm: &Povm,
    shots: u64,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let probs = born_probabilities(rho, povm)?;
    let (counts, null_count) = sample_counts(&probs, shots, rng)?;
    Ok(MeasurementRecord::from_counts(0, counts, null_count))
}

fn pauli_pair(axis: usize) -> [CMatrix; 2] {
    let h = 0.5;
    let (plus, minus) = match axis {
        0 => (
            [c(h, 0.0), c(h, 0.0), c(h, 0.0), c(h, 0.0)],
            [c(h, 0.0), c(-h, 0.0), c(-h, 0.0), c(h, 0.0)],
        ),
        1 => (
            [c(h, 0.0), c(0.0, -h), c(0.0, h), c(h, 0.0)],
            [c(h, 0.0), c(0.0, h), c(0.0, -h), c(h, 0.0)],
        ),
        _ => (
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ),
    };
    [
        CMatrix::from_row_slice(2, 2, &plus),
        CMatrix::from_row_slice(2, 2, &minus),
    ]
}

/// All `3^n` tensor products of the single-qubit measurements
/// `(I ± σ_x)/2`, `(I ± σ_y)/2`, `(I ± σ_z)/2`, each with `2^n` elements.
/// Settings are ordered with the first qubit's axis most significant.
pub fn cube_povm(n_qubits: usize) -> Vec<Povm> {
    assert!(n_qubits >= 1, "need at least one qubit");
    let mut settings: Vec<Vec<CMatrix>> = vec![vec![CMatrix::identity(1, 1)]];
    for _ in 0..n_qubits {
        let mut next = Vec::with_capacity(settings.len() * 3);
        for elements in &settings {
            for axis in 0..3 {
                let pair = pauli_pair(axis);
                next.push(
                    elements
                        .iter()
                        .flat_map(|e| pair.iter().map(move |p| kron(e, p)))
                        .collect(),
                );
            }
        }
        settings = next;
    }
    settings
        .into_iter()
        .map(|els| Povm::new(els).expect("Cube measurement is complete"))
        .collect()
}

/// `log2(d)` when `d` is a power of two.
pub fn qubit_count(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} is not a multi-qubit dimension"
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Haar-random pure states.
pub fn random_pure_probes<R: RngCore + ?Sized>(
    count: usize,
    d: usize,
    rng: &mut R,
) -> Vec<DensityMatrix> {
    (0..count)
        .map(|_| {
            let psi = linalg::haar_vector(d, rng);
            DensityMatrix::pure(&psi).expect("Haar vector is normalized")
        })
        .collect()
}

/// Source of measurement data on a hidden state.
pub trait StateSampler {
    fn dim(&self) -> usize;
    fn measure(&self, povm: &Povm, shots: u64, rng: &mut SeededRng) -> Result<MeasurementRecord>;
}

/// Source of detector clicks for chosen probe states.
pub trait DetectorSampler {
    fn dim(&self) -> usize;
    fn n_outcomes(&self) -> usize;
    fn probe(
        &self,
        rho: &DensityMatrix,
        shots: u64,
        rng: &mut SeededRng,
    ) -> Result<MeasurementRecord>;
}

/// Simulated copies of a known state, optionally noiseless.
#[derive(Clone, Debug)]
pub struct SimulatedState {
    rho: DensityMatrix,
    noiseless: bool,
}

impl SimulatedState {
    pub fn new(rho: DensityMatrix) -> Self {
        SimulatedState {
            rho,
            noiseless: false,
        }
    }

    /// Returns exact Born probabilities in place of sampled frequencies.
    pub fn noiseless(rho: DensityMatrix) -> Self {
        SimulatedState {
            rho,
            noiseless: true,
        }
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }
}

impl StateSampler for SimulatedState {
    fn dim(&self) -> usize {
        self.rho.dim()
    }

    fn measure(&self, povm: &Povm, shots: u64, rng: &mut SeededRng) -> Result<MeasurementRecord> {
        if self.noiseless {
            return Ok(MeasurementRecord::exact(
                0,
                born_probabilities(&self.rho, povm)?,
            ));
        }
        measure_state(&self.rho, povm, shots, rng)
    }
}

#[derive(Clone, Debug)]
pub struct SimulatedDetector {
    povm: Povm,
    noiseless: bool,
}

impl SimulatedDetector {
    pub fn new(povm: Povm) -> Self {
        SimulatedDetector {
            povm,
            noiseless: false,
        }
    }

    pub fn noiseless(povm: Povm) -> Self {
        SimulatedDetector {
            povm,
            noiseless: true,
        }
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }
}

impl DetectorSampler for SimulatedDetector {
    fn dim(&self) -> usize {
        self.povm.dim()
    }

    fn n_outcomes(&self) -> usize {
        self.povm.len()
    }

    fn probe(
        &self,
        rho: &DensityMatrix,
        shots: u64,
        rng: &mut SeededRng,
    ) -> Result<MeasurementRecord> {
        if self.noiseless {
            return Ok(MeasurementRecord::exact(
                0,
                born_probabilities(rho, &self.povm)?,
            ));
        }
        measure_state(rho, &self.povm, shots, rng)
    }
}
