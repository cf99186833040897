//! Detector tomography: a least-squares first stage over a probe battery and
//! the two-step adaptive refinement that probes each element's estimated
//! eigenvectors.

use super::basis::HermitianBasis;
use super::lre::LinearInversion;
use super::{split_shots, step_one_shots, TomographyEstimate};
use crate::error::{Error, Result};
use crate::linalg::{self, default_inv_sqrt_clamp, hermitian_eig, inv_sqrt, project_psd, CMatrix};
use crate::measurement_sim::{DetectorSampler, MeasurementRecord, SeededRng};
use crate::quantum_objects::{DensityMatrix, Povm};

/// Probe states and the least-squares solver for their design matrix.
#[derive(Clone, Debug)]
pub struct QdtSetup {
    d: usize,
    n_outcomes: usize,
    probes: Vec<DensityMatrix>,
    inversion: LinearInversion,
}

impl QdtSetup {
    pub fn new(d: usize, n_outcomes: usize, probes: Vec<DensityMatrix>) -> Result<Self> {
        let ops: Vec<CMatrix> = probes.iter().map(|p| p.mat().clone()).collect();
        let inversion = LinearInversion::new(HermitianBasis::gell_mann(d), &ops, false)?;
        Ok(QdtSetup {
            d,
            n_outcomes,
            probes,
            inversion,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn probes(&self) -> &[DensityMatrix] {
        &self.probes
    }

    fn probe_all(
        &self,
        sampler: &dyn DetectorSampler,
        shots: u64,
        rng: &mut SeededRng,
    ) -> Result<Vec<MeasurementRecord>> {
        split_shots(shots, self.probes.len())
            .into_iter()
            .zip(&self.probes)
            .enumerate()
            .map(|(i, (n, probe))| {
                let mut rec = sampler.probe(probe, n, rng)?;
                rec.povm_id = i;
                Ok(rec)
            })
            .collect()
    }
}

/// `S^{-1/2} P S^{-1/2}` for each element with `S = Σ P`, so the result sums
/// to the identity. Returns the elements and whether the inverse root had to
/// be clamped.
fn renormalize(elements: &[CMatrix], d: usize) -> Result<(Vec<CMatrix>, bool)> {
    let total = elements.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
    let clamp = default_inv_sqrt_clamp(d);
    let clamped = linalg::min_eigenvalue(&total)? < clamp;
    let root = inv_sqrt(&total, clamp)?;
    Ok((
        elements.iter().map(|p| &root * p * &root).collect(),
        clamped,
    ))
}

fn into_povm(elements: Vec<CMatrix>, clamped: bool) -> Result<Povm> {
    if clamped {
        log::warn!("detector estimate is singular; completeness only approximate");
        Povm::new_unchecked_completeness(elements)
    } else {
        Povm::new(elements)
    }
}

/// Per-element least squares over the probe records, PSD projection, then
/// joint renormalization to a complete detector. Returns the corrected
/// elements and the raw least-squares operators.
pub fn qdt_stage1(
    records: &[MeasurementRecord],
    setup: &QdtSetup,
) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
    if records.len() != setup.probes.len() {
        return Err(Error::dims(setup.probes.len(), records.len()));
    }
    let mut raw = Vec::with_capacity(setup.n_outcomes);
    for i in 0..setup.n_outcomes {
        let y: Vec<f64> = records.iter().map(|r| r.frequencies[i]).collect();
        raw.push(setup.inversion.solve(&y)?);
    }
    let projected = raw.iter().map(project_psd).collect::<Result<Vec<_>>>()?;
    let (elements, clamped) = renormalize(&projected, setup.d)?;
    if clamped {
        log::warn!("stage-1 element sum is singular; inverse square root clamped");
    }
    Ok((elements, raw))
}

/// Stage 1 alone with the full budget.
pub fn static_qdt(
    sampler: &dyn DetectorSampler,
    setup: &QdtSetup,
    n_total: u64,
    rng: &mut SeededRng,
) -> Result<TomographyEstimate<Povm>> {
    let records = setup.probe_all(sampler, n_total, rng)?;
    let (elements, raw) = qdt_stage1(&records, setup)?;
    Ok(TomographyEstimate {
        value: Povm::new_unchecked_completeness(elements)?,
        raw,
        shots_used: n_total,
        method_tag: "static-qdt",
    })
}

/// Two-step adaptive detector tomography.
///
/// Step 1 spends `⌊αN⌋` shots on the probe battery. Step 2 prepares every
/// eigenvector of every stage-1 element with `⌊(N − N₀)/(n·d)⌋` shots each
/// and takes the click frequency of that element as its eigenvalue.
pub fn adaptive_qdt(
    sampler: &dyn DetectorSampler,
    setup: &QdtSetup,
    n_total: u64,
    alpha: f64,
    rng: &mut SeededRng,
) -> Result<TomographyEstimate<Povm>> {
    let n0 = step_one_shots(n_total, alpha)?;
    let records = setup.probe_all(sampler, n0, rng)?;
    let (stage1, _) = qdt_stage1(&records, setup)?;

    let (n, d) = (setup.n_outcomes, setup.d);
    let per_probe = (n_total - n0) / (n * d) as u64;
    let mut refined = Vec::with_capacity(n);
    for (i, element) in stage1.iter().enumerate() {
        let eig = hermitian_eig(element)?;
        let mut values = Vec::with_capacity(d);
        for j in 0..d {
            let probe = DensityMatrix::pure(&eig.eigenvector(j))?;
            let rec = sampler.probe(&probe, per_probe, rng)?;
            values.push(rec.frequencies[i]);
        }
        refined.push(eig.compose(&values));
    }
    let (elements, clamped) = renormalize(&refined, d)?;
    Ok(TomographyEstimate {
        value: into_povm(elements, clamped)?,
        raw: refined,
        shots_used: n0 + per_probe * (n * d) as u64,
        method_tag: "adaptive-qdt",
    })
}
