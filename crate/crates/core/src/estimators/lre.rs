//! Linear regression estimation: least-squares inversion of Born-rule
//! frequencies in an orthonormal Hermitian basis.

use nalgebra::{DMatrix, DVector};

use super::basis::HermitianBasis;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measurement_sim::MeasurementRecord;
use crate::quantum_objects::{trace_of_product, Povm};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

/// Precomputed least-squares solver for a fixed list of measurement
/// operators. Row `r` of the design matrix is `Tr(O_r B_k)` over the basis.
#[derive(Clone, Debug)]
pub struct LinearInversion {
    basis: HermitianBasis,
    design: DMatrix<f64>,
    pinv: DMatrix<f64>,
    constrain_trace: bool,
}

impl LinearInversion {
    /// With `constrain_trace` the coefficient of `I/√d` is pinned to `1/√d`
    /// so the estimate has unit trace, and only the remaining `d² − 1`
    /// coefficients are fitted.
    pub fn new(
        basis: HermitianBasis,
        operators: &[CMatrix],
        constrain_trace: bool,
    ) -> Result<Self> {
        let k = basis.len();
        for op in operators {
            if op.nrows() != basis.dim() || op.ncols() != basis.dim() {
                return Err(Error::dims(basis.dim(), op.nrows()));
            }
        }
        let design = DMatrix::from_fn(operators.len(), k, |r, j| {
            trace_of_product(&operators[r], &basis.operators()[j]).re
        });
        let first_free = usize::from(constrain_trace);
        let fitted = design.columns(first_free, k - first_free).into_owned();
        let required = k - first_free;
        let svd = fitted.svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * smax)
            .count();
        if rank < required || operators.len() < required {
            return Err(Error::InformationallyIncomplete { rank, required });
        }
        let pinv = svd
            .pseudo_inverse(RANK_TOL * smax)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(LinearInversion {
            basis,
            design,
            pinv,
            constrain_trace,
        })
    }

    /// Solver for the elements of a measurement battery, flattened in order.
    pub fn for_povms(basis: HermitianBasis, povms: &[Povm], constrain_trace: bool) -> Result<Self> {
        let ops: Vec<CMatrix> = povms
            .iter()
            .flat_map(|p| p.elements().iter().cloned())
            .collect();
        Self::new(basis, &ops, constrain_trace)
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn n_rows(&self) -> usize {
        self.design.nrows()
    }

    /// `(𝒳ᵀ𝒳)⁻¹` for the fitted columns; enters the LRE error bound.
    pub fn gram_inverse(&self) -> DMatrix<f64> {
        &self.pinv * self.pinv.transpose()
    }

    /// Least-squares operator for observed values `y`, one per design row.
    pub fn solve(&self, y: &[f64]) -> Result<CMatrix> {
        if y.len() != self.n_rows() {
            return Err(Error::dims(self.n_rows(), y.len()));
        }
        let mut y = DVector::from_column_slice(y);
        let d = self.basis.dim() as f64;
        let mut phi = Vec::with_capacity(self.basis.len());
        if self.constrain_trace {
            let fixed = 1.0 / d.sqrt();
            y -= self.design.column(0) * fixed;
            phi.push(fixed);
        }
        phi.extend((&self.pinv * y).iter());
        Ok(self.basis.compose(&phi))
    }

    /// Least-squares operator from records whose concatenated frequencies
    /// line up with the design rows.
    pub fn estimate(&self, records: &[MeasurementRecord]) -> Result<CMatrix> {
        let y: Vec<f64> = records
            .iter()
            .flat_map(|r| r.frequencies.iter().copied())
            .collect();
        self.solve(&y)
    }
}

/// One-shot LRE over a battery of POVMs. Hermitian, not necessarily PSD.
pub fn lre_estimate(
    records: &[MeasurementRecord],
    povms: &[Povm],
    basis: &HermitianBasis,
    constrain_trace: bool,
) -> Result<CMatrix> {
    if records.len() != povms.len() {
        return Err(Error::dims(povms.len(), records.len()));
    }
    for (r, p) in records.iter().zip(povms) {
        if r.n_outcomes() != p.len() {
            return Err(Error::dims(p.len(), r.n_outcomes()));
        }
    }
    LinearInversion::for_povms(basis.clone(), povms, constrain_trace)?.estimate(records)
}
