//! Dense complex linear algebra used by every estimator.
//!
//! Matrices are `nalgebra` dense matrices of `Complex64`, stored column-major.
//! Tensor products follow one global convention: the basis vector
//! `|i⟩ ⊗ |j⟩` of `H1 ⊗ H2` (with `dim H2 = d2`) sits at flat index
//! `i * d2 + j`. `kron`, the partial traces and everything built on them
//! (process matrices, Choi states, ancilla-assisted reconstruction) rely on
//! this ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-6;

/// Negative eigenvalues below `-PSD_REJECT_TOL * ‖m‖` are treated as a genuine
/// violation of positivity rather than rounding noise.
pub const PSD_REJECT_TOL: f64 = 1e-6;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn from_real_diagonal(values: &[f64]) -> CMatrix {
    let d = values.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

/// `|v⟩⟨w|`
pub fn outer(v: &CVector, w: &CVector) -> CMatrix {
    v * w.adjoint()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn real_trace(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Frobenius norm of the anti-Hermitian part relative to the norm of `m`.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / norm
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Returns `(m + m†)/2`, rejecting inputs whose anti-Hermitian part exceeds
/// [`HERMITIAN_REJECT_TOL`] relative to `‖m‖`.
pub fn symmetrize(m: &CMatrix) -> Result<CMatrix> {
    ensure_square(m)?;
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > HERMITIAN_REJECT_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok((m + m.adjoint()).scale(0.5))
}

/// Spectral decomposition `U · diag(λ) · U†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Sorted non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector of `eigenvalues[j]`.
    pub eigenvectors: CMatrix,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> CVector {
        self.eigenvectors.column(j).into_owned()
    }

    /// `U · diag(values) · U†` with this decomposition's eigenvectors.
    pub fn compose(&self, values: &[f64]) -> CMatrix {
        assert_eq!(values.len(), self.dim(), "eigenvalue count");
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        scaled * u.adjoint()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.compose(&values)
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.compose(&self.eigenvalues)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.
///
/// The input is symmetrized first. Degenerate eigenspaces come back in an
/// arbitrary orthonormal basis.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig> {
    let h = symmetrize(m)?;
    let d = h.nrows();
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut eigenvectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

fn psd_eig(m: &CMatrix) -> Result<HermitianEig> {
    let eig = hermitian_eig(m)?;
    let scale = m.norm();
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -PSD_REJECT_TOL * scale {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    Ok(eig)
}

/// Eigenvalues below this fraction of the spectral radius are solver noise
/// and get no square root; `√(1e-17)` would otherwise inject `3e-9` terms.
const SQRT_NOISE_FLOOR: f64 = 1e-14;

/// Principal square root of a PSD matrix; slightly negative eigenvalues are
/// clamped to zero.
pub fn matrix_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = psd_eig(m)?;
    let radius = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    let floor = SQRT_NOISE_FLOOR * radius;
    Ok(eig.map(|x| if x <= floor { 0.0 } else { x.sqrt() }))
}

pub fn default_inv_sqrt_clamp(d: usize) -> f64 {
    1e-12 * d as f64
}

/// `m^{-1/2}` with eigenvalues below `clamp` raised to `clamp` first.
pub fn inv_sqrt(m: &CMatrix, clamp: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(eig.map(|x| 1.0 / x.max(clamp).sqrt()))
}

/// Frobenius-nearest PSD matrix: negative eigenvalues set to zero.
pub fn project_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(eig.map(|x| x.max(0.0)))
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(*hermitian_eig(m)?.eigenvalues.last().unwrap_or(&0.0))
}

pub fn max_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(*hermitian_eig(m)?.eigenvalues.first().unwrap_or(&0.0))
}

fn check_bipartite(m: &CMatrix, d1: usize, d2: usize) -> Result<()> {
    let n = d1 * d2;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

/// Trace over the first tensor factor; returns a `d2 × d2` matrix.
pub fn partial_trace_1(m: &CMatrix, d1: usize, d2: usize) -> Result<CMatrix> {
    check_bipartite(m, d1, d2)?;
    Ok(CMatrix::from_fn(d2, d2, |j, l| {
        (0..d1).map(|i| m[(i * d2 + j, i * d2 + l)]).sum()
    }))
}

/// Trace over the second tensor factor; returns a `d1 × d1` matrix.
pub fn partial_trace_2(m: &CMatrix, d1: usize, d2: usize) -> Result<CMatrix> {
    check_bipartite(m, d1, d2)?;
    Ok(CMatrix::from_fn(d1, d1, |i, k| {
        (0..d2).map(|j| m[(i * d2 + j, k * d2 + j)]).sum()
    }))
}

/// Column-stacking vectorization.
pub fn vec(m: &CMatrix) -> CVector {
    // nalgebra storage is column-major, so the raw slice is already stacked.
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`] for square matrices.
pub fn unvec(v: &CVector, d: usize) -> Result<CMatrix> {
    if v.len() != d * d {
        return Err(Error::dims(d * d, v.len()));
    }
    Ok(CMatrix::from_column_slice(d, d, v.as_slice()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Haar-distributed `d × d` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal pushed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    assert!(d >= 1, "dimension must be positive");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Haar-random unit vector (first column of a Haar unitary).
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    haar_unitary(d, rng).column(0).into_owned()
}

/// `‖U†U − I‖` in Frobenius norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (u.adjoint() * u - identity(u.ncols())).norm()
}
