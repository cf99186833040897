//! States, detectors and channels, plus the exact conversions between Kraus
//! operators, process matrices and Choi states.
//!
//! A channel's process matrix is the `d² × d²` matrix
//! `X = Σ_i |A_i⟩⟩⟨⟨A_i|` where `|A⟩⟩` lists the entries of `A` row by row,
//! i.e. coefficient `(j-1)d + k` multiplies the basis matrix `|j⟩⟨k|`.
//! Under the global tensor convention this is `X = (E ⊗ I)(|Ω⟩⟨Ω|)` with
//! `|Ω⟩ = Σ_k |k⟩⊗|k⟩`, so the first tensor factor carries the channel output
//! and `Tr₁(X) = (Σ A_i†A_i)ᵀ`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, hermitian_eig, identity, kron, partial_trace_1, partial_trace_2, CMatrix, CVector,
};

/// Absolute tolerance on negative eigenvalues of a physical operator.
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance on completeness of POVMs and on `Tr₁(X) ≤ I`.
pub const COMPLETENESS_TOL: f64 = 1e-8;
/// Tolerance on unit trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-9;
/// Schmidt coefficients at or below this count as zero.
pub const SCHMIDT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    Unit,
    /// Pseudo-state produced by a trace-decreasing channel, `0 < Tr ≤ 1`.
    SubUnit,
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMatrix,
    trace_mode: TraceMode,
}

fn check_psd(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let h = linalg::symmetrize(m)?;
    let min = linalg::min_eigenvalue(&h)?;
    if min < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(h)
}

impl DensityMatrix {
    /// Unit-trace state. The input is symmetrized.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let mat = check_psd(&mat, PSD_TOL)?;
        let trace = linalg::real_trace(&mat);
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                reason: "density matrix must have unit trace",
            });
        }
        Ok(DensityMatrix {
            mat,
            trace_mode: TraceMode::Unit,
        })
    }

    /// Pseudo-state with `0 < Tr ≤ 1`.
    pub fn sub_unit(mat: CMatrix) -> Result<Self> {
        let mat = check_psd(&mat, PSD_TOL)?;
        let trace = linalg::real_trace(&mat);
        if trace <= 0.0 {
            return Err(Error::ZeroTrace);
        }
        if trace > 1.0 + TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                reason: "pseudo-state trace must not exceed one",
            });
        }
        Ok(DensityMatrix {
            mat,
            trace_mode: TraceMode::SubUnit,
        })
    }

    /// Picks the trace mode from the trace itself.
    pub fn with_any_trace(mat: CMatrix) -> Result<Self> {
        let trace = linalg::real_trace(&mat);
        if (trace - 1.0).abs() <= TRACE_TOL {
            Self::new(mat)
        } else {
            Self::sub_unit(mat)
        }
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { norm });
        }
        let psi = psi.unscale(norm);
        Self::new(linalg::outer(&psi, &psi))
    }

    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut psi = CVector::zeros(d);
        psi[k] = c(1.0, 0.0);
        Self::pure(&psi).expect("basis vector is normalized")
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(identity(d).unscale(d as f64)).expect("I/d is a state")
    }

    /// `U · diag(eigenvalues) · U†` for a unit-trace probability vector.
    pub fn from_spectrum(u: &CMatrix, eigenvalues: &[f64]) -> Result<Self> {
        let eig = linalg::HermitianEig {
            eigenvalues: eigenvalues.to_vec(),
            eigenvectors: u.clone(),
        };
        Self::with_any_trace(eig.reconstruct())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        linalg::real_trace(&self.mat)
    }

    pub fn trace_mode(&self) -> TraceMode {
        self.trace_mode
    }

    /// Eigenvalues, non-increasing.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eig(&self.mat)
            .expect("density matrix is Hermitian")
            .eigenvalues
    }
}

/// Ordered POVM elements summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let povm = Self::new_unchecked_completeness(elements)?;
        let residual = povm.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompletePovm { residual });
        }
        Ok(povm)
    }

    /// Checks shapes and positivity only; used when an estimator deliberately
    /// reports a detector whose completeness could not be restored.
    pub(crate) fn new_unchecked_completeness(elements: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidParameter(
                "POVM needs at least one element".into(),
            ));
        };
        let d = first.nrows();
        let mut checked = Vec::with_capacity(elements.len());
        for e in &elements {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::dims(
                    format!("{d}x{d}"),
                    format!("{}x{}", e.nrows(), e.ncols()),
                ));
            }
            checked.push(check_psd(e, PSD_TOL)?);
        }
        Ok(Povm { elements: checked })
    }

    /// Rank-one projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        let elements = (0..u.ncols())
            .map(|j| {
                let v = u.column(j).into_owned();
                linalg::outer(&v, &v)
            })
            .collect();
        Self::new(elements)
    }

    pub fn computational(d: usize) -> Self {
        Self::from_basis(&identity(d)).expect("identity is unitary")
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elements[i]
    }

    pub fn sum(&self) -> CMatrix {
        let d = self.dim();
        self.elements
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, e| acc + e)
    }

    /// `‖Σ P_i − I‖` in Frobenius norm.
    pub fn completeness_residual(&self) -> f64 {
        (self.sum() - identity(self.dim())).norm()
    }
}

/// `p_i = Tr(P_i ρ)`, clamped to `[0, 1]`.
pub fn born_probabilities(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::dims(povm.dim(), rho.dim()));
    }
    Ok(povm
        .elements()
        .iter()
        .map(|p| trace_of_product(p, rho.mat()).re.clamp(0.0, 1.0))
        .collect())
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> num_complex::Complex64 {
    let mut acc = c(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    trace_preserving: bool,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidParameter(
                "channel needs a Kraus operator".into(),
            ));
        };
        let d = first.nrows();
        for a in &operators {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::dims(
                    format!("{d}x{d}"),
                    format!("{}x{}", a.nrows(), a.ncols()),
                ));
            }
        }
        let gram = operators
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, a| acc + a.adjoint() * a);
        let excess = linalg::max_eigenvalue(&(&gram - identity(d)))?;
        if excess > COMPLETENESS_TOL {
            return Err(Error::NotTraceNonIncreasing { excess });
        }
        let deficit = -linalg::min_eigenvalue(&(&gram - identity(d)))?;
        Ok(KrausChannel {
            operators,
            trace_preserving: deficit <= COMPLETENESS_TOL,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![identity(d)]).expect("identity channel")
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
        Self::new(vec![h]).expect("Hadamard is unitary")
    }

    /// `A₁ = diag(1, √(1−λ))`, `A₂ = diag(0, √λ)`.
    pub fn phase_damping(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "damping parameter {lambda} outside [0, 1]"
            )));
        }
        Self::new(vec![
            linalg::from_real_diagonal(&[1.0, (1.0 - lambda).sqrt()]),
            linalg::from_real_diagonal(&[0.0, lambda.sqrt()]),
        ])
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `Σ A_i ρ A_i†`
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::dims(self.dim(), rho.dim()));
        }
        let out = self.apply_raw(rho.mat());
        if self.trace_preserving {
            DensityMatrix::new(out)
        } else {
            DensityMatrix::sub_unit(out)
        }
    }

    fn apply_raw(&self, m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        self.operators
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, a| acc + a * m * a.adjoint())
    }

    /// `(E ⊗ I)(σ)` with the channel on the first factor.
    pub fn apply_extended(&self, sigma: &DensityMatrix) -> Result<DensityMatrix> {
        let d = self.dim();
        if !sigma.dim().is_multiple_of(d) {
            return Err(Error::dims(format!("multiple of {d}"), sigma.dim()));
        }
        let id_b = identity(sigma.dim() / d);
        let out = self
            .operators
            .iter()
            .fold(CMatrix::zeros(sigma.dim(), sigma.dim()), |acc, a| {
                let big = kron(a, &id_b);
                acc + &big * sigma.mat() * big.adjoint()
            });
        DensityMatrix::with_any_trace(out)
    }

    /// `(E ⊗ I)(|Ψ⟩⟨Ψ|)` with `|Ψ⟩ = Σ_j |j⟩⊗|j⟩/√d`.
    pub fn choi_state(&self) -> DensityMatrix {
        let psi = maximally_entangled_input(self.dim());
        self.apply_extended(&psi.density_matrix())
            .expect("Choi state of a trace-non-increasing channel")
    }

    pub fn to_process(&self) -> ProcessMatrix {
        kraus_to_process(self).expect("validated channel")
    }
}

/// `X = CᵀC*` where row `i` of `C` holds the natural-basis coefficients of
/// `A_i`.
pub fn kraus_to_process(ch: &KrausChannel) -> Result<ProcessMatrix> {
    let d = ch.dim();
    let mut x = CMatrix::zeros(d * d, d * d);
    for a in ch.operators() {
        let coeffs =
            CVector::from_iterator(d * d, (0..d).flat_map(|j| (0..d).map(move |k| a[(j, k)])));
        x += linalg::outer(&coeffs, &coeffs);
    }
    ProcessMatrix::new(x, d)
}

#[derive(Clone, Debug)]
pub struct ProcessMatrix {
    x: CMatrix,
    dim: usize,
}

impl ProcessMatrix {
    pub fn new(x: CMatrix, dim: usize) -> Result<Self> {
        let n = dim * dim;
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::dims(
                format!("{n}x{n}"),
                format!("{}x{}", x.nrows(), x.ncols()),
            ));
        }
        let x = check_psd(&x, COMPLETENESS_TOL)?;
        let excess = linalg::max_eigenvalue(&(partial_trace_1(&x, dim, dim)? - identity(dim)))?;
        if excess > COMPLETENESS_TOL {
            return Err(Error::NotTraceNonIncreasing { excess });
        }
        Ok(ProcessMatrix { x, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMatrix {
        &self.x
    }

    pub fn into_mat(self) -> CMatrix {
        self.x
    }

    /// `Tr₁(X)`, equal to the identity exactly when the channel preserves trace.
    pub fn input_marginal(&self) -> CMatrix {
        partial_trace_1(&self.x, self.dim, self.dim).expect("square process matrix")
    }

    pub fn is_trace_preserving(&self) -> bool {
        (self.input_marginal() - identity(self.dim)).norm() <= COMPLETENESS_TOL
    }

    /// `E(ρ) = Tr₂[X (I ⊗ ρᵀ)]`
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::dims(self.dim, rho.nrows()));
        }
        let lifted = &self.x * kron(&identity(self.dim), &rho.transpose());
        partial_trace_2(&lifted, self.dim, self.dim)
    }
}

/// Schmidt form `Σ_i h_i U|i⟩ ⊗ V|i⟩` of a bipartite pure state.
#[derive(Clone, Debug)]
pub struct Schmidt {
    /// Non-increasing, non-negative.
    pub coefficients: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

impl Schmidt {
    pub fn number(&self) -> usize {
        self.coefficients
            .iter()
            .filter(|&&h| h > SCHMIDT_TOL)
            .count()
    }

    pub fn reconstruct(&self) -> CVector {
        let (da, db) = (self.u.nrows(), self.v.nrows());
        let mut psi = CVector::zeros(da * db);
        for (i, &h) in self.coefficients.iter().enumerate() {
            let a = self.u.column(i);
            let b = self.v.column(i);
            for x in 0..da {
                for y in 0..db {
                    psi[x * db + y] += a[x] * b[y] * h;
                }
            }
        }
        psi
    }
}

/// Schmidt decomposition via the SVD of the amplitude matrix
/// `M[a, b] = ψ[a·d_B + b] = U H Vᵀ`.
pub fn schmidt_decompose(psi: &CVector, d_a: usize, d_b: usize) -> Result<Schmidt> {
    if psi.len() != d_a * d_b {
        return Err(Error::dims(d_a * d_b, psi.len()));
    }
    if d_a != d_b {
        return Err(Error::InvalidParameter(
            "Schmidt decomposition requires equal subsystem dimensions".into(),
        ));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { norm });
    }
    let m = CMatrix::from_fn(d_a, d_b, |a, b| psi[a * d_b + b]);
    let svd = m.svd(true, true);
    let w = svd.u.expect("requested U");
    let z_adj = svd.v_t.expect("requested V†");
    let mut order: Vec<usize> = (0..d_a).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut u = CMatrix::zeros(d_a, d_a);
    let mut v = CMatrix::zeros(d_b, d_b);
    let mut coefficients = Vec::with_capacity(d_a);
    for (dst, &src) in order.iter().enumerate() {
        coefficients.push(svd.singular_values[src]);
        u.set_column(dst, &w.column(src));
        // V = Z* and row `src` of Z† is the conjugate of column `src` of Z,
        // so column `dst` of V is that row transposed without conjugation.
        v.set_column(dst, &z_adj.row(src).transpose());
    }
    Ok(Schmidt { coefficients, u, v })
}

#[derive(Clone, Debug)]
pub struct BipartitePureState {
    amplitudes: CVector,
    d: usize,
    schmidt: Schmidt,
}

impl BipartitePureState {
    /// State on `C^d ⊗ C^d`.
    pub fn new(amplitudes: CVector, d: usize) -> Result<Self> {
        let schmidt = schmidt_decompose(&amplitudes, d, d)?;
        let norm = amplitudes.norm();
        Ok(BipartitePureState {
            amplitudes: amplitudes.unscale(norm),
            d,
            schmidt,
        })
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self::new(linalg::haar_vector(d * d, rng), d).expect("Haar vector is normalized")
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Local dimension `d` of each factor.
    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn schmidt(&self) -> &Schmidt {
        &self.schmidt
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.amplitudes).expect("normalized")
    }

    /// Operator-Schmidt number of `|Φ⟩⟨Φ|`, the square of the Schmidt number.
    pub fn operator_schmidt_number(&self) -> usize {
        operator_schmidt_number(self.density_matrix().mat(), self.d, self.d, 1e-10)
    }
}

/// `Σ_j |j⟩⊗|j⟩/√d`
pub fn maximally_entangled_input(d: usize) -> BipartitePureState {
    let mut psi = CVector::zeros(d * d);
    let amp = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        psi[j * d + j] = c(amp, 0.0);
    }
    BipartitePureState::new(psi, d).expect("normalized")
}

/// Rank of the realigned matrix `R[(i,k),(j,l)] = ρ[(i,j),(k,l)]`, i.e. the
/// number of terms in the operator-Schmidt decomposition `Σ s_m A_m ⊗ B_m`.
pub fn operator_schmidt_number(rho: &CMatrix, d_a: usize, d_b: usize, tol: f64) -> usize {
    let r = CMatrix::from_fn(d_a * d_a, d_b * d_b, |row, col| {
        let (i, k) = (row / d_a, row % d_a);
        let (j, l) = (col / d_b, col % d_b);
        rho[(i * d_b + j, k * d_b + l)]
    });
    let sv = r.singular_values();
    let scale = sv.max();
    sv.iter().filter(|&&s| s > tol * scale.max(1.0)).count()
}

/// Density matrix with eigenvectors from a Haar unitary and a random
/// spectrum supported on `rank` directions.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    assert!(rank >= 1 && rank <= d);
    let u = linalg::haar_unitary(d, rng);
    let mut weights: Vec<f64> = (0..d)
        .map(|j| {
            if j < rank {
                rng.random::<f64>() + 1e-3
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    DensityMatrix::from_spectrum(&u, &weights).expect("valid spectrum")
}

/// Random channel with `n_kraus` operators from a Haar-like Stinespring
/// isometry. A trace-decreasing channel is obtained by composing with a
/// random contraction whose singular values lie in `[0.3, 1)`.
pub fn random_channel<R: Rng + ?Sized>(
    d: usize,
    n_kraus: usize,
    trace_preserving: bool,
    rng: &mut R,
) -> KrausChannel {
    let g = CMatrix::from_fn(n_kraus * d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let gram = g.adjoint() * &g;
    let iso = &g * linalg::inv_sqrt(&gram, 1e-14).expect("Hermitian Gram matrix");
    let contraction = if trace_preserving {
        identity(d)
    } else {
        let w = linalg::haar_unitary(d, rng);
        let s: Vec<f64> = (0..d).map(|_| 0.3 + 0.7 * rng.random::<f64>()).collect();
        w * linalg::from_real_diagonal(&s)
    };
    let ops = (0..n_kraus)
        .map(|i| iso.rows(i * d, d).into_owned() * &contraction)
        .collect();
    KrausChannel::new(ops).expect("random channel is trace non-increasing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(11)
    }

    fn third_damping() -> KrausChannel {
        let t = (1.0f64 / 3.0).sqrt();
        KrausChannel::new(vec![
            linalg::from_real_diagonal(&[1.0, t]),
            linalg::from_real_diagonal(&[0.0, t]),
        ])
        .unwrap()
    }

    #[test]
    fn identity_channel_process_matrix() {
        let x = KrausChannel::identity(3).to_process();
        assert!((linalg::real_trace(x.mat()) - 3.0).abs() < 1e-12);
        let eig = hermitian_eig(x.mat()).unwrap();
        assert!((eig.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12);
        let choi = KrausChannel::identity(3).choi_state();
        assert!((choi.mat().scale(3.0) - x.mat()).norm() < 1e-12);
        assert!(x.is_trace_preserving());
    }

    #[test]
    fn natural_basis_enumeration() {
        // A = |0⟩⟨1| has its only coefficient at index (1-1)·d + 2 = 1.
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(1.0, 0.0);
        let ch = KrausChannel::new(vec![a]).unwrap();
        let x = ch.to_process();
        assert_eq!(x.mat()[(1, 1)].re, 1.0);
        assert!((linalg::real_trace(x.mat()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_and_damping_process_ranks() {
        let h = KrausChannel::hadamard().to_process();
        let eig = hermitian_eig(h.mat()).unwrap();
        assert!(eig.eigenvalues[1].abs() < 1e-12);
        let pd = KrausChannel::phase_damping(0.989).unwrap();
        assert!(pd.is_trace_preserving());
        let eig = hermitian_eig(pd.to_process().mat()).unwrap();
        assert!(eig.eigenvalues[1] > 1e-3);
        assert!(eig.eigenvalues[2].abs() < 1e-12);
        assert!(pd.to_process().is_trace_preserving());
    }

    #[test]
    fn apply_channel_examples() {
        let mut rng = rng();
        let rho = random_density_matrix(3, 3, &mut rng);
        let out = KrausChannel::identity(3).apply(&rho).unwrap();
        assert!((out.mat() - rho.mat()).norm() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        let out = KrausChannel::phase_damping(1.0)
            .unwrap()
            .apply(&plus)
            .unwrap();
        assert!((out.mat() - linalg::from_real_diagonal(&[0.5, 0.5])).norm() < 1e-12);

        let out = third_damping()
            .apply(&DensityMatrix::maximally_mixed(2))
            .unwrap();
        assert!((out.mat() - linalg::from_real_diagonal(&[0.5, 1.0 / 3.0])).norm() < 1e-12);
        assert_eq!(out.trace_mode(), TraceMode::SubUnit);
        assert!((out.trace() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn choi_trace_of_third_damping() {
        let ch = third_damping();
        let kraus_norms: f64 = ch.operators().iter().map(|a| a.norm_squared()).sum();
        let choi = ch.choi_state();
        assert!((choi.trace() - kraus_norms / 2.0).abs() < 1e-12);
        assert!((choi.trace() - 5.0 / 6.0).abs() < 1e-12);
        assert!(!ch.is_trace_preserving());
    }

    #[test]
    fn choi_matches_process_matrix() {
        let mut rng = rng();
        for (d, k, tp) in [(2, 1, true), (2, 3, false), (3, 2, true), (3, 4, false)] {
            let ch = random_channel(d, k, tp, &mut rng);
            assert_eq!(ch.is_trace_preserving(), tp);
            let x = ch.to_process();
            assert!((ch.choi_state().mat().scale(d as f64) - x.mat()).norm() < 1e-9);
            let marginal = x.input_marginal();
            let gram = ch
                .operators()
                .iter()
                .fold(CMatrix::zeros(d, d), |acc, a| acc + a.adjoint() * a);
            assert!((marginal - gram.transpose()).norm() < 1e-9);
        }
    }

    #[test]
    fn process_and_kraus_application_agree() {
        let mut rng = rng();
        let ch = random_channel(3, 2, false, &mut rng);
        let rho = random_density_matrix(3, 2, &mut rng);
        let via_kraus = ch.apply(&rho).unwrap();
        let via_choi = ch.to_process().apply(rho.mat()).unwrap();
        assert!((via_kraus.mat() - via_choi).norm() < 1e-9);
    }

    #[test]
    fn kraus_validation() {
        let too_big = vec![identity(2).scale(1.1)];
        assert!(matches!(
            KrausChannel::new(too_big),
            Err(Error::NotTraceNonIncreasing { .. })
        ));
        assert!(KrausChannel::new(vec![identity(2), identity(3)]).is_err());
        // completely depolarizing channel: X = I/d, Tr₁(X) = I
        assert!(ProcessMatrix::new(identity(4).scale(0.5), 2)
            .unwrap()
            .is_trace_preserving());
        assert!(ProcessMatrix::new(identity(4), 2).is_err());
    }

    #[test]
    fn schmidt_examples() {
        let me = maximally_entangled_input(3);
        for &h in &me.schmidt().coefficients {
            assert!((h - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
        assert!((me.schmidt().reconstruct() - me.amplitudes()).norm() < 1e-12);
        assert_eq!(maximally_entangled_input(2).operator_schmidt_number(), 4);
        assert!((me.density_matrix().trace() - 1.0).abs() < 1e-12);

        let mut prod = CVector::zeros(4);
        prod[0] = c(1.0, 0.0);
        let s = schmidt_decompose(&prod, 2, 2).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.number(), 1);

        let mut rng = rng();
        for _ in 0..10 {
            let st = BipartitePureState::random(3, &mut rng);
            let s = st.schmidt();
            assert!((s.reconstruct() - st.amplitudes()).norm() < 1e-8);
            let total: f64 = s.coefficients.iter().map(|h| h * h).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
            assert!(linalg::unitarity_defect(&s.u) < 1e-9);
            assert!(linalg::unitarity_defect(&s.v) < 1e-9);
        }
        assert!(schmidt_decompose(&prod.scale(2.0), 2, 2).is_err());
    }

    #[test]
    fn extended_channel_consistency() {
        // Tr_B[(I ⊗ B†) σ_out] recovers E applied to the matching operator on A.
        let mut rng = rng();
        let ch = random_channel(2, 2, false, &mut rng);
        let input = BipartitePureState::random(2, &mut rng);
        let out = ch.apply_extended(&input.density_matrix()).unwrap();
        // With |Φ⟩ = (I ⊗ K)|Ω⟩ and K = V H Uᵀ, σ_out = (I ⊗ K) X (I ⊗ K†).
        let s = input.schmidt();
        let k = &s.v * linalg::from_real_diagonal(&s.coefficients) * s.u.transpose();
        let lifted = kron(&identity(2), &k);
        let expected = &lifted * ch.to_process().mat() * lifted.adjoint();
        assert!((out.mat() - expected).norm() < 1e-9);
        // Ancilla marginal is untouched by a TP channel and shrinks otherwise.
        let anc = partial_trace_1(out.mat(), 2, 2).unwrap();
        let anc_in = partial_trace_1(input.density_matrix().mat(), 2, 2).unwrap();
        assert!(linalg::real_trace(&anc) <= linalg::real_trace(&anc_in) + 1e-12);
    }

    #[test]
    fn born_rule_cases() {
        let z = Povm::computational(2);
        let p = born_probabilities(&DensityMatrix::basis_state(2, 0), &z).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        let mut rng = rng();
        let u = linalg::haar_unitary(4, &mut rng);
        let povm = Povm::from_basis(&u).unwrap();
        let p = born_probabilities(&DensityMatrix::maximally_mixed(4), &povm).unwrap();
        for x in p {
            assert!((x - 0.25).abs() < 1e-12);
        }
        let rho = random_density_matrix(4, 1, &mut rng);
        let total: f64 = born_probabilities(&rho, &povm).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(born_probabilities(&DensityMatrix::maximally_mixed(3), &povm).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(identity(2)).is_err());
        assert!(DensityMatrix::new(linalg::from_real_diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::sub_unit(linalg::from_real_diagonal(&[0.5, 0.1])).is_ok());
        assert!(DensityMatrix::sub_unit(CMatrix::zeros(2, 2)).is_err());
        assert!(Povm::new(vec![identity(2).scale(0.5)]).is_err());
    }
}
