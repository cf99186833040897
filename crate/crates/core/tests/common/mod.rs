//! Reference implementations used as oracles by the integration tests.
//! Each one takes a different route from the library code it checks.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use qtomo::linalg::CMatrix;
use qtomo::quantum_objects::KrausChannel;

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let a = gaussian(d, d, rng);
    (&a + a.adjoint()).scale(0.5)
}

/// Random density matrix of the given rank, built as `GG†/Tr`.
pub fn random_state<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = gaussian(d, rank, rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m.unscale(t)
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn eigenvalues_desc(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Euclidean projection onto the probability simplex by the active-set
/// method: solve the equality-constrained problem on the free set, fix every
/// coordinate that came out negative at zero, repeat.
pub fn simplex_active_set(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut free = vec![true; n];
    loop {
        let k = free.iter().filter(|&&f| f).count() as f64;
        let s: f64 = (0..n).filter(|&i| free[i]).map(|i| lambda[i]).sum();
        let shift = (1.0 - s) / k;
        let x: Vec<f64> = (0..n)
            .map(|i| if free[i] { lambda[i] + shift } else { 0.0 })
            .collect();
        let mut changed = false;
        for i in 0..n {
            if free[i] && x[i] < 0.0 {
                free[i] = false;
                changed = true;
            }
        }
        if !changed {
            return x;
        }
    }
}

/// Kronecker product by explicit index arithmetic.
pub fn kron_loops(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Column stacking by explicit index arithmetic.
pub fn vec_loops(m: &CMatrix) -> CMatrix {
    let (r, c) = (m.nrows(), m.ncols());
    CMatrix::from_fn(r * c, 1, |k, _| m[(k % r, k / r)])
}

pub fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    e[(i, j)] = Complex64::new(1.0, 0.0);
    e
}

/// `Tr₁` by summing blocks along the diagonal of the first factor.
pub fn partial_trace_first_loops(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d2, d2, |a, b| {
        (0..d1).map(|k| m[(k * d2 + a, k * d2 + b)]).sum()
    })
}

/// `Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j|`, with the output on the first factor.
pub fn process_from_action(ch: &KrausChannel) -> CMatrix {
    let d = ch.dim();
    let mut x = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let e = unit(d, i, j);
            let out: CMatrix = ch.operators().iter().map(|a| a * &e * a.adjoint()).sum();
            x += kron_loops(&out, &e);
        }
    }
    x
}

/// Both sides of `Σ AB|i⟩⟨j|B†A† ⊗ |i⟩⟨j| = Σ A|i⟩⟨j|A† ⊗ Bᵀ|i⟩⟨j|B*`.
pub fn swap_identity_sides(a: &CMatrix, b: &CMatrix) -> (CMatrix, CMatrix) {
    let d = a.nrows();
    let mut lhs = CMatrix::zeros(d * d, d * d);
    let mut rhs = CMatrix::zeros(d * d, d * d);
    let ab = a * b;
    let bt = b.transpose();
    let bc = b.map(|z| z.conj());
    for i in 0..d {
        for j in 0..d {
            let e = unit(d, i, j);
            lhs += kron_loops(&(&ab * &e * ab.adjoint()), &e);
            rhs += kron_loops(&(a * &e * a.adjoint()), &(&bt * &e * &bc));
        }
    }
    (lhs, rhs)
}

/// Square roots of eigenvalues, with anything below `1e-13` of the largest
/// treated as rounding noise.
fn root_spectrum(values: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    let top = values.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    values.map(|l| if l > 1e-13 * top { l.sqrt() } else { 0.0 })
}

/// Hermitian square root through nalgebra's own eigensolver.
fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let e = m.clone().symmetric_eigen();
    let s = DMatrix::from_diagonal(&root_spectrum(&e.eigenvalues).map(|l| Complex64::new(l, 0.0)));
    &e.eigenvectors * s * e.eigenvectors.adjoint()
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`.
pub fn uhlmann_fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let sa = sqrt_psd(a);
    let inner = &sa * b * &sa;
    let inner = (&inner + inner.adjoint()).scale(0.5);
    let root: f64 = root_spectrum(&inner.symmetric_eigen().eigenvalues).sum();
    root * root
}

/// `‖a − b‖_tr`, the sum of singular values.
pub fn trace_norm_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).singular_values().iter().sum()
}
