//! Fidelities between states, detector elements, process matrices and whole
//! detectors.
//!
//! `F₁ = F_dp − [Tr(S − Ŝ)]²/d²` removes the distortion of the trace-normalized
//! fidelity `F_dp`, which reports 1 for any pair `Ŝ = aS`. `F` rescales `F₁`
//! from `[f, 1]` onto `[0, 1]`, where `f` depends on the kind of operator.

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, kron, matrix_sqrt, real_trace, CMatrix};
use crate::quantum_objects::Povm;

const UNIT_TRACE_TOL: f64 = 1e-6;

/// Which operator family is being compared; fixes the `d` of `F₁` and the
/// lower bound `f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FidelityScenario {
    /// Unit-trace states; `F` is the plain Uhlmann fidelity.
    State,
    /// Single POVM element on a `d`-dimensional system, `f = 1/d − 1`.
    DetectorElement(usize),
    /// Process matrix of a `d`-dimensional channel (the matrix is `d² × d²`),
    /// `f = −1`.
    Process(usize),
    /// Sub-unit state on a `dim`-dimensional space, `f = −1/dim²`.
    PseudoState(usize),
}

impl FidelityScenario {
    pub fn f_lower(&self) -> f64 {
        match *self {
            FidelityScenario::State => 0.0,
            FidelityScenario::DetectorElement(d) => 1.0 / d as f64 - 1.0,
            FidelityScenario::Process(_) => -1.0,
            FidelityScenario::PseudoState(dim) => -1.0 / (dim * dim) as f64,
        }
    }

    /// Dimension used in the trace-mismatch penalty of `F₁`.
    pub fn penalty_dim(&self, matrix_dim: usize) -> usize {
        match *self {
            FidelityScenario::State => matrix_dim,
            FidelityScenario::DetectorElement(d) | FidelityScenario::Process(d) => d,
            FidelityScenario::PseudoState(dim) => dim,
        }
    }
}

fn same_shape(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::dims(
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    Ok(())
}

/// `Tr √(√a b √a)` for PSD `a`, `b`, evaluated as the nuclear norm of
/// `√a √b`. Taking singular values directly avoids square roots of tiny
/// eigenvalues, which matters near rank-deficient targets.
pub fn root_fidelity(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    same_shape(a, b)?;
    let product = matrix_sqrt(a)? * matrix_sqrt(b)?;
    Ok(product.singular_values().iter().sum())
}

/// Uhlmann fidelity `[Tr √(√a b √a)]²` without trace normalization.
pub fn state_fidelity(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    Ok(root_fidelity(a, b)?.powi(2))
}

fn positive_traces(hat_s: &CMatrix, s: &CMatrix) -> Result<(f64, f64)> {
    let (th, ts) = (real_trace(hat_s), real_trace(s));
    if th <= 0.0 || ts <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    Ok((th, ts))
}

/// `F_s(Ŝ, S) / (Tr Ŝ · Tr S)`
pub fn fidelity_dp(hat_s: &CMatrix, s: &CMatrix) -> Result<f64> {
    let (th, ts) = positive_traces(hat_s, s)?;
    Ok(state_fidelity(hat_s, s)? / (th * ts))
}

/// `F_dp − [Tr(S − Ŝ)]² / d²`
pub fn fidelity_f1(hat_s: &CMatrix, s: &CMatrix, d: usize) -> Result<f64> {
    let (th, ts) = positive_traces(hat_s, s)?;
    let fdp = state_fidelity(hat_s, s)? / (th * ts);
    Ok(fdp - ((ts - th) / d as f64).powi(2))
}

/// Normalized fidelity before and after clamping into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityValue {
    pub value: f64,
    pub raw: f64,
}

pub fn fidelity_detailed(
    hat_s: &CMatrix,
    s: &CMatrix,
    scenario: FidelityScenario,
) -> Result<FidelityValue> {
    same_shape(hat_s, s)?;
    if scenario == FidelityScenario::State {
        for t in [real_trace(hat_s), real_trace(s)] {
            if (t - 1.0).abs() > UNIT_TRACE_TOL {
                return Err(Error::InvalidTrace {
                    trace: t,
                    reason: "state fidelity compares unit-trace operators",
                });
            }
        }
    }
    let f = scenario.f_lower();
    let f1 = fidelity_f1(hat_s, s, scenario.penalty_dim(s.nrows()))?;
    let raw = (f1 - f) / (1.0 - f);
    Ok(FidelityValue {
        value: raw.clamp(0.0, 1.0),
        raw,
    })
}

/// `(F₁ − f) / (1 − f)`, clamped into `[0, 1]`.
pub fn fidelity(hat_s: &CMatrix, s: &CMatrix, scenario: FidelityScenario) -> Result<f64> {
    Ok(fidelity_detailed(hat_s, s, scenario)?.value)
}

pub fn infidelity(hat_s: &CMatrix, s: &CMatrix, scenario: FidelityScenario) -> Result<f64> {
    Ok(1.0 - fidelity(hat_s, s, scenario)?)
}

/// `(1/d) Σ_j P_j ⊗ |j⟩⟨j|`
pub fn detector_state(p: &Povm) -> CMatrix {
    let n = p.len();
    let d = p.dim() as f64;
    p.elements()
        .iter()
        .enumerate()
        .fold(CMatrix::zeros(p.dim() * n, p.dim() * n), |acc, (j, e)| {
            let mut proj = CMatrix::zeros(n, n);
            proj[(j, j)] = linalg::c(1.0, 0.0);
            acc + kron(e, &proj).unscale(d)
        })
}

/// Uhlmann fidelity between the normalized detector states of `p` and `q`.
pub fn detector_fidelity_h(p: &Povm, q: &Povm) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::dims(
            format!("{} elements", p.len()),
            format!("{} elements", q.len()),
        ));
    }
    if p.dim() != q.dim() {
        return Err(Error::dims(p.dim(), q.dim()));
    }
    state_fidelity(&detector_state(p), &detector_state(q))
}

/// `‖a − b‖_tr`, the sum of absolute eigenvalues of the difference.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    same_shape(a, b)?;
    Ok(hermitian_eig(&(a - b))?
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum())
}

/// The three sides of `1 − √F ≤ ½‖a − b‖_tr ≤ √(1 − F)`.
#[derive(Clone, Copy, Debug)]
pub struct FuchsBounds {
    pub lower: f64,
    pub half_trace_distance: f64,
    pub upper: f64,
}

impl FuchsBounds {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.half_trace_distance + slack
            && self.half_trace_distance <= self.upper + slack
    }
}

pub fn fuchs_check(a: &CMatrix, b: &CMatrix) -> Result<FuchsBounds> {
    let f = state_fidelity(a, b)?.clamp(0.0, 1.0);
    Ok(FuchsBounds {
        lower: 1.0 - f.sqrt(),
        half_trace_distance: 0.5 * trace_distance(a, b)?,
        upper: (1.0 - f).sqrt(),
    })
}
