//! Second-stage corrections that turn a PSD estimate `g` of a process matrix
//! into a physical one. Both act on the input (second) tensor factor, where
//! `Tr₁(X)` lives.

use crate::error::{Error, Result};
use crate::linalg::{
    default_inv_sqrt_clamp, hermitian_eig, identity, inv_sqrt, kron, partial_trace_1, CMatrix,
};
use crate::quantum_objects::ProcessMatrix;

fn check_shape(g: &CMatrix, d: usize) -> Result<()> {
    let n = d * d;
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("{}x{}", g.nrows(), g.ncols()),
        ));
    }
    Ok(())
}

fn sandwich(g: &CMatrix, m: &CMatrix, d: usize) -> CMatrix {
    let lifted = kron(&identity(d), m);
    let x = &lifted * g * lifted.adjoint();
    (&x + x.adjoint()).scale(0.5)
}

/// `X̂ = (I ⊗ Q̂^{-1/2}) g (I ⊗ Q̂^{-1/2})` with `Q̂ = Tr₁(g)`, giving
/// `Tr₁(X̂) = I`.
pub fn qpt_stage2_tp(g: &CMatrix, d: usize) -> Result<ProcessMatrix> {
    check_shape(g, d)?;
    let q = partial_trace_1(g, d, d)?;
    let clamp = default_inv_sqrt_clamp(d);
    if crate::linalg::min_eigenvalue(&q)? < clamp {
        log::warn!("input marginal of the process estimate is singular; clamping");
    }
    let m = inv_sqrt(&q, clamp)?;
    ProcessMatrix::new(sandwich(g, &m, d), d)
}

/// Trace-decreasing correction.
///
/// With `Q̂ = Tr₁(g) = Ŵ diag(f̂) Ŵ†` of rank `c`, eigenvalues beyond the rank
/// are replaced by `f̂_c / N` (all by `1/N` when `Q̂ = 0`), giving `Q̄`. The
/// target marginal `Q̃` caps each eigenvalue at one, and
/// `X̂ = (I ⊗ Q̃^{1/2} Q̄^{-1/2}) g (·)†` so that `Tr₁(X̂) ≤ I`.
pub fn qpt_stage2_ntp(g: &CMatrix, d: usize, n_shots: u64) -> Result<ProcessMatrix> {
    check_shape(g, d)?;
    if n_shots == 0 {
        return Err(Error::InvalidParameter(
            "shot count must be positive".into(),
        ));
    }
    let q = partial_trace_1(g, d, d)?;
    let eig = hermitian_eig(&q)?;
    let tol = default_inv_sqrt_clamp(d);
    let rank = eig.eigenvalues.iter().filter(|&&f| f > tol).count();
    let n = n_shots as f64;
    let bar: Vec<f64> = if rank == 0 {
        vec![1.0 / n; d]
    } else {
        let fill = eig.eigenvalues[rank - 1] / n;
        eig.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &f)| if i < rank { f } else { fill })
            .collect()
    };
    let scale: Vec<f64> = bar.iter().map(|&f| (f.min(1.0) / f).sqrt()).collect();
    let m = eig.compose(&scale);
    ProcessMatrix::new(sandwich(g, &m, d), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_diagonal, real_trace};
    use crate::measurement_sim::SeededRng;
    use crate::quantum_objects::{random_channel, KrausChannel};
    use rand_distr::{Distribution, StandardNormal};

    fn random_psd(n: usize, rng: &mut SeededRng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| {
            crate::linalg::c(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        &a * a.adjoint()
    }

    #[test]
    fn tp_correction() {
        let mut rng = SeededRng::new(1, 0);
        let x = random_channel(2, 2, true, &mut rng).to_process();
        let out = qpt_stage2_tp(x.mat(), 2).unwrap();
        assert!((out.mat() - x.mat()).norm() < 1e-10);
        let out = qpt_stage2_tp(&x.mat().scale(2.0), 2).unwrap();
        assert!((out.mat() - x.mat()).norm() < 1e-10);

        let g = random_psd(4, &mut rng);
        let out = qpt_stage2_tp(&g, 2).unwrap();
        assert!((out.input_marginal() - identity(2)).norm() < 1e-8);
        for c in [0.5, 2.0] {
            let scaled = qpt_stage2_tp(&g.scale(c), 2).unwrap();
            assert!((scaled.mat() - out.mat()).norm() < 1e-10);
        }
    }

    #[test]
    fn ntp_correction_leaves_valid_input() {
        let mut rng = SeededRng::new(2, 0);
        let x = random_channel(2, 2, false, &mut rng).to_process();
        let out = qpt_stage2_ntp(x.mat(), 2, 1000).unwrap();
        assert!((out.mat() - x.mat()).norm() < 1e-10);
    }

    #[test]
    fn ntp_rescales_oversized_direction() {
        // Tr₁(g) = diag(2, 0.5): the first direction must come down to 1.
        let ch = KrausChannel::new(vec![from_real_diagonal(&[1.0, 0.5f64.sqrt()])]).unwrap();
        let g = {
            let x = ch.to_process().into_mat();
            let lift = kron(&identity(2), &from_real_diagonal(&[2f64.sqrt(), 1.0]));
            &lift * x * &lift
        };
        let q = partial_trace_1(&g, 2, 2).unwrap();
        assert!((q - from_real_diagonal(&[2.0, 0.5])).norm() < 1e-12);
        let out = qpt_stage2_ntp(&g, 2, 100).unwrap();
        assert!((out.input_marginal() - from_real_diagonal(&[1.0, 0.5])).norm() < 1e-10);
    }

    #[test]
    fn ntp_handles_rank_deficiency() {
        let mut rng = SeededRng::new(3, 0);
        let v = random_psd(4, &mut rng);
        // g supported on the first input vector only
        let p0 = from_real_diagonal(&[1.0, 0.0]);
        let lift = kron(&identity(2), &p0);
        let g = &lift * v * &lift;
        let out = qpt_stage2_ntp(&g, 2, 100).unwrap();
        assert!(out
            .mat()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite()));
        let q = out.input_marginal();
        assert!(crate::linalg::max_eigenvalue(&q).unwrap() <= 1.0 + 1e-8);
        assert!(real_trace(&q) > 0.0);
        let zero = qpt_stage2_ntp(&CMatrix::zeros(4, 4), 2, 10).unwrap();
        assert_eq!(zero.mat().norm(), 0.0);
    }
}
