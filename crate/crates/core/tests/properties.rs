mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use common::*;
use qtomo::estimators::{
    aapt_reconstruct, physical_projection_fast, HermitianBasis, LinearInversion,
};
use qtomo::fidelity::{
    fidelity, fidelity_dp, fuchs_check, state_fidelity, trace_distance, FidelityScenario,
};
use qtomo::linalg::{self, hermitian_eig, kron, partial_trace_1, unvec, CMatrix};
use qtomo::measurement_sim::{cube_povm, sample_counts, MeasurementRecord, SeededRng};
use qtomo::quantum_objects::{
    born_probabilities, kraus_to_process, random_channel, BipartitePureState, DensityMatrix,
};

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn weyl_eigenvalue_perturbation(seed in any::<u64>(), d in 2usize..7) {
        let mut r = rng(seed);
        let x = random_hermitian(d, &mut r);
        let y = &x + random_hermitian(d, &mut r).scale(0.1);
        let lx = hermitian_eig(&x).unwrap().eigenvalues;
        let ly = hermitian_eig(&y).unwrap().eigenvalues;
        let gap = (&x - &y).norm();
        let worst = lx.iter().zip(&ly).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let sq: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assert!(worst <= gap + 1e-12);
        prop_assert!(sq <= gap * gap + 1e-12);
    }

    #[test]
    fn eigenvalues_agree_with_reference_solver(seed in any::<u64>(), d in 1usize..9) {
        let h = random_hermitian(d, &mut rng(seed));
        let ours = hermitian_eig(&h).unwrap().eigenvalues;
        let reference = eigenvalues_desc(&h);
        for (a, b) in ours.iter().zip(&reference) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_identity(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let a = gaussian(d, d, &mut r);
        let b = gaussian(d, d, &mut r);
        let (lhs, rhs) = swap_identity_sides(&a, &b);
        let omega = linalg::vec(&linalg::identity(d));
        let proj = linalg::outer(&omega, &omega);
        let left = kron(&(&a * &b), &linalg::identity(d));
        let right = kron(&a, &b.transpose());
        let lib_lhs = &left * &proj * left.adjoint();
        let lib_rhs = &right * &proj * right.adjoint();
        let scale = lhs.norm();
        prop_assert!((&lhs - &rhs).norm() < 1e-10 * scale);
        prop_assert!((&lib_lhs - &lhs).norm() < 1e-10 * scale);
        prop_assert!((&lib_rhs - &rhs).norm() < 1e-10 * scale);
    }

    #[test]
    fn vectorization_identities(seed in any::<u64>(), d in 1usize..5, k in 1usize..4) {
        let mut r = rng(seed);
        let a = gaussian(d, d, &mut r);
        let b = gaussian(d, d, &mut r);
        let c = gaussian(d, d, &mut r);
        prop_assert_eq!(CMatrix::from_column_slice(d * d, 1, linalg::vec(&b).as_slice()), vec_loops(&b));
        prop_assert!((unvec(&linalg::vec(&a), d).unwrap() - &a).norm() == 0.0);
        let lhs = linalg::vec(&(&a * &b * &c));
        let rhs = kron_loops(&c.transpose(), &a) * vec_loops(&b);
        prop_assert!((CMatrix::from_column_slice(d * d, 1, lhs.as_slice()) - rhs).norm() < 1e-9);
        let t = partial_trace_1(&linalg::outer(&linalg::vec(&a), &linalg::vec(&b)), d, d).unwrap();
        prop_assert!((t - &a * b.adjoint()).norm() < 1e-9);
        let e = gaussian(k, d + 1, &mut r);
        prop_assert!((kron(&e, &a) - kron_loops(&e, &a)).norm() == 0.0);
        let big = gaussian(k * d, k * d, &mut r);
        prop_assert!((partial_trace_1(&big, k, d).unwrap() - partial_trace_first_loops(&big, k, d)).norm() < 1e-12);
    }

    #[test]
    fn projection_matches_active_set(seed in any::<u64>(), d in 2usize..5, spread in 0.05f64..2.0) {
        let mut r = rng(seed);
        let mut h = random_hermitian(d, &mut r).scale(spread);
        let shift = (1.0 - linalg::real_trace(&h)) / d as f64;
        h += linalg::identity(d).scale(shift);
        let ours = physical_projection_fast(&h).unwrap();
        let e = h.clone().symmetric_eigen();
        let lambda: Vec<f64> = e.eigenvalues.iter().copied().collect();
        let x = simplex_active_set(&lambda);
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d, x.iter().map(|&v| num_complex::Complex64::new(v, 0.0))));
        let expected = &e.eigenvectors * diag * e.eigenvectors.adjoint();
        prop_assert!((ours.mat() - expected).norm() < 1e-9);
    }

    #[test]
    fn choi_and_process_agree(seed in any::<u64>(), d in 2usize..4, n in 1usize..4, tp in any::<bool>()) {
        let ch = random_channel(d, n, tp, &mut rng(seed));
        let x = kraus_to_process(&ch).unwrap();
        let oracle = process_from_action(&ch);
        prop_assert!((ch.choi_state().mat().scale(d as f64) - x.mat()).norm() < 1e-9);
        prop_assert!((x.mat() - &oracle).norm() < 1e-9);
        prop_assert_eq!(x.is_trace_preserving(), tp);
    }

    #[test]
    fn extended_channel_matches_direct_sum(seed in any::<u64>(), tp in any::<bool>()) {
        let mut r = rng(seed);
        let ch = random_channel(2, 2, tp, &mut r);
        let input = BipartitePureState::random(2, &mut r);
        let ours = ch.apply_extended(&input.density_matrix()).unwrap();
        let rho = input.density_matrix().into_mat();
        let id = linalg::identity(2);
        let expected: CMatrix = ch.operators().iter().map(|a| {
            let k = kron_loops(a, &id);
            &k * &rho * k.adjoint()
        }).sum();
        prop_assert!((ours.mat() - expected).norm() < 1e-12);
    }

    #[test]
    fn ancilla_assisted_round_trip(seed in any::<u64>(), d in 2usize..4, n in 1usize..4, tp in any::<bool>()) {
        let mut r = rng(seed);
        let ch = random_channel(d, n, tp, &mut r);
        let input = BipartitePureState::random(d, &mut r);
        prop_assume!(input.schmidt().coefficients.iter().all(|&h| h > 0.05));
        let sigma = ch.apply_extended(&input.density_matrix()).unwrap();
        let x = aapt_reconstruct(sigma.mat(), &input).unwrap();
        prop_assert!((x - process_from_action(&ch)).norm() < 1e-8);
    }

    #[test]
    fn fuchs_van_de_graaf(seed in any::<u64>(), d in 2usize..5, ra in 1usize..5, rb in 1usize..5) {
        let mut r = rng(seed);
        let a = random_state(d, ra.min(d), &mut r);
        let b = random_state(d, rb.min(d), &mut r);
        let fb = fuchs_check(&a, &b).unwrap();
        prop_assert!(fb.holds(1e-9));
        let f = uhlmann_fidelity(&a, &b);
        let td = trace_norm_distance(&a, &b);
        prop_assert!(1.0 - f.sqrt() <= 0.5 * td + 1e-9);
        prop_assert!(0.5 * td <= (1.0 - f).sqrt() + 1e-9);
    }

    #[test]
    fn fidelity_matches_reference(seed in any::<u64>(), d in 2usize..6, ra in 1usize..6, rb in 1usize..6) {
        let mut r = rng(seed);
        let a = random_state(d, ra.min(d), &mut r);
        let b = random_state(d, rb.min(d), &mut r);
        prop_assert!((state_fidelity(&a, &b).unwrap() - uhlmann_fidelity(&a, &b)).abs() < 1e-7);
        prop_assert!((state_fidelity(&a, &b).unwrap() - state_fidelity(&b, &a).unwrap()).abs() < 1e-10);
        prop_assert!((trace_distance(&a, &b).unwrap() - trace_norm_distance(&a, &b)).abs() < 1e-9);
        prop_assert!((state_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scaled_operators_are_distinguished(seed in any::<u64>(), d in 2usize..5, s in 0.1f64..0.95) {
        let a = random_state(d, d, &mut rng(seed));
        let b = a.scale(s);
        prop_assert!((fidelity_dp(&b, &a).unwrap() - 1.0).abs() < 1e-9);
        let f = fidelity(&b, &a, FidelityScenario::DetectorElement(d)).unwrap();
        prop_assert!(f < 1.0 - 1e-4 * (1.0 - s));
    }

    #[test]
    fn linear_inversion_is_exact_on_exact_data(seed in any::<u64>(), n in 1usize..3, rank in 1usize..5) {
        let d = 1 << n;
        let rho = DensityMatrix::new(random_state(d, rank.min(d), &mut rng(seed))).unwrap();
        let povms = cube_povm(n);
        let records: Vec<_> = povms.iter().enumerate()
            .map(|(i, p)| MeasurementRecord::exact(i, born_probabilities(&rho, p).unwrap()))
            .collect();
        for constrain in [false, true] {
            let inv = LinearInversion::for_povms(HermitianBasis::gell_mann(d), &povms, constrain).unwrap();
            prop_assert!(max_abs(&(inv.estimate(&records).unwrap() - rho.mat())) < 1e-10);
        }
    }

    #[test]
    fn sampled_counts_are_consistent(seed in any::<u64>(), shots in 0u64..5000, k in 1usize..6) {
        let mut r = SeededRng::new(seed, 3);
        let raw: Vec<f64> = (0..k).map(|i| 1.0 + i as f64).collect();
        let total: f64 = raw.iter().sum::<f64>() * 1.25;
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let (counts, null) = sample_counts(&probs, shots, &mut r).unwrap();
        prop_assert_eq!(counts.iter().sum::<u64>() + null, shots);
        let again = sample_counts(&probs, shots, &mut SeededRng::new(seed, 3)).unwrap();
        prop_assert_eq!((counts, null), again);
    }
}

#[test]
fn haar_first_and_second_moments() {
    let mut r = SeededRng::new(42, 0);
    for d in [2usize, 3, 5] {
        let n = 20_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| linalg::haar_unitary(d, &mut r)[(0, 0)].norm_sqr())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 1.0 / d as f64).abs() < 3.0 * se,
            "d={d} mean={mean} se={se}"
        );
        let m2 = samples.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let expected = 2.0 / (d * (d + 1)) as f64;
        assert!((m2 - expected).abs() < 0.05 * expected, "d={d} m2={m2}");
    }
}

#[test]
fn haar_unitaries_are_unitary() {
    let mut r = SeededRng::new(7, 1);
    for d in 1..9 {
        assert!(linalg::unitarity_defect(&linalg::haar_unitary(d, &mut r)) < 1e-12);
    }
}

#[test]
fn multinomial_frequencies_converge() {
    let probs = [0.1, 0.25, 0.3, 0.2];
    let shots = 1_000_000u64;
    let (counts, null) = sample_counts(&probs, shots, &mut SeededRng::new(9, 0)).unwrap();
    let all: Vec<(f64, u64)> = probs
        .iter()
        .copied()
        .zip(counts)
        .chain([(0.15, null)])
        .collect();
    let chi2: f64 = all
        .iter()
        .map(|&(p, c)| (c as f64 - p * shots as f64).powi(2) / (p * shots as f64))
        .sum();
    // 4 degrees of freedom; the 99.9% point is 18.47.
    assert!(chi2 < 18.47, "chi2 = {chi2}");
}
