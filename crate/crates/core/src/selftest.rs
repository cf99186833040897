//! Quick invariant suite behind `qtomo selftest`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::estimators::{
    aapt_reconstruct, adaptive_aapt, adaptive_qdt, adaptive_qst, physical_projection_fast,
    AaptSetup, QdtSetup, QstSetup,
};
use crate::experiments::targets::probe_battery;
use crate::fidelity::{fidelity, fidelity_dp, fuchs_check, FidelityScenario};
use crate::linalg::{self, c, hermitian_eig, kron, partial_trace_1, CMatrix};
use crate::measurement_sim::{sample_counts, SeededRng, SimulatedDetector, SimulatedState};
use crate::quantum_objects::{random_channel, random_density_matrix, BipartitePureState, Povm};

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn gaussian_matrix(n: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.2e} (tolerance {tol:.0e})"),
    }
}

/// Euclidean projection onto the probability simplex by bisection on the
/// common shift.
fn simplex_by_bisection(lambda: &[f64]) -> Vec<f64> {
    let mass = |t: f64| lambda.iter().map(|l| (l + t).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (-2.0 - lambda[0].abs(), 2.0 + lambda[0].abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lambda
        .iter()
        .map(|l| (l + 0.5 * (lo + hi)).max(0.0))
        .collect()
}

fn err(e: crate::Error) -> f64 {
    log::error!("{e}");
    f64::INFINITY
}

pub fn run_selftest() -> Vec<CheckOutcome> {
    let mut rng = SeededRng::new(0x5e1f, 0);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = gaussian_matrix(8, &mut rng);
        let h = (&a + a.adjoint()).scale(0.5);
        let eig = hermitian_eig(&h).unwrap();
        worst = worst.max((eig.reconstruct() - &h).norm() / h.norm());
    }
    out.push(check("eigendecomposition reconstructs", worst, 1e-9));

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (a, b, cm) = (
            gaussian_matrix(3, &mut rng),
            gaussian_matrix(3, &mut rng),
            gaussian_matrix(3, &mut rng),
        );
        let lhs = linalg::vec(&(&a * &b * &cm));
        let rhs = kron(&cm.transpose(), &a) * linalg::vec(&b);
        worst = worst.max((lhs - rhs).norm());
        let t = partial_trace_1(&linalg::outer(&linalg::vec(&a), &linalg::vec(&b)), 3, 3).unwrap();
        worst = worst.max((t - &a * b.adjoint()).norm());
    }
    out.push(check("vectorization identities", worst, 1e-9));

    let mut worst = 0.0f64;
    for i in 0..20 {
        let ch = random_channel(2 + i % 2, 1 + i % 3, i % 2 == 0, &mut rng);
        let d = ch.dim() as f64;
        worst = worst.max((ch.choi_state().mat().scale(d) - ch.to_process().mat()).norm());
        let rho = random_density_matrix(ch.dim(), 2, &mut rng);
        let via_x = ch.to_process().apply(rho.mat()).unwrap();
        worst = worst.max((ch.apply(&rho).unwrap().mat() - via_x).norm());
    }
    out.push(check("Kraus, Choi and process matrix agree", worst, 1e-9));

    let mut worst = 0.0f64;
    for i in 0..20 {
        let ch = random_channel(2, 2, i % 2 == 0, &mut rng);
        let input = BipartitePureState::random(2, &mut rng);
        let sigma = ch.apply_extended(&input.density_matrix()).unwrap();
        let x = aapt_reconstruct(sigma.mat(), &input)
            .map_or(f64::INFINITY, |x| (x - ch.to_process().mat()).norm());
        worst = worst.max(x);
    }
    out.push(check(
        "ancilla-assisted reconstruction inverts the channel",
        worst,
        1e-8,
    ));

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(2..=4);
        let a = gaussian_matrix(d, &mut rng);
        let mut h = (&a + a.adjoint()).scale(0.3);
        let shift = (1.0 - linalg::real_trace(&h)) / d as f64;
        h += linalg::identity(d).scale(shift);
        let eig = hermitian_eig(&h).unwrap();
        let expected = simplex_by_bisection(&eig.eigenvalues);
        let got = physical_projection_fast(&h)
            .map_or_else(err, |p| (p.mat() - eig.compose(&expected)).norm());
        worst = worst.max(got);
    }
    out.push(check(
        "fast physical projection is the simplex projection",
        worst,
        1e-9,
    ));

    let a = linalg::identity(2).scale(1.0 / 3.0);
    let b = linalg::identity(2).scale(0.25);
    let fdp = fidelity_dp(&a, &b).unwrap_or(f64::NAN);
    let f = fidelity(&a, &b, FidelityScenario::DetectorElement(2)).unwrap_or(f64::NAN);
    out.push(CheckOutcome {
        name: "distortion is detected",
        passed: (fdp - 1.0).abs() < 1e-10 && f < 1.0 - 1e-4,
        detail: format!("F_dp = {fdp:.12}, F = {f:.12}"),
    });

    let mut slack = f64::INFINITY;
    for _ in 0..100 {
        let x = random_density_matrix(3, rng.random_range(1..=3), &mut rng);
        let y = random_density_matrix(3, rng.random_range(1..=3), &mut rng);
        let fb = fuchs_check(x.mat(), y.mat()).unwrap();
        slack = slack
            .min(fb.half_trace_distance - fb.lower)
            .min(fb.upper - fb.half_trace_distance);
    }
    out.push(CheckOutcome {
        name: "Fuchs-van de Graaf inequalities",
        passed: slack >= -1e-9,
        detail: format!("smallest slack {slack:.2e}"),
    });

    let mut worst = 0.0f64;
    let setup = QstSetup::cube(4).unwrap();
    for rank in 1..=4 {
        let rho = random_density_matrix(4, rank, &mut rng);
        let s = SimulatedState::noiseless(rho.clone());
        let e = adaptive_qst(&s, &setup, 1000, 0.5, &mut rng)
            .map_or_else(err, |e| (e.value.mat() - rho.mat()).norm());
        worst = worst.max(e);
    }
    let u = linalg::haar_unitary(4, &mut rng);
    let p1 = linalg::outer(&u.column(0).into_owned(), &u.column(0).into_owned()).scale(0.4);
    let p2 = linalg::identity(4) - &p1;
    let povm = Povm::new(vec![p1, p2]).unwrap();
    let qdt = QdtSetup::new(4, 2, probe_battery(24, 4, &mut rng)).unwrap();
    let det = SimulatedDetector::noiseless(povm.clone());
    let e = adaptive_qdt(&det, &qdt, 1000, 0.5, &mut rng).map_or_else(err, |e| {
        e.value
            .elements()
            .iter()
            .zip(povm.elements())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    });
    worst = worst.max(e);
    let ch = random_channel(2, 2, false, &mut rng);
    let input = BipartitePureState::random(2, &mut rng);
    let s = SimulatedState::noiseless(ch.apply_extended(&input.density_matrix()).unwrap());
    let e = adaptive_aapt(
        &s,
        &AaptSetup::new(input).unwrap(),
        1000,
        0.5,
        false,
        &mut rng,
    )
    .map_or_else(err, |e| {
        (e.process.value.mat() - ch.to_process().mat()).norm()
    });
    worst = worst.max(e);
    out.push(check("noiseless data reproduces the truth", worst, 1e-8));

    let draw = |seed| {
        let mut r = SeededRng::new(seed, 7);
        sample_counts(&[0.2, 0.3, 0.5], 10_000, &mut r).unwrap()
    };
    out.push(CheckOutcome {
        name: "sampling is reproducible",
        passed: draw(1) == draw(1) && draw(1) != draw(2),
        detail: String::new(),
    });

    out
}
