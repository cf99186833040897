//! Repeated seeded trials over a shot grid.
//!
//! Trial `t` at grid index `i` draws from stream `(i << 32) | t` of the
//! configured seed, so results do not depend on scheduling or worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method, Task};
use super::fit::{fit_loglog, gm_bound, LogLogFit};
use super::targets::{operator_rank, resolve_target, Target};
use crate::error::{Error, Result};
use crate::estimators::{
    adaptive_aapt, adaptive_qdt, adaptive_qst, nonadaptive_aapt, static_qdt, static_qst, AaptSetup,
    QdtSetup, QstSetup,
};
use crate::fidelity::{fidelity, fidelity_dp, FidelityScenario};
use crate::linalg::{self, hermitian_eig, identity, CMatrix};
use crate::measurement_sim::{SeededRng, SimulatedDetector, SimulatedState};
use crate::quantum_objects::{DensityMatrix, Povm, ProcessMatrix};

/// Largest tolerated fraction of failed trials at any shot count.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.10;

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Figures of merit of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics {
    /// `1 − F` with the scenario-appropriate fidelity.
    pub infidelity: f64,
    /// `1 − F_dp`.
    pub infidelity_dp: f64,
    /// Squared Frobenius error, summed over elements for detectors.
    pub mse: f64,
    /// Estimated eigenvalue mass outside the target's rank.
    pub tail_eigensum: f64,
    /// Detector: per-element infidelities. Process: output-state infidelity.
    pub components: Vec<f64>,
    /// Violation of the estimate's defining constraint (completeness, or
    /// `Tr₁X = I` / `Tr₁X ≤ I`).
    pub constraint_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub mean_infidelity: f64,
    pub std_infidelity: f64,
    pub mean_infidelity_dp: f64,
    pub mean_mse: f64,
    pub mean_tail_eigensum: f64,
    pub gm_bound: Option<f64>,
    pub excluded_trials: usize,
    pub completed_trials: usize,
    pub component_means: Vec<f64>,
    pub component_stds: Vec<f64>,
    pub max_constraint_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub name: String,
    pub fit: Option<LogLogFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub config: ExperimentConfig,
    pub dim: usize,
    pub component_names: Vec<String>,
    pub rows: Vec<ScalingRow>,
    /// `None` when fewer than three rows have a positive mean infidelity.
    pub fit: Option<LogLogFit>,
    pub component_fits: Vec<ComponentFit>,
    pub version: String,
}

impl ScalingResult {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn component_slope(&self, name: &str) -> Option<f64> {
        self.component_fits
            .iter()
            .find(|c| c.name == name)
            .and_then(|c| c.fit.map(|f| f.slope))
    }
}

#[allow(clippy::large_enum_variant)]
enum Prepared {
    Qst {
        sampler: SimulatedState,
        rank: usize,
        setup: QstSetup,
    },
    Qdt {
        sampler: SimulatedDetector,
        ranks: Vec<usize>,
        setup: QdtSetup,
    },
    Aapt {
        sampler: SimulatedState,
        truth: ProcessMatrix,
        rank: usize,
        setup: AaptSetup,
        tp_flag: bool,
        known_trace: f64,
    },
}

fn tail_sum(m: &CMatrix, rank: usize) -> Result<f64> {
    Ok(hermitian_eig(m)?.eigenvalues.iter().skip(rank).sum())
}

fn prepare(config: &ExperimentConfig, target: Target) -> Result<Prepared> {
    let mismatch = |kind: &str| {
        Error::Config(format!(
            "task `{}` needs a {kind} target, `{}` is a {}",
            config.task.as_str(),
            target.name(),
            target.kind()
        ))
    };
    Ok(match (config.task, &target) {
        (Task::Qst, Target::State { rho, .. }) => Prepared::Qst {
            rank: operator_rank(rho.mat()),
            setup: QstSetup::cube(rho.dim())?,
            sampler: SimulatedState::new(rho.clone()),
        },
        (Task::Qdt, Target::Detector { povm, probes, .. }) => Prepared::Qdt {
            ranks: povm.elements().iter().map(operator_rank).collect(),
            setup: QdtSetup::new(povm.dim(), povm.len(), probes.clone())?,
            sampler: SimulatedDetector::new(povm.clone()),
        },
        (Task::Aapt, Target::Channel { channel, input, .. }) => {
            let sigma_out = channel.apply_extended(&input.density_matrix())?;
            let truth = channel.to_process();
            Prepared::Aapt {
                rank: operator_rank(truth.mat()),
                known_trace: sigma_out.trace(),
                sampler: SimulatedState::new(sigma_out),
                truth,
                setup: AaptSetup::new(input.clone())?,
                tp_flag: config.tp_flag.unwrap_or(channel.is_trace_preserving()),
            }
        }
        (Task::Qst, _) => return Err(mismatch("state")),
        (Task::Qdt, _) => return Err(mismatch("detector")),
        (Task::Aapt, _) => return Err(mismatch("channel")),
    })
}

fn state_metrics(est: &DensityMatrix, truth: &DensityMatrix, rank: usize) -> Result<TrialMetrics> {
    let (a, b) = (est.mat(), truth.mat());
    Ok(TrialMetrics {
        infidelity: 1.0 - fidelity(a, b, FidelityScenario::State)?,
        infidelity_dp: 1.0 - fidelity_dp(a, b)?,
        mse: (a - b).norm_squared(),
        tail_eigensum: tail_sum(a, rank)?,
        components: Vec::new(),
        constraint_residual: (est.trace() - 1.0).abs(),
    })
}

fn detector_metrics(est: &Povm, truth: &Povm, ranks: &[usize]) -> Result<TrialMetrics> {
    let d = truth.dim();
    let scenario = FidelityScenario::DetectorElement(d);
    let mut components = Vec::with_capacity(truth.len());
    let (mut dp, mut mse, mut tail) = (0.0, 0.0, 0.0);
    for ((a, b), &r) in est.elements().iter().zip(truth.elements()).zip(ranks) {
        components.push(1.0 - fidelity(a, b, scenario)?);
        dp += 1.0 - fidelity_dp(a, b)?;
        mse += (a - b).norm_squared();
        tail += tail_sum(a, r)?;
    }
    let k = components.len() as f64;
    Ok(TrialMetrics {
        infidelity: components.iter().sum::<f64>() / k,
        infidelity_dp: dp / k,
        mse,
        tail_eigensum: tail,
        components,
        constraint_residual: est.completeness_residual(),
    })
}

fn process_metrics(
    est: &ProcessMatrix,
    sigma_est: &DensityMatrix,
    truth: &ProcessMatrix,
    sigma_true: &DensityMatrix,
    rank: usize,
    tp_flag: bool,
) -> Result<TrialMetrics> {
    let d = truth.dim();
    let (a, b) = (est.mat(), truth.mat());
    let sigma_scenario = if tp_flag {
        FidelityScenario::State
    } else {
        FidelityScenario::PseudoState(sigma_true.dim())
    };
    let sigma_inf = 1.0 - fidelity(sigma_est.mat(), sigma_true.mat(), sigma_scenario)?;
    let marginal = est.input_marginal();
    let constraint_residual = if tp_flag {
        (marginal - identity(d)).norm()
    } else {
        linalg::max_eigenvalue(&(marginal - identity(d)))?.max(0.0)
    };
    Ok(TrialMetrics {
        infidelity: 1.0 - fidelity(a, b, FidelityScenario::Process(d))?,
        infidelity_dp: 1.0 - fidelity_dp(a, b)?,
        mse: (a - b).norm_squared(),
        tail_eigensum: tail_sum(a, rank)?,
        components: vec![sigma_inf],
        constraint_residual,
    })
}

fn run_trial(
    config: &ExperimentConfig,
    prepared: &Prepared,
    n: u64,
    rng: &mut SeededRng,
) -> Result<TrialMetrics> {
    let adaptive = config.method == Method::Adaptive;
    match prepared {
        Prepared::Qst {
            sampler,
            rank,
            setup,
        } => {
            let est = if adaptive {
                adaptive_qst(sampler, setup, n, config.alpha, rng)?
            } else {
                static_qst(sampler, setup, n, rng)?
            };
            state_metrics(&est.value, sampler.state(), *rank)
        }
        Prepared::Qdt {
            sampler,
            ranks,
            setup,
        } => {
            let est = if adaptive {
                adaptive_qdt(sampler, setup, n, config.alpha, rng)?
            } else {
                static_qdt(sampler, setup, n, rng)?
            };
            detector_metrics(&est.value, sampler.povm(), ranks)
        }
        Prepared::Aapt {
            sampler,
            truth,
            rank,
            setup,
            tp_flag,
            known_trace,
        } => {
            let est = if adaptive {
                adaptive_aapt(sampler, setup, n, config.alpha, *tp_flag, rng)?
            } else {
                nonadaptive_aapt(sampler, setup, n, *tp_flag, Some(*known_trace), rng)?
            };
            process_metrics(
                &est.process.value,
                &est.sigma_out,
                truth,
                sampler.state(),
                *rank,
                *tp_flag,
            )
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

fn component_names(prepared: &Prepared) -> Vec<String> {
    match prepared {
        Prepared::Qst { .. } => Vec::new(),
        Prepared::Qdt { ranks, .. } => (1..=ranks.len()).map(|i| format!("P{i}")).collect(),
        Prepared::Aapt { .. } => vec!["sigma_out".to_string()],
    }
}

fn aggregate(
    config: &ExperimentConfig,
    dim: usize,
    n_components: usize,
    n: u64,
    trials: Vec<Result<TrialMetrics>>,
) -> Result<ScalingRow> {
    let total = trials.len();
    let mut ok = Vec::with_capacity(total);
    for (t, r) in trials.into_iter().enumerate() {
        match r {
            Ok(m) => ok.push(m),
            Err(e) => log::warn!("trial {t} at N = {n} excluded: {e}"),
        }
    }
    let excluded = total - ok.len();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * total as f64 || ok.is_empty() {
        return Err(Error::TooManyExclusions { n, excluded, total });
    }
    let col = |f: &dyn Fn(&TrialMetrics) -> f64| ok.iter().map(f).collect::<Vec<f64>>();
    let (mean_infidelity, std_infidelity) = mean_std(&col(&|m| m.infidelity));
    let (component_means, component_stds) = (0..n_components)
        .map(|i| mean_std(&col(&|m| m.components[i])))
        .unzip();
    Ok(ScalingRow {
        n,
        mean_infidelity,
        std_infidelity,
        mean_infidelity_dp: mean_std(&col(&|m| m.infidelity_dp)).0,
        mean_mse: mean_std(&col(&|m| m.mse)).0,
        mean_tail_eigensum: mean_std(&col(&|m| m.tail_eigensum)).0,
        gm_bound: (config.task == Task::Qst).then(|| gm_bound(dim, n)),
        excluded_trials: excluded,
        completed_trials: ok.len(),
        component_means,
        component_stds,
        max_constraint_residual: ok.iter().map(|m| m.constraint_residual).fold(0.0, f64::max),
    })
}

/// Runs every `(N, trial)` pair on up to `workers` threads (0 = all cores).
pub fn run_scaling(config: &ExperimentConfig, workers: usize) -> Result<ScalingResult> {
    config.validate()?;
    let target = resolve_target(&config.target)?;
    let dim = target.dim();
    let prepared = prepare(config, target)?;
    let names = component_names(&prepared);

    let jobs: Vec<(usize, usize)> = (0..config.n_grid.len())
        .flat_map(|i| (0..config.repetitions).map(move |t| (i, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let outcomes: Vec<Result<TrialMetrics>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, t)| {
                let mut rng = SeededRng::new(config.seed, ((i as u64) << 32) | t as u64);
                run_trial(config, &prepared, config.n_grid[i], &mut rng)
            })
            .collect()
    });

    let mut outcomes = outcomes.into_iter();
    let mut rows = Vec::with_capacity(config.n_grid.len());
    for &n in &config.n_grid {
        let trials: Vec<_> = outcomes.by_ref().take(config.repetitions).collect();
        rows.push(aggregate(config, dim, names.len(), n, trials)?);
    }

    let fit = fit_loglog(
        &rows
            .iter()
            .map(|r| (r.n as f64, r.mean_infidelity))
            .collect::<Vec<_>>(),
    )
    .ok();
    let component_fits = names
        .iter()
        .enumerate()
        .map(|(i, name)| ComponentFit {
            name: name.clone(),
            fit: fit_loglog(
                &rows
                    .iter()
                    .map(|r| (r.n as f64, r.component_means[i]))
                    .collect::<Vec<_>>(),
            )
            .ok(),
        })
        .collect();
    Ok(ScalingResult {
        config: config.clone(),
        dim,
        component_names: names,
        rows,
        fit,
        component_fits,
        version: version_string(),
    })
}
