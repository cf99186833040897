//! Benchmark targets: hidden states, detectors and channels.
//!
//! Random ingredients (Haar unitaries, probe states, random inputs) are drawn
//! once from a fixed seed with one stream per target name, so a target is the
//! same object in every run.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimators::HermitianBasis;
use crate::estimators::LinearInversion;
use crate::linalg::{self, c, hermitian_eig, CMatrix};
use crate::measurement_sim::{random_pure_probes, SeededRng};
use crate::quantum_objects::{
    maximally_entangled_input, BipartitePureState, DensityMatrix, KrausChannel, Povm,
};

pub const TARGET_SEED: u64 = 0x7a11_5eed_0f0c_a11e;

pub const TARGET_NAMES: [&str; 8] = [
    "qst-rank1-8d",
    "qst-rank2-8d",
    "qst-rank4-8d",
    "qst-rank2-degenerate",
    "qdt-three-valued",
    "aapt-hadamard",
    "aapt-damping-0.989",
    "aapt-damping-third",
];

/// Probe count used in the first step of detector tomography.
pub const QDT_PROBE_COUNT: usize = 24;

/// Eigenvalues above this count towards an operator's rank.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum Target {
    State {
        name: String,
        rho: DensityMatrix,
    },
    Detector {
        name: String,
        povm: Povm,
        probes: Vec<DensityMatrix>,
    },
    Channel {
        name: String,
        channel: KrausChannel,
        input: BipartitePureState,
    },
}

impl Target {
    pub fn name(&self) -> &str {
        match self {
            Target::State { name, .. }
            | Target::Detector { name, .. }
            | Target::Channel { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Target::State { .. } => "state",
            Target::Detector { .. } => "detector",
            Target::Channel { .. } => "channel",
        }
    }

    /// Hilbert-space dimension of the system under test.
    pub fn dim(&self) -> usize {
        match self {
            Target::State { rho, .. } => rho.dim(),
            Target::Detector { povm, .. } => povm.dim(),
            Target::Channel { channel, .. } => channel.dim(),
        }
    }
}

/// Number of eigenvalues above the numerical-zero threshold.
pub fn operator_rank(m: &CMatrix) -> usize {
    hermitian_eig(m)
        .map(|e| e.eigenvalues.iter().filter(|&&l| l > RANK_TOL).count())
        .unwrap_or(0)
}

fn target_rng(name: &str) -> SeededRng {
    let stream = TARGET_NAMES.iter().position(|&n| n == name).unwrap_or(0) as u64;
    SeededRng::new(TARGET_SEED, stream)
}

fn rotated_state(d: usize, spectrum: &[f64], rng: &mut SeededRng) -> DensityMatrix {
    let u = linalg::haar_unitary(d, rng);
    let mut full = spectrum.to_vec();
    full.resize(d, 0.0);
    DensityMatrix::from_spectrum(&u, &full).expect("valid spectrum")
}

/// Haar probes, redrawn until their design matrix has full rank.
pub fn probe_battery(count: usize, d: usize, rng: &mut SeededRng) -> Vec<DensityMatrix> {
    loop {
        let probes = random_pure_probes(count, d, rng);
        let ops: Vec<CMatrix> = probes.iter().map(|p| p.mat().clone()).collect();
        if LinearInversion::new(HermitianBasis::gell_mann(d), &ops, false).is_ok() {
            return probes;
        }
    }
}

fn three_valued_detector(rng: &mut SeededRng) -> Povm {
    let d = 4;
    let u1 = linalg::haar_unitary(d, rng);
    let u2 = linalg::haar_unitary(d, rng);
    // U₁|00⟩ and U₂|01⟩
    let v1 = u1.column(0).into_owned();
    let v2 = u2.column(1).into_owned();
    let p1 = linalg::outer(&v1, &v1).scale(0.4);
    let p2 = linalg::outer(&v2, &v2).scale(0.5);
    let p3 = linalg::identity(d) - &p1 - &p2;
    Povm::new(vec![p1, p2, p3]).expect("three-valued detector is complete")
}

pub fn builtin_target(name: &str) -> Result<Target> {
    let mut rng = target_rng(name);
    let owned = name.to_string();
    let target = match name {
        "qst-rank1-8d" => Target::State {
            name: owned,
            rho: rotated_state(8, &[1.0], &mut rng),
        },
        "qst-rank2-8d" => Target::State {
            name: owned,
            rho: rotated_state(8, &[0.5, 0.5], &mut rng),
        },
        "qst-rank4-8d" => Target::State {
            name: owned,
            rho: rotated_state(8, &[0.25; 4], &mut rng),
        },
        "qst-rank2-degenerate" => Target::State {
            name: owned,
            rho: rotated_state(4, &[0.5, 0.5], &mut rng),
        },
        "qdt-three-valued" => {
            let povm = three_valued_detector(&mut rng);
            let probes = probe_battery(QDT_PROBE_COUNT, 4, &mut rng);
            Target::Detector {
                name: owned,
                povm,
                probes,
            }
        }
        "aapt-hadamard" => Target::Channel {
            name: owned,
            channel: KrausChannel::hadamard(),
            input: maximally_entangled_input(2),
        },
        "aapt-damping-0.989" => Target::Channel {
            name: owned,
            channel: KrausChannel::phase_damping(0.989)?,
            input: maximally_entangled_input(2),
        },
        "aapt-damping-third" => {
            let t = (1.0f64 / 3.0).sqrt();
            let channel = KrausChannel::new(vec![
                linalg::from_real_diagonal(&[1.0, t]),
                linalg::from_real_diagonal(&[0.0, t]),
            ])?;
            Target::Channel {
                name: owned,
                channel,
                input: BipartitePureState::random(2, &mut rng),
            }
        }
        _ => return Err(Error::UnknownTarget(name.to_string())),
    };
    Ok(target)
}

/// Complex matrix as separate real and imaginary row lists.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMatrix {
    real: Vec<Vec<f64>>,
    #[serde(default)]
    imag: Option<Vec<Vec<f64>>>,
}

impl JsonMatrix {
    fn to_cmatrix(&self) -> Result<CMatrix> {
        let rows = self.real.len();
        let cols = self.real.first().map_or(0, Vec::len);
        if rows == 0 || self.real.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("ragged or empty matrix".into()));
        }
        if let Some(im) = &self.imag {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(Error::Config("imaginary part has a different shape".into()));
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let im = self.imag.as_ref().map_or(0.0, |m| m[i][j]);
            c(self.real[i][j], im)
        }))
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum TargetFile {
    State {
        rho: JsonMatrix,
    },
    Detector {
        elements: Vec<JsonMatrix>,
        #[serde(default)]
        probe_count: Option<usize>,
    },
    Channel {
        kraus: Vec<JsonMatrix>,
        /// `"maximally-entangled"` (default) or `"random"`.
        #[serde(default)]
        input: Option<String>,
    },
}

/// Reads a target from a JSON file. The file's path seeds the random parts.
pub fn target_from_file(path: &Path) -> Result<Target> {
    let text = std::fs::read_to_string(path)?;
    let parsed: TargetFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let name = format!("file:{}", path.display());
    let mut rng = SeededRng::new(TARGET_SEED, u64::MAX);
    Ok(match parsed {
        TargetFile::State { rho } => Target::State {
            name,
            rho: DensityMatrix::new(rho.to_cmatrix()?)?,
        },
        TargetFile::Detector {
            elements,
            probe_count,
        } => {
            let povm = Povm::new(
                elements
                    .iter()
                    .map(JsonMatrix::to_cmatrix)
                    .collect::<Result<_>>()?,
            )?;
            let d = povm.dim();
            let count = probe_count.unwrap_or(QDT_PROBE_COUNT.max(d * d));
            if count < d * d {
                return Err(Error::Config(format!(
                    "{count} probes cannot span {d}x{d} operators"
                )));
            }
            Target::Detector {
                name,
                povm,
                probes: probe_battery(count, d, &mut rng),
            }
        }
        TargetFile::Channel { kraus, input } => {
            let channel = KrausChannel::new(
                kraus
                    .iter()
                    .map(JsonMatrix::to_cmatrix)
                    .collect::<Result<_>>()?,
            )?;
            let d = channel.dim();
            let input = match input.as_deref() {
                None | Some("maximally-entangled") => maximally_entangled_input(d),
                Some("random") => BipartitePureState::random(d, &mut rng),
                Some(other) => return Err(Error::Config(format!("unknown input state `{other}`"))),
            };
            Target::Channel {
                name,
                channel,
                input,
            }
        }
    })
}

/// Builtin name or `file:PATH`.
pub fn resolve_target(name: &str) -> Result<Target> {
    match name.strip_prefix("file:") {
        Some(path) => target_from_file(Path::new(path)),
        None => builtin_target(name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_objects::COMPLETENESS_TOL;

    #[test]
    fn state_spectra() {
        let expect: [(&str, &[f64]); 4] = [
            ("qst-rank1-8d", &[1.0]),
            ("qst-rank2-8d", &[0.5, 0.5]),
            ("qst-rank4-8d", &[0.25, 0.25, 0.25, 0.25]),
            ("qst-rank2-degenerate", &[0.5, 0.5]),
        ];
        for (name, spectrum) in expect {
            let Target::State { rho, .. } = builtin_target(name).unwrap() else {
                panic!("{name} is a state target");
            };
            let s = rho.spectrum();
            for (j, l) in s.iter().enumerate() {
                let e = spectrum.get(j).copied().unwrap_or(0.0);
                assert!((l - e).abs() < 1e-12, "{name}: {s:?}");
            }
        }
    }

    #[test]
    fn detector_structure() {
        let Target::Detector { povm, probes, .. } = builtin_target("qdt-three-valued").unwrap()
        else {
            panic!("detector target");
        };
        assert_eq!(probes.len(), 24);
        let s1 = hermitian_eig(povm.element(0)).unwrap().eigenvalues;
        let s2 = hermitian_eig(povm.element(1)).unwrap().eigenvalues;
        assert!((s1[0] - 0.4).abs() < 1e-12 && s1[1].abs() < 1e-12);
        assert!((s2[0] - 0.5).abs() < 1e-12 && s2[1].abs() < 1e-12);
        assert!(povm.completeness_residual() < COMPLETENESS_TOL);
        assert_eq!(operator_rank(povm.element(2)), 4);
    }

    #[test]
    fn channel_targets() {
        let Target::Channel { channel, .. } = builtin_target("aapt-damping-0.989").unwrap() else {
            panic!("channel target");
        };
        let a = &channel.operators()[0];
        assert!((a[(1, 1)].re - 0.011f64.sqrt()).abs() < 1e-15);
        assert!(channel.is_trace_preserving());
        let Target::Channel { channel, input, .. } = builtin_target("aapt-damping-third").unwrap()
        else {
            panic!("channel target");
        };
        assert!(!channel.is_trace_preserving());
        assert_eq!(input.schmidt().number(), 2);
        assert_eq!(operator_rank(channel.to_process().mat()), 2);
    }

    #[test]
    fn targets_are_fixed() {
        for name in TARGET_NAMES {
            let a = builtin_target(name).unwrap();
            let b = builtin_target(name).unwrap();
            if let (Target::State { rho: x, .. }, Target::State { rho: y, .. }) = (&a, &b) {
                assert_eq!(x.mat(), y.mat());
            }
            assert_eq!(a.name(), name);
        }
        assert!(matches!(
            builtin_target("nope"),
            Err(Error::UnknownTarget(_))
        ));
    }

    #[test]
    fn file_targets() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plus.json");
        std::fs::write(
            &path,
            r#"{"kind": "state", "rho": {"real": [[0.5, 0.5], [0.5, 0.5]]}}"#,
        )
        .unwrap();
        let t = resolve_target(&format!("file:{}", path.display())).unwrap();
        assert_eq!(t.kind(), "state");
        assert_eq!(t.dim(), 2);

        let path = dir.path().join("amp.json");
        std::fs::write(
            &path,
            r#"{"kind": "channel", "input": "random",
                "kraus": [{"real": [[1, 0], [0, 0.5]]}, {"real": [[0, 0.5], [0, 0]]}]}"#,
        )
        .unwrap();
        let t = target_from_file(&path).unwrap();
        assert_eq!(t.kind(), "channel");

        std::fs::write(
            &path,
            r#"{"kind": "state", "rho": {"real": [[1, 0]]}, "x": 1}"#,
        )
        .unwrap();
        assert!(target_from_file(&path).is_err());
    }
}
