use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Qst,
    Qdt,
    Aapt,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Qst => "qst",
            Task::Qdt => "qdt",
            Task::Aapt => "aapt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Adaptive,
    /// Non-adaptive baseline (for process tomography, the Cube LRE of the
    /// joint output).
    Static,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Adaptive => "adaptive",
            Method::Static => "static",
        }
    }
}

pub const DEFAULT_REPETITIONS: usize = 50;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// `points` shot counts spaced evenly in `log10` between the two exponents.
pub fn log_grid(lo_exp: f64, hi_exp: f64, points: usize) -> Vec<u64> {
    assert!(points >= 2);
    (0..points)
        .map(|i| {
            let e = lo_exp + (hi_exp - lo_exp) * i as f64 / (points - 1) as f64;
            10f64.powf(e).round() as u64
        })
        .collect()
}

pub fn default_grid(task: Task) -> Vec<u64> {
    match task {
        Task::Qst | Task::Qdt => log_grid(2.0, 6.0, 8),
        Task::Aapt => log_grid(2.0, 5.5, 8),
    }
}

/// Fully resolved experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub method: Method,
    pub target: String,
    pub n_grid: Vec<u64>,
    pub repetitions: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Process tomography only; `None` takes the channel's own property.
    pub tp_flag: Option<bool>,
}

/// On-disk TOML form; omitted keys take defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    task: Task,
    #[serde(default)]
    method: Option<Method>,
    target: String,
    #[serde(default)]
    n_grid: Option<Vec<u64>>,
    #[serde(default)]
    repetitions: Option<usize>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    tp_flag: Option<bool>,
}

impl ExperimentConfig {
    pub fn new(task: Task, method: Method, target: impl Into<String>) -> Self {
        ExperimentConfig {
            task,
            method,
            target: target.into(),
            n_grid: default_grid(task),
            repetitions: DEFAULT_REPETITIONS,
            alpha: DEFAULT_ALPHA,
            seed: DEFAULT_SEED,
            tp_flag: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let config = ExperimentConfig {
            task: raw.task,
            method: raw.method.unwrap_or(Method::Adaptive),
            target: raw.target,
            n_grid: raw.n_grid.unwrap_or_else(|| default_grid(raw.task)),
            repetitions: raw.repetitions.unwrap_or(DEFAULT_REPETITIONS),
            alpha: raw.alpha.unwrap_or(DEFAULT_ALPHA),
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            tp_flag: raw.tp_flag,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::Config("shot counts must be positive".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha = {} must lie strictly between 0 and 1",
                self.alpha
            )));
        }
        if self.tp_flag.is_some() && self.task != Task::Aapt {
            return Err(Error::Config("tp_flag applies to aapt only".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = default_grid(Task::Qst);
        assert_eq!(g.len(), 8);
        assert_eq!(g[0], 100);
        assert_eq!(g[7], 1_000_000);
        let g = default_grid(Task::Aapt);
        assert_eq!(g[1], 316);
        assert_eq!(g[7], 316_228);
        assert_eq!(
            log_grid(3.0, 6.0, 4),
            vec![1000, 10_000, 100_000, 1_000_000]
        );
    }

    #[test]
    fn parse_with_defaults() {
        let c =
            ExperimentConfig::from_toml_str("task = \"qst\"\ntarget = \"qst-rank1-8d\"\n").unwrap();
        assert_eq!(c.method, Method::Adaptive);
        assert_eq!(c.repetitions, DEFAULT_REPETITIONS);
        assert_eq!(c.n_grid, default_grid(Task::Qst));

        let c = ExperimentConfig::from_toml_str(
            "task = \"aapt\"\nmethod = \"static\"\ntarget = \"aapt-hadamard\"\n\
             n_grid = [100, 1000, 10000]\nrepetitions = 3\nalpha = 0.9\nseed = 7\ntp_flag = true\n",
        )
        .unwrap();
        assert_eq!(c.tp_flag, Some(true));
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "task = \"qst\"\ntarget = \"x\"\nbogus = 1\n",
            "task = \"qst\"\ntarget = \"x\"\nn_grid = [10, 10]\n",
            "task = \"qst\"\ntarget = \"x\"\nalpha = 1.0\n",
            "task = \"qst\"\ntarget = \"x\"\nrepetitions = 0\n",
            "task = \"qst\"\ntarget = \"x\"\ntp_flag = false\n",
            "task = \"tomography\"\ntarget = \"x\"\n",
        ];
        for text in bad {
            assert!(ExperimentConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}
