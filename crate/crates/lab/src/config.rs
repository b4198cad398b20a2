//! Experiment configuration. Values resolve field by field with precedence
//! command line > JSON file > per-experiment defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    OneSample,
    TwoSample,
    LimitCompare,
    Expansions,
    Integrals,
    Moments,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::OneSample => "one_sample",
            ExperimentKind::TwoSample => "two_sample",
            ExperimentKind::LimitCompare => "limit_compare",
            ExperimentKind::Expansions => "expansions",
            ExperimentKind::Integrals => "integrals",
            ExperimentKind::Moments => "moments",
        }
    }

    fn is_monte_carlo(self) -> bool {
        matches!(
            self,
            ExperimentKind::OneSample | ExperimentKind::TwoSample | ExperimentKind::LimitCompare | ExperimentKind::Moments
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub m: usize,
    pub delta: f64,
    /// Sample size behind each empirical-coupling bridge pair.
    pub m_sample: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { m: 512, delta: 1e-4, m_sample: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub c: f64,
    pub theta: f64,
    pub gamma: f64,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams { c: 1.0, theta: 2.0, gamma: 2.0 }
    }
}

/// Partially specified settings, as read from a file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub experiment: Option<ExperimentKind>,
    pub n: Option<Vec<f64>>,
    pub reps: Option<usize>,
    pub rho: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub k: Option<Vec<u64>>,
    pub grid: Option<GridLayer>,
    pub decomposition: Option<DecompositionLayer>,
    pub divergence_demo: Option<bool>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridLayer {
    pub m: Option<usize>,
    pub delta: Option<f64>,
    pub m_sample: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionLayer {
    pub c: Option<f64>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
}

impl ConfigLayer {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        let grid = match (self.grid, lower.grid) {
            (Some(a), Some(b)) => Some(GridLayer {
                m: a.m.or(b.m),
                delta: a.delta.or(b.delta),
                m_sample: a.m_sample.or(b.m_sample),
            }),
            (a, b) => a.or(b),
        };
        let decomposition = match (self.decomposition, lower.decomposition) {
            (Some(a), Some(b)) => Some(DecompositionLayer {
                c: a.c.or(b.c),
                theta: a.theta.or(b.theta),
                gamma: a.gamma.or(b.gamma),
            }),
            (a, b) => a.or(b),
        };
        ConfigLayer {
            experiment: self.experiment.or(lower.experiment),
            n: self.n.or(lower.n),
            reps: self.reps.or(lower.reps),
            rho: self.rho.or(lower.rho),
            seed: self.seed.or(lower.seed),
            workers: self.workers.or(lower.workers),
            k: self.k.or(lower.k),
            grid,
            decomposition,
            divergence_demo: self.divergence_demo.or(lower.divergence_demo),
            output: self.output.or(lower.output),
        }
    }
}

/// Fully resolved settings. `workers` and `output` do not affect results and
/// are left out of the serialized form and the hash.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: Vec<f64>,
    pub reps: usize,
    pub rho: Vec<f64>,
    pub seed: u64,
    pub k: Vec<u64>,
    pub grid: GridParams,
    pub decomposition: DecompositionParams,
    pub divergence_demo: bool,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub output: PathBuf,
}

struct Defaults {
    n: &'static [f64],
    reps: usize,
    rho: &'static [f64],
}

fn defaults(kind: ExperimentKind) -> Defaults {
    match kind {
        ExperimentKind::OneSample => Defaults { n: &[1e3, 1e4, 1e5], reps: 1000, rho: &[] },
        ExperimentKind::TwoSample => Defaults { n: &[1e3, 1e4, 1e5], reps: 1000, rho: &[0.6] },
        ExperimentKind::LimitCompare => Defaults { n: &[2e4], reps: 1000, rho: &[0.6] },
        ExperimentKind::Expansions => Defaults { n: &[], reps: 1, rho: &[] },
        ExperimentKind::Integrals => Defaults { n: &[1e4, 1e8, 1e16, 1e32], reps: 1, rho: &[0.6] },
        ExperimentKind::Moments => Defaults { n: &[1e6], reps: 1_000_000, rho: &[] },
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl ExperimentConfig {
    pub fn resolve(layer: ConfigLayer) -> Result<Self> {
        let Some(experiment) = layer.experiment else {
            return config_err("experiment kind is required");
        };
        let Some(seed) = layer.seed else {
            return config_err("seed must be given explicitly");
        };
        let d = defaults(experiment);
        let grid_layer = layer.grid.unwrap_or_default();
        let dec_layer = layer.decomposition.unwrap_or_default();
        let (gd, dd) = (GridParams::default(), DecompositionParams::default());
        let cfg = ExperimentConfig {
            experiment,
            n: layer.n.unwrap_or_else(|| d.n.to_vec()),
            reps: layer.reps.unwrap_or(d.reps),
            rho: layer.rho.unwrap_or_else(|| d.rho.to_vec()),
            seed,
            k: layer.k.unwrap_or_else(|| vec![0, 1, 2, 5]),
            grid: GridParams {
                m: grid_layer.m.unwrap_or(gd.m),
                delta: grid_layer.delta.unwrap_or(gd.delta),
                m_sample: grid_layer.m_sample.unwrap_or(gd.m_sample),
            },
            decomposition: DecompositionParams {
                c: dec_layer.c.unwrap_or(dd.c),
                theta: dec_layer.theta.unwrap_or(dd.theta),
                gamma: dec_layer.gamma.unwrap_or(dd.gamma),
            },
            divergence_demo: layer.divergence_demo.unwrap_or(false),
            workers: layer.workers.unwrap_or_else(default_workers),
            output: layer.output.unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return config_err("workers must be at least 1");
        }
        if self.experiment.is_monte_carlo() && self.reps < 2 {
            return config_err("reps must be at least 2 for Monte Carlo experiments");
        }
        for &r in &self.rho {
            if !(r.is_finite() && r.abs() < 1.0) {
                return config_err(format!("rho = {r} outside (-1, 1)"));
            }
        }
        for &n in &self.n {
            if !(n.is_finite() && n >= 1.0) {
                return config_err(format!("n = {n} must be a finite value >= 1"));
            }
            if self.experiment.is_monte_carlo() && (n.fract() != 0.0 || n > 1e9) {
                return config_err(format!("n = {n} must be an integer count up to 1e9 for simulation"));
            }
        }
        match self.experiment {
            ExperimentKind::OneSample | ExperimentKind::Integrals | ExperimentKind::Moments if self.n.is_empty() => {
                return config_err("at least one n is required");
            }
            ExperimentKind::TwoSample | ExperimentKind::LimitCompare if self.n.is_empty() || self.rho.is_empty() => {
                return config_err("n and rho are required");
            }
            ExperimentKind::LimitCompare if self.rho.contains(&0.0) && !self.divergence_demo => {
                return config_err("rho = 0 has an almost surely infinite limit; pass --divergence-demo to sample it");
            }
            ExperimentKind::Moments if self.k.is_empty() => return config_err("at least one k is required"),
            _ => {}
        }
        let g = self.grid;
        if g.m < 16 || !(g.delta > 0.0 && g.delta < 0.25) || g.m_sample < 10_000 {
            return config_err("grid needs m >= 16, 0 < delta < 1/4, m_sample >= 10000");
        }
        let dp = self.decomposition;
        if !(dp.c > 0.0) || !(dp.theta > 1.0 && dp.theta <= 2.0) || !(dp.gamma > 1.0) {
            return config_err("decomposition needs C > 0, 1 < theta <= 2, gamma > 1");
        }
        Ok(())
    }

    pub fn counts(&self) -> Vec<usize> {
        self.n.iter().map(|&n| n as usize).collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
