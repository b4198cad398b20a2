//! Command-line surface. Flags override the JSON config file field by field.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigLayer, DecompositionLayer, ExperimentConfig, ExperimentKind, GridLayer};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "w2lab", version, about = "Wasserstein-2 Monte Carlo experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W₂² of n standard normals against Φ.
    OneSample(CommonArgs),
    /// n·W₂² between the margins of n correlated pairs.
    TwoSample(CommonArgs),
    /// KS comparison of finite-n draws with the limit simulators.
    LimitCompare(CommonArgs),
    /// Tail expansions next to exact values.
    Expansions(CommonArgs),
    /// Singular integrals by quadrature.
    Integrals(CommonArgs),
    /// Extreme order statistic moments against both index variants.
    Moments(CommonArgs),
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Command::OneSample(_) => ExperimentKind::OneSample,
            Command::TwoSample(_) => ExperimentKind::TwoSample,
            Command::LimitCompare(_) => ExperimentKind::LimitCompare,
            Command::Expansions(_) => ExperimentKind::Expansions,
            Command::Integrals(_) => ExperimentKind::Integrals,
            Command::Moments(_) => ExperimentKind::Moments,
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::OneSample(a)
            | Command::TwoSample(a)
            | Command::LimitCompare(a)
            | Command::Expansions(a)
            | Command::Integrals(a)
            | Command::Moments(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Sample sizes, comma separated; scientific notation is accepted.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<f64>>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Correlations, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho: Option<Vec<f64>>,
    /// Master seed; required here or in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Order statistic ranks for the moments run, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u64>>,
    #[arg(long)]
    pub grid_m: Option<usize>,
    #[arg(long)]
    pub grid_delta: Option<f64>,
    #[arg(long)]
    pub m_sample: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Allow ρ = 0 in limit-compare, whose limit is infinite.
    #[arg(long)]
    pub divergence_demo: bool,
}

impl CommonArgs {
    fn layer(&self, kind: ExperimentKind) -> ConfigLayer {
        let grid = (self.grid_m.is_some() || self.grid_delta.is_some() || self.m_sample.is_some())
            .then_some(GridLayer { m: self.grid_m, delta: self.grid_delta, m_sample: self.m_sample });
        let decomposition = (self.c.is_some() || self.theta.is_some() || self.gamma.is_some())
            .then_some(DecompositionLayer { c: self.c, theta: self.theta, gamma: self.gamma });
        ConfigLayer {
            experiment: Some(kind),
            n: self.n.clone(),
            reps: self.reps,
            rho: self.rho.clone(),
            seed: self.seed,
            workers: self.workers,
            k: self.k.clone(),
            grid,
            decomposition,
            divergence_demo: self.divergence_demo.then_some(true),
            output: self.out.clone(),
        }
    }
}

pub fn resolve(command: &Command) -> Result<ExperimentConfig> {
    let args = command.args();
    let file = match &args.config {
        Some(path) => ConfigLayer::from_json_file(path)?,
        None => ConfigLayer::default(),
    };
    let kind = command.kind();
    if file.experiment.is_some_and(|k| k != kind) {
        return crate::error::config_err(format!("config file is for a different experiment than {}", kind.label()));
    }
    ExperimentConfig::resolve(args.layer(kind).over(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_negative_correlations() {
        let cli = Cli::try_parse_from([
            "w2lab", "two-sample", "--n", "1e3,2e4", "--rho", "-0.5,0.6", "--seed", "4", "--workers", "1",
        ])
        .unwrap();
        let cfg = resolve(&cli.command).unwrap();
        assert_eq!(cfg.n, vec![1e3, 2e4]);
        assert_eq!(cfg.rho, vec![-0.5, 0.6]);
        assert_eq!(cfg.experiment, ExperimentKind::TwoSample);
    }

    #[test]
    fn missing_seed_is_a_config_error() {
        let cli = Cli::try_parse_from(["w2lab", "integrals"]).unwrap();
        assert!(matches!(resolve(&cli.command), Err(crate::LabError::Config(_))));
    }
}
