//! `n·W₂²(𝔽ₙ, 𝔾ₙ)` for the margins of `n` correlated normal pairs.

use w2lab_core::integrals::{limit_second_moment, truncated_second_moment};
use w2lab_core::{Correlation, Error};

use super::{correlations, log_log, n_w2sq_draws, DrawSummary};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::pool::Pool;
use crate::report::{Report, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub rho: f64,
    pub n: usize,
    pub draws: DrawSummary,
    pub log_log_n: f64,
    /// `n·mean/(2 log log n)`, reported for `ρ = 0` only.
    pub independent_ratio: f64,
    /// `2∫_{1/n}^{1-1/n} (u - C_ρ(u,u))/h² du`.
    pub truncated_limit: f64,
    /// `2∫₀¹ (u - C_ρ(u,u))/h² du`, `+∞` when the integral diverges.
    pub limit_moment: f64,
    /// `mean/limit_moment - 1`.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
}

/// The full-range second moment, mapping divergence to `+∞`.
pub fn limit_moment_or_infinity(rho: Correlation) -> Result<f64> {
    match limit_second_moment(rho) {
        Ok(r) => Ok(r.value),
        Err(Error::Divergent { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

pub fn run(cfg: &ExperimentConfig, pool: &Pool) -> Result<Outcome> {
    let mut rows = Vec::new();
    for rho in correlations(cfg)? {
        let limit_moment = limit_moment_or_infinity(rho)?;
        for n in cfg.counts() {
            let draws = DrawSummary::of(&n_w2sq_draws(pool, cfg.seed, rho, n, cfg.reps))?;
            let nf = n as f64;
            let lln = log_log(nf);
            let truncated_limit = if n >= 8 { truncated_second_moment(rho, 1.0 / nf)?.value } else { f64::NAN };
            rows.push(Row {
                rho: rho.rho(),
                n,
                draws,
                log_log_n: lln,
                independent_ratio: if rho.is_independent() { draws.moments.mean / (2.0 * lln) } else { f64::NAN },
                truncated_limit,
                limit_moment,
                relative_gap: draws.moments.mean / limit_moment - 1.0,
            });
        }
    }
    Ok(Outcome { rows })
}

impl Outcome {
    pub fn report(&self) -> Report {
        let mut t = Table::new(
            "two_sample",
            &[
                "rho",
                "n",
                "mean_n_w2sq",
                "se_n_w2sq",
                "var_n_w2sq",
                "q05",
                "q50",
                "q95",
                "log_log_n",
                "independent_ratio",
                "truncated_limit",
                "limit_moment",
                "relative_gap",
            ],
        );
        for r in &self.rows {
            let m = r.draws.moments;
            t.push(vec![
                r.rho.into(),
                r.n.into(),
                m.mean.into(),
                m.se_mean.into(),
                m.variance.into(),
                r.draws.q05.into(),
                r.draws.q50.into(),
                r.draws.q95.into(),
                r.log_log_n.into(),
                r.independent_ratio.into(),
                r.truncated_limit.into(),
                r.limit_moment.into(),
                r.relative_gap.into(),
            ]);
        }
        Report { tables: vec![t], ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, ExperimentKind};

    fn cfg(rho: f64, n: f64, reps: usize) -> ExperimentConfig {
        let layer = ConfigLayer {
            experiment: Some(ExperimentKind::TwoSample),
            n: Some(vec![n]),
            rho: Some(vec![rho]),
            reps: Some(reps),
            seed: Some(5),
            workers: Some(2),
            ..Default::default()
        };
        ExperimentConfig::resolve(layer).unwrap()
    }

    #[test]
    fn nearly_identical_samples_have_tiny_distance() {
        let c = cfg(1.0 - 1e-9, 1000.0, 20);
        let r = &run(&c, &Pool::new(2).unwrap()).unwrap().rows[0];
        // Differences are of order √(2(1-ρ)) per coordinate.
        assert!(r.draws.moments.mean < 1e-5, "{r:?}");
        assert!(r.independent_ratio.is_nan());
    }

    #[test]
    fn limit_column_reports_divergence() {
        let c = cfg(0.6, 500.0, 20);
        let r = &run(&c, &Pool::new(1).unwrap()).unwrap().rows[0];
        assert!(r.limit_moment.is_infinite());
        assert!(r.truncated_limit.is_finite() && r.truncated_limit > 0.0);
        assert_eq!(r.relative_gap, -1.0);
    }

    #[test]
    fn independent_rows_are_normalized() {
        let c = cfg(0.0, 1000.0, 50);
        let r = &run(&c, &Pool::new(1).unwrap()).unwrap().rows[0];
        assert!(r.independent_ratio > 0.5 && r.independent_ratio < 2.0, "{r:?}");
    }
}
