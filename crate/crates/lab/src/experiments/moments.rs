//! Monte Carlo moments of `Z_{n-k}` against both harmonic-index variants.

use serde_json::{json, Value};
use w2lab_core::order_stats::{extreme_experiment_id, extreme_moment, ExtremeSampler, IndexVariant, RankBand};
use w2lab_core::rng::StreamKey;
use w2lab_core::stats::MomentEstimate;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::pool::Pool;
use crate::report::{Report, Table};

/// Agreement band, in standard errors, for mean and variance.
pub const MATCH_SE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: u64,
    pub k: u64,
    pub variant: IndexVariant,
    pub mean_pred: f64,
    pub var_pred: f64,
    pub mc: MomentEstimate,
}

impl Row {
    pub fn mean_z(&self) -> f64 {
        (self.mc.mean - self.mean_pred) / self.mc.se_mean
    }

    pub fn var_z(&self) -> f64 {
        (self.mc.variance - self.var_pred) / self.mc.se_variance
    }

    pub fn matches(&self) -> bool {
        self.mean_z().abs() <= MATCH_SE && self.var_z().abs() <= MATCH_SE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
}

impl Outcome {
    /// Variants matching at every `(n, k)`.
    pub fn surviving(&self) -> Vec<IndexVariant> {
        IndexVariant::ALL
            .into_iter()
            .filter(|v| self.rows.iter().filter(|r| r.variant == *v).all(Row::matches))
            .collect()
    }

    pub fn report(&self) -> Report {
        let mut t = Table::new(
            "moments",
            &[
                "n", "k", "variant", "mean_pred", "var_pred", "mc_mean", "mc_mean_se", "mc_var", "mc_var_se", "mean_z",
                "var_z", "matches",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.n.into(),
                r.k.into(),
                r.variant.label().into(),
                r.mean_pred.into(),
                r.var_pred.into(),
                r.mc.mean.into(),
                r.mc.se_mean.into(),
                r.mc.variance.into(),
                r.mc.se_variance.into(),
                r.mean_z().into(),
                r.var_z().into(),
                (if r.matches() { "true" } else { "false" }).into(),
            ]);
        }
        let mut report = Report { tables: vec![t], ..Default::default() };
        let surviving = self.surviving();
        let single = match surviving.as_slice() {
            [v] => Value::from(v.label()),
            _ => Value::Null,
        };
        report.summary.insert("surviving_variant".into(), single);
        report.summary.insert(
            "matching_variants".into(),
            json!(surviving.iter().map(|v| v.label()).collect::<Vec<_>>()),
        );
        report
    }
}

pub fn draws(pool: &Pool, n: u64, k: u64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = ExtremeSampler::new(n, k, StreamKey::new(seed, extreme_experiment_id(n, k)))?;
    Ok(pool.map_indexed(reps, |i| sampler.draw(i)))
}

pub fn run(cfg: &ExperimentConfig, pool: &Pool) -> Result<Outcome> {
    let band = RankBand::new(cfg.decomposition.c, cfg.decomposition.theta)?;
    let mut rows = Vec::new();
    for n in cfg.counts() {
        let n = n as u64;
        for &k in &cfg.k {
            let mc = MomentEstimate::from_slice(&draws(pool, n, k, cfg.reps, cfg.seed)?)?;
            for variant in IndexVariant::ALL {
                let pred = extreme_moment(n as f64, k, variant, band)?;
                rows.push(Row { n, k, variant, mean_pred: pred.mean_pred, var_pred: pred.var_pred, mc });
            }
        }
    }
    Ok(Outcome { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, ExperimentKind};

    #[test]
    fn rows_cover_both_variants() {
        let layer = ConfigLayer {
            experiment: Some(ExperimentKind::Moments),
            n: Some(vec![1e4]),
            k: Some(vec![0, 3]),
            reps: Some(2000),
            seed: Some(8),
            workers: Some(2),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(layer).unwrap();
        let out = run(&cfg, &Pool::new(2).unwrap()).unwrap();
        assert_eq!(out.rows.len(), 4);
        // Same draws feed both predictions.
        assert_eq!(out.rows[0].mc, out.rows[1].mc);
        let report = out.report();
        assert!(report.summary.contains_key("surviving_variant"));
    }
}
