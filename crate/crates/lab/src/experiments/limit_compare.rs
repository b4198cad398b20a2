//! Finite-sample `n·W₂²` draws against the two simulators of the limit functional.

use std::sync::Arc;

use w2lab_core::limit::{build_grid, ks_two_sample, GridSpec, LimitSampler, Mechanism};
use w2lab_core::stats::KsResult;
use w2lab_core::Correlation;

use super::{correlations, n_w2sq_draws, DrawSummary};
use crate::config::{ExperimentConfig, GridParams};
use crate::error::Result;
use crate::pool::Pool;
use crate::report::{Report, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow {
    pub rho: f64,
    pub mechanism: &'static str,
    pub m: usize,
    pub delta: f64,
    pub n_draws: usize,
    pub draws: DrawSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsRow {
    pub label_a: String,
    pub label_b: String,
    pub ks: KsResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub limit: Vec<LimitRow>,
    pub ks: Vec<KsRow>,
}

pub fn mechanisms(grid: GridParams) -> [Mechanism; 2] {
    [Mechanism::GaussianGrid, Mechanism::EmpiricalCoupling { m_sample: grid.m_sample }]
}

pub fn limit_draws(
    pool: &Pool,
    grid: &Arc<GridSpec>,
    rho: Correlation,
    mechanism: Mechanism,
    seed: u64,
    count: usize,
    divergence_demo: bool,
) -> Result<Vec<f64>> {
    let sampler = LimitSampler::new(rho, grid.clone(), mechanism, seed, divergence_demo)?;
    Ok(pool.map_indexed(count, |i| sampler.draw(i)))
}

fn label(mechanism: &str, rho: f64) -> String {
    format!("{mechanism}(rho={rho})")
}

pub fn run(cfg: &ExperimentConfig, pool: &Pool) -> Result<Outcome> {
    let grid = Arc::new(build_grid(cfg.grid.m, cfg.grid.delta)?);
    let (mut limit, mut ks) = (Vec::new(), Vec::new());
    for rho in correlations(cfg)? {
        let r = rho.rho();
        let mut per_mechanism = Vec::new();
        for mechanism in mechanisms(cfg.grid) {
            let draws = limit_draws(pool, &grid, rho, mechanism, cfg.seed, cfg.reps, cfg.divergence_demo)?;
            limit.push(LimitRow {
                rho: r,
                mechanism: mechanism.label(),
                m: grid.m,
                delta: grid.delta,
                n_draws: draws.len(),
                draws: DrawSummary::of(&draws)?,
            });
            per_mechanism.push((mechanism.label(), draws));
        }
        for n in cfg.counts() {
            let finite = n_w2sq_draws(pool, cfg.seed, rho, n, cfg.reps);
            for (name, draws) in &per_mechanism {
                ks.push(KsRow {
                    label_a: format!("n_w2sq(rho={r},n={n})"),
                    label_b: label(name, r),
                    ks: ks_two_sample(&finite, draws)?,
                });
            }
        }
        let (a, b) = (&per_mechanism[0], &per_mechanism[1]);
        ks.push(KsRow { label_a: label(a.0, r), label_b: label(b.0, r), ks: ks_two_sample(&a.1, &b.1)? });
        if !rho.is_independent() {
            let flipped = Correlation::new(-r)?;
            let draws = limit_draws(pool, &grid, flipped, Mechanism::GaussianGrid, cfg.seed, cfg.reps, false)?;
            ks.push(KsRow { label_a: label(a.0, r), label_b: label(a.0, -r), ks: ks_two_sample(&a.1, &draws)? });
        }
    }
    Ok(Outcome { limit, ks })
}

impl Outcome {
    pub fn report(&self) -> Report {
        let mut lt = Table::new(
            "limit",
            &["rho", "mechanism", "m", "delta", "n_draws", "mean", "variance", "q05", "q50", "q95"],
        );
        for r in &self.limit {
            let m = r.draws.moments;
            lt.push(vec![
                r.rho.into(),
                r.mechanism.into(),
                r.m.into(),
                r.delta.into(),
                r.n_draws.into(),
                m.mean.into(),
                m.variance.into(),
                r.draws.q05.into(),
                r.draws.q50.into(),
                r.draws.q95.into(),
            ]);
        }
        let mut kt = Table::new("ks", &["label_a", "label_b", "n_a", "n_b", "ks_stat", "p_value"]);
        for r in &self.ks {
            kt.push(vec![
                r.label_a.clone().into(),
                r.label_b.clone().into(),
                r.ks.n_a.into(),
                r.ks.n_b.into(),
                r.ks.statistic.into(),
                r.ks.p_value.into(),
            ]);
        }
        Report { tables: vec![lt, kt], ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, ExperimentKind, GridLayer};

    #[test]
    fn small_run_produces_all_comparisons() {
        let layer = ConfigLayer {
            experiment: Some(ExperimentKind::LimitCompare),
            n: Some(vec![500.0]),
            rho: Some(vec![0.5]),
            reps: Some(60),
            seed: Some(2),
            workers: Some(2),
            grid: Some(GridLayer { m: Some(48), delta: Some(1e-3), m_sample: Some(10_000) }),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(layer).unwrap();
        let out = run(&cfg, &Pool::new(2).unwrap()).unwrap();
        assert_eq!(out.limit.len(), 2);
        // finite vs each mechanism, mechanism vs mechanism, sign flip
        assert_eq!(out.ks.len(), 4);
        for r in &out.ks {
            assert!((0.0..=1.0).contains(&r.ks.statistic) && (0.0..=1.0).contains(&r.ks.p_value));
        }
        let report = out.report();
        assert_eq!(report.table("ks").unwrap().rows.len(), 4);
    }
}
