//! `W₂²(𝔽ₙ, Φ)` against the standard normal, with its `log log n` normalisations.

use w2lab_core::rng::StreamKey;
use w2lab_core::stats::MomentEstimate;
use w2lab_core::wasserstein::{extreme_pieces, GaussianPartition, GaussianReference, SortedSample};

use super::{log_log, sorted_normals, ONE_SAMPLE_ID};
use crate::config::{DecompositionParams, ExperimentConfig};
use crate::error::Result;
use crate::pool::Pool;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replication {
    pub w2sq: f64,
    /// `Aₙ + Bₙ + Cₙ` summed over both tails; NaN when the band is empty.
    pub extremes: f64,
}

pub fn key(seed: u64, n: usize) -> StreamKey {
    StreamKey::new(seed, ONE_SAMPLE_ID).child(n as u64)
}

pub fn replicate(
    key: &StreamKey,
    index: u64,
    partition: &GaussianPartition,
    dp: DecompositionParams,
) -> Result<Replication> {
    let x = sorted_normals(key, index, partition.len());
    let w2sq = partition.w2sq(&x, GaussianReference::standard())?;
    let s = SortedSample::new(x)?;
    let pieces = |s: &SortedSample| extreme_pieces(s, dp.c, dp.theta, dp.gamma).map(|p| p.sum());
    let extremes = match (pieces(&s), pieces(&s.negated())) {
        (Ok(up), Ok(down)) => up + down,
        _ => f64::NAN,
    };
    Ok(Replication { w2sq, extremes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    pub w2sq: MomentEstimate,
    pub w2: MomentEstimate,
    pub log_log_n: f64,
    /// `n·mean(W₂²)/log log n`.
    pub ratio: f64,
    pub ratio_se: f64,
    /// `√(n/log log n)·mean(W₂)`.
    pub sqrt_ratio: f64,
    /// `n·mean(W₂²) - log log n`.
    pub centered: f64,
    pub centered_se: f64,
    /// `n·mean(Aₙ+Bₙ+Cₙ)/log log n`, both tails.
    pub extreme_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
}

pub fn run(cfg: &ExperimentConfig, pool: &Pool) -> Result<Outcome> {
    let mut rows = Vec::new();
    for n in cfg.counts() {
        let partition = GaussianPartition::new(n)?;
        let key = key(cfg.seed, n);
        let reps = pool.try_map_indexed(cfg.reps, |i| replicate(&key, i, &partition, cfg.decomposition))?;
        rows.push(summarize(n, &reps)?);
    }
    Ok(Outcome { rows })
}

pub fn summarize(n: usize, reps: &[Replication]) -> Result<Row> {
    let w2sq_draws: Vec<f64> = reps.iter().map(|r| r.w2sq).collect();
    let w2_draws: Vec<f64> = w2sq_draws.iter().map(|v| v.sqrt()).collect();
    let w2sq = MomentEstimate::from_slice(&w2sq_draws)?;
    let w2 = MomentEstimate::from_slice(&w2_draws)?;
    let nf = n as f64;
    let lln = log_log(nf);
    let extreme_mean = super::mean_of(&reps.iter().map(|r| r.extremes).collect::<Vec<_>>());
    Ok(Row {
        n,
        w2sq,
        w2,
        log_log_n: lln,
        ratio: nf * w2sq.mean / lln,
        ratio_se: nf * w2sq.se_mean / lln,
        sqrt_ratio: (nf / lln).sqrt() * w2.mean,
        centered: nf * w2sq.mean - lln,
        centered_se: nf * w2sq.se_mean,
        extreme_ratio: nf * extreme_mean / lln,
    })
}

impl Outcome {
    pub fn report(&self) -> Report {
        let mut t = Table::new(
            "one_sample",
            &[
                "n",
                "mean_w2sq",
                "se_w2sq",
                "mean_w2",
                "se_w2",
                "log_log_n",
                "ratio",
                "ratio_se",
                "sqrt_ratio",
                "centered",
                "centered_se",
                "extreme_ratio",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.n.into(),
                r.w2sq.mean.into(),
                r.w2sq.se_mean.into(),
                r.w2.mean.into(),
                r.w2.se_mean.into(),
                r.log_log_n.into(),
                r.ratio.into(),
                r.ratio_se.into(),
                r.sqrt_ratio.into(),
                r.centered.into(),
                r.centered_se.into(),
                r.extreme_ratio.into(),
            ]);
        }
        Report { tables: vec![t], ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, ExperimentKind};

    fn cfg(n: Vec<f64>, reps: usize) -> ExperimentConfig {
        let layer = ConfigLayer {
            experiment: Some(ExperimentKind::OneSample),
            n: Some(n),
            reps: Some(reps),
            seed: Some(11),
            workers: Some(2),
            ..Default::default()
        };
        ExperimentConfig::resolve(layer).unwrap()
    }

    #[test]
    fn single_point_sample_has_mean_two() {
        let c = cfg(vec![1.0], 4000);
        let out = run(&c, &Pool::new(2).unwrap()).unwrap();
        let m = out.rows[0].w2sq;
        assert!((m.mean - 2.0).abs() < 3.0 * m.se_mean, "{m:?}");
        assert!(out.rows[0].ratio.is_nan());
    }

    #[test]
    fn worker_count_does_not_change_draws() {
        let c = cfg(vec![200.0], 40);
        let a = run(&c, &Pool::new(1).unwrap()).unwrap();
        let b = run(&c, &Pool::new(3).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extremes_are_a_fraction_of_the_total() {
        let c = cfg(vec![2000.0], 200);
        let r = &run(&c, &Pool::new(2).unwrap()).unwrap().rows[0];
        assert!(r.extreme_ratio > 0.0 && r.extreme_ratio < r.ratio, "{r:?}");
    }
}
