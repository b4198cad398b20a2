pub mod expansions;
pub mod integrals;
pub mod limit_compare;
pub mod moments;
pub mod one_sample;
pub mod two_sample;

use w2lab_core::rng::{correlated_pair, standard_normal, StreamKey};
use w2lab_core::stats::{compensated_sum, sorted_quantile, MomentEstimate};
use w2lab_core::wasserstein::w2sq_sorted_slices;
use w2lab_core::Correlation;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::pool::Pool;
use crate::report::Report;

/// Stream labels, one per simulation family.
pub const ONE_SAMPLE_ID: u64 = 0x5732_4f4e_4553_4d50;
pub const TWO_SAMPLE_ID: u64 = 0x5732_5457_4f53_4d50;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let pool = Pool::new(cfg.workers)?;
    Ok(match cfg.experiment {
        ExperimentKind::OneSample => one_sample::run(cfg, &pool)?.report(),
        ExperimentKind::TwoSample => two_sample::run(cfg, &pool)?.report(),
        ExperimentKind::LimitCompare => limit_compare::run(cfg, &pool)?.report(),
        ExperimentKind::Expansions => expansions::run(cfg)?.report(),
        ExperimentKind::Integrals => integrals::run(cfg)?.report(),
        ExperimentKind::Moments => moments::run(cfg, &pool)?.report(),
    })
}

pub(crate) fn sorted_normals(key: &StreamKey, index: u64, n: usize) -> Vec<f64> {
    let mut rng = key.stream(index);
    let mut x: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    x.sort_unstable_by(f64::total_cmp);
    x
}

/// Key of the `n·W₂²(𝔽ₙ, 𝔾ₙ)` draws for a given `(ρ, n)`.
pub fn two_sample_key(seed: u64, rho: Correlation, n: usize) -> StreamKey {
    StreamKey::new(seed, TWO_SAMPLE_ID).child(rho.rho().to_bits()).child(n as u64)
}

/// Draw `index` of `n·W₂²` between the empirical laws of the two margins
/// of `n` correlated normal pairs.
pub fn n_w2sq_draw(key: &StreamKey, index: u64, n: usize, rho: Correlation) -> f64 {
    let mut rng = key.stream(index);
    let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (a, b) = correlated_pair(&mut rng, rho.rho());
        x.push(a);
        y.push(b);
    }
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    n as f64 * w2sq_sorted_slices(&x, &y).expect("equal lengths")
}

pub fn n_w2sq_draws(pool: &Pool, seed: u64, rho: Correlation, n: usize, reps: usize) -> Vec<f64> {
    let key = two_sample_key(seed, rho, n);
    pool.map_indexed(reps, |i| n_w2sq_draw(&key, i, n, rho))
}

/// Mean, variance and the 5/50/95% quantiles of a set of draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawSummary {
    pub moments: MomentEstimate,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl DrawSummary {
    pub fn of(draws: &[f64]) -> Result<Self> {
        let moments = MomentEstimate::from_slice(draws)?;
        let mut sorted = draws.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(DrawSummary {
            moments,
            q05: sorted_quantile(&sorted, 0.05),
            q50: sorted_quantile(&sorted, 0.5),
            q95: sorted_quantile(&sorted, 0.95),
        })
    }
}

pub(crate) fn mean_of(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// `log log n`, or NaN below `n = 3` where it is not positive.
pub fn log_log(n: f64) -> f64 {
    if n >= 3.0 {
        n.ln().ln()
    } else {
        f64::NAN
    }
}

pub(crate) fn correlations(cfg: &ExperimentConfig) -> Result<Vec<Correlation>> {
    Ok(cfg.rho.iter().map(|&r| Correlation::new(r)).collect::<std::result::Result<_, _>>()?)
}
