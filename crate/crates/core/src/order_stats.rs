//! Upper order statistics of standard normal samples.
//!
//! `1 - Φ(Z_{n-k})` is the `(k+1)`-th smallest of `n` uniforms, a
//! `Beta(k+1, n-k)` variate, so a single order statistic can be drawn exactly
//! without generating or sorting the sample.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, fabs, lgamma, log, log1p, pow, sqrt};
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng::{ReplicationRng, StreamKey};
use crate::special::{normal_quantile, normal_sf, EULER_GAMMA};
use crate::stats::{MomentEstimate, NeumaierSum};

const PI2_OVER_6: f64 = PI * PI / 6.0;

/// Partial harmonic sums `s¹ₖ = Σ 1/j` and `s²ₖ = Σ 1/j²`, `j = 1..=k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicSums {
    pub k: u64,
    pub s1: f64,
    pub s2: f64,
    pub gamma0: f64,
}

impl HarmonicSums {
    /// `s¹ₖ - (log k + γ₀ + 1/(2k))`, of order `1/(12k²)`. Zero at `k = 0`.
    pub fn expansion_residual(&self) -> f64 {
        if self.k == 0 {
            return 0.0;
        }
        let k = self.k as f64;
        self.s1 - (log(k) + self.gamma0 + 0.5 / k)
    }
}

pub fn harmonic_sums(k: u64) -> HarmonicSums {
    // Smallest terms first.
    let (mut s1, mut s2) = (NeumaierSum::default(), NeumaierSum::default());
    for j in (1..=k).rev() {
        let x = 1.0 / j as f64;
        s1.add(x);
        s2.add(x * x);
    }
    HarmonicSums { k, s1: s1.value(), s2: s2.value(), gamma0: EULER_GAMMA }
}

/// Which harmonic index enters the moment formulas for `Z_{n-k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexVariant {
    /// `s_{k+1}`.
    AsStated,
    /// `s_k`.
    Shifted,
}

impl IndexVariant {
    pub const ALL: [IndexVariant; 2] = [IndexVariant::AsStated, IndexVariant::Shifted];

    pub fn index(self, k: u64) -> u64 {
        match self {
            IndexVariant::AsStated => k + 1,
            IndexVariant::Shifted => k,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IndexVariant::AsStated => "as_stated",
            IndexVariant::Shifted => "shifted",
        }
    }
}

impl core::str::FromStr for IndexVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_stated" => Ok(IndexVariant::AsStated),
            "shifted" => Ok(IndexVariant::Shifted),
            _ => Err(Error::Domain("index variant must be as_stated or shifted")),
        }
    }
}

/// Admissible band `k ≤ C (log n)^θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankBand {
    pub c: f64,
    pub theta: f64,
}

impl Default for RankBand {
    fn default() -> Self {
        RankBand { c: 1.0, theta: 2.0 }
    }
}

impl RankBand {
    pub fn new(c: f64, theta: f64) -> Result<Self> {
        if !(c > 0.0) || !(theta > 0.0 && theta <= 2.0) {
            return Err(Error::Domain("rank band needs C > 0 and 0 < theta <= 2"));
        }
        Ok(RankBand { c, theta })
    }

    pub fn admits(&self, n: f64, k: u64) -> bool {
        k as f64 <= self.c * pow(log(n), self.theta)
    }
}

/// Asymptotic mean and variance of `Z_{n-k}` with their error orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremeMoment {
    pub n: f64,
    pub k: u64,
    pub mean_pred: f64,
    pub var_pred: f64,
    /// `(log log n)² / (log n)^{3/2}`.
    pub mean_error_order: f64,
    /// `1 / (log n)²`.
    pub var_error_order: f64,
    pub variant: IndexVariant,
}

/// `E Z_{n-k} ≈ √(2 log n) - (log log n + 2(s¹ - γ₀) + log 4π)/√(8 log n)` and
/// `V Z_{n-k} ≈ (π²/6 - s²)/(2 log n)`.
pub fn extreme_moment(n: f64, k: u64, variant: IndexVariant, band: RankBand) -> Result<ExtremeMoment> {
    if !(n >= 3.0) || !n.is_finite() {
        return Err(Error::Domain("extreme moments need n >= 3"));
    }
    if !band.admits(n, k) || k as f64 >= n {
        return Err(Error::Domain("k outside the admissible band C (log n)^theta"));
    }
    let hs = harmonic_sums(variant.index(k));
    let ln = log(n);
    let lln = log(ln);
    let mean_pred = sqrt(2.0 * ln) - (lln + 2.0 * (hs.s1 - EULER_GAMMA) + log(4.0 * PI)) / sqrt(8.0 * ln);
    let var_pred = (PI2_OVER_6 - hs.s2) / (2.0 * ln);
    Ok(ExtremeMoment {
        n,
        k,
        mean_pred,
        var_pred,
        mean_error_order: lln * lln / pow(ln, 1.5),
        var_error_order: 1.0 / (ln * ln),
        variant,
    })
}

pub fn extreme_mean(n: f64, k: u64, variant: IndexVariant) -> Result<ExtremeMoment> {
    extreme_moment(n, k, variant, RankBand::default())
}

pub fn extreme_var(n: f64, k: u64, variant: IndexVariant) -> Result<ExtremeMoment> {
    extreme_moment(n, k, variant, RankBand::default())
}

/// Exact sampler for `Z_{n-k}` through `B = G₁/(G₁+G₂)`, `G₁ ~ Γ(k+1)`,
/// `G₂ ~ Γ(n-k)`, and `Z_{n-k} = -Φ⁻¹(B)`.
#[derive(Debug, Clone)]
pub struct ExtremeSampler {
    small: Gamma<f64>,
    large: Gamma<f64>,
    key: StreamKey,
}

impl ExtremeSampler {
    pub fn new(n: u64, k: u64, key: StreamKey) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(Error::Domain("need 0 <= k < n"));
        }
        let small = Gamma::new((k + 1) as f64, 1.0).map_err(|_| Error::Domain("bad gamma shape"))?;
        let large = Gamma::new((n - k) as f64, 1.0).map_err(|_| Error::Domain("bad gamma shape"))?;
        Ok(ExtremeSampler { small, large, key })
    }

    fn draw_with(&self, rng: &mut ReplicationRng) -> f64 {
        let g1 = self.small.sample(rng);
        let g2 = self.large.sample(rng);
        -normal_quantile(g1 / (g1 + g2))
    }

    /// Replication `index`, drawn from its own stream.
    pub fn draw(&self, index: u64) -> f64 {
        self.draw_with(&mut self.key.stream(index))
    }

    /// Replications `start..start + out.len()`.
    pub fn fill(&self, start: u64, out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.draw(start + i as u64);
        }
    }
}

pub fn sample_extreme(n: u64, k: u64, reps: usize, seed: u64) -> Result<MomentEstimate> {
    if reps < 2 {
        return Err(Error::Domain("need at least two replications"));
    }
    let sampler = ExtremeSampler::new(n, k, StreamKey::new(seed, extreme_experiment_id(n, k)))?;
    let mut draws = Vec::with_capacity(reps);
    draws.resize(reps, 0.0);
    sampler.fill(0, &mut draws);
    MomentEstimate::from_slice(&draws)
}

/// Experiment label separating the streams of different `(n, k)`.
pub fn extreme_experiment_id(n: u64, k: u64) -> u64 {
    crate::rng::splitmix64(n ^ k.rotate_left(48) ^ 0x4f52_4445_5253_5441)
}

/// `P(Z_{n-k} ≤ x)`: at most `k` of the `n` observations exceed `x`.
/// Exact binomial coefficients keep this accurate for `n ≤ 50`.
pub fn order_stat_cdf(n: u64, k: u64, x: f64) -> Result<f64> {
    if n == 0 || k >= n || n > 60 {
        return Err(Error::Domain("binomial route needs 0 <= k < n <= 60"));
    }
    let p = normal_sf(x);
    let log_q = log1p(-p);
    let mut acc = NeumaierSum::default();
    let mut binom = 1.0f64;
    for j in 0..=k {
        if j > 0 {
            binom = binom * (n - j + 1) as f64 / j as f64;
        }
        let term = if p == 0.0 {
            if j == 0 { 1.0 } else { 0.0 }
        } else {
            binom * exp(j as f64 * log(p) + (n - j) as f64 * log_q)
        };
        acc.add(term);
    }
    Ok(acc.value().min(1.0))
}

/// `P(-Φ⁻¹(B) ≤ x) = 1 - I_{1-Φ(x)}(k+1, n-k)` for `B ~ Beta(k+1, n-k)`.
pub fn beta_representation_cdf(n: u64, k: u64, x: f64) -> Result<f64> {
    if n == 0 || k >= n {
        return Err(Error::Domain("need 0 <= k < n"));
    }
    let a = (k + 1) as f64;
    let b = (n - k) as f64;
    let p = normal_sf(x);
    // 1 - I_p(a, b) = I_{1-p}(b, a)
    Ok(regularized_beta(1.0 - p, p, b, a))
}

/// Regularized incomplete beta `I_x(a, b)`, with `y = 1 - x` supplied
/// separately so the complement is not formed by subtraction.
pub fn regularized_beta(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(y);
    let front = exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(y, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < 1e-16 {
            break;
        }
    }
    h
}

/// Rank `⌈nu⌉`. Products `n·u` within a few ulps of an integer snap to it,
/// so grid points `u = i/n` map back to `i`.
pub fn quantile_rank(n: u64, u: f64) -> usize {
    let r = u * n as f64;
    let nearest = libm::round(r);
    let i = if fabs(r - nearest) <= 4.0 * f64::EPSILON * r { nearest } else { libm::ceil(r) };
    (i as usize).clamp(1, n as usize)
}

/// `E(√n (U₍ᵢ₎ - u))^p / (u(1-u))^{p/2}` with `i = ⌈nu⌉` and
/// `U₍ᵢ₎ ~ Beta(i, n-i+1)`, for `p ∈ {2, 4}`.
pub fn uniform_quantile_central_moment(n: u64, u: f64, p: u32) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain("u must lie in (0, 1)"));
    }
    if p != 2 && p != 4 {
        return Err(Error::Domain("only p = 2 and p = 4 are supported"));
    }
    if n == 0 {
        return Err(Error::Domain("need n >= 1"));
    }
    let i = quantile_rank(n, u) as f64;
    let (a, b) = (i, n as f64 - i + 1.0);
    let s = a + b;
    let d = a / s - u;
    let m2 = a * b / (s * s * (s + 1.0));
    let nf = n as f64;
    let w = u * (1.0 - u);
    if p == 2 {
        return Ok(nf * (m2 + d * d) / w);
    }
    let m3 = 2.0 * a * b * (b - a) / (s * s * s * (s + 1.0) * (s + 2.0));
    let m4 = 3.0 * a * b * (2.0 * s * s + a * b * (s - 6.0)) / (s * s * s * s * (s + 1.0) * (s + 2.0) * (s + 3.0));
    let raw = m4 + 4.0 * m3 * d + 6.0 * m2 * d * d + d * d * d * d;
    Ok(nf * nf * raw / (w * w))
}
