//! Discretised draws of `∫ ((Bˣ(u) - Bʸ(u))/h(u))² du` for a pair of
//! Brownian bridges with cross covariance `C_ρ(u,v) - uv`, truncated to
//! `[δ, 1-δ]`.
//!
//! Two mechanisms produce the bridge pair: an exact Gaussian draw on the
//! grid through a Cholesky factor, and the empirical processes of a large
//! correlated normal sample evaluated at the grid nodes.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{log, sqrt};

use crate::error::{Error, Result};
use crate::rng::{correlated_pair, standard_normal, ReplicationRng, StreamKey};
use crate::special::{copula_unchecked, h_unchecked, normal_quantile, Correlation};
use crate::stats::NeumaierSum;

/// Nodes on `[δ, 1-δ]` and trapezoid weights for `∫ f(u) du`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub m: usize,
    pub delta: f64,
    nodes: Vec<f64>,
    /// `min(u, 1-u)` at each node, exact on the upper half.
    tails: Vec<f64>,
    weights: Vec<f64>,
    /// `1/h²` at each node.
    inv_h2: Vec<f64>,
}

/// `s = log log(1/u)` and its inverse.
fn s_of(u: f64) -> f64 {
    log(-log(u))
}

fn u_of(s: f64) -> f64 {
    libm::exp(-libm::exp(s))
}

/// Places `m ≥ 16` nodes on `[δ, 1-δ]`, `0 < δ < 1/4`: about a third
/// of them uniform on `[1/3, 2/3]`, the rest equally spaced in
/// `log log(1/min(u, 1-u))` towards each end, mirrored.
pub fn build_grid(m: usize, delta: f64) -> Result<GridSpec> {
    if m < 16 {
        return Err(Error::Domain("grid needs m >= 16"));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::Domain("grid needs 0 < delta < 1/4"));
    }
    let p = m / 3;
    let mid = m - 2 * p;
    let third = 1.0 / 3.0;
    let (s_lo, s_hi) = (s_of(delta), s_of(third));
    let ds = (s_lo - s_hi) / p as f64;

    // Lower half of the tails, u increasing; the junction node 1/3 belongs to the middle.
    let lower: Vec<f64> = (0..p).map(|j| if j == 0 { delta } else { u_of(s_lo - j as f64 * ds) }).collect();
    let du_mid = third / (mid - 1) as f64;
    let middle: Vec<f64> = (0..mid).map(|i| third + i as f64 * du_mid).collect();

    let mut nodes = Vec::with_capacity(m);
    let mut tails = Vec::with_capacity(m);
    for &u in &lower {
        nodes.push(u);
        tails.push(u);
    }
    for (i, &u) in middle.iter().enumerate() {
        // Mirror the middle too so both halves see identical tails.
        let t = if 2 * i < mid { u } else { middle[mid - 1 - i] };
        nodes.push(if 2 * i < mid { u } else { 1.0 - t });
        tails.push(t);
    }
    for &u in lower.iter().rev() {
        nodes.push(1.0 - u);
        tails.push(u);
    }

    // Trapezoid in s on each tail segment (|du/ds| = u log(1/u)), in u on the middle.
    let jac = |u: f64| -> f64 { u * -log(u) };
    let mut weights = alloc::vec![0.0; m];
    let mut tail_w = alloc::vec![0.0; p + 1];
    for j in 0..p {
        let (a, b) = (tails_at(&lower, third, j), tails_at(&lower, third, j + 1));
        tail_w[j] += 0.5 * ds * jac(a);
        tail_w[j + 1] += 0.5 * ds * jac(b);
    }
    for j in 0..p {
        weights[j] = tail_w[j];
        weights[m - 1 - j] = tail_w[j];
    }
    weights[p] += tail_w[p];
    weights[m - 1 - p] += tail_w[p];
    for i in 0..mid - 1 {
        weights[p + i] += 0.5 * du_mid;
        weights[p + i + 1] += 0.5 * du_mid;
    }

    let inv_h2 = tails
        .iter()
        .map(|&t| {
            let h = h_unchecked(t);
            1.0 / (h * h)
        })
        .collect();
    Ok(GridSpec { m, delta, nodes, tails, weights, inv_h2 })
}

fn tails_at(lower: &[f64], third: f64, j: usize) -> f64 {
    if j < lower.len() {
        lower[j]
    } else {
        third
    }
}

impl GridSpec {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `min(u, 1-u)` per node.
    pub fn tails(&self) -> &[f64] {
        &self.tails
    }

    fn is_upper(&self, i: usize) -> bool {
        2 * i >= self.m
    }

    /// Trapezoid approximation of `∫_δ^{1-δ} f(u) du` from node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let mut acc = NeumaierSum::default();
        for (w, v) in self.weights.iter().zip(values) {
            acc.add(w * v);
        }
        acc.value()
    }

    /// `Cov(Bˣ(uᵢ), Bʸ(uⱼ))` for bridges with correlation `r`; `r = 1` gives
    /// the single-bridge covariance `min(u,v) - uv`. Both arguments are
    /// reduced to their smaller tails: `C(u,v) - uv = ±(C_{±ρ}(a,b) - ab)`,
    /// with the sign negative when the two nodes lie on opposite halves.
    fn covariance(&self, i: usize, j: usize, r: f64) -> f64 {
        let (a, b) = (self.tails[i], self.tails[j]);
        let same = self.is_upper(i) == self.is_upper(j);
        let sr = if same { r } else { -r };
        let c = if sr >= 1.0 {
            a.min(b)
        } else if sr <= -1.0 {
            (a + b - 1.0).max(0.0)
        } else {
            copula_unchecked(a, b, sr)
        };
        let v = c - a * b;
        if same {
            v
        } else {
            -v
        }
    }
}

/// One draw of `(Bˣ, Bʸ)` at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePair {
    pub grid: Arc<GridSpec>,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
    pub rho: Correlation,
}

/// `∫_δ^{1-δ} ((Bˣ - Bʸ)/h)² du` by the grid's trapezoid rule.
pub fn g_functional(pair: &BridgePair) -> f64 {
    let g = &pair.grid;
    let mut acc = NeumaierSum::default();
    for i in 0..g.m {
        let d = pair.bx[i] - pair.by[i];
        acc.add(g.weights[i] * d * d * g.inv_h2[i]);
    }
    acc.value()
}

/// Cholesky factor of the `2m × 2m` joint covariance of `(Bˣ, Bʸ)` on a grid.
#[derive(Debug, Clone)]
pub struct BridgeFactor {
    grid: Arc<GridSpec>,
    rho: Correlation,
    /// Row-major lower triangle.
    lower: Vec<f64>,
    pub jitter: f64,
}

/// Diagonal jitter ladder tried in turn when the factorisation breaks down.
pub const JITTER_LADDER: [f64; 5] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9];

impl BridgeFactor {
    pub fn new(grid: Arc<GridSpec>, rho: Correlation) -> Result<Self> {
        let m = grid.m;
        let n = 2 * m;
        let r = rho.rho();
        let mut cov = alloc::vec![0.0; n * n];
        for i in 0..m {
            for j in 0..=i {
                let xx = grid.covariance(i, j, 1.0);
                cov[i * n + j] = xx;
                cov[(m + i) * n + (m + j)] = xx;
            }
            for j in 0..m {
                cov[(m + i) * n + j] = grid.covariance(i, j, r);
            }
        }
        let mut last = Error::NotPositiveDefinite { pivot: 0, jitter: 0.0 };
        for &jitter in &JITTER_LADDER {
            match cholesky(&cov, n, jitter) {
                Ok(lower) => return Ok(BridgeFactor { grid, rho, lower, jitter }),
                Err(pivot) => last = Error::NotPositiveDefinite { pivot, jitter },
            }
        }
        Err(last)
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn draw_with(&self, rng: &mut ReplicationRng) -> BridgePair {
        let m = self.grid.m;
        let n = 2 * m;
        let z: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
        let mut out = alloc::vec![0.0; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.lower[i * n..i * n + i + 1];
            *slot = row.iter().zip(&z).map(|(a, b)| a * b).sum();
        }
        let by = out.split_off(m);
        BridgePair { grid: self.grid.clone(), bx: out, by, rho: self.rho }
    }
}

/// In-place-free Cholesky of a symmetric matrix given by its lower triangle.
/// Returns the failing pivot on breakdown.
fn cholesky(a: &[f64], n: usize, jitter: f64) -> core::result::Result<Vec<f64>, usize> {
    let mut l = alloc::vec![0.0; n * n];
    for j in 0..n {
        let row_j = j * n;
        let mut d = a[row_j + j] + jitter;
        for k in 0..j {
            d -= l[row_j + k] * l[row_j + k];
        }
        if !(d > 0.0) {
            return Err(j);
        }
        let d = sqrt(d);
        l[row_j + j] = d;
        for i in j + 1..n {
            let row_i = i * n;
            let mut s = a[row_i + j];
            for k in 0..j {
                s -= l[row_i + k] * l[row_j + k];
            }
            l[row_i + j] = s / d;
        }
    }
    Ok(l)
}

pub fn simulate_bridge_pair_gaussian(grid: &GridSpec, rho: Correlation, seed: u64) -> Result<BridgePair> {
    let factor = BridgeFactor::new(Arc::new(grid.clone()), rho)?;
    Ok(factor.draw_with(&mut StreamKey::new(seed, GAUSSIAN_GRID_ID).stream(0)))
}

/// Empirical-process bridges of `m_sample` correlated normal pairs.
#[derive(Debug, Clone)]
pub struct CoupledBridges {
    grid: Arc<GridSpec>,
    rho: Correlation,
    m_sample: usize,
    /// `Φ⁻¹(min(u, 1-u))` per node.
    cuts: Vec<f64>,
}

impl CoupledBridges {
    pub fn new(grid: Arc<GridSpec>, rho: Correlation, m_sample: usize) -> Result<Self> {
        if m_sample < 10_000 {
            return Err(Error::Domain("empirical coupling needs m_sample >= 10^4"));
        }
        let cuts = grid.tails.iter().map(|&t| normal_quantile(t)).collect();
        Ok(CoupledBridges { grid, rho, m_sample, cuts })
    }

    pub fn m_sample(&self) -> usize {
        self.m_sample
    }

    pub fn draw_with(&self, rng: &mut ReplicationRng) -> BridgePair {
        let r = self.rho.rho();
        let mut xs = Vec::with_capacity(self.m_sample);
        let mut ys = Vec::with_capacity(self.m_sample);
        for _ in 0..self.m_sample {
            let (x, y) = correlated_pair(rng, r);
            xs.push(x);
            ys.push(y);
        }
        xs.sort_unstable_by(f64::total_cmp);
        ys.sort_unstable_by(f64::total_cmp);
        BridgePair {
            grid: self.grid.clone(),
            bx: self.bridge(&xs),
            by: self.bridge(&ys),
            rho: self.rho,
        }
    }

    /// `√m (𝔽_m(u) - u)`; on the upper half as `√m (t - #{X > Φ⁻¹(1-t)}/m)`.
    fn bridge(&self, sorted: &[f64]) -> Vec<f64> {
        let mf = self.m_sample as f64;
        let scale = sqrt(mf);
        (0..self.grid.m)
            .map(|i| {
                let t = self.grid.tails[i];
                let c = self.cuts[i];
                if self.grid.is_upper(i) {
                    let above = sorted.len() - sorted.partition_point(|&x| x <= -c);
                    scale * (t - above as f64 / mf)
                } else {
                    let below = sorted.partition_point(|&x| x <= c);
                    scale * (below as f64 / mf - t)
                }
            })
            .collect()
    }
}

pub fn simulate_bridge_pair_coupled(grid: &GridSpec, rho: Correlation, m_sample: usize, seed: u64) -> Result<BridgePair> {
    let c = CoupledBridges::new(Arc::new(grid.clone()), rho, m_sample)?;
    Ok(c.draw_with(&mut StreamKey::new(seed, EMPIRICAL_COUPLING_ID).stream(0)))
}

/// Stream labels of the two mechanisms.
pub const GAUSSIAN_GRID_ID: u64 = 0x4c49_4d49_5447_4752;
pub const EMPIRICAL_COUPLING_ID: u64 = 0x4c49_4d49_5445_4350;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    GaussianGrid,
    EmpiricalCoupling { m_sample: usize },
}

impl Mechanism {
    pub fn label(&self) -> &'static str {
        match self {
            Mechanism::GaussianGrid => "gaussian_grid",
            Mechanism::EmpiricalCoupling { .. } => "empirical_coupling",
        }
    }
}

/// Draws of the functional, indexed by replication so that any partition of
/// the index range across workers reproduces the same values.
#[derive(Debug, Clone)]
pub enum LimitSampler {
    Gaussian { factor: BridgeFactor, key: StreamKey },
    Coupled { bridges: CoupledBridges, key: StreamKey },
}

impl LimitSampler {
    /// `ρ = 0` is refused unless `divergence_demo` is set: the independent
    /// case has an almost surely infinite functional, and only its growth
    /// under shrinking `δ` is meaningful.
    pub fn new(
        rho: Correlation,
        grid: Arc<GridSpec>,
        mechanism: Mechanism,
        seed: u64,
        divergence_demo: bool,
    ) -> Result<Self> {
        if rho.is_independent() && !divergence_demo {
            return Err(Error::Domain(
                "rho = 0 gives an almost surely infinite limit; enable the divergence demo to sample it",
            ));
        }
        Ok(match mechanism {
            Mechanism::GaussianGrid => LimitSampler::Gaussian {
                factor: BridgeFactor::new(grid, rho)?,
                key: StreamKey::new(seed, GAUSSIAN_GRID_ID),
            },
            Mechanism::EmpiricalCoupling { m_sample } => LimitSampler::Coupled {
                bridges: CoupledBridges::new(grid, rho, m_sample)?,
                key: StreamKey::new(seed, EMPIRICAL_COUPLING_ID),
            },
        })
    }

    pub fn pair(&self, index: u64) -> BridgePair {
        match self {
            LimitSampler::Gaussian { factor, key } => factor.draw_with(&mut key.stream(index)),
            LimitSampler::Coupled { bridges, key } => bridges.draw_with(&mut key.stream(index)),
        }
    }

    pub fn draw(&self, index: u64) -> f64 {
        g_functional(&self.pair(index))
    }

    pub fn fill(&self, start: u64, out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.draw(start + i as u64);
        }
    }
}

#[derive(Debug, Clone)]
pub struct LimitSample {
    pub values: Vec<f64>,
    pub rho: Correlation,
    pub mechanism: Mechanism,
    pub grid: Arc<GridSpec>,
    pub seed: u64,
}

pub fn sample_limit_law(
    rho: Correlation,
    grid: &GridSpec,
    n_draws: usize,
    mechanism: Mechanism,
    seed: u64,
    divergence_demo: bool,
) -> Result<LimitSample> {
    let grid = Arc::new(grid.clone());
    let sampler = LimitSampler::new(rho, grid.clone(), mechanism, seed, divergence_demo)?;
    let mut values = alloc::vec![0.0; n_draws];
    sampler.fill(0, &mut values);
    Ok(LimitSample { values, rho, mechanism, grid, seed })
}

pub use crate::stats::ks_two_sample;
