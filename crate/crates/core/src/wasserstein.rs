//! Exact `W₂²` between piecewise-constant empirical quantile functions and
//! Gaussian quantile functions.
//!
//! On `((i-1)/n, i/n]` the empirical quantile is the order statistic `Zᵢ`,
//! so every piece of the defining integral is
//!
//! ```text
//! ∫ₐᵇ (z - Φ⁻¹(u))² du = (b - a)(z - μ)² + V,
//! μ = (φ(Φ⁻¹(a)) - φ(Φ⁻¹(b))) / (b - a),
//! V = ∫ₐᵇ Φ⁻¹² du - (b - a) μ²,
//! ```
//!
//! with `∫ Φ⁻¹² du = u - Φ⁻¹(u) φ(Φ⁻¹(u))`. Both terms are nonnegative, so
//! the sum over intervals has no cancellation.

use alloc::vec::Vec;

use libm::{floor, log, pow};

use crate::error::{Error, Result};
use crate::special::{normal_pdf, normal_quantile};
use crate::stats::NeumaierSum;

/// Ascending, finite observations `Z₁ ≤ … ≤ Zₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    /// Wraps values that are already sorted.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("sample must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample values must be finite"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("sample values must be nondecreasing"));
        }
        Ok(SortedSample { values })
    }

    /// Sorts arbitrary finite observations.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample values must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Order statistic `Zᵢ`, 1-based.
    pub fn order_stat(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// Right-continuous empirical quantile `Z_⌈nu⌉` for `u ∈ (0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.values.len();
        let i = libm::ceil(u * n as f64) as usize;
        self.values[i.clamp(1, n) - 1]
    }

    pub fn mean(&self) -> f64 {
        crate::stats::compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// The sample `-Z`, still ascending.
    pub fn negated(&self) -> SortedSample {
        SortedSample { values: self.values.iter().rev().map(|v| -v).collect() }
    }

    /// The sample `mu + sigma Z`.
    pub fn affine(&self, mu: f64, sigma: f64) -> Result<SortedSample> {
        if !(sigma > 0.0) {
            return Err(Error::Domain("affine scale must be positive"));
        }
        SortedSample::new(self.values.iter().map(|v| mu + sigma * v).collect())
    }
}

/// Normal reference law `N(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianReference {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianReference {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain("reference needs finite mu and sigma > 0"));
        }
        Ok(GaussianReference { mu, sigma })
    }

    pub const fn standard() -> Self {
        GaussianReference { mu: 0.0, sigma: 1.0 }
    }
}

/// A point of `[0, 1]` carried as `(u, 1 - u)`; whichever side is smaller
/// is the accurate one.
#[derive(Debug, Clone, Copy)]
struct Level {
    lower: f64,
    upper: f64,
}

/// Standard-normal quantities at a level: `Φ⁻¹`, `φ∘Φ⁻¹`, and their product.
#[derive(Debug, Clone, Copy)]
struct Node {
    phi: f64,
    q_phi: f64,
}

impl Level {
    fn from_lower(u: f64) -> Level {
        Level { lower: u, upper: 1.0 - u }
    }

    fn from_upper(t: f64) -> Level {
        Level { lower: 1.0 - t, upper: t }
    }

    /// `i/n`, built from whichever of `i` and `n - i` is smaller.
    fn from_index(i: usize, n: usize) -> Level {
        if 2 * i <= n {
            Level::from_lower(i as f64 / n as f64)
        } else {
            Level::from_upper((n - i) as f64 / n as f64)
        }
    }

    fn node(self) -> Node {
        if self.lower <= 0.0 || self.upper <= 0.0 {
            return Node { phi: 0.0, q_phi: 0.0 };
        }
        let q = if self.lower <= 0.5 {
            normal_quantile(self.lower)
        } else {
            -normal_quantile(self.upper)
        };
        let phi = normal_pdf(q);
        Node { phi, q_phi: q * phi }
    }

    fn width_to(self, hi: Level) -> f64 {
        if self.lower > 0.5 {
            self.upper - hi.upper
        } else {
            hi.lower - self.lower
        }
    }
}

/// Mean and within-interval variance mass of `Φ⁻¹` on one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    width: f64,
    mean: f64,
    spread: f64,
}

fn cell(lo: Level, hi: Level) -> Cell {
    cell_from_nodes(lo.width_to(hi), lo.node(), hi.node())
}

fn cell_from_nodes(width: f64, lo: Node, hi: Node) -> Cell {
    if width <= 0.0 {
        return Cell { width: 0.0, mean: 0.0, spread: 0.0 };
    }
    let m1 = lo.phi - hi.phi;
    let m2 = width + (lo.q_phi - hi.q_phi);
    let mean = m1 / width;
    Cell { width, mean, spread: (m2 - m1 * mean).max(0.0) }
}

impl Cell {
    /// `∫ (z - mu - sigma Φ⁻¹(u))² du` over the cell.
    #[inline]
    fn piece(&self, z: f64, r: GaussianReference) -> f64 {
        let d = z - r.mu - r.sigma * self.mean;
        self.width * d * d + r.sigma * r.sigma * self.spread
    }
}

fn check_bounds(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b <= 1.0) {
        return Err(Error::Domain("integration bounds must lie in [0, 1]"));
    }
    if a > b {
        return Err(Error::Domain("integration bounds are reversed"));
    }
    Ok(())
}

/// `∫ₐᵇ (mu + sigma Φ⁻¹(u)) du`. The endpoints 0 and 1 are taken as limits.
pub fn quantile_integral(a: f64, b: f64, r: GaussianReference) -> Result<f64> {
    check_bounds(a, b)?;
    let (lo, hi) = (Level::from_lower(a), Level::from_lower(b));
    let m1 = lo.node().phi - hi.node().phi;
    Ok(r.mu * (b - a) + r.sigma * m1)
}

/// `∫ₐᵇ (mu + sigma Φ⁻¹(u))² du`. The endpoints 0 and 1 are taken as limits.
pub fn quantile_sq_integral(a: f64, b: f64, r: GaussianReference) -> Result<f64> {
    check_bounds(a, b)?;
    let (lo, hi) = (Level::from_lower(a), Level::from_lower(b));
    let (nl, nh) = (lo.node(), hi.node());
    let w = b - a;
    let m1 = nl.phi - nh.phi;
    let m2 = w + (nl.q_phi - nh.q_phi);
    Ok(r.mu * r.mu * w + 2.0 * r.mu * r.sigma * m1 + r.sigma * r.sigma * m2)
}

/// Per-interval moments of the standard quantile function on the grid
/// `i/n`. Building it costs `n + 1` quantile evaluations; evaluating
/// `W₂²` against it afterwards is a single pass over the sample.
#[derive(Debug, Clone)]
pub struct GaussianPartition {
    means: Vec<f64>,
    spread_total: f64,
}

impl GaussianPartition {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("partition needs n >= 1"));
        }
        let width = 1.0 / n as f64;
        let mut means = Vec::with_capacity(n);
        let mut spread = NeumaierSum::default();
        let mut prev = Level::from_index(0, n).node();
        for i in 1..=n {
            let next = Level::from_index(i, n).node();
            let c = cell_from_nodes(width, prev, next);
            means.push(c.mean);
            spread.add(c.spread);
            prev = next;
        }
        Ok(GaussianPartition { means, spread_total: spread.value() })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    /// `∫₀¹ (Φ⁻¹(u) - μ_cell(u))² du`: the floor on `W₂²` of any sample of size `n`.
    pub fn spread_total(&self) -> f64 {
        self.spread_total
    }

    /// `W₂²` of a sorted slice against `N(mu, sigma²)`.
    pub fn w2sq(&self, sorted: &[f64], r: GaussianReference) -> Result<f64> {
        if sorted.len() != self.means.len() {
            return Err(Error::SizeMismatch { left: sorted.len(), right: self.means.len() });
        }
        let w = 1.0 / self.means.len() as f64;
        let mut acc = NeumaierSum::default();
        for (&z, &m) in sorted.iter().zip(&self.means) {
            let d = z - r.mu - r.sigma * m;
            acc.add(w * d * d);
        }
        acc.add(r.sigma * r.sigma * self.spread_total);
        Ok(acc.value())
    }
}

/// `W₂²(𝔽ₙ, N(mu, sigma²)) = ∫₀¹ (𝔽ₙ⁻¹(u) - mu - sigma Φ⁻¹(u))² du`, exact.
pub fn w2sq_vs_gaussian(s: &SortedSample, r: GaussianReference) -> f64 {
    let n = s.len();
    let mut acc = NeumaierSum::default();
    let mut lo = Level::from_index(0, n);
    let mut lo_node = lo.node();
    for (i, &z) in s.values().iter().enumerate() {
        let hi = Level::from_index(i + 1, n);
        let hi_node = hi.node();
        let c = cell_from_nodes(lo.width_to(hi), lo_node, hi_node);
        acc.add(c.piece(z, r));
        lo = hi;
        lo_node = hi_node;
    }
    acc.value()
}

/// `W₂²(𝔽ₙ, 𝔾ₙ) = (1/n) Σ (X₍ᵢ₎ - Y₍ᵢ₎)²` for two samples of equal size.
pub fn w2sq_two_sample(sx: &SortedSample, sy: &SortedSample) -> Result<f64> {
    w2sq_sorted_slices(sx.values(), sy.values())
}

pub fn w2sq_sorted_slices(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::Domain("samples must not be empty"));
    }
    let mut acc = NeumaierSum::default();
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        acc.add(d * d);
    }
    Ok(acc.value() / x.len() as f64)
}

/// Split of `∫_{1/2}^{1} (𝔽ₙ⁻¹ - Φ⁻¹)²` into the extreme pieces `Aₙ`, `Bₙ`,
/// the upper order-statistic band `Cₙ` and the bulk `Dₙ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W2Decomposition {
    /// `[1 - 1/(n (log n)^γ), 1]`, against `Zₙ`.
    pub a_n: f64,
    /// `[1 - 1/n, 1 - 1/(n (log n)^γ)]`, against `Zₙ`.
    pub b_n: f64,
    /// `[1 - K/n, 1 - 1/n]`, the order statistics `Z_{n-k}`, `1 ≤ k < K`.
    pub c_n: f64,
    /// `[1/2, 1 - K/n]`.
    pub d_n: f64,
    pub c: f64,
    pub theta: f64,
    pub gamma: f64,
    pub n: usize,
    /// `K = ⌊C (log n)^θ⌋`.
    pub k_cut: usize,
    /// The half integral evaluated directly over the grid `i/n`.
    pub half_total: f64,
}

impl W2Decomposition {
    pub fn sum(&self) -> f64 {
        self.a_n + self.b_n + self.c_n + self.d_n
    }
}

/// `K = ⌊C (log n)^θ⌋`, the number of upper order statistics set apart.
pub fn band_width(n: f64, c: f64, theta: f64) -> usize {
    floor(c * pow(log(n), theta)) as usize
}

/// The extreme pieces `Aₙ`, `Bₙ`, `Cₙ` alone, which cost `O(K)` instead of `O(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremePieces {
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub k_cut: usize,
}

impl ExtremePieces {
    pub fn sum(&self) -> f64 {
        self.a_n + self.b_n + self.c_n
    }
}

pub fn extreme_pieces(s: &SortedSample, c: f64, theta: f64, gamma: f64) -> Result<ExtremePieces> {
    let n = s.len();
    if !(c > 0.0) || !(theta > 1.0 && theta <= 2.0) || !(gamma > 1.0) {
        return Err(Error::Domain("need C > 0, 1 < theta <= 2, gamma > 1"));
    }
    if n < 3 {
        return Err(Error::Domain("decomposition needs n >= 3"));
    }
    let nf = n as f64;
    let k_cut = band_width(nf, c, theta);
    if k_cut < 1 || 2 * k_cut >= n {
        return Err(Error::Domain("need 1 <= floor(C (log n)^theta) < n/2"));
    }
    let std = GaussianReference::standard();
    let z_max = s.order_stat(n);

    let top = Level::from_upper(0.0);
    let a_cut = Level::from_upper(1.0 / (nf * pow(log(nf), gamma)));
    let last = Level::from_upper(1.0 / nf);
    let a_n = cell(a_cut, top).piece(z_max, std);
    let b_n = cell(last, a_cut).piece(z_max, std);

    let mut c_acc = NeumaierSum::default();
    for k in 1..k_cut {
        let lo = Level::from_upper((k + 1) as f64 / nf);
        let hi = Level::from_upper(k as f64 / nf);
        c_acc.add(cell(lo, hi).piece(s.order_stat(n - k), std));
    }
    Ok(ExtremePieces { a_n, b_n, c_n: c_acc.value(), k_cut })
}

pub fn tail_decomposition(s: &SortedSample, c: f64, theta: f64, gamma: f64) -> Result<W2Decomposition> {
    let extremes = extreme_pieces(s, c, theta, gamma)?;
    let n = s.len();
    let std = GaussianReference::standard();

    // Intervals ((i-1)/n, i/n] meeting [1/2, hi_index/n].
    let half = Level::from_lower(0.5);
    let bulk = |hi_index: usize| {
        let mut acc = NeumaierSum::default();
        let first = n / 2 + 1;
        for i in first..=hi_index {
            let lo = if 2 * (i - 1) < n { half } else { Level::from_index(i - 1, n) };
            acc.add(cell(lo, Level::from_index(i, n)).piece(s.order_stat(i), std));
        }
        acc.value()
    };

    Ok(W2Decomposition {
        a_n: extremes.a_n,
        b_n: extremes.b_n,
        c_n: extremes.c_n,
        d_n: bulk(n - extremes.k_cut),
        c,
        theta,
        gamma,
        n,
        k_cut: extremes.k_cut,
        half_total: bulk(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{standard_normal, StreamKey};
    use crate::quadrature::{integrate, Tolerance};
    use crate::special::FRAC_1_SQRT_2PI;
    use libm::fabs;
    use proptest::prelude::*;

    fn sample(n: usize, seed: u64) -> SortedSample {
        let mut r = StreamKey::new(seed, 99).stream(n as u64);
        SortedSample::from_unsorted((0..n).map(|_| standard_normal(&mut r)).collect()).unwrap()
    }

    #[test]
    fn sample_validation() {
        assert!(SortedSample::new(alloc::vec![]).is_err());
        assert!(SortedSample::new(alloc::vec![2.0, 1.0]).is_err());
        assert!(SortedSample::new(alloc::vec![1.0, f64::NAN]).is_err());
        let s = SortedSample::from_unsorted(alloc::vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(s.quantile(0.25), 1.0);
        assert_eq!(s.quantile(0.2500001), 2.0);
        assert_eq!(s.quantile(1.0), 3.0);
        assert!(GaussianReference::new(0.0, 0.0).is_err());
    }

    #[test]
    fn quantile_integral_cases() {
        let std = GaussianReference::standard();
        assert_eq!(quantile_integral(0.0, 1.0, std).unwrap(), 0.0);
        assert!(fabs(quantile_integral(0.0, 0.5, std).unwrap() + FRAC_1_SQRT_2PI) < 1e-16);
        let two = GaussianReference::new(0.0, 2.0).unwrap();
        let a = quantile_integral(0.1, 0.7, std).unwrap();
        assert!(fabs(quantile_integral(0.1, 0.7, two).unwrap() - 2.0 * a) < 1e-16);
        assert!(quantile_integral(0.7, 0.1, std).is_err());
        assert!(quantile_integral(-0.1, 0.1, std).is_err());
    }

    #[test]
    fn quantile_sq_integral_cases() {
        let std = GaussianReference::standard();
        assert_eq!(quantile_sq_integral(0.0, 1.0, std).unwrap(), 1.0);
        assert!(fabs(quantile_sq_integral(0.5, 1.0, std).unwrap() - 0.5) < 1e-16);
        // mpmath: ∫_{1/4}^{3/4} Φ⁻¹(u)² du
        let v = quantile_sq_integral(0.25, 0.75, std).unwrap();
        assert!(fabs(v - 0.071_325_917_744_259_40) < 1e-15, "{v}");
        // Var of N(1, 4) plus mean squared.
        let r = GaussianReference::new(1.0, 2.0).unwrap();
        assert!(fabs(quantile_sq_integral(0.0, 1.0, r).unwrap() - 5.0) < 1e-15);
    }

    #[test]
    fn single_observation_closed_form() {
        for &x in &[-3.0, -0.2, 0.0, 1.5, 7.0] {
            let s = SortedSample::new(alloc::vec![x]).unwrap();
            let w = w2sq_vs_gaussian(&s, GaussianReference::standard());
            assert!(fabs(w - (x * x + 1.0)) <= 1e-12 * (x * x + 1.0));
        }
    }

    #[test]
    fn partition_agrees_with_direct_evaluation() {
        for &n in &[1usize, 2, 7, 64, 1001] {
            let s = sample(n, 3);
            let p = GaussianPartition::new(n).unwrap();
            let r = GaussianReference::new(0.3, 1.7).unwrap();
            let a = p.w2sq(s.values(), r).unwrap();
            let b = w2sq_vs_gaussian(&s.affine(0.0, 1.0).unwrap(), r);
            assert!(fabs(a - b) <= 1e-13 * b, "n={n}");
        }
        assert!(GaussianPartition::new(4).unwrap().w2sq(&[0.0; 3], GaussianReference::standard()).is_err());
    }

    #[test]
    fn two_sample_basics() {
        let x = SortedSample::new(alloc::vec![0.5]).unwrap();
        let y = SortedSample::new(alloc::vec![-1.0]).unwrap();
        assert_eq!(w2sq_two_sample(&x, &y).unwrap(), 2.25);
        let s = sample(50, 1);
        assert_eq!(w2sq_two_sample(&s, &s).unwrap(), 0.0);
        let t = sample(51, 1);
        assert!(matches!(w2sq_two_sample(&s, &t), Err(Error::SizeMismatch { .. })));
        let u = sample(50, 2);
        let base = w2sq_two_sample(&s, &u).unwrap();
        let scaled = w2sq_two_sample(&s.affine(0.0, 3.0).unwrap(), &u.affine(0.0, 3.0).unwrap()).unwrap();
        assert!(fabs(scaled - 9.0 * base) <= 1e-12 * scaled);
        assert_eq!(base, w2sq_two_sample(&u, &s).unwrap());
    }

    #[test]
    fn decomposition_partitions_the_upper_half() {
        for &n in &[101usize, 1000, 4097] {
            let s = sample(n, 11);
            let d = tail_decomposition(&s, 1.0, 2.0, 2.0).unwrap();
            assert!(d.a_n >= 0.0 && d.b_n >= 0.0 && d.c_n >= 0.0 && d.d_n >= 0.0);
            assert!(fabs(d.sum() - d.half_total) <= 1e-10 * d.half_total, "n={n}");
            // Independent evaluation of the half integral from the two antiderivatives.
            let std = GaussianReference::standard();
            let mut direct = 0.0;
            for i in (n / 2 + 1)..=n {
                let a = ((i - 1) as f64 / n as f64).max(0.5);
                let b = i as f64 / n as f64;
                let z = s.order_stat(i);
                direct += z * z * (b - a) - 2.0 * z * quantile_integral(a, b, std).unwrap()
                    + quantile_sq_integral(a, b, std).unwrap();
            }
            assert!(fabs(direct - d.half_total) <= 1e-9 * d.half_total, "n={n}");
        }
    }

    /// Brute-force adaptive quadrature of the defining integral, interval by interval in `u`.
    fn w2sq_by_quadrature(s: &SortedSample) -> f64 {
        let n = s.len();
        let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_panels: 20_000 };
        (1..=n)
            .map(|i| {
                let z = s.order_stat(i);
                let (a, b) = ((i - 1) as f64 / n as f64, i as f64 / n as f64);
                integrate(|u| (z - normal_quantile(u)).powi(2), a, b, tol).unwrap().value
            })
            .sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn matches_quadrature_of_definition(n in 1usize..=64, seed in any::<u64>()) {
            let s = sample(n, seed);
            let exact = w2sq_vs_gaussian(&s, GaussianReference::standard());
            let brute = w2sq_by_quadrature(&s);
            prop_assert!(fabs(exact - brute) <= 1e-9 * brute, "n={} exact={} brute={}", n, exact, brute);
        }

        #[test]
        fn negation_and_affine(n in 1usize..=300, seed in any::<u64>(), mu in -5.0f64..5.0, sigma in 0.1f64..10.0) {
            let s = sample(n, seed);
            let std = GaussianReference::standard();
            let base = w2sq_vs_gaussian(&s, std);
            prop_assert!(base >= 0.0);
            prop_assert!(fabs(w2sq_vs_gaussian(&s.negated(), std) - base) <= 1e-12 * base);
            let r = GaussianReference::new(mu, sigma).unwrap();
            let moved = w2sq_vs_gaussian(&s.affine(mu, sigma).unwrap(), r);
            prop_assert!(fabs(moved - sigma * sigma * base) <= 1e-12 * moved);
        }

        #[test]
        fn two_sample_dominates_mean_shift(n in 1usize..=200, s1 in any::<u64>(), s2 in any::<u64>(), shift in -3.0f64..3.0) {
            let x = sample(n, s1);
            let y = sample(n, s2).affine(shift, 1.0).unwrap();
            let d = x.mean() - y.mean();
            let w = w2sq_two_sample(&x, &y).unwrap();
            prop_assert!(w >= d * d * (1.0 - 1e-12));
            prop_assert_eq!(w, w2sq_two_sample(&y, &x).unwrap());
        }
    }

    #[test]
    fn decomposition_rejects_bad_parameters() {
        let s = sample(1000, 1);
        assert!(tail_decomposition(&s, 0.0, 2.0, 2.0).is_err());
        assert!(tail_decomposition(&s, 1.0, 1.0, 2.0).is_err());
        assert!(tail_decomposition(&s, 1.0, 2.5, 2.0).is_err());
        assert!(tail_decomposition(&s, 1.0, 2.0, 1.0).is_err());
        assert!(tail_decomposition(&sample(20, 1), 5.0, 2.0, 2.0).is_err());
    }
}
