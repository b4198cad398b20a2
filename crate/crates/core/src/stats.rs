//! Summation, moment estimates and the two-sample Kolmogorov–Smirnov test.

use alloc::vec::Vec;

use libm::{exp, fabs, sqrt};

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = NeumaierSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// Monte Carlo mean and variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√count`.
    pub se_mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Large-sample standard error of `variance`, from the fourth central moment.
    pub se_variance: f64,
    pub count: usize,
}

impl MomentEstimate {
    /// Two-pass estimate; the summation order is the slice order.
    pub fn from_slice(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n == 0 {
            return Err(Error::Degenerate("no draws"));
        }
        let nf = n as f64;
        let mean = compensated_sum(xs.iter().copied()) / nf;
        if n == 1 {
            return Ok(MomentEstimate { mean, se_mean: 0.0, variance: 0.0, se_variance: 0.0, count: 1 });
        }
        let mut m2 = NeumaierSum::default();
        let mut m4 = NeumaierSum::default();
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2.add(d2);
            m4.add(d2 * d2);
        }
        let variance = m2.value() / (nf - 1.0);
        let mu4 = m4.value() / nf;
        let var_of_var = if n > 3 {
            ((mu4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0)
        } else {
            0.0
        };
        Ok(MomentEstimate {
            mean,
            se_mean: sqrt(variance / nf),
            variance,
            se_variance: sqrt(var_of_var),
            count: n,
        })
    }
}

/// Linear-interpolation quantile of an ascending slice.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Two-sample Kolmogorov–Smirnov statistic with its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl KsResult {
    /// Asymptotic critical value `c(α) √((n+m)/(nm))`.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        let c = sqrt(-0.5 * libm::log(alpha / 2.0));
        let (n, m) = (self.n_a as f64, self.n_b as f64);
        c * sqrt((n + m) / (n * m))
    }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 25 || b.len() < 25 {
        return Err(Error::Domain("KS test needs at least 25 values per sample"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Domain("KS input contains NaN"));
    }
    let is_constant = |xs: &[f64]| xs.iter().all(|&x| x == xs[0]);
    if is_constant(a) || is_constant(b) {
        return Err(Error::Degenerate("KS input is constant"));
    }
    let mut xa: Vec<f64> = a.to_vec();
    let mut xb: Vec<f64> = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max(fabs(i as f64 / na as f64 - j as f64 / nb as f64));
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sq = sqrt(ne);
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf(lambda), n_a: na, n_b: nb })
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi-transformed series, fast for small lambda.
        let c = core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            s += exp(-m * m * c);
        }
        (1.0 - sqrt(2.0 * core::f64::consts::PI) / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = exp(-2.0 * kf * kf * lambda * lambda);
            s += sign * term;
            if term < 1e-300 {
                break;
            }
            sign = -sign;
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}
