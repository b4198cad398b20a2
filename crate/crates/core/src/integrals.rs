//! Singular integrals against the weight `1/h²(u)`, `h = φ∘Φ⁻¹`.
//!
//! Near `u = 0` the substitution `u = exp(-eᵗ)`, `du = -u L dt` with
//! `L = log(1/u) = eᵗ`, turns `u(1-u)/h²(u) du` into a bounded integrand
//! tending to `1/2`, because `h(u) ~ u √(2L)`. Every integrand here is
//! symmetric about `1/2`, so only `(0, 1/2]` is integrated and doubled.

use libm::{exp, fabs, log, pow};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Quadrature, Tolerance};
use crate::special::{
    copula_unchecked, diagonal_gap_unchecked, h_unchecked, normal_quantile, Correlation, UnitProb,
};
use crate::wasserstein::band_width;

/// Quadrature targets for the singular integrals.
pub const SINGULAR_TOLERANCE: Tolerance = Tolerance { abs: 1e-12, rel: 1e-9, max_panels: 4000 };

/// Smallest cut used where an integral is taken "to the endpoint".
pub const DEEPEST_CUT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularIntegralResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub lower: f64,
    pub upper: f64,
}

impl SingularIntegralResult {
    fn scaled(q: Quadrature, factor: f64, lower: f64, upper: f64) -> Self {
        SingularIntegralResult {
            value: factor * q.value,
            abs_error_estimate: fabs(factor) * q.abs_error,
            evaluations: q.evaluations,
            lower,
            upper,
        }
    }
}

/// `t = log log (1/u)`.
#[inline]
fn t_of(u: f64) -> f64 {
    log(-log(u))
}

/// Lower end of every half-interval integral: `t(1/2)`.
fn t_half() -> f64 {
    t_of(0.5)
}

/// `(u, L)` at `t`.
#[inline]
fn point(t: f64) -> (f64, f64) {
    let l = exp(t);
    (exp(-l), l)
}

/// `u L / h²(u)`, the Jacobian-weighted kernel, for `u ≤ 1/2`.
#[inline]
fn kernel(u: f64, l: f64) -> f64 {
    let r = u / h_unchecked(u);
    r * r * l / u
}

fn check_cut(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::Domain("cut must lie in (0, 1/2)"));
    }
    Ok(())
}

/// `∫ₐ^{1/2} f(u)/h²(u) du` in the `t` variable, with `f` given on `u ≤ 1/2`.
fn half_integral<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Quadrature> {
    check_cut(a)?;
    integrate(
        |t| {
            let (u, l) = point(t);
            if u == 0.0 {
                return 0.0;
            }
            f(u) * kernel(u, l)
        },
        t_half(),
        t_of(a),
        tol,
    )
}

/// `u(1-u)/h²(u)`.
pub fn variance_weight(u: UnitProb) -> f64 {
    let t = u.get().min(u.tail());
    let h = h_unchecked(t);
    (t / h) * ((1.0 - t) / h)
}

/// `∫_{1/n}^{1-1/n} u(1-u)/h²(u) du`. `n` is a real cut, so astronomically
/// large values are fine.
pub fn bickel_integral(n: f64) -> Result<SingularIntegralResult> {
    bickel_integral_with(n, SINGULAR_TOLERANCE)
}

pub fn bickel_integral_with(n: f64, tol: Tolerance) -> Result<SingularIntegralResult> {
    if !(n >= 8.0) || !n.is_finite() {
        return Err(Error::Domain("bickel integral needs finite n >= 8"));
    }
    let a = 1.0 / n;
    let q = half_integral(|u| u * (1.0 - u), a, tol)?;
    Ok(SingularIntegralResult::scaled(q, 2.0, a, 1.0 - a))
}

/// The same integral without folding at `1/2`: lower tail and upper tail in
/// their own `t` variables, the middle `[1/4, 3/4]` directly in `u`.
pub fn bickel_integral_unfolded(n: f64) -> Result<SingularIntegralResult> {
    if !(n >= 8.0) || !n.is_finite() {
        return Err(Error::Domain("bickel integral needs finite n >= 8"));
    }
    let tol = SINGULAR_TOLERANCE;
    let a = 1.0 / n;
    let (t_lo, t_hi) = (t_of(0.25), t_of(a));
    let lower = integrate(
        |t| {
            let (u, l) = point(t);
            u * (1.0 - u) * kernel(u, l)
        },
        t_lo,
        t_hi,
        tol,
    )?;
    let middle = integrate(
        |u| {
            let h = crate::special::normal_pdf(normal_quantile(u));
            u * (1.0 - u) / (h * h)
        },
        0.25,
        0.75,
        tol,
    )?;
    // Upper tail parameterised by τ = 1 - u = exp(-eᵗ); h(1 - τ) = φ(-Φ⁻¹(τ)).
    let upper = integrate(
        |t| {
            let (tau, l) = point(t);
            let h = crate::special::normal_pdf(-normal_quantile(tau));
            let r = tau / h;
            (1.0 - tau) * r * r * l
        },
        t_lo,
        t_hi,
        tol,
    )?;
    Ok(SingularIntegralResult {
        value: lower.value + middle.value + upper.value,
        abs_error_estimate: lower.abs_error + middle.abs_error + upper.abs_error,
        evaluations: lower.evaluations + middle.evaluations + upper.evaluations,
        lower: a,
        upper: 1.0 - a,
    })
}

/// `D₁,ₙ = ∫_{1/2}^{1-K/n} u(1-u)/h²(u) du`, `K = ⌊C (log n)^θ⌋`.
pub fn d1n(n: f64, c: f64, theta: f64) -> Result<SingularIntegralResult> {
    if !(theta > 1.0 && theta <= 2.0) || !(c > 0.0) {
        return Err(Error::Domain("need C > 0 and 1 < theta <= 2"));
    }
    if !(n >= 3.0) || !n.is_finite() {
        return Err(Error::Domain("need finite n >= 3"));
    }
    let k = band_width(n, c, theta);
    let a = k as f64 / n;
    if k < 1 || !(a < 0.5) {
        return Err(Error::Domain("need 1 <= floor(C (log n)^theta) < n/2"));
    }
    let q = half_integral(|u| u * (1.0 - u), a, SINGULAR_TOLERANCE)?;
    Ok(SingularIntegralResult::scaled(q, 1.0, 0.5, 1.0 - a))
}

/// Density in `t = log log(1/δ)` of `2∫_δ^{1-δ} (u - C_ρ(u,u))/h²(u) du`,
/// counting both tails.
pub fn second_moment_tail_density(rho: Correlation, u: f64) -> f64 {
    let (l, r) = (-log(u), rho.rho());
    4.0 * diagonal_gap_unchecked(u, r) * kernel(u, l)
}

/// `2∫₀¹ (u - C_ρ(u,u))/h²(u) du`.
///
/// `u - C_ρ(u,u) ~ min(u, 1-u)` at both ends for every `|ρ| < 1`, so the
/// integrand behaves like `1/(u log(1/u))` and the integral diverges like
/// `2 log log(1/δ)` under truncation at `δ`. The divergence is detected from
/// the `t`-density at the deepest cut rather than assumed.
pub fn limit_second_moment(rho: Correlation) -> Result<SingularIntegralResult> {
    let density = second_moment_tail_density(rho, DEEPEST_CUT);
    if density > 1e-6 {
        return Err(Error::Divergent { tail_density: density });
    }
    truncated_second_moment(rho, DEEPEST_CUT)
}

/// `2∫_δ^{1-δ} (u - C_ρ(u,u))/h²(u) du`.
pub fn truncated_second_moment(rho: Correlation, delta: f64) -> Result<SingularIntegralResult> {
    let r = rho.rho();
    let q = half_integral(|u| diagonal_gap_unchecked(u, r), delta, SINGULAR_TOLERANCE)?;
    Ok(SingularIntegralResult::scaled(q, 4.0, delta, 1.0 - delta))
}

/// `2∫ (u - C_ρ(u,u))/h²(u) du` over `[inner, outer] ∪ [1-outer, 1-inner]`,
/// the expected mass gained by moving a truncation from `outer` to `inner`.
pub fn band_second_moment(rho: Correlation, inner: f64, outer: f64) -> Result<SingularIntegralResult> {
    check_cut(inner)?;
    check_cut(outer)?;
    if inner >= outer {
        return Err(Error::Domain("need inner < outer"));
    }
    let r = rho.rho();
    let q = integrate(
        |t| {
            let (u, l) = point(t);
            diagonal_gap_unchecked(u, r) * kernel(u, l)
        },
        t_of(outer),
        t_of(inner),
        SINGULAR_TOLERANCE,
    )?;
    Ok(SingularIntegralResult::scaled(q, 4.0, inner, outer))
}

/// `2∫₀¹ (C_ρ(u,u) - u²)/h²(u) du`, finite for `|ρ| < 1`, taken down to
/// [`DEEPEST_CUT`]. The truncated second moment equals the independent-case
/// integral `2∫_δ^{1-δ} u(1-u)/h²` minus the truncated version of this.
pub fn dependence_deficit(rho: Correlation) -> Result<SingularIntegralResult> {
    dependence_deficit_truncated(rho, DEEPEST_CUT)
}

pub fn dependence_deficit_truncated(rho: Correlation, delta: f64) -> Result<SingularIntegralResult> {
    let r = rho.rho();
    let q = half_integral(|u| copula_unchecked(u, u, r) - u * u, delta, SINGULAR_TOLERANCE)?;
    Ok(SingularIntegralResult::scaled(q, 4.0, delta, 1.0 - delta))
}

/// Behaviour of `(u - C_ρ(u,u))/h²(u)` near `u = 1` next to the envelopes
/// `1/((1-u) L²)` and `(1-u)^{(1-ρ)/(1+ρ)} / L^{2ρ/(1+ρ)}`, `L = log(1/(1-u))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaTail {
    pub tail: f64,
    pub l: f64,
    /// `u - C_ρ(u,u)`.
    pub gap: f64,
    /// `(u - C_ρ(u,u))/h²(u)`.
    pub integrand: f64,
    /// `1/((1-u) L²)`.
    pub log_envelope: f64,
    /// `u (1-u)^{(1-ρ)/(1+ρ)} / L^{2ρ/(1+ρ)}`.
    pub power_envelope: f64,
}

impl CopulaTail {
    pub fn ratio_to_log_envelope(&self) -> f64 {
        self.integrand / self.log_envelope
    }

    /// `gap / (1-u)`; tends to 1 when the tails decouple.
    pub fn gap_over_tail(&self) -> f64 {
        self.gap / self.tail
    }

    pub fn gap_to_power_envelope(&self) -> f64 {
        self.gap / self.power_envelope
    }
}

pub fn copula_diagonal_tail(rho: Correlation, u: UnitProb) -> Result<CopulaTail> {
    let tail = u.tail();
    let l = -log(tail);
    if !(l > core::f64::consts::E) {
        return Err(Error::Domain("tail expansion needs log(1/(1-u)) > e"));
    }
    let r = rho.rho();
    let gap = diagonal_gap_unchecked(u.get(), r);
    let h = h_unchecked(tail);
    let p = (1.0 - r) / (1.0 + r);
    Ok(CopulaTail {
        tail,
        l,
        gap,
        integrand: (gap / h) / h,
        log_envelope: 1.0 / (tail * l * l),
        power_envelope: u.get() * pow(tail, p) / pow(l, 2.0 * r / (1.0 + r)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::EULER_GAMMA;
    use core::f64::consts::{LN_2, PI};

    fn up(u: f64) -> UnitProb {
        UnitProb::new(u).unwrap()
    }

    fn corr(r: f64) -> Correlation {
        Correlation::new(r).unwrap()
    }

    #[test]
    fn weight_values() {
        assert!(fabs(variance_weight(up(0.5)) - PI / 2.0) < 1e-15);
        for &u in &[1e-9, 0.01, 0.2, 0.4] {
            let a = variance_weight(up(u));
            let b = variance_weight(up(1.0 - u));
            assert!(fabs(a - b) <= 1e-6 * a, "u={u}");
        }
        let t = 1e-8;
        let l = -log(t);
        let ratio = variance_weight(up(1.0 - t)) * 2.0 * t * l;
        assert!((ratio - 1.0).abs() < 0.2, "{ratio}");
    }

    // mpmath, 30 digits: 2∫_{1/n}^{1/2} u(1-u)/h(u)² du.
    const BICKEL: [(f64, f64); 4] = [(1e4, 3.27001), (1e8, 4.05741), (1e16, 4.80534), (1e32, 5.52995)];

    #[test]
    fn bickel_reference_values() {
        let target = LN_2 + EULER_GAMMA;
        let mut last_err = f64::INFINITY;
        let mut last_value = 0.0;
        for &(n, v) in &BICKEL {
            let r = bickel_integral(n).unwrap();
            assert!(fabs(r.value - v) < 1e-5, "n={n}: {}", r.value);
            assert!(r.abs_error_estimate <= SINGULAR_TOLERANCE.target(r.value));
            let err = fabs(r.value - log(log(n)) - target);
            assert!(err < last_err && r.value > last_value);
            last_err = err;
            last_value = r.value;
        }
        assert!(last_err < 0.1);
        assert!(bickel_integral(7.0).is_err());
    }

    #[test]
    fn bickel_folding_and_tolerance() {
        for &n in &[1e4, 1e16] {
            let folded = bickel_integral(n).unwrap();
            let unfolded = bickel_integral_unfolded(n).unwrap();
            assert!(fabs(folded.value - unfolded.value) <= 1e-10 * folded.value);
            let tight = Tolerance { abs: 0.5e-12, rel: 0.5e-9, max_panels: 4000 };
            let finer = bickel_integral_with(n, tight).unwrap();
            assert!(fabs(finer.value - folded.value) <= folded.abs_error_estimate.max(1e-15));
        }
    }

    #[test]
    fn d1n_below_bickel() {
        for &n in &[1e4, 1e8, 1e16, 1e32] {
            let d = d1n(n, 1.0, 2.0).unwrap();
            let b = bickel_integral(n).unwrap();
            assert!(d.value > 0.0 && d.value < b.value);
        }
        assert!(d1n(1e4, 1.0, 1.0).is_err());
        assert!(d1n(10.0, 5.0, 2.0).is_err());
    }

    #[test]
    fn d1n_reference_values() {
        // mpmath: ∫_{K/n}^{1/2} u(1-u)/h(u)² du with K = ⌊(log n)²⌋.
        for &(n, ratio) in &[(1e4, 0.555_457), (1e8, 0.623_274), (1e16, 0.634_021), (1e32, 0.628_107)] {
            let d = d1n(n, 1.0, 2.0).unwrap();
            assert!(fabs(d.value / log(log(n)) - ratio) < 2e-6, "n={n}: {}", d.value / log(log(n)));
        }
    }

    #[test]
    fn second_moment_diverges_for_every_correlation() {
        for &r in &[-0.8, -0.5, -0.2, 0.0, 0.2, 0.5, 0.8] {
            match limit_second_moment(corr(r)) {
                Err(Error::Divergent { tail_density }) => assert!(tail_density > 1.5, "{r}: {tail_density}"),
                other => panic!("rho={r}: {other:?}"),
            }
            let mut last = 0.0;
            for &delta in &[1e-2, 1e-4, 1e-8, 1e-16, 1e-32, 1e-64] {
                let v = truncated_second_moment(corr(r), delta).unwrap().value;
                assert!(v > last);
                last = v;
            }
        }
    }

    #[test]
    fn independent_case_is_twice_bickel() {
        for &delta in &[1e-3, 1e-10] {
            let t = truncated_second_moment(corr(0.0), delta).unwrap();
            let b = bickel_integral(1.0 / delta).unwrap();
            assert!(fabs(t.value - 2.0 * b.value) <= 1e-9 * t.value);
        }
    }

    #[test]
    fn deficit_splits_the_truncated_moment() {
        for &r in &[-0.5, 0.3, 0.6, 0.8] {
            for &delta in &[1e-3, 1e-6] {
                let t = truncated_second_moment(corr(r), delta).unwrap().value;
                let d = dependence_deficit_truncated(corr(r), delta).unwrap().value;
                let b = bickel_integral(1.0 / delta).unwrap().value;
                assert!(fabs(t + d - 2.0 * b) <= 1e-8 * t, "rho={r} delta={delta}");
            }
            let full = dependence_deficit(corr(r)).unwrap().value;
            assert!(full.is_finite() && full.signum() == r.signum());
        }
        assert_eq!(dependence_deficit(corr(0.0)).unwrap().value, 0.0);
    }

    #[test]
    fn band_moment_is_a_difference_of_truncations() {
        let rho = corr(0.6);
        let band = band_second_moment(rho, 1e-4, 1e-3).unwrap().value;
        let diff = truncated_second_moment(rho, 1e-4).unwrap().value - truncated_second_moment(rho, 1e-3).unwrap().value;
        assert!(fabs(band - diff) < 1e-9);
        assert!(band > 0.0);
        assert!(band_second_moment(rho, 1e-3, 1e-4).is_err());
    }

    #[test]
    fn copula_tail_behaviour() {
        let mut last_ratio = 0.0;
        for j in 4..=10 {
            let u = up(1.0 - pow(10.0, -(j as f64)));
            let d = copula_diagonal_tail(corr(0.5), u).unwrap();
            assert!(d.integrand > 0.0);
            // The log envelope is exceeded by a factor growing like L/2.
            let ratio = d.ratio_to_log_envelope();
            assert!(ratio > last_ratio);
            assert!((ratio / d.l - 0.5).abs() < 0.25, "j={j}: {}", ratio / d.l);
            last_ratio = ratio;
            let neg = copula_diagonal_tail(corr(-0.5), u).unwrap();
            assert!((neg.gap_over_tail() - 1.0).abs() < 1e-3);
            assert!(neg.gap_to_power_envelope() > 1.0);
        }
        assert!(copula_diagonal_tail(corr(0.5), up(0.9)).is_err());
    }
}
