//! Univariate and bivariate Gaussian special functions.
//!
//! All tail-sensitive quantities work from the smaller tail: `1 - Φ(x)` is
//! evaluated as `Φ(-x)` through `erfc`, and quantiles above one half are
//! obtained from the complement `1 - p`, which is exact in binary floating
//! point for `p ≥ 1/2`.

use core::f64::consts::{E, FRAC_1_SQRT_2, PI};

use libm::{asin, erfc, exp, fabs, log, pow, sin, sqrt};

use crate::error::{Error, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_2;
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A probability strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UnitProb(f64);

impl UnitProb {
    pub fn new(u: f64) -> Result<Self> {
        if u > 0.0 && u < 1.0 {
            Ok(UnitProb(u))
        } else {
            Err(Error::Domain("probability must lie strictly inside (0, 1)"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 - u`, exact when `u ≥ 1/2`.
    #[inline]
    pub fn tail(self) -> f64 {
        1.0 - self.0
    }

    pub fn complement(self) -> UnitProb {
        UnitProb(1.0 - self.0)
    }
}

/// Correlation coefficient of a standard bivariate normal pair, `|ρ| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    rho: f64,
    independent: bool,
}

impl Correlation {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && fabs(rho) < 1.0 {
            Ok(Correlation { rho, independent: rho == 0.0 })
        } else {
            Err(Error::Domain("correlation must satisfy |rho| < 1"))
        }
    }

    #[inline]
    pub fn rho(self) -> f64 {
        self.rho
    }

    /// True iff `ρ` is exactly zero.
    #[inline]
    pub fn is_independent(self) -> bool {
        self.independent
    }
}

/// `exp(-x²/2)` with `x²` split into an exactly representable head and a
/// small tail, which keeps full relative accuracy for large `|x|`.
fn exp_neg_half_sq(x: f64) -> f64 {
    let c = 134_217_729.0 * x;
    let hi = c - (c - x);
    let lo = x - hi;
    exp(-0.5 * hi * hi) * exp(-0.5 * lo * (2.0 * hi + lo))
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp_neg_half_sq(x)
}

/// Standard normal cdf, unchecked (NaN propagates).
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// `log(1 - Φ(x))`, finite for every finite `x`.
pub fn normal_log_sf(x: f64) -> f64 {
    if x < 37.0 {
        return log(normal_sf(x));
    }
    // Asymptotic series of the Mills ratio; beyond x = 37 the truncation
    // error is below 1e-17.
    let z = 1.0 / (x * x);
    let series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z * (1.0 - 9.0 * z))));
    -0.5 * x * x - log(x) - LN_SQRT_2PI + log(series)
}

/// Checked standard normal cdf; rejects non-finite input.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain("normal cdf argument must be finite"));
    }
    Ok(normal_cdf(x))
}

// Acklam's rational approximation, relative error below 1.15e-9.
const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const ACKLAM_P_LOW: f64 = 0.024_25;

fn acklam_lower(p: f64) -> f64 {
    if p < ACKLAM_P_LOW {
        let q = sqrt(-2.0 * log(p));
        let c = &ACKLAM_C;
        let d = &ACKLAM_D;
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        let a = &ACKLAM_A;
        let b = &ACKLAM_B;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    }
}

/// Quantile for `p ∈ (0, 1/2]`: rational start plus one Halley step.
fn quantile_lower(p: f64) -> f64 {
    let x = acklam_lower(p);
    let e = normal_cdf(x) - p;
    if e == 0.0 {
        return x;
    }
    // e / φ(x), assembled in log space so that it cannot overflow for
    // subnormal p.
    let u = exp(log(fabs(e)) + 0.5 * x * x + LN_SQRT_2PI).copysign(e);
    x - u / (1.0 + 0.5 * x * u)
}

/// Standard normal quantile, unchecked: NaN outside `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    if p <= 0.5 {
        quantile_lower(p)
    } else {
        -quantile_lower(1.0 - p)
    }
}

/// Standard normal quantile `Φ⁻¹(p)`.
#[inline]
pub fn std_normal_quantile(p: UnitProb) -> f64 {
    normal_quantile(p.get())
}

/// Density-quantile function `h(u) = φ(Φ⁻¹(u))`.
#[inline]
pub fn density_quantile_h(u: UnitProb) -> f64 {
    h_unchecked(u.get())
}

#[inline]
pub(crate) fn h_unchecked(u: f64) -> f64 {
    normal_pdf(normal_quantile(u))
}

/// `ψ(x) = -log(1 - Φ(x))`.
#[inline]
pub fn psi(x: f64) -> f64 {
    -normal_log_sf(x)
}

/// An asymptotic tail expansion evaluated next to its exact counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailExpansion {
    /// `1 - u`.
    pub tail: f64,
    /// `L = log(1/(1-u))`.
    pub l: f64,
    /// `log L`.
    pub ll: f64,
    /// Value of the expansion.
    pub value: f64,
    /// Exact value of the expanded quantity.
    pub exact: f64,
    /// Magnitude of the leading neglected term, relative.
    pub relative_error_order: f64,
}

impl TailExpansion {
    pub fn ratio(&self) -> f64 {
        self.value / self.exact
    }
}

/// `ψ(x) ≈ x²/2 + log x + ½ log 2π`, error `O(1/x²)`.
pub fn psi_expansion(x: f64) -> Result<TailExpansion> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::Domain("psi expansion needs finite x > 1"));
    }
    let l = psi(x);
    Ok(TailExpansion {
        tail: normal_sf(x),
        l,
        ll: log(l),
        value: 0.5 * x * x + log(x) + LN_SQRT_2PI,
        exact: l,
        relative_error_order: 1.0 / (x * x),
    })
}

/// Constant inside the square root of the upper-tail quantile expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileConstant {
    /// `½ log 4π`, i.e. `½ log 2π + ½ log 2`.
    LogFourPi,
    /// `½ log 2π` alone, dropping the `½ log 2` term.
    LogTwoPi,
}

fn tail_logs(u: UnitProb) -> Result<(f64, f64, f64)> {
    let tail = u.tail();
    let l = -log(tail);
    if !(l > E) {
        return Err(Error::Domain("tail expansion requires log(1/(1-u)) > e"));
    }
    Ok((tail, l, log(l)))
}

/// `Φ⁻¹(u) ≈ √(2(L - ½ log L - ½ log 4π))` as `u → 1`.
pub fn quantile_tail_expansion(u: UnitProb) -> Result<TailExpansion> {
    quantile_tail_expansion_with(u, QuantileConstant::LogFourPi)
}

pub fn quantile_tail_expansion_with(u: UnitProb, constant: QuantileConstant) -> Result<TailExpansion> {
    let (tail, l, ll) = tail_logs(u)?;
    let c = match constant {
        QuantileConstant::LogFourPi => 0.5 * log(4.0 * PI),
        QuantileConstant::LogTwoPi => 0.5 * log(2.0 * PI),
    };
    Ok(TailExpansion {
        tail,
        l,
        ll,
        value: sqrt(2.0 * (l - 0.5 * ll - c)),
        exact: -quantile_lower(tail),
        relative_error_order: ll / l,
    })
}

/// `h(u) ≈ √2 (1-u) √L` as `u → 1`.
pub fn h_tail_expansion(u: UnitProb) -> Result<TailExpansion> {
    let (tail, l, ll) = tail_logs(u)?;
    Ok(TailExpansion {
        tail,
        l,
        ll,
        value: core::f64::consts::SQRT_2 * tail * sqrt(l),
        exact: normal_pdf(quantile_lower(tail)),
        relative_error_order: ll / l,
    })
}

/// Exact and asymptotic values of `1 - Φ(a Φ⁻¹(u))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledTail {
    pub exact: f64,
    pub asymptotic: f64,
    pub relative_error_order: f64,
}

impl ScaledTail {
    pub fn ratio(&self) -> f64 {
        self.exact / self.asymptotic
    }
}

pub fn scaled_tail(a: f64, u: UnitProb) -> Result<ScaledTail> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain("scale must be finite and positive"));
    }
    let (tail, l, ll) = tail_logs(u)?;
    let x = -quantile_lower(tail);
    let a2 = a * a;
    let expo = 0.5 * (1.0 - a2);
    Ok(ScaledTail {
        exact: normal_sf(a * x),
        // (4πL)^{(a²-1)/2} (1-u)^{a²} / a
        asymptotic: pow(4.0 * PI * l, -expo) * pow(tail, a2) / a,
        relative_error_order: ll / l,
    })
}

// Gauss–Legendre half-rules (weight, node) on [-1, 1], from Genz's BVND.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];
const GL12: [(f64, f64); 6] = [
    (0.471_753_363_865_117_7e-1, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.176_140_071_391_521_2e-1, -0.993_128_599_185_094_9),
    (0.406_014_298_003_869_4e-1, -0.963_971_927_277_913_8),
    (0.626_720_483_341_090_6e-1, -0.912_234_428_251_325_9),
    (0.832_767_415_767_047_5e-1, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.765_265_211_334_973_3e-1),
];

#[cfg(test)]
pub(crate) fn gauss_legendre_tables() -> [&'static [(f64, f64)]; 3] {
    [&GL6, &GL12, &GL20]
}

/// `P(X > h, Y > k)` for a standard bivariate normal pair with correlation
/// `r`, after Drezner–Wesolowsky with Genz's double-precision refinements.
pub fn bivariate_upper(h: f64, k: f64, r: f64) -> f64 {
    const TWO_PI: f64 = 2.0 * PI;
    let ar = fabs(r);
    let rule: &[(f64, f64)] = if ar < 0.3 {
        &GL6
    } else if ar < 0.75 {
        &GL12
    } else {
        &GL20
    };

    if ar < 0.925 {
        let hk = h * k;
        let hs = 0.5 * (h * h + k * k);
        let asr = asin(r);
        let mut sum = 0.0;
        for &(w, x) in rule {
            for node in [x, -x] {
                let sn = sin(0.5 * asr * (node + 1.0));
                sum += w * exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        let bvn = sum * asr / (2.0 * TWO_PI) + normal_sf(h) * normal_sf(k);
        return bvn.max(0.0);
    }

    let mut k = k;
    let mut hk = h * k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if ar < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = sqrt(a_s);
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * exp(-0.5 * (bs / a_s + hk))
            * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = sqrt(bs);
            bvn -= exp(-0.5 * hk)
                * SQRT_2PI
                * normal_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in rule {
            for node in [x, -x] {
                let xs = {
                    let t = a * (node + 1.0);
                    t * t
                };
                let rs = sqrt(1.0 - xs);
                let asr = -0.5 * (bs / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * exp(asr)
                        * (exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn += normal_sf(h.max(k));
    } else {
        bvn = -bvn + (normal_sf(h) - normal_sf(k)).max(0.0);
    }
    bvn.max(0.0)
}

/// `P(X ≤ x, Y ≤ y)` for a standard bivariate normal pair.
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: Correlation) -> Result<f64> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain("bivariate cdf arguments must be finite"));
    }
    Ok(bivariate_upper(-x, -y, rho.rho()))
}

/// Gaussian copula `C_ρ(u, v) = P(X ≤ Φ⁻¹(u), Y ≤ Φ⁻¹(v))`.
pub fn gaussian_copula(u: UnitProb, v: UnitProb, rho: Correlation) -> f64 {
    copula_unchecked(u.get(), v.get(), rho.rho())
}

pub(crate) fn copula_unchecked(u: f64, v: f64, r: f64) -> f64 {
    if r == 0.0 {
        return u * v;
    }
    bivariate_upper(-normal_quantile(u), -normal_quantile(v), r)
}

/// `u - C_ρ(u, u)`, evaluated on the smaller tail so that the difference
/// never cancels: `u - C_ρ(u,u) = t - P(X > Φ⁻¹(1-t), Y > Φ⁻¹(1-t))` with
/// `t = min(u, 1-u)`.
pub fn copula_diagonal_gap(u: UnitProb, rho: Correlation) -> f64 {
    diagonal_gap_unchecked(u.get(), rho.rho())
}

pub(crate) fn diagonal_gap_unchecked(u: f64, r: f64) -> f64 {
    let t = if u <= 0.5 { u } else { 1.0 - u };
    if r == 0.0 {
        return t * (1.0 - t);
    }
    let x = -quantile_lower(t);
    (t - bivariate_upper(x, x, r)).max(0.0)
}
