//! Univariate and bivariate standard normal primitives.
//!
//! Tail probabilities go through the scaled complementary error function
//! `erfcx(x) = exp(x²)·erfc(x)` so that `Φ`, `log Φ` and differences of `Φ`
//! keep relative accuracy far into the tails, well past the point where
//! `Φ(x)` itself underflows.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// `1/√(2π)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `ln √(2π)`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Prob(f64);

impl Prob {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Prob(value))
        } else {
            Err(Error::validation(
                "probability",
                format!("{value} is not in [0, 1]"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// The logarithm of a probability, in `[-inf, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub fn new(value: f64) -> Result<Self> {
        if value <= 0.0 {
            Ok(LogProb(value))
        } else {
            Err(Error::validation(
                "log-probability",
                format!("{value} is not in [-inf, 0]"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> Prob {
        Prob(self.0.exp().min(1.0))
    }
}

/// Standard normal density. `φ(±∞) = 0`.
#[inline]
pub fn std_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn log_std_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `exp(x²)` with the square split into head and tail so that large
/// arguments do not lose relative accuracy to the rounding of `x²`.
fn exp_square(x: f64) -> f64 {
    let head = x * x;
    let tail = x.mul_add(x, -head);
    head.exp() * (1.0 + tail)
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        if x < -26.6 {
            return f64::INFINITY;
        }
        return 2.0 * exp_square(x) - erfcx(-x);
    }
    if x < 26.0 {
        return exp_square(x) * libm::erfc(x);
    }
    if x.is_infinite() {
        return 0.0;
    }
    // Asymptotic series; at x >= 26 the terms fall below 1e-17 by the seventh.
    let inv_2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= -((2 * k - 1) as f64) * inv_2x2;
        sum += term;
    }
    sum / (x * std::f64::consts::PI.sqrt())
}

/// Standard normal CDF `Φ(x)`. `Φ(-∞) = 0`, `Φ(∞) = 1`.
#[inline]
pub fn std_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`, accurate for large positive `x`.
#[inline]
pub fn std_sf(x: f64) -> f64 {
    std_cdf(-x)
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_std_cdf(x: f64) -> f64 {
    if x < -5.0 {
        if x == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        (0.5 * erfcx(-x * FRAC_1_SQRT_2)).ln() - 0.5 * x * x
    } else if x > 5.0 {
        (-std_sf(x)).ln_1p()
    } else {
        std_cdf(x).ln()
    }
}

#[inline]
pub fn log_std_sf(x: f64) -> f64 {
    log_std_cdf(-x)
}

/// Inverse Mills ratio `φ(x)/Φ(x)`; the derivative of `ln Φ`.
pub fn pdf_over_cdf(x: f64) -> f64 {
    if x < -5.0 {
        if x == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        (2.0 / PI).sqrt() / erfcx(-x * FRAC_1_SQRT_2)
    } else {
        std_pdf(x) / std_cdf(x)
    }
}

// Acklam's rational approximation; relative error about 1.15e-9 before
// refinement.
const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
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

fn acklam_lower(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    let (a, b, c, d) = (ACKLAM_A, ACKLAM_B, ACKLAM_C, ACKLAM_D);
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    }
}

/// Standard normal quantile `Φ⁻¹(q)` for `q ∈ (0, 1)`.
///
/// Computed on the lower half only and mirrored, so `Φ⁻¹(q) = -Φ⁻¹(1-q)`
/// holds up to the rounding of `1 - q`.
pub fn std_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("std_quantile", format!("q = {q} is not in (0, 1)")));
    }
    if q > 0.5 {
        return Ok(-lower_quantile(1.0 - q));
    }
    Ok(lower_quantile(q))
}

fn lower_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p < 1e-300 {
        return quantile_from_log(p.ln());
    }
    let x = acklam_lower(p);
    // One Halley step against the erfc-based CDF.
    let e = std_cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Standard normal quantile from a log-probability: the `x` with
/// `ln Φ(x) = log_q`. Usable far below the smallest representable `q`.
pub fn std_quantile_log(log_q: f64) -> Result<f64> {
    if !(log_q < 0.0) {
        return Err(Error::domain(
            "std_quantile_log",
            format!("log q = {log_q} is not in (-inf, 0)"),
        ));
    }
    if log_q == f64::NEG_INFINITY {
        return Err(Error::domain("std_quantile_log", "log q = -inf"));
    }
    if log_q > -std::f64::consts::LN_2 {
        // q > 1/2: work with the complement 1 - q = -expm1(log q).
        return Ok(-lower_quantile(-log_q.exp_m1()));
    }
    if log_q > -690.0 {
        return Ok(lower_quantile(log_q.exp()));
    }
    Ok(quantile_from_log(log_q))
}

fn quantile_from_log(log_q: f64) -> f64 {
    // ln Φ(x) ≈ -x²/2 - ln|x| - ln√(2π) in the far lower tail.
    let t = -2.0 * log_q;
    let mut x = -(t - t.ln() - 2.0 * LN_SQRT_2PI).max(1.0).sqrt();
    for _ in 0..50 {
        let step = (log_std_cdf(x) - log_q) / pdf_over_cdf(x);
        x -= step;
        if step.abs() <= 1e-15 * x.abs() {
            break;
        }
    }
    x
}

/// `ln(Φ(zh) - Φ(zl))` for standardized endpoints `zl < zh` (either may be
/// infinite); `-inf` when `zl ≥ zh`. Same-sign tails are formed from `erfcx`
/// ratios so nothing underflows; straddling intervals use `erf`, which has
/// no cancellation there.
pub fn log_std_mass(zl: f64, zh: f64) -> f64 {
    if !(zl < zh) {
        return f64::NEG_INFINITY;
    }
    if zl >= 0.0 {
        upper_tail_log_mass(zl, zh)
    } else if zh <= 0.0 {
        upper_tail_log_mass(-zh, -zl)
    } else {
        (0.5 * (libm::erf(zh * FRAC_1_SQRT_2) - libm::erf(zl * FRAC_1_SQRT_2))).ln()
    }
}

fn upper_tail_log_mass(zl: f64, zh: f64) -> f64 {
    let exl = erfcx(zl * FRAC_1_SQRT_2);
    let head = (0.5 * exl).ln() - 0.5 * zl * zl;
    if zh == f64::INFINITY {
        return head;
    }
    let ratio = erfcx(zh * FRAC_1_SQRT_2) / exl * (-0.5 * (zh - zl) * (zh + zl)).exp();
    head + (-ratio).ln_1p()
}

fn check_interval(func: &'static str, lo: f64, hi: f64, mean: f64, sd: f64) -> Result<()> {
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::domain(func, format!("sd = {sd} must be positive and finite")));
    }
    if !mean.is_finite() {
        return Err(Error::domain(func, format!("mean = {mean} must be finite")));
    }
    if !(lo < hi) {
        return Err(Error::domain(func, format!("need lo < hi, got ({lo}, {hi})")));
    }
    Ok(())
}

/// `ln P(lo < Y < hi)` for `Y ~ N(mean, sd²)`.
pub fn log_interval_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> Result<LogProb> {
    check_interval("log_interval_mass", lo, hi, mean, sd)?;
    let v = log_std_mass((lo - mean) / sd, (hi - mean) / sd);
    Ok(LogProb(v.min(0.0)))
}

/// `Φ((hi-mean)/sd) - Φ((lo-mean)/sd)` without catastrophic cancellation.
pub fn cdf_interval_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> Result<Prob> {
    Ok(log_interval_mass(lo, hi, mean, sd)?.exp())
}

// Gauss-Legendre half-rules (weight, node) with 6, 12 and 20 points, as used
// by Genz's BVND.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];
const GL12: [(f64, f64); 6] = [
    (0.471_753_363_865_117_7e-1, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
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
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.765_265_211_334_973_3e-1),
];

/// Upper orthant probability `P(Z1 > h, Z2 > k)` (Genz's BVND, based on
/// Drezner and Wesolowsky). Expects finite `h`, `k`.
///
/// The `|r| > 0.925` branch negates only `k` for negative correlation;
/// negating both is a known transliteration bug.
fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let ar = r.abs();
    let quad: &[(f64, f64)] = if ar < 0.3 {
        &GL6
    } else if ar < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let two_pi = 2.0 * PI;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if ar < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        for &(w, x) in quad {
            for sgn in [-1.0, 1.0] {
                let sn = (0.5 * asr * (sgn * x + 1.0)).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / (2.0 * two_pi);
        bvn += std_cdf(-h) * std_cdf(-k);
        return bvn;
    }

    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if ar < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * SQRT_2PI
                * std_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in quad {
            for sgn in [-1.0, 1.0] {
                let xs = {
                    let t = a * (sgn * x + 1.0);
                    t * t
                };
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_s / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn += std_cdf(-h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += std_cdf(k) - std_cdf(h);
            } else {
                bvn += std_cdf(-h) - std_cdf(-k);
            }
        }
    }
    bvn
}

/// `P(Z1 ≤ h, Z2 ≤ k)` for a standard bivariate normal with correlation
/// `corr`. Infinite limits are allowed.
pub fn bvn_cdf(h: f64, k: f64, corr: f64) -> Result<f64> {
    if !(corr.abs() <= 1.0) {
        return Err(Error::domain("bvn_cdf", format!("|corr| = {} exceeds 1", corr.abs())));
    }
    if h.is_nan() || k.is_nan() {
        return Err(Error::domain("bvn_cdf", "NaN limit"));
    }
    Ok(bvn_cdf_unchecked(h, k, corr))
}

pub(crate) fn bvn_cdf_unchecked(h: f64, k: f64, corr: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return std_cdf(k);
    }
    if k == f64::INFINITY {
        return std_cdf(h);
    }
    bvnd(-h, -k, corr).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_values() {
        assert_eq!(std_pdf(0.0), 0.398_942_280_401_432_7);
        assert_eq!(std_pdf(f64::INFINITY), 0.0);
        assert_eq!(std_pdf(f64::NEG_INFINITY), 0.0);
        let phi1 = (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert!((std_pdf(1.0) - phi1).abs() < 1e-17);
        // mpmath: npdf(1)
        assert!((std_pdf(1.0) - 0.241_970_724_519_143_37).abs() < 1e-17);
    }

    #[test]
    fn cdf_values() {
        assert_eq!(std_cdf(0.0), 0.5);
        assert_eq!(std_cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(std_cdf(f64::INFINITY), 1.0);
        // mpmath (40 digits): 0.974999999999999986234748637705...
        assert!((std_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        // Φ(-38) = 2.885428360068784e-316 (subnormal, but positive)
        assert!(std_cdf(-38.0) > 0.0);
    }

    #[test]
    fn log_cdf_deep_tail() {
        // mpmath: log Φ(-40), log Φ(-100)
        assert!((log_std_cdf(-40.0) + 804.608_442_013_753_8).abs() < 1e-11);
        assert!((log_std_cdf(-100.0) + 5005.524_208_694_205).abs() < 1e-10);
        assert!((log_std_cdf(-4.0) - std_cdf(-4.0).ln()).abs() < 1e-14);
        assert!((log_std_cdf(-6.0) - std_cdf(-6.0).ln()).abs() < 1e-12);
        assert!(log_std_cdf(10.0) < 0.0);
    }

    #[test]
    fn erfcx_is_continuous_across_branches() {
        for &x in &[26.0f64, 5.0] {
            let lo = erfcx(x - 1e-12);
            let hi = erfcx(x + 1e-12);
            assert!(((lo - hi) / hi).abs() < 1e-12, "x={x}: {lo} vs {hi}");
        }
        assert_eq!(erfcx(0.0), 1.0);
        assert!((erfcx(-1.0) - 5.008_980_080_762_283).abs() < 1e-14);
    }

    #[test]
    fn quantile_values() {
        assert_eq!(std_quantile(0.5).unwrap(), 0.0);
        assert!((std_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-14);
        assert!(std_quantile(0.0).is_err());
        assert!(std_quantile(1.0).is_err());
        assert!(std_quantile(f64::NAN).is_err());
        assert!(std_quantile(-0.1).is_err());
    }

    #[test]
    fn quantile_round_trip_log_grid() {
        let mut q: f64 = 1e-12;
        while q < 0.5 {
            for p in [q, 1.0 - q] {
                let x = std_quantile(p).unwrap();
                assert!((std_cdf(x) - p).abs() <= 1e-13, "p={p}");
                assert!((std_cdf(x) - p).abs() <= 1e-14, "p={p}");
            }
            // 1 - q is rounded; the mirror pair is (1 - q, 1 - (1 - q)).
            let upper = 1.0 - q;
            let sym = std_quantile(1.0 - upper).unwrap() + std_quantile(upper).unwrap();
            assert!(sym.abs() <= 1e-13, "q={q} sym={sym}");
            q *= 1.37;
        }
    }

    #[test]
    fn quantile_from_log_matches_deep_tail() {
        for &x in &[-40.0, -100.0, -7.0, -2.0, 0.3, 3.0] {
            let lq = log_std_cdf(x);
            let back = std_quantile_log(lq).unwrap();
            assert!((back - x).abs() < 1e-9 * x.abs().max(1.0), "x={x} back={back}");
        }
        let tiny = std_quantile(1e-310).unwrap();
        assert!((log_std_cdf(tiny) - 1e-310f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn interval_mass_values() {
        let inf = f64::INFINITY;
        assert_eq!(cdf_interval_mass(-inf, inf, 0.0, 1.0).unwrap().value(), 1.0);
        let m = cdf_interval_mass(-1.0, 1.0, 0.0, 1.0).unwrap().value();
        assert!((m - 0.682_689_492_137_085_9).abs() < 1e-15);
        // Naive Φ(-10) - Φ(-11) underflows in relative terms; the exact value
        // from mpmath is 7.619661958203076e-24.
        let m = cdf_interval_mass(10.0, 11.0, 0.0, 1.0).unwrap().value();
        assert!(((m - 7.619_661_958_203_076e-24) / 7.619_661_958_203_076e-24).abs() < 1e-12);
        let m = cdf_interval_mass(-11.0, -10.0, 0.0, 1.0).unwrap().value();
        assert!(((m - 7.619_661_958_203_076e-24) / 7.619_661_958_203_076e-24).abs() < 1e-12);
        // mpmath: Φ(-37) - Φ(-38) = 5.725571222524577e-300
        let m = cdf_interval_mass(37.0, 38.0, 0.0, 1.0).unwrap().value();
        assert!(((m - 5.725_571_222_524_577e-300) / 5.725_571_222_524_577e-300).abs() < 1e-11);
        // mpmath: ln(Φ(-50) - Φ(-51)) = -1254.8313611394199
        let lm = log_interval_mass(50.0, 51.0, 0.0, 1.0).unwrap().value();
        assert!((lm + 1254.831_361_139_42).abs() < 1e-9);
    }

    #[test]
    fn interval_mass_errors() {
        assert!(cdf_interval_mass(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(cdf_interval_mass(0.0, 1.0, 0.0, -1.0).is_err());
        assert!(cdf_interval_mass(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(cdf_interval_mass(2.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn interval_mass_strictly_positive() {
        let mut lo = -38.0;
        while lo < 38.0 {
            for w in [1e-6, 0.01, 1.0, 10.0] {
                let m = cdf_interval_mass(lo, lo + w, 0.0, 1.0).unwrap().value();
                assert!(m > 0.0, "lo={lo} w={w}");
            }
            lo += 0.37;
        }
    }

    #[test]
    fn bvn_reference_values() {
        // Independent high-precision values: mpmath quadrature of
        // ∫_{-∞}^h φ(z) Φ((k - r z)/√(1-r²)) dz at 40 digits.
        let cases = [
            (0.0, 0.0, 0.5, 0.333_333_333_333_333_3),
            (1.3, -0.7, 0.3, 0.232_262_999_985_674_2),
            (-2.1, 0.4, -0.6, 0.001_697_875_729_888_94),
            (0.5, 1.5, 0.95, 0.691_446_170_081_482_5),
            (-1.0, -1.0, -0.95, 2.449_195_138_492_163e-12),
            (2.0, -3.0, -0.99, 2.563_700_514_389_375e-16),
            (-3.0, -3.0, 0.999, 0.001_270_881_053_610_526_6),
            (1.0, 2.0, -0.3, 0.819_438_930_562_837),
            (-0.3, 0.2, FRAC_1_SQRT_2, 0.332_907_594_667_810_55),
            (-5.0, -6.0, 0.8, 4.453_806_238_358_185e-10),
        ];
        for (h, k, r, want) in cases {
            let got = bvn_cdf(h, k, r).unwrap();
            assert!((got - want).abs() <= 5e-14, "bvn({h},{k},{r}) = {got}, want {want}");
        }
    }

    #[test]
    fn bvn_special_cases() {
        let inf = f64::INFINITY;
        for &(k, r) in &[(0.3, 0.2), (-1.2, 0.95), (2.0, -0.5)] {
            assert!((bvn_cdf(inf, k, r).unwrap() - std_cdf(k)).abs() < 1e-16);
            assert_eq!(bvn_cdf(-inf, k, r).unwrap(), 0.0);
        }
        for &(h, k) in &[(0.3, -0.4), (1.5, 2.5), (-2.0, -0.1)] {
            let got = bvn_cdf(h, k, 0.0).unwrap();
            assert!((got - std_cdf(h) * std_cdf(k)).abs() < 1e-16);
        }
        let sheppard = 0.25 + 0.5f64.asin() / (2.0 * PI);
        assert!((bvn_cdf(0.0, 0.0, 0.5).unwrap() - sheppard).abs() < 5e-14);
        assert!(bvn_cdf(0.0, 0.0, 1.01).is_err());
        assert!(bvn_cdf(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn bvn_reflection_identity() {
        // Φ(h) - bvn(h, -k, -r) = bvn(h, k, r)
        let mut s = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let h = 8.0 * next() - 4.0;
            let k = 8.0 * next() - 4.0;
            let r = 1.998 * next() - 0.999;
            let lhs = std_cdf(h) - bvn_cdf(h, -k, -r).unwrap();
            let rhs = bvn_cdf(h, k, r).unwrap();
            assert!((lhs - rhs).abs() <= 1e-13, "h={h} k={k} r={r}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn bvn_monotone_on_grid() {
        let grid: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64).collect();
        let rs: Vec<f64> = (0..21).map(|i| -0.99 + 0.099 * i as f64).collect();
        for &r in &rs {
            for &h in &grid {
                let mut prev = 0.0;
                for &k in &grid {
                    let v = bvn_cdf(h, k, r).unwrap();
                    assert!(v >= prev - 1e-15);
                    prev = v;
                }
            }
        }
        for &h in &grid {
            for &k in &grid {
                let mut prev = 0.0;
                for &r in &rs {
                    let v = bvn_cdf(h, k, r).unwrap();
                    assert!(v >= prev - 1e-15, "h={h} k={k} r={r}");
                    prev = v;
                }
            }
        }
    }
}
