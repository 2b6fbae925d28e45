//! The law of `X | X + U ∈ T` with `X ~ N(μ, σ²)` and independent
//! `U ~ N(0, τ²)`.
//!
//! Writing `V = X + U`, the pair `(X, V)` is bivariate normal with
//! correlation `σ/√(σ²+τ²)`, and `X | V = v ~ N(ρ²μ + (1-ρ²)v, σ²ρ²)` with
//! `ρ² = τ²/(σ²+τ²)`. The CDF is evaluated as
//!
//! ```text
//! F_μ(x) = Σ_i P(X ≤ x, a_i < V < b_i) / Σ_i P(a_i < V < b_i)
//! ```
//!
//! through the bivariate normal CDF when the selection probability is not
//! small. When it is, each interval contributes its conditional expectation
//! `E[G_μ(x, V) | V ∈ (a_i, b_i)]` computed by quadrature on rescaled
//! weights, combined with log-space interval masses, so nothing underflows
//! even when `P(V ∈ T)` is far below the smallest double.
//!
//! `τ² = 0` is accepted for the CDF and density (the plain truncated normal),
//! but not by the operations that need the conditional law of `X` given `V`.

use rand::Rng;
use rand_distr::{Distribution, OpenClosed01, StandardNormal};

use crate::error::{Error, Result};
use crate::quadrature::integrate_vec;
use crate::scalar_normal::{
    bvn_cdf_unchecked, log_std_cdf, log_std_mass, log_std_pdf, std_cdf, std_pdf,
    std_quantile, std_quantile_log, std_sf,
};
use crate::trunc_set::TruncationSet;

/// Below this selection probability the bivariate-normal route loses too
/// much of its absolute accuracy to the division by `P(V ∈ T)`.
const BVN_ROUTE_MIN_SELECTION: f64 = 1e-3;
/// Below this CDF value the bivariate-normal route, whose error is absolute,
/// gives way to quadrature, whose error is relative.
const BVN_ROUTE_MIN_VALUE: f64 = 1e-5;
const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_PANELS: usize = 400;
/// Half-width, in standard units of `V`, of the window kept around the
/// mode of a truncated normal weight; the weight outside is below e^-800.
const WEIGHT_WINDOW: f64 = 40.0;

/// `ln Σ exp(v_i)`
pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.into_iter().collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + vals.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// The `μ`-free part of the law: `(σ², τ², T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondNormalFamily {
    sigma2: f64,
    tau2: f64,
    trunc: TruncationSet,
    reflected: TruncationSet,
    sigma: f64,
    tau: f64,
    total_sd: f64,
}

/// `(μ, σ², τ², T)`: a fully specified law of `X | X + U ∈ T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondNormalSpec {
    pub mu: f64,
    family: CondNormalFamily,
}

impl CondNormalFamily {
    pub fn new(sigma2: f64, tau2: f64, trunc: TruncationSet) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::validation("sigma2", format!("{sigma2} must be positive and finite")));
        }
        if !(tau2 >= 0.0 && tau2.is_finite()) {
            return Err(Error::validation("tau2", format!("{tau2} must be non-negative and finite")));
        }
        let reflected = trunc.reflect();
        Ok(CondNormalFamily {
            sigma2,
            tau2,
            reflected,
            trunc,
            sigma: sigma2.sqrt(),
            tau: tau2.sqrt(),
            total_sd: (sigma2 + tau2).sqrt(),
        })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn trunc(&self) -> &TruncationSet {
        &self.trunc
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ρ² = τ²/(σ²+τ²)`
    pub fn rho2(&self) -> f64 {
        self.tau2 / (self.sigma2 + self.tau2)
    }

    pub fn rho(&self) -> f64 {
        self.tau / self.total_sd
    }

    /// Standard deviation of `V = X + U`.
    pub fn total_sd(&self) -> f64 {
        self.total_sd
    }

    pub fn at(&self, mu: f64) -> CondNormalSpec {
        CondNormalSpec {
            mu,
            family: self.clone(),
        }
    }

    fn require_randomized(&self, op: &str) -> Result<()> {
        if self.tau2 > 0.0 {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{op} requires tau2 > 0")))
        }
    }

    /// Per-interval `ln P(a_i < V < b_i)`; `V ~ N(μ, σ²+τ²)`.
    fn log_masses(&self, intervals: &[(f64, f64)], mu: f64, sd: f64) -> Vec<f64> {
        intervals
            .iter()
            .map(|&(a, b)| log_std_mass((a - mu) / sd, (b - mu) / sd))
            .collect()
    }

    /// `ln P(X + U ∈ T)`
    pub fn log_selection_prob(&self, mu: f64) -> f64 {
        log_sum_exp(self.log_masses(self.trunc.intervals(), mu, self.total_sd))
    }

    /// `P(X + U ∈ T)`
    pub fn selection_prob(&self, mu: f64) -> f64 {
        self.log_selection_prob(mu).exp()
    }

    /// Conditional CDF `F_μ(x)`.
    pub fn cdf(&self, mu: f64, x: f64) -> f64 {
        self.cdf_coarse(mu, x, 0.0)
    }

    /// `1 - F_μ(x)`, evaluated on the mirrored problem so that it keeps
    /// its accuracy when small.
    pub fn sf(&self, mu: f64, x: f64) -> f64 {
        self.sf_coarse(mu, x, 0.0)
    }

    /// `F_μ(x)`, resolved only as far as comparisons against levels in
    /// `[floor, 1 - floor]` need. Inside that band the value is as accurate
    /// as [`CondNormalFamily::cdf`]; outside it the value is only
    /// guaranteed to lie on the correct side, which saves the slow
    /// high-relative-accuracy route in root searches.
    pub fn cdf_coarse(&self, mu: f64, x: f64, floor: f64) -> f64 {
        let value = self.cdf_on(self.trunc.intervals(), mu, x, floor);
        if value > 1.0 - BVN_ROUTE_MIN_VALUE && value <= 1.0 - floor {
            1.0 - self.cdf_on(self.reflected.intervals(), -mu, -x, floor)
        } else {
            value
        }
    }

    /// `1 - F_μ(x)` with the same contract as [`CondNormalFamily::cdf_coarse`].
    pub fn sf_coarse(&self, mu: f64, x: f64, floor: f64) -> f64 {
        let value = self.cdf_on(self.reflected.intervals(), -mu, -x, floor);
        if value > 1.0 - BVN_ROUTE_MIN_VALUE && value <= 1.0 - floor {
            1.0 - self.cdf_on(self.trunc.intervals(), mu, x, floor)
        } else {
            value
        }
    }

    fn cdf_on(&self, intervals: &[(f64, f64)], mu: f64, x: f64, floor: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        if self.tau2 == 0.0 {
            return self.truncated_normal_cdf(intervals, mu, x);
        }
        let log_masses = self.log_masses(intervals, mu, self.total_sd);
        let log_sel = log_sum_exp(log_masses.iter().copied());
        if log_sel >= BVN_ROUTE_MIN_SELECTION.ln() {
            let value = self.bvn_route(intervals, mu, x, log_sel.exp());
            // Below `floor` an absolute error of ~1e-12 cannot change a
            // comparison, so the value stands.
            if value >= BVN_ROUTE_MIN_VALUE || value < 0.5 * floor {
                return value;
            }
        }
        self.tail_route(intervals, &log_masses, log_sel, mu, x)
    }

    /// `F_μ(x)` through the bivariate normal CDF alone. Accurate to about
    /// `1e-15 / P(V ∈ T)` in absolute terms; [`CondNormalFamily::cdf`]
    /// switches routes when that bound gets loose.
    pub fn cdf_bivariate(&self, mu: f64, x: f64) -> f64 {
        if self.tau2 == 0.0 {
            return self.truncated_normal_cdf(self.trunc.intervals(), mu, x);
        }
        self.bvn_route(self.trunc.intervals(), mu, x, self.selection_prob(mu))
    }

    fn bvn_route(&self, intervals: &[(f64, f64)], mu: f64, x: f64, sel: f64) -> f64 {
        let h = (x - mu) / self.sigma;
        let corr = self.sigma / self.total_sd;
        let mut num = 0.0;
        for &(a, b) in intervals {
            let ka = (a - mu) / self.total_sd;
            let kb = (b - mu) / self.total_sd;
            // P(X ≤ x, ka < V' < kb) as a difference of lower orthants, or of
            // P(X ≤ x, V' > k) when the interval sits in the upper half, so
            // that the two terms are small rather than both close to Φ(h).
            num += if ka + kb > 0.0 {
                bvn_cdf_unchecked(h, -ka, -corr) - bvn_cdf_unchecked(h, -kb, -corr)
            } else {
                bvn_cdf_unchecked(h, kb, corr) - bvn_cdf_unchecked(h, ka, corr)
            };
        }
        (num / sel).clamp(0.0, 1.0)
    }

    fn tail_route(
        &self,
        intervals: &[(f64, f64)],
        log_masses: &[f64],
        log_sel: f64,
        mu: f64,
        x: f64,
    ) -> f64 {
        let rho = self.rho();
        let c = (x - mu) / (self.sigma * rho);
        let d = self.sigma / self.tau;
        let mut total = 0.0;
        for (&(a, b), &lm) in intervals.iter().zip(log_masses) {
            let weight = (lm - log_sel).exp();
            if weight == 0.0 {
                continue;
            }
            let za = (a - mu) / self.total_sd;
            let zb = (b - mu) / self.total_sd;
            total += weight * conditional_normal_cdf_mean(za, zb, c, d);
        }
        total.clamp(0.0, 1.0)
    }

    fn truncated_normal_cdf(&self, intervals: &[(f64, f64)], mu: f64, x: f64) -> f64 {
        let sd = self.sigma;
        let log_masses = self.log_masses(intervals, mu, sd);
        let log_sel = log_sum_exp(log_masses.iter().copied());
        let below = intervals.iter().filter(|&&(a, _)| a < x).map(|&(a, b)| {
            log_std_mass((a - mu) / sd, (b.min(x) - mu) / sd)
        });
        let log_below = log_sum_exp(below);
        (log_below - log_sel).exp().clamp(0.0, 1.0)
    }

    /// `ln f_μ(x)`
    pub fn log_pdf(&self, mu: f64, x: f64) -> f64 {
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        let intervals = self.trunc.intervals();
        let log_sel = self.log_selection_prob_sd(mu, if self.tau2 == 0.0 { self.sigma } else { self.total_sd });
        let base = log_std_pdf((x - mu) / self.sigma) - self.sigma.ln();
        if self.tau2 == 0.0 {
            return if self.trunc.contains(x) {
                base - log_sel
            } else {
                f64::NEG_INFINITY
            };
        }
        let log_window = self.log_window_mass(intervals, x);
        base + log_window - log_sel
    }

    fn log_selection_prob_sd(&self, mu: f64, sd: f64) -> f64 {
        log_sum_exp(self.log_masses(self.trunc.intervals(), mu, sd))
    }

    /// `ln Σ_i [Φ((b_i-x)/τ) - Φ((a_i-x)/τ)]`
    fn log_window_mass(&self, intervals: &[(f64, f64)], x: f64) -> f64 {
        log_sum_exp(
            intervals
                .iter()
                .map(|&(a, b)| log_std_mass((a - x) / self.tau, (b - x) / self.tau)),
        )
    }

    /// Conditional density `f_μ(x)`.
    pub fn pdf(&self, mu: f64, x: f64) -> f64 {
        self.log_pdf(mu, x).exp()
    }

    /// Mean and variance of `X | X + U = v`.
    pub fn cond_given_sum(&self, mu: f64, v: f64) -> Result<(f64, f64)> {
        self.require_randomized("cond_given_sum")?;
        let rho2 = self.rho2();
        Ok((rho2 * mu + (1.0 - rho2) * v, self.sigma2 * rho2))
    }

    /// `G_μ(x, v) = Φ((x - (ρ²μ + (1-ρ²)v))/(σρ))`, the CDF of
    /// `X | X + U = v`. `G(x, -∞) = 1`, `G(x, ∞) = 0`.
    pub fn g_cdf(&self, mu: f64, x: f64, v: f64) -> Result<f64> {
        self.require_randomized("g_cdf")?;
        Ok(std_cdf(self.g_arg(mu, x, v)))
    }

    fn g_arg(&self, mu: f64, x: f64, v: f64) -> f64 {
        let rho2 = self.rho2();
        (x - (rho2 * mu + (1.0 - rho2) * v)) / (self.sigma * self.rho())
    }

    /// `h(v) = φ((v-μ)/s)/s / P(V ∈ T)` with `s² = σ²+τ²`; zero at `±∞`.
    pub fn h(&self, mu: f64, v: f64) -> f64 {
        if !v.is_finite() {
            return 0.0;
        }
        let s = self.total_sd;
        (log_std_pdf((v - mu) / s) - s.ln() - self.log_selection_prob(mu)).exp()
    }

    /// `l(x, v) = φ((v-x)/τ)/τ / Σ_i [Φ((b_i-x)/τ) - Φ((a_i-x)/τ)]`; zero at
    /// `v = ±∞`.
    pub fn l(&self, x: f64, v: f64) -> Result<f64> {
        self.require_randomized("l")?;
        if !v.is_finite() {
            return Ok(0.0);
        }
        let t = self.tau;
        Ok((log_std_pdf((v - x) / t) - t.ln() - self.log_window_mass(self.trunc.intervals(), x)).exp())
    }

    /// `Σ_i h(b_i) - h(a_i)`
    fn h_sum(&self, mu: f64) -> f64 {
        self.trunc
            .intervals()
            .iter()
            .map(|&(a, b)| self.h(mu, b) - self.h(mu, a))
            .sum()
    }

    /// `∂f_μ(x)/∂μ = f_μ(x)·[(x-μ)/σ² + Σ_i h(b_i) - h(a_i)]`
    pub fn dpdf_dmu(&self, mu: f64, x: f64) -> Result<f64> {
        self.require_randomized("dpdf_dmu")?;
        let f = self.pdf(mu, x);
        Ok(f * ((x - mu) / self.sigma2 + self.h_sum(mu)))
    }

    /// `∂f_μ(x)/∂x = -f_μ(x)·[(x-μ)/σ² + Σ_i l(x,b_i) - l(x,a_i)]`
    pub fn dpdf_dx(&self, mu: f64, x: f64) -> Result<f64> {
        self.require_randomized("dpdf_dx")?;
        let f = self.pdf(mu, x);
        let mut l_sum = 0.0;
        for &(a, b) in self.trunc.intervals() {
            l_sum += self.l(x, b)? - self.l(x, a)?;
        }
        Ok(-f * ((x - mu) / self.sigma2 + l_sum))
    }

    /// `∂G_μ(x, v)/∂x` through the identity `f_μ(x)·l(x, v)/h(v)`.
    pub fn dg_dx(&self, mu: f64, x: f64, v: f64) -> Result<f64> {
        self.require_randomized("dg_dx")?;
        let s = self.total_sd;
        let t = self.tau;
        // Assemble in log space: the selection and window masses cancel.
        let log_val = self.log_pdf(mu, x) + log_std_pdf((v - x) / t) - t.ln()
            - self.log_window_mass(self.trunc.intervals(), x)
            - (log_std_pdf((v - mu) / s) - s.ln() - self.log_selection_prob(mu));
        Ok(log_val.exp())
    }

    /// Closed form of `∫_{-∞}^x (u-μ)/σ² f_μ(u) du`:
    /// `-f_μ(x) - Σ_i [h(b_i) G_μ(x,b_i) - h(a_i) G_μ(x,a_i)]`.
    pub fn owen_integral(&self, mu: f64, x: f64) -> Result<f64> {
        self.require_randomized("owen_integral")?;
        let mut acc = -self.pdf(mu, x);
        for &(a, b) in self.trunc.intervals() {
            acc -= self.h(mu, b) * self.g_at(mu, x, b) - self.h(mu, a) * self.g_at(mu, x, a);
        }
        Ok(acc)
    }

    fn g_at(&self, mu: f64, x: f64, v: f64) -> f64 {
        if v == f64::INFINITY {
            0.0
        } else if v == f64::NEG_INFINITY {
            1.0
        } else {
            std_cdf(self.g_arg(mu, x, v))
        }
    }

    /// `1 - G_μ(x, v)` without cancellation.
    fn g_sf_at(&self, mu: f64, x: f64, v: f64) -> f64 {
        if v == f64::INFINITY {
            1.0
        } else if v == f64::NEG_INFINITY {
            0.0
        } else {
            std_sf(self.g_arg(mu, x, v))
        }
    }

    /// `B_μ(x) = (ρ/σ)φ(Φ⁻¹(F)) - f + Σ_i [h(b_i)(F - G(x,b_i)) - h(a_i)(F - G(x,a_i))]`.
    /// Negative everywhere; tends to 0 as `|x| → ∞`.
    pub fn b_gap(&self, mu: f64, x: f64) -> Result<f64> {
        self.require_randomized("b_gap")?;
        let cdf = self.cdf(mu, x);
        let upper = cdf > 0.5;
        // Work with whichever of F and 1-F is small.
        let tail = if upper { self.sf(mu, x) } else { cdf };
        let phi_at_quantile = if tail > 0.0 {
            std_pdf(std_quantile(tail.min(0.5))?)
        } else {
            0.0
        };
        let mut acc = self.rho() / self.sigma * phi_at_quantile - self.pdf(mu, x);
        for &(a, b) in self.trunc.intervals() {
            // F - G = (1 - G) - (1 - F) on the upper side.
            let diff = |v: f64| {
                if upper {
                    self.g_sf_at(mu, x, v) - tail
                } else {
                    cdf - self.g_at(mu, x, v)
                }
            };
            acc += self.h(mu, b) * diff(b) - self.h(mu, a) * diff(a);
        }
        Ok(acc)
    }

    /// `∂Φ⁻¹(F_μ(x))/∂x = f_μ(x) / φ(Φ⁻¹(F_μ(x)))`.
    pub fn dquantile_dx(&self, mu: f64, x: f64) -> Result<f64> {
        let cdf = self.cdf(mu, x);
        let tail = if cdf > 0.5 { self.sf(mu, x) } else { cdf };
        if tail <= 0.0 {
            return Err(Error::NonConvergence(format!(
                "F_mu(x) is numerically 0 or 1 at mu={mu}, x={x}"
            )));
        }
        Ok(self.pdf(mu, x) / std_pdf(std_quantile(tail)?))
    }

    /// One exact draw of `(X, V)` given `V ∈ T`: `V` from the truncated
    /// normal by inversion, then `X | V` from the conditional normal.
    pub fn sample_pair<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> Result<(f64, f64)> {
        self.require_randomized("sample")?;
        let v = self.sample_sum(mu, rng);
        let (mean, var) = self.cond_given_sum(mu, v)?;
        let z: f64 = StandardNormal.sample(rng);
        Ok((mean + var.sqrt() * z, v))
    }

    pub fn sample<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> Result<f64> {
        Ok(self.sample_pair(mu, rng)?.0)
    }

    /// Draw `V ~ N(μ, σ²+τ²)` restricted to `T`.
    fn sample_sum<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> f64 {
        let s = self.total_sd;
        let intervals = self.trunc.intervals();
        let log_masses = self.log_masses(intervals, mu, s);
        let log_sel = log_sum_exp(log_masses.iter().copied());
        loop {
            let pick: f64 = rng.sample(OpenClosed01);
            let mut acc = 0.0;
            let mut idx = intervals.len() - 1;
            for (i, lm) in log_masses.iter().enumerate() {
                acc += (lm - log_sel).exp();
                if pick <= acc {
                    idx = i;
                    break;
                }
            }
            let (a, b) = intervals[idx];
            let u: f64 = rng.sample(OpenClosed01);
            let z = truncated_std_normal_inverse((a - mu) / s, (b - mu) / s, u);
            let v = mu + s * z;
            // Rounding can land on an endpoint; redraw in that case.
            if a < v && v < b {
                return v;
            }
        }
    }
}

/// Inverse CDF of the standard normal truncated to `(za, zb)` at `u ∈ (0,1]`.
fn truncated_std_normal_inverse(za: f64, zb: f64, u: f64) -> f64 {
    if za >= 0.0 {
        upper_tail_inverse(za, zb, u)
    } else if zb <= 0.0 {
        -upper_tail_inverse(-zb, -za, 1.0 - u)
    } else {
        let pa = std_cdf(za);
        let pb = std_cdf(zb);
        let p = (pa + u * (pb - pa)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        std_quantile(p).unwrap_or(if p < 0.5 { za } else { zb })
    }
}

/// Upper-tail inversion: solve `Q(z) = Q(za) - u·(Q(za) - Q(zb))` for the
/// survival function `Q`, in log space.
fn upper_tail_inverse(za: f64, zb: f64, u: f64) -> f64 {
    let log_qa = log_std_cdf(-za);
    let ratio = if zb == f64::INFINITY {
        0.0
    } else {
        (log_std_cdf(-zb) - log_qa).exp()
    };
    let log_target = log_qa + (-u * (1.0 - ratio)).ln_1p();
    if log_target >= 0.0 {
        return za;
    }
    match std_quantile_log(log_target) {
        Ok(q) => -q,
        Err(_) => za,
    }
}

/// `E[Φ(c - d·Z) | Z ∈ (za, zb)]` for standard normal `Z`, by quadrature of
/// the truncated normal weight rescaled by its value at the mode.
fn conditional_normal_cdf_mean(za: f64, zb: f64, c: f64, d: f64) -> f64 {
    let anchor = 0.0f64.clamp(za, zb);
    let lo = za.max(anchor - WEIGHT_WINDOW);
    let hi = zb.min(anchor + WEIGHT_WINDOW);
    let integrand = |z: f64| {
        let w = (-0.5 * (z - anchor) * (z + anchor)).exp();
        [w * std_cdf(c - d * z), w]
    };
    let step = c / d;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut pieces = [lo, hi, hi];
    let mut n = 2;
    if step > lo && step < hi {
        pieces = [lo, step, hi];
        n = 3;
    }
    for w in pieces[..n].windows(2) {
        let r = integrate_vec(integrand, w[0], w[1], 0.0, QUAD_REL_TOL, QUAD_MAX_PANELS);
        num += r.value[0];
        den += r.value[1];
    }
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

impl CondNormalSpec {
    pub fn new(mu: f64, sigma2: f64, tau2: f64, trunc: TruncationSet) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::validation("mu", format!("{mu} must be finite")));
        }
        Ok(CondNormalSpec {
            mu,
            family: CondNormalFamily::new(sigma2, tau2, trunc)?,
        })
    }

    pub fn family(&self) -> &CondNormalFamily {
        &self.family
    }

    pub fn sigma2(&self) -> f64 {
        self.family.sigma2
    }

    pub fn tau2(&self) -> f64 {
        self.family.tau2
    }

    pub fn trunc(&self) -> &TruncationSet {
        &self.family.trunc
    }

    pub fn rho2(&self) -> f64 {
        self.family.rho2()
    }

    pub fn selection_prob(&self) -> f64 {
        self.family.selection_prob(self.mu)
    }

    pub fn log_selection_prob(&self) -> f64 {
        self.family.log_selection_prob(self.mu)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.family.cdf(self.mu, x)
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.family.sf(self.mu, x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.family.pdf(self.mu, x)
    }

    pub fn cond_given_sum(&self, v: f64) -> Result<(f64, f64)> {
        self.family.cond_given_sum(self.mu, v)
    }

    pub fn g_cdf(&self, x: f64, v: f64) -> Result<f64> {
        self.family.g_cdf(self.mu, x, v)
    }

    pub fn dpdf_dmu(&self, x: f64) -> Result<f64> {
        self.family.dpdf_dmu(self.mu, x)
    }

    pub fn dpdf_dx(&self, x: f64) -> Result<f64> {
        self.family.dpdf_dx(self.mu, x)
    }

    pub fn dg_dx(&self, x: f64, v: f64) -> Result<f64> {
        self.family.dg_dx(self.mu, x, v)
    }

    pub fn owen_integral(&self, x: f64) -> Result<f64> {
        self.family.owen_integral(self.mu, x)
    }

    pub fn b_gap(&self, x: f64) -> Result<f64> {
        self.family.b_gap(self.mu, x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.family.sample(self.mu, rng)
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        self.family.sample_pair(self.mu, rng)
    }
}
