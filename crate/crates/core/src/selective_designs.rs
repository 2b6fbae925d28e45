//! Two sampling designs that lead to the randomized conditional normal law,
//! and the sample-splitting intervals they are compared against.
//!
//! * Data carving: `Y_1, …, Y_n ~ N(μ, σ²)` i.i.d.; the model is selected on
//!   the first `δn` observations through `Ȳ_{δn} ∈ T` and inference uses all
//!   `n`. With `X = Ȳ_n` and `U = Ȳ_{δn} - Ȳ_n`, `X ~ N(μ, σ²/n)` and
//!   `U ~ N(0, (σ²/n)(1-δ)/δ)` are independent.
//! * Randomized response: selection uses `Y + ω` with `ω ~ N(0, τ² I_n)`,
//!   through `Ȳ + ω̄ ∈ T`, and inference uses `Ȳ`.

use crate::error::{Error, Result};
use crate::quantile_ci::{interval, ConfidenceInterval, QuantilePair};
use crate::rand_cond_normal::{CondNormalFamily, CondNormalSpec};
use crate::scalar_normal::std_quantile;
use crate::trunc_set::TruncationSet;

/// Relative slack when checking that `δn` or `m` is an integer.
const INTEGRALITY_TOL: f64 = 1e-9;

fn as_integer(value: f64) -> Option<usize> {
    let rounded = value.round();
    if rounded >= 1.0 && (value - rounded).abs() <= INTEGRALITY_TOL * rounded {
        Some(rounded as usize)
    } else {
        None
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("sigma2", format!("{sigma2} must be positive and finite")))
    }
}

/// The classical interval `[x̄ + sd·Φ⁻¹(q1), x̄ + sd·Φ⁻¹(q2)]` for the mean
/// of a normal sample whose mean has standard deviation `sd`. It carries
/// no conditional length bound, so `bound` is infinite.
fn z_interval(xbar: f64, sd: f64, pair: QuantilePair) -> Result<ConfidenceInterval> {
    if !xbar.is_finite() {
        return Err(Error::validation("x", format!("{xbar} must be finite")));
    }
    Ok(ConfidenceInterval {
        lower: xbar + sd * std_quantile(pair.q1())?,
        upper: xbar + sd * std_quantile(pair.q2())?,
        pair,
        bound: f64::INFINITY,
        x: xbar,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarvingDesign {
    n: usize,
    delta: f64,
    sigma2: f64,
    trunc: TruncationSet,
    selection_size: usize,
}

impl CarvingDesign {
    /// Requires `δ ∈ (0, 1)` with `δn` a positive integer and `(1-δ)n ≥ 1`.
    pub fn new(n: usize, delta: f64, sigma2: f64, trunc: TruncationSet) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("n", "must be a positive integer"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::validation("delta", format!("{delta} is not in (0, 1)")));
        }
        check_sigma2(sigma2)?;
        let selection_size = as_integer(delta * n as f64).ok_or_else(|| {
            Error::validation("delta", format!("delta*n = {} is not a positive integer", delta * n as f64))
        })?;
        if selection_size >= n {
            return Err(Error::validation("delta", "(1-delta)*n must be at least 1"));
        }
        Ok(CarvingDesign {
            n,
            delta,
            sigma2,
            trunc,
            selection_size,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn trunc(&self) -> &TruncationSet {
        &self.trunc
    }

    /// `δn`, the number of observations used for selection.
    pub fn selection_size(&self) -> usize {
        self.selection_size
    }

    /// `(1-δ)n`, the number of held-out observations.
    pub fn holdout_size(&self) -> usize {
        self.n - self.selection_size
    }

    /// `(σ²/n, (σ²/n)(1-δ)/δ, T)`.
    pub fn family(&self) -> CondNormalFamily {
        let base = self.sigma2 / self.n as f64;
        CondNormalFamily::new(base, base * (1.0 - self.delta) / self.delta, self.trunc.clone())
            .expect("validated design parameters")
    }

    pub fn spec(&self, mu: f64) -> Result<CondNormalSpec> {
        let fam = self.family();
        CondNormalSpec::new(mu, fam.sigma2(), fam.tau2(), self.trunc.clone())
    }

    /// `(σ/√n)(Φ⁻¹(q2) - Φ⁻¹(q1))/√(1-δ)`
    pub fn bound(&self, pair: QuantilePair) -> f64 {
        (self.sigma2 / self.n as f64).sqrt() * pair.z_width() / (1.0 - self.delta).sqrt()
    }

    /// Interval from the full-sample mean, conditional on selection.
    pub fn carving_interval(&self, xbar_full: f64, pair: QuantilePair) -> Result<ConfidenceInterval> {
        interval(&self.family(), xbar_full, pair)
    }

    /// The z-interval from the `(1-δ)n` held-out observations alone; its
    /// length `σ(Φ⁻¹(q2) - Φ⁻¹(q1))/√((1-δ)n)` equals [`CarvingDesign::bound`].
    pub fn splitting_interval(&self, xbar_holdout: f64, pair: QuantilePair) -> Result<ConfidenceInterval> {
        z_interval(xbar_holdout, (self.sigma2 / self.holdout_size() as f64).sqrt(), pair)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandResponseDesign {
    n: usize,
    sigma2: f64,
    tau2: f64,
    trunc: TruncationSet,
}

impl RandResponseDesign {
    pub fn new(n: usize, sigma2: f64, tau2: f64, trunc: TruncationSet) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("n", "must be a positive integer"));
        }
        check_sigma2(sigma2)?;
        if !(tau2 > 0.0 && tau2.is_finite()) {
            return Err(Error::validation("tau2", format!("{tau2} must be positive and finite")));
        }
        Ok(RandResponseDesign {
            n,
            sigma2,
            tau2,
            trunc,
        })
    }

    pub fn n(&self) -> usize {
        self.n
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

    /// `(σ²/n, τ²/n, T)`.
    pub fn family(&self) -> CondNormalFamily {
        let n = self.n as f64;
        CondNormalFamily::new(self.sigma2 / n, self.tau2 / n, self.trunc.clone())
            .expect("validated design parameters")
    }

    pub fn spec(&self, mu: f64) -> Result<CondNormalSpec> {
        let n = self.n as f64;
        CondNormalSpec::new(mu, self.sigma2 / n, self.tau2 / n, self.trunc.clone())
    }

    /// `√(1 + σ²/τ²)`, the inflation of the bound over the unconditional
    /// interval length.
    pub fn bound_factor(&self) -> f64 {
        (1.0 + self.sigma2 / self.tau2).sqrt()
    }

    /// `(σ/√n)(Φ⁻¹(q2) - Φ⁻¹(q1))√(1 + σ²/τ²)`
    pub fn bound(&self, pair: QuantilePair) -> f64 {
        (self.sigma2 / self.n as f64).sqrt() * pair.z_width() * self.bound_factor()
    }

    /// `m = nτ²/(σ²+τ²)`, the size of the comparison split; an error unless
    /// it is a positive integer.
    pub fn split_size(&self) -> Result<usize> {
        let m = self.n as f64 * self.tau2 / (self.sigma2 + self.tau2);
        as_integer(m).ok_or_else(|| {
            Error::validation("tau2", format!("m = n*tau2/(sigma2+tau2) = {m} is not a positive integer"))
        })
    }

    /// Interval from `Ȳ`, conditional on `Ȳ + ω̄ ∈ T`.
    pub fn randomized_interval(&self, ybar: f64, pair: QuantilePair) -> Result<ConfidenceInterval> {
        interval(&self.family(), ybar, pair)
    }

    /// The z-interval from the mean of `m` observations; length
    /// `σ(Φ⁻¹(q2) - Φ⁻¹(q1))/√m`.
    pub fn splitting_interval(&self, xbar_m: f64, pair: QuantilePair) -> Result<ConfidenceInterval> {
        let m = self.split_size()?;
        z_interval(xbar_m, (self.sigma2 / m as f64).sqrt(), pair)
    }
}
