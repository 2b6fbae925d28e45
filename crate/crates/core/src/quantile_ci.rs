//! Equal-tailed (or general quantile-pair) confidence intervals for `μ`
//! built by inverting the conditional CDF in `μ`.
//!
//! `μ_q(x)` is the root of `F_μ(x) = 1 - q`. Since `F_μ(x)` is continuous
//! and strictly decreasing in `μ`, the root is unique and any search that
//! keeps a bracket converges to it. The interval `[μ_{q1}(x), μ_{q2}(x)]`
//! has length strictly below `(σ/ρ)(Φ⁻¹(q2) - Φ⁻¹(q1))` whenever `τ² > 0`.

use crate::error::{Error, Result};
use crate::rand_cond_normal::CondNormalFamily;
use crate::scalar_normal::std_quantile;

/// The root search stops once the bracket is this narrow (for unit-scale
/// problems), or once `|F_μ(x) - (1-q)|` is below [`RESIDUAL_TOLERANCE`].
pub const MU_TOLERANCE: f64 = 1e-10;
pub const RESIDUAL_TOLERANCE: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 200;
/// Bracket half-widths are capped at this many multiples of `σ/ρ`.
pub const MAX_BRACKET_SCALE: f64 = 1e6;

/// Lower and upper quantile levels `0 < q1 ≤ q2 < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantilePair {
    q1: f64,
    q2: f64,
}

impl QuantilePair {
    pub fn new(q1: f64, q2: f64) -> Result<Self> {
        if !(q1 > 0.0 && q1 < 1.0) {
            return Err(Error::validation("q1", format!("{q1} is not in (0, 1)")));
        }
        if !(q2 > 0.0 && q2 < 1.0) {
            return Err(Error::validation("q2", format!("{q2} is not in (0, 1)")));
        }
        if q1 > q2 {
            return Err(Error::validation("q1", format!("q1 = {q1} exceeds q2 = {q2}")));
        }
        Ok(QuantilePair { q1, q2 })
    }

    /// `(α/2, 1 - α/2)`
    pub fn equal_tailed(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::validation("alpha", format!("{alpha} is not in (0, 1)")));
        }
        Self::new(alpha / 2.0, 1.0 - alpha / 2.0)
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    /// Nominal coverage `q2 - q1`.
    pub fn coverage(&self) -> f64 {
        self.q2 - self.q1
    }

    /// `Φ⁻¹(q2) - Φ⁻¹(q1)`, the interval length in units of the standard
    /// deviation for an unconditional normal observation.
    pub fn z_width(&self) -> f64 {
        // q1, q2 are validated to lie in (0, 1).
        std_quantile(self.q2).expect("q2 in (0,1)") - std_quantile(self.q1).expect("q1 in (0,1)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub pair: QuantilePair,
    /// `(σ/ρ)(Φ⁻¹(q2) - Φ⁻¹(q1))`; infinite when `τ² = 0`.
    pub bound: f64,
    /// The observed statistic the interval was computed at.
    pub x: f64,
}

impl ConfidenceInterval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, mu: f64) -> bool {
        self.lower <= mu && mu <= self.upper
    }
}

/// `(σ/ρ)(Φ⁻¹(q2) - Φ⁻¹(q1))`, the strict upper bound on the length of
/// every interval for the family.
pub fn length_bound(family: &CondNormalFamily, pair: QuantilePair) -> f64 {
    let width = pair.z_width();
    if width == 0.0 {
        return 0.0;
    }
    if family.rho() == 0.0 {
        return f64::INFINITY;
    }
    family.sigma() / family.rho() * width
}

/// Scale of the search in `μ`: `σ/ρ`, or `σ` for the plain truncated
/// normal where `ρ = 0`.
fn search_scale(family: &CondNormalFamily) -> f64 {
    let rho = family.rho();
    if rho > 0.0 {
        family.sigma() / rho
    } else {
        family.sigma()
    }
}

/// Signed residual that is positive while `μ` lies below `μ_q(x)` and
/// negative above it. The comparison runs on whichever of `F` and `1 - F`
/// is the smaller target, which keeps tail quantiles accurate.
fn residual(family: &CondNormalFamily, x: f64, q: f64, mu: f64) -> f64 {
    // Far from the target level only the sign of the residual matters.
    let floor = 0.5 * q.min(1.0 - q);
    if q < 0.5 {
        // F_μ(x) = 1 - q  ⇔  1 - F_μ(x) = q, and 1 - F_μ(x) increases in μ.
        q - family.sf_coarse(mu, x, floor)
    } else {
        family.cdf_coarse(mu, x, floor) - (1.0 - q)
    }
}

/// `μ_q(x)`: the `μ` at which `F_μ(x) = 1 - q`.
pub fn mu_q(family: &CondNormalFamily, x: f64, q: f64) -> Result<f64> {
    check_x(x)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::validation("q", format!("{q} is not in (0, 1)")));
    }
    let scale = search_scale(family);
    let half = scale * std_quantile(q)?.abs() + 10.0 * scale;
    let bracket = expand_bracket(family, x, q, x - half, x + half, scale)?;
    solve_bracketed(family, x, q, bracket)
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("x", format!("{x} must be finite")))
    }
}

/// Widens `[lo, hi]` geometrically about `x` until it brackets `μ_q(x)`.
/// Returns the bracket together with the residuals at its ends.
fn expand_bracket(
    family: &CondNormalFamily,
    x: f64,
    q: f64,
    mut lo: f64,
    mut hi: f64,
    scale: f64,
) -> Result<Bracket> {
    let cap = MAX_BRACKET_SCALE * scale;
    let mut r_lo = residual(family, x, q, lo);
    let mut r_hi = None;
    while r_lo < 0.0 {
        let reach = 2.0 * (x - lo).max(scale);
        if reach > cap {
            return Err(nonconvergence(x, q, "lower", cap));
        }
        (hi, r_hi) = (lo, Some(r_lo));
        lo = x - reach;
        r_lo = residual(family, x, q, lo);
    }
    let mut r_hi = r_hi.unwrap_or_else(|| residual(family, x, q, hi));
    while r_hi > 0.0 {
        let reach = 2.0 * (hi - x).max(scale);
        if reach > cap {
            return Err(nonconvergence(x, q, "upper", cap));
        }
        (lo, r_lo) = (hi, r_hi);
        hi = x + reach;
        r_hi = residual(family, x, q, hi);
    }
    Ok(Bracket { lo, hi, r_lo, r_hi })
}

struct Bracket {
    lo: f64,
    hi: f64,
    r_lo: f64,
    r_hi: f64,
}

fn nonconvergence(x: f64, q: f64, side: &str, cap: f64) -> Error {
    Error::NonConvergence(format!(
        "no {side} bracket for mu_q(x) at x={x}, q={q} within {cap:e} of x"
    ))
}

/// Root of the residual on a bracket with `residual(lo) ≥ 0 ≥ residual(hi)`,
/// by Brent's method: inverse quadratic or secant steps while they make
/// progress, bisection otherwise. The bracket is kept at every step, so the
/// search is as robust as bisection and usually needs far fewer CDF
/// evaluations.
fn solve_bracketed(family: &CondNormalFamily, x: f64, q: f64, bracket: Bracket) -> Result<f64> {
    let f = |mu: f64| residual(family, x, q, mu);
    let mu_tol = mu_tolerance(family);
    let (mut a, mut fa) = (bracket.lo, bracket.r_lo);
    let (mut b, mut fb) = (bracket.hi, bracket.r_hi);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITERATIONS {
        if (fb > 0.0) == (fc > 0.0) {
            (c, fc) = (a, fa);
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            (a, fa) = (b, fb);
            (b, fb) = (c, fc);
            (c, fc) = (a, fa);
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * mu_tol;
        let half = 0.5 * (c - b);
        if half.abs() <= tol || fb.abs() <= RESIDUAL_TOLERANCE {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut den) = if a == c {
                (2.0 * half * s, 1.0 - s)
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0)),
                    (qa - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                den = -den;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * half * den - (tol * den).abs()).min((e * den).abs()) {
                e = d;
                d = p / den;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        (a, fa) = (b, fb);
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b);
    }
    Err(Error::NonConvergence(format!(
        "root search for mu_q(x) at x={x}, q={q} did not converge in {MAX_ITERATIONS} steps"
    )))
}

/// `μ`-resolution of the root search: [`MU_TOLERANCE`] for unit-scale
/// problems, tightened in proportion to `σρ` so that `F` is resolved to
/// about the same accuracy when `σ` is small.
fn mu_tolerance(family: &CondNormalFamily) -> f64 {
    let rho = family.rho();
    let scale = if rho > 0.0 { family.sigma() * rho } else { family.sigma() };
    MU_TOLERANCE * scale.min(1.0)
}

/// `[μ_{q1}(x), μ_{q2}(x)]`.
pub fn interval(family: &CondNormalFamily, x: f64, pair: QuantilePair) -> Result<ConfidenceInterval> {
    let lower = mu_q(family, x, pair.q1)?;
    let bound = length_bound(family, pair);
    let upper = if pair.q1 == pair.q2 {
        lower
    } else if bound.is_finite() {
        // The q2 root lies within `bound` above the q1 root.
        let scale = search_scale(family);
        let bracket = expand_bracket(family, x, pair.q2, lower, lower + bound, scale)?;
        solve_bracketed(family, x, pair.q2, bracket)?
    } else {
        mu_q(family, x, pair.q2)?
    };
    Ok(ConfidenceInterval {
        lower,
        upper,
        pair,
        bound,
        x,
    })
}

/// Interval lengths along a grid of observations.
pub fn sharpness_curve(
    family: &CondNormalFamily,
    pair: QuantilePair,
    x_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    x_grid
        .iter()
        .map(|&x| Ok((x, interval(family, x, pair)?.length())))
        .collect()
}
