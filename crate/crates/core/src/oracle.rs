//! Independent numerical oracles for the conditional law: quadrature of the
//! density, finite differences, Kolmogorov-Smirnov distances, and random
//! problem generators. The `selfcheck` command and the acceptance tests
//! both run these checks.

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::quadrature::integrate_vec;
use crate::quantile_ci::{interval, length_bound, QuantilePair};
use crate::rand_cond_normal::CondNormalFamily;
use crate::sim::replicate_rng;
use crate::trunc_set::TruncationSet;

/// Two-sided Kolmogorov-Smirnov critical value at the 99% level, scaled by
/// `√n` (asymptotic).
pub const KS_CRITICAL_99: f64 = 1.63;
/// Step of the central finite differences.
pub const FD_STEP: f64 = 1e-5;
/// Relative tolerance of the finite-difference checks.
pub const FD_REL_TOL: f64 = 1e-5;
/// Absolute floor of the finite-difference checks, for values near a zero
/// crossing where a relative error is meaningless.
pub const FD_ABS_FLOOR: f64 = 1e-9;
/// Smallest selection probability used when drawing specs for the
/// bivariate route comparison.
pub const MIN_ROUTE_SELECTION_PROB: f64 = 1e-3;

/// Result of one oracle check over many cases.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest error, or statistic, seen over all cases.
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    fn from_errors(name: &str, errors: &[(f64, bool)], tolerance: f64) -> Self {
        CheckOutcome {
            name: name.to_string(),
            cases: errors.len(),
            failures: errors.iter().filter(|(_, ok)| !ok).count(),
            worst: errors.iter().map(|(e, _)| *e).fold(0.0, f64::max),
            tolerance,
        }
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {} cases, {} failures, worst {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.worst,
            self.tolerance
        )
    }
}

/// A set of `1..=max_k` disjoint intervals with endpoints in `[-10, 10]`;
/// the outermost endpoints are infinite with probability 1/3 each.
pub fn random_trunc<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> TruncationSet {
    let k = rng.random_range(1..=max_k);
    let mut points: Vec<f64> = (0..2 * k).map(|_| rng.random_range(-10.0..10.0)).collect();
    points.sort_by(f64::total_cmp);
    if rng.random_bool(1.0 / 3.0) {
        points[0] = f64::NEG_INFINITY;
    }
    if rng.random_bool(1.0 / 3.0) {
        points[2 * k - 1] = f64::INFINITY;
    }
    TruncationSet::new(points.chunks(2).map(|p| (p[0], p[1]))).expect("sorted distinct endpoints")
}

/// `σ²` and `τ²` log-uniform on `[0.1, 10]`, with a random set.
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> CondNormalFamily {
    let sigma2 = 10f64.powf(rng.random_range(-1.0..=1.0));
    let tau2 = 10f64.powf(rng.random_range(-1.0..=1.0));
    CondNormalFamily::new(sigma2, tau2, random_trunc(rng, max_k)).expect("valid random family")
}

/// `0 < q1 < q2 < 1`, both away from 0 and 1 by at least 1e-4.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R) -> QuantilePair {
    loop {
        let a: f64 = rng.random_range(1e-4..1.0 - 1e-4);
        let b: f64 = rng.random_range(1e-4..1.0 - 1e-4);
        if let Ok(p) = QuantilePair::new(a.min(b), a.max(b)) {
            return p;
        }
    }
}

/// `P(X ≤ x | X + U ∈ T)` by adaptive Gauss-Kronrod quadrature of the
/// density over `(-∞, x]`, split at the endpoints of `T`.
pub fn cdf_by_quadrature(family: &CondNormalFamily, mu: f64, x: f64) -> f64 {
    let finite_ends = family
        .trunc()
        .intervals()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|e| e.is_finite());
    let lowest = finite_ends.clone().fold(mu.min(x), f64::min);
    let start = lowest - 40.0 * family.total_sd();
    let mut cuts: Vec<f64> = std::iter::once(start)
        .chain(finite_ends.filter(|&e| e > start && e < x))
        .chain(std::iter::once(x))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| integrate_vec(|u| [family.pdf(mu, u)], w[0], w[1], 1e-16, 1e-12, 4000).value[0])
        .sum()
}

/// Largest gap between the empirical CDF of `draws` and `cdf`.
pub fn ks_distance(draws: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws.iter().enumerate().fold(0.0, |ks: f64, (i, &x)| {
        let c = cdf(x);
        ks.max(c - i as f64 / n).max((i + 1) as f64 / n - c)
    })
}

/// Bivariate-normal CDF against quadrature of the density on `specs`
/// random `(family, μ, x)` triples with selection probability at least
/// [`MIN_ROUTE_SELECTION_PROB`].
pub fn check_cdf_routes(specs: usize, seed: u64, tolerance: f64) -> CheckOutcome {
    let errors: Vec<(f64, bool)> = (0..specs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i);
            let (fam, mu) = loop {
                let fam = random_family(&mut rng, 4);
                let mu = rng.random_range(-5.0..5.0);
                if fam.selection_prob(mu) >= MIN_ROUTE_SELECTION_PROB {
                    break (fam, mu);
                }
            };
            let x = mu + fam.total_sd() * rng.random_range(-4.0..4.0);
            let err = (fam.cdf_bivariate(mu, x) - cdf_by_quadrature(&fam, mu, x)).abs();
            (err, err <= tolerance)
        })
        .collect();
    CheckOutcome::from_errors("cdf bivariate route vs density quadrature", &errors, tolerance)
}

/// Error relative to `|exact| + FD_ABS_FLOOR / FD_REL_TOL`; within
/// [`FD_REL_TOL`] exactly when `err ≤ FD_REL_TOL·|exact| + FD_ABS_FLOOR`.
fn fd_ok(fd: f64, exact: f64) -> (f64, bool) {
    let err = (fd - exact).abs();
    let scaled = err / (exact.abs() + FD_ABS_FLOOR / FD_REL_TOL);
    (scaled, err <= FD_REL_TOL * exact.abs() + FD_ABS_FLOOR)
}

/// The identity checks on a `grid × grid` lattice of `(μ, x)` for each of
/// `specs` random families: the two density derivatives, the derivative of
/// the conditional CDF given the sum, the Owen-type integral, the sign and
/// decay of the gap term, and the slope bound on `Φ⁻¹(F)`.
pub fn check_identities(specs: usize, grid: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let lattice = |lo: f64, hi: f64| -> Vec<f64> {
        (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid as f64 - 1.0).max(1.0)).collect()
    };
    let mus = lattice(-3.0, 3.0);
    let xs = lattice(-4.0, 4.0);
    let per_spec: Vec<[Vec<(f64, bool)>; 6]> = (0..specs as u64)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = replicate_rng(seed, i);
            let fam = random_family(&mut rng, 4);
            let h = FD_STEP;
            let mut out: [Vec<(f64, bool)>; 6] = Default::default();
            let slope_limit = 1.0 / (fam.sigma() * fam.rho());
            for &mu in &mus {
                for &x in &xs {
                    let fd = (fam.pdf(mu + h, x) - fam.pdf(mu - h, x)) / (2.0 * h);
                    out[0].push(fd_ok(fd, fam.dpdf_dmu(mu, x)?));
                    let fd = (fam.pdf(mu, x + h) - fam.pdf(mu, x - h)) / (2.0 * h);
                    out[1].push(fd_ok(fd, fam.dpdf_dx(mu, x)?));
                    let (m, var) = fam.cond_given_sum(mu, x)?;
                    for v in [m - 2.0 * var.sqrt(), x, m + 2.0 * var.sqrt()] {
                        let fd = (fam.g_cdf(mu, x + h, v)? - fam.g_cdf(mu, x - h, v)?) / (2.0 * h);
                        out[2].push(fd_ok(fd, fam.dg_dx(mu, x, v)?));
                    }
                    let exact = fam.owen_integral(mu, x)?;
                    let quad = owen_by_quadrature(&fam, mu, x);
                    let err = (exact - quad).abs();
                    out[3].push((err, err <= 1e-8));
                    let b = fam.b_gap(mu, x)?;
                    out[4].push((b, b < 0.0));
                    let slope = fam.dquantile_dx(mu, x)? / slope_limit;
                    out[5].push((slope, slope < 1.0));
                }
                for x in [-50.0, 50.0] {
                    let b = fam.b_gap(mu, x)?.abs();
                    out[4].push((b, b <= 1e-8 && fam.b_gap(mu, x)? <= 0.0));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let names = [
        ("dpdf/dmu vs finite difference (relative)", FD_REL_TOL),
        ("dpdf/dx vs finite difference (relative)", FD_REL_TOL),
        ("dG/dx identity vs finite difference (relative)", FD_REL_TOL),
        ("Owen integral vs quadrature (absolute)", 1e-8),
        ("gap term negative, vanishing at |x| = 50", 1e-8),
        ("slope of quantile transform below 1/(sigma rho) (ratio)", 1.0),
    ];
    Ok(names
        .iter()
        .enumerate()
        .map(|(j, (name, tol))| {
            let all: Vec<(f64, bool)> = per_spec.iter().flat_map(|s| s[j].iter().copied()).collect();
            CheckOutcome::from_errors(name, &all, *tol)
        })
        .collect())
}

/// `∫_{-∞}^{x} ((u - μ)/σ²) pdf(u) du` by quadrature.
pub fn owen_by_quadrature(family: &CondNormalFamily, mu: f64, x: f64) -> f64 {
    let start = family
        .trunc()
        .intervals()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|e| e.is_finite())
        .fold(mu.min(x), f64::min)
        - 40.0 * family.total_sd();
    let s2 = family.sigma2();
    integrate_vec(|u| [(u - mu) / s2 * family.pdf(mu, u)], start, x, 1e-16, 1e-12, 4000).value[0]
}

/// Kolmogorov-Smirnov test of the exact sampler against the CDF on
/// `specs` random families with `draws` draws each. Reports the largest
/// `√n · D` over the specs.
pub fn check_sampler(specs: usize, draws: usize, seed: u64) -> Result<CheckOutcome> {
    let stats: Vec<(f64, bool)> = (0..specs as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool)> {
            let mut rng = replicate_rng(seed, i);
            let fam = random_family(&mut rng, 4);
            let mu = rng.random_range(-5.0..5.0);
            let mut xs = (0..draws).map(|_| fam.sample(mu, &mut rng)).collect::<Result<Vec<_>>>()?;
            let d = ks_distance(&mut xs, |x| fam.cdf(mu, x)) * (draws as f64).sqrt();
            Ok((d, d < KS_CRITICAL_99))
        })
        .collect::<Result<_>>()?;
    Ok(CheckOutcome::from_errors("sampler Kolmogorov-Smirnov at 99% (sqrt(n) D)", &stats, KS_CRITICAL_99))
}

/// Interval length against the strict bound on `cases` random problems.
/// Reports the largest ratio of length to bound.
pub fn check_length_bound(cases: usize, seed: u64) -> Result<CheckOutcome> {
    let ratios: Vec<(f64, bool)> = (0..cases as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool)> {
            let mut rng = replicate_rng(seed, i);
            let fam = random_family(&mut rng, 4);
            let pair = random_pair(&mut rng);
            let x = rng.random_range(-20.0..=20.0);
            let ci = interval(&fam, x, pair)?;
            let r = ci.length() / length_bound(&fam, pair);
            Ok((r, r < 1.0))
        })
        .collect::<Result<_>>()?;
    Ok(CheckOutcome::from_errors("interval length below the bound (ratio)", &ratios, 1.0))
}

/// A reduced version of the full oracle suite, sized to run in seconds.
pub fn selfcheck(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = vec![check_cdf_routes(200, seed, 1e-9)];
    out.extend(check_identities(4, 6, seed)?);
    out.push(check_sampler(3, 20_000, seed)?);
    out.push(check_length_bound(500, seed)?);
    Ok(out)
}
