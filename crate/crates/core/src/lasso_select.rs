//! Lasso selection on a randomized response and the selective interval for
//! a contrast of the selected coefficients.
//!
//! For the Lasso `β̂(v) = argmin ½‖v - Aβ‖² + λ‖β‖₁`, the event that `β̂(v)`
//! has active set `m` and signs `s` is (up to a null set) the polyhedron
//! `{v : A_{m,s} v < b_{m,s}}` with rows
//!
//! ```text
//! (1/λ) A_{-m}'(I - P_m) v < 1 - A_{-m}' A_m (A_m'A_m)⁻¹ s
//! -(1/λ) A_{-m}'(I - P_m) v < 1 + A_{-m}' A_m (A_m'A_m)⁻¹ s
//! -diag(s)(A_m'A_m)⁻¹ A_m' v < -λ diag(s)(A_m'A_m)⁻¹ s
//! ```
//!
//! On the line `v(w) = z + w·η/‖η‖²` the polyhedron cuts out an open
//! interval; the union over all sign vectors gives the set for `m` alone.

use std::io::Read;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantile_ci::{interval, ConfidenceInterval, QuantilePair};
use crate::rand_cond_normal::CondNormalFamily;
use crate::trunc_set::TruncationSet;

/// Coordinate descent stops once the duality gap falls below this
/// (relative to `max(1, primal objective)`).
pub const DUALITY_GAP_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 100_000;
/// Tolerance of the KKT certificate.
pub const KKT_TOL: f64 = 1e-8;
/// `|β̂_j|` above this counts as active.
pub const ACTIVE_THRESHOLD: f64 = 1e-9;
/// Largest model for which all sign vectors are enumerated.
pub const MAX_SIGN_ENUMERATION: usize = 12;

/// A fixed design `A` (n×d), response `y`, and the known variances and
/// penalty of the randomized Lasso.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    pub design: DMatrix<f64>,
    pub y: DVector<f64>,
    pub sigma2: f64,
    pub lambda: f64,
    pub tau2: f64,
}

impl RegressionProblem {
    pub fn new(design: DMatrix<f64>, y: DVector<f64>, sigma2: f64, lambda: f64, tau2: f64) -> Result<Self> {
        if design.nrows() != y.len() {
            return Err(Error::validation(
                "data",
                format!("design has {} rows but the response has {}", design.nrows(), y.len()),
            ));
        }
        if design.ncols() == 0 || design.nrows() == 0 {
            return Err(Error::validation("data", "design must have at least one row and one column"));
        }
        if design.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::validation("data", "non-finite value in design or response"));
        }
        for (name, v) in [("sigma2", sigma2), ("lambda", lambda), ("tau2", tau2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("{v} must be positive and finite")));
            }
        }
        check_general_position(&design)?;
        Ok(RegressionProblem {
            design,
            y,
            sigma2,
            lambda,
            tau2,
        })
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn d(&self) -> usize {
        self.design.ncols()
    }
}

/// Necessary conditions for general position that are cheap to verify:
/// no zero or parallel columns, and full column rank when `d ≤ n`.
pub fn check_general_position(design: &DMatrix<f64>) -> Result<()> {
    let norms: Vec<f64> = design.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::validation("data", format!("design column {j} is zero")));
    }
    for i in 0..design.ncols() {
        for j in i + 1..design.ncols() {
            let cos = design.column(i).dot(&design.column(j)) / (norms[i] * norms[j]);
            if cos.abs() > 1.0 - 1e-12 {
                return Err(Error::validation(
                    "data",
                    format!("design columns {i} and {j} are parallel"),
                ));
            }
        }
    }
    if design.ncols() <= design.nrows() {
        let sv = design.clone().svd(false, false).singular_values;
        let max = sv.max();
        if sv.min() <= 1e-10 * max {
            return Err(Error::validation("data", "design columns are linearly dependent"));
        }
    }
    Ok(())
}

/// Reads `(A, y)` from CSV text: one header row, then one row per
/// observation with the response in the first column and the design in
/// the remaining columns.
pub fn read_regression_csv<R: Read>(reader: R) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = rdr
        .headers()
        .map_err(|e| Error::validation("data", format!("unreadable header: {e}")))?
        .len();
    if width < 2 {
        return Err(Error::validation(
            "data",
            "need a response column and at least one design column",
        ));
    }
    let mut y = Vec::new();
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::validation("data", format!("row {}: {e}", row + 1)))?;
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::validation("data", format!("row {}, column {}: {field:?} is not a number", row + 1, col + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::validation(
                    "data",
                    format!("row {}, column {}: value must be finite", row + 1, col + 1),
                ));
            }
            if col == 0 {
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::validation("data", "no data rows"));
    }
    let design = DMatrix::from_row_slice(y.len(), width - 1, &values);
    Ok((design, DVector::from_vec(y)))
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// `½‖v - Aβ‖² + λ‖β‖₁`
pub fn lasso_objective(design: &DMatrix<f64>, v: &DVector<f64>, lambda: f64, beta: &DVector<f64>) -> f64 {
    0.5 * (v - design * beta).norm_squared() + lambda * beta.lp_norm(1)
}

/// Largest violation of the Lasso KKT conditions at `β`: on active
/// coordinates `A_j'(v - Aβ) = λ sign(β_j)`, elsewhere `|A_j'(v - Aβ)| ≤ λ`.
pub fn kkt_residual(design: &DMatrix<f64>, v: &DVector<f64>, lambda: f64, beta: &DVector<f64>) -> f64 {
    let corr = design.tr_mul(&(v - design * beta));
    let mut worst: f64 = 0.0;
    for j in 0..beta.len() {
        let r = if beta[j].abs() > ACTIVE_THRESHOLD {
            (corr[j] - lambda * beta[j].signum()).abs()
        } else {
            (corr[j].abs() - lambda).max(0.0)
        };
        worst = worst.max(r);
    }
    worst
}

/// Cyclic coordinate descent with covariance updates until the relative
/// duality gap is at most `gap_tol`. Returns the number of sweeps used.
fn coordinate_descent(
    gram: &DMatrix<f64>,
    corr0: &DVector<f64>,
    v_norm2: f64,
    lambda: f64,
    beta: &mut DVector<f64>,
    gap_tol: f64,
    max_sweeps: usize,
) -> usize {
    let d = beta.len();
    // grad = A'v - A'Aβ, kept current through rank-one updates.
    let mut grad = corr0 - gram * &*beta;
    for sweep in 0..max_sweeps {
        for j in 0..d {
            let gjj = gram[(j, j)];
            let old = beta[j];
            let new = soft_threshold(grad[j] + gjj * old, lambda) / gjj;
            if new != old {
                let delta = new - old;
                beta[j] = new;
                grad.axpy(-delta, &gram.column(j), 1.0);
            }
        }
        if sweep % 10 == 9 || sweep + 1 == max_sweeps {
            // ‖v - Aβ‖² = ‖v‖² - 2β'A'v + β'A'Aβ, and A'Aβ = A'v - grad.
            let atv_beta = corr0.dot(beta);
            let quad = beta.dot(&(corr0 - &grad));
            let rss = (v_norm2 - 2.0 * atv_beta + quad).max(0.0);
            let primal = 0.5 * rss + lambda * beta.lp_norm(1);
            let scale = (lambda / grad.amax()).min(1.0);
            // Dual point θ = scale·(v - Aβ); D(θ) = ½‖v‖² - ½‖v - θ‖².
            let dual = scale * (v_norm2 - atv_beta) - 0.5 * scale * scale * rss;
            if primal - dual <= gap_tol * primal.max(1.0) {
                return sweep + 1;
            }
        }
    }
    max_sweeps
}

/// Given the active set and signs, the Lasso solution is
/// `β_m = (A_m'A_m)⁻¹(A_m'v - λs)`, zero elsewhere.
fn polish(design: &DMatrix<f64>, v: &DVector<f64>, lambda: f64, active: &[usize], signs: &[f64]) -> Option<DVector<f64>> {
    let am = design.select_columns(active);
    let chol = am.tr_mul(&am).cholesky()?;
    let rhs = am.tr_mul(v) - DVector::from_row_slice(signs) * lambda;
    let bm = chol.solve(&rhs);
    let mut beta = DVector::zeros(design.ncols());
    for (k, &j) in active.iter().enumerate() {
        beta[j] = bm[k];
    }
    Some(beta)
}

fn active_set(beta: &DVector<f64>) -> (Vec<usize>, Vec<f64>) {
    let active: Vec<usize> = (0..beta.len()).filter(|&j| beta[j].abs() > ACTIVE_THRESHOLD).collect();
    let signs = active.iter().map(|&j| beta[j].signum()).collect();
    (active, signs)
}

/// The Lasso solution for response `v`, certified by the KKT conditions
/// to within [`KKT_TOL`].
pub fn lasso_fit(design: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::validation("lambda", format!("{lambda} must be positive and finite")));
    }
    if design.nrows() != v.len() {
        return Err(Error::validation("data", "design and response sizes differ"));
    }
    let gram = design.tr_mul(design);
    let corr0 = design.tr_mul(v);
    let v_norm2 = v.norm_squared();
    let mut beta = DVector::zeros(design.ncols());
    let mut gap_tol = DUALITY_GAP_TOL;
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    while sweeps < MAX_SWEEPS {
        sweeps += coordinate_descent(&gram, &corr0, v_norm2, lambda, &mut beta, gap_tol, MAX_SWEEPS - sweeps);
        let (active, signs) = active_set(&beta);
        let candidate = if active.is_empty() {
            Some(DVector::zeros(design.ncols()))
        } else {
            polish(design, v, lambda, &active, &signs)
        };
        if let Some(c) = candidate {
            let (c_active, c_signs) = active_set(&c);
            residual = kkt_residual(design, v, lambda, &c);
            if c_active == active && c_signs == signs && residual <= KKT_TOL {
                return Ok(c);
            }
        }
        residual = residual.min(kkt_residual(design, v, lambda, &beta));
        if residual <= KKT_TOL {
            return Ok(beta);
        }
        gap_tol *= 1e-2;
        if gap_tol < 1e-24 {
            break;
        }
    }
    Err(Error::NonConvergence(format!(
        "Lasso did not reach the KKT tolerance {KKT_TOL:e}; residual {residual:e} after {sweeps} sweeps"
    )))
}

/// An active set `m` with its signs `s`, and the polyhedron
/// `{v : A_{m,s} v < b_{m,s}}` on which the Lasso selects exactly them.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoSelection {
    pub model: Vec<usize>,
    pub signs: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LassoSelection {
    /// Whether `v` lies strictly inside the polyhedron.
    pub fn contains(&self, v: &DVector<f64>) -> bool {
        let av = &self.a * v;
        av.iter().zip(self.b.iter()).all(|(l, r)| l < r)
    }
}

/// Builds the polyhedron for a given model and sign vector.
pub fn selection_polyhedron(
    design: &DMatrix<f64>,
    lambda: f64,
    model: &[usize],
    signs: &[f64],
) -> Result<LassoSelection> {
    if model.is_empty() {
        return Err(Error::NoSelection);
    }
    let n = design.nrows();
    let d = design.ncols();
    let am = design.select_columns(model);
    let chol = am
        .tr_mul(&am)
        .cholesky()
        .ok_or_else(|| Error::Inconsistent(format!("A_m'A_m is singular for model {model:?}")))?;
    let s = DVector::from_row_slice(signs);
    // (A_m'A_m)⁻¹ A_m' and (A_m'A_m)⁻¹ s
    let pinv = chol.solve(&am.transpose());
    let gs = chol.solve(&s);
    let inactive: Vec<usize> = (0..d).filter(|j| !model.contains(j)).collect();
    let k = model.len();
    let rows = 2 * inactive.len() + k;
    let mut a = DMatrix::zeros(rows, n);
    let mut b = DVector::zeros(rows);
    if !inactive.is_empty() {
        let ai = design.select_columns(&inactive);
        // A_{-m}'(I - P_m) = A_{-m}' - (A_{-m}'A_m)(A_m'A_m)⁻¹A_m'
        let proj = ai.transpose() - (ai.tr_mul(&am)) * &pinv;
        let shift = ai.tr_mul(&(&am * &gs));
        let q = inactive.len();
        for r in 0..q {
            for c in 0..n {
                a[(r, c)] = proj[(r, c)] / lambda;
                a[(q + r, c)] = -proj[(r, c)] / lambda;
            }
            b[r] = 1.0 - shift[r];
            b[q + r] = 1.0 + shift[r];
        }
    }
    let base = 2 * inactive.len();
    for r in 0..k {
        for c in 0..n {
            a[(base + r, c)] = -signs[r] * pinv[(r, c)];
        }
        b[base + r] = -lambda * signs[r] * gs[r];
    }
    Ok(LassoSelection {
        model: model.to_vec(),
        signs: signs.to_vec(),
        a,
        b,
    })
}

/// Fits the Lasso at `v` and returns the selected model, signs and
/// polyhedron; [`Error::NoSelection`] when nothing is active.
pub fn selection_event(design: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> Result<LassoSelection> {
    let beta = lasso_fit(design, v, lambda)?;
    let (model, signs) = active_set(&beta);
    let sel = selection_polyhedron(design, lambda, &model, &signs)?;
    if !sel.contains(v) {
        return Err(Error::Inconsistent(
            "the fitted response does not satisfy its own selection polyhedron".into(),
        ));
    }
    Ok(sel)
}

/// `{w : A_{m,s}(z + w·η/‖η‖²) < b_{m,s}}` as an open interval, or `None`
/// when it is empty.
fn line_interval(sel: &LassoSelection, eta: &DVector<f64>, z: &DVector<f64>) -> Option<(f64, f64)> {
    let dir = eta / eta.norm_squared();
    let slope = &sel.a * dir;
    let slack = &sel.b - &sel.a * z;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (c, r) in slope.iter().zip(slack.iter()) {
        if *c > 0.0 {
            hi = hi.min(r / c);
        } else if *c < 0.0 {
            lo = lo.max(r / c);
        } else if *r <= 0.0 {
            return None;
        }
    }
    (lo < hi).then_some((lo, hi))
}

fn check_orthogonal(eta: &DVector<f64>, z: &DVector<f64>) -> Result<()> {
    if eta.norm() == 0.0 {
        return Err(Error::validation("gamma", "contrast vector eta is zero"));
    }
    let along = eta.dot(z) / eta.norm();
    if along.abs() > 1e-10 * z.norm().max(1.0) {
        return Err(Error::validation("z", format!("z has component {along:e} along eta")));
    }
    Ok(())
}

/// `T_{m,s}(z)`: the open interval of `w` for which `z + w·η/‖η‖²` lies in
/// the selection polyhedron.
pub fn truncation_interval(sel: &LassoSelection, eta: &DVector<f64>, z: &DVector<f64>) -> Result<TruncationSet> {
    check_orthogonal(eta, z)?;
    let (lo, hi) = line_interval(sel, eta, z)
        .ok_or_else(|| Error::Inconsistent("the line misses the selection polyhedron".into()))?;
    TruncationSet::new([(lo, hi)])
}

/// `T_m(z)`: the union of `T_{m,s}(z)` over all sign vectors `s`.
pub fn truncation_union(
    design: &DMatrix<f64>,
    lambda: f64,
    model: &[usize],
    eta: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<TruncationSet> {
    check_orthogonal(eta, z)?;
    let k = model.len();
    if k == 0 {
        return Err(Error::NoSelection);
    }
    if k > MAX_SIGN_ENUMERATION {
        return Err(Error::EnumerationTooLarge {
            size: k,
            limit: MAX_SIGN_ENUMERATION,
        });
    }
    let mut pieces = Vec::new();
    for mask in 0u32..(1 << k) {
        let signs: Vec<f64> = (0..k).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let sel = selection_polyhedron(design, lambda, model, &signs)?;
        if let Some(piece) = line_interval(&sel, eta, z) {
            pieces.push(piece);
        }
    }
    if pieces.is_empty() {
        return Err(Error::Inconsistent("the line misses every sign polyhedron".into()));
    }
    TruncationSet::new(pieces)
}

/// The contrast `γ'β_m = η'θ` with `η = A_m(A_m'A_m)⁻¹γ`, and the
/// variances of `η'Y` and `η'ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastTarget {
    pub gamma: DVector<f64>,
    pub eta: DVector<f64>,
    pub sigma2_check: f64,
    pub tau2_check: f64,
}

impl ContrastTarget {
    pub fn new(problem: &RegressionProblem, model: &[usize], gamma: DVector<f64>) -> Result<Self> {
        if gamma.len() != model.len() {
            return Err(Error::validation(
                "gamma",
                format!("has length {} but the model has {} variables", gamma.len(), model.len()),
            ));
        }
        let am = problem.design.select_columns(model);
        let chol = am
            .tr_mul(&am)
            .cholesky()
            .ok_or_else(|| Error::Inconsistent("A_m'A_m is singular".into()))?;
        let eta = &am * chol.solve(&gamma);
        let norm2 = eta.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::validation("gamma", "contrast is zero"));
        }
        Ok(ContrastTarget {
            gamma,
            sigma2_check: problem.sigma2 * norm2,
            tau2_check: problem.tau2 * norm2,
            eta,
        })
    }

    /// `η'θ` for a mean vector `θ`.
    pub fn value(&self, theta: &DVector<f64>) -> f64 {
        self.eta.dot(theta)
    }
}

/// Everything produced by one run of the randomized Lasso pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveInference {
    pub selection: LassoSelection,
    pub target: ContrastTarget,
    pub trunc: TruncationSet,
    pub interval: ConfidenceInterval,
}

/// Selects on `y + ω`, then inverts the conditional law of `η'y` given the
/// selection and `(I - P_η)(y + ω)`.
pub fn selective_interval(
    problem: &RegressionProblem,
    omega: &DVector<f64>,
    gamma: &DVector<f64>,
    pair: QuantilePair,
    condition_on_signs: bool,
) -> Result<SelectiveInference> {
    if omega.len() != problem.n() {
        return Err(Error::validation("omega", "length differs from the response"));
    }
    let v = &problem.y + omega;
    let selection = selection_event(&problem.design, &v, problem.lambda)?;
    let target = ContrastTarget::new(problem, &selection.model, gamma.clone())?;
    let eta = &target.eta;
    let z = &v - eta * (eta.dot(&v) / eta.norm_squared());
    let trunc = if condition_on_signs {
        truncation_interval(&selection, eta, &z)?
    } else {
        truncation_union(&problem.design, problem.lambda, &selection.model, eta, &z)?
    };
    let family = CondNormalFamily::new(target.sigma2_check, target.tau2_check, trunc.clone())?;
    let ci = interval(&family, eta.dot(&problem.y), pair)?;
    Ok(SelectiveInference {
        selection,
        target,
        trunc,
        interval: ci,
    })
}

/// `σ̌(Φ⁻¹(q2) - Φ⁻¹(q1))√(1 + σ²/τ²)`, the length bound for the
/// selective interval of a contrast.
pub fn selective_length_bound(problem: &RegressionProblem, target: &ContrastTarget, pair: QuantilePair) -> f64 {
    target.sigma2_check.sqrt() * pair.z_width() * (1.0 + problem.sigma2 / problem.tau2).sqrt()
}
