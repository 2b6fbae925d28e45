//! Simulation harness: length curves, Monte Carlo expected lengths, and
//! the comparison of selective intervals against sample splitting.
//!
//! Every replicate draws from its own ChaCha stream, selected by a counter
//! derived from its position in the output table, so results do not depend
//! on how rayon schedules work. Rows are always emitted in
//! `(a, grid point, replicate)` order.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantile_ci::{interval, length_bound, QuantilePair};
use crate::rand_cond_normal::CondNormalFamily;
use crate::selective_designs::{CarvingDesign, RandResponseDesign};
use crate::trunc_set::TruncationSet;

/// Draws allowed per kept replicate before rejection sampling gives up.
pub const MAX_REJECTION_ATTEMPTS: u64 = 10_000_000;

/// The truncation sets a curve is computed for.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncFamily {
    /// `(-a, a)` for each listed `a`.
    Bounded(Vec<f64>),
    /// `(-∞, -a) ∪ (a, ∞)` for each listed `a`.
    Gap(Vec<f64>),
    /// One fixed set.
    Custom(TruncationSet),
}

impl TruncFamily {
    /// `(a, T)` pairs; `a` is `None` for a custom set.
    pub fn members(&self) -> Result<Vec<(Option<f64>, TruncationSet)>> {
        match self {
            TruncFamily::Bounded(a) | TruncFamily::Gap(a) => {
                if a.is_empty() {
                    return Err(Error::validation("a", "need at least one value"));
                }
                a.iter()
                    .map(|&a| {
                        if !(a > 0.0 && a.is_finite()) {
                            return Err(Error::validation("a", format!("{a} must be positive and finite")));
                        }
                        let t = match self {
                            TruncFamily::Bounded(_) => TruncationSet::symmetric_bounded(a)?,
                            _ => TruncationSet::symmetric_gap(a)?,
                        };
                        Ok((Some(a), t))
                    })
                    .collect()
            }
            TruncFamily::Custom(t) => Ok(vec![(None, t.clone())]),
        }
    }
}

/// `[-10, 10]` in steps of 0.1.
pub fn default_x_grid() -> Vec<f64> {
    (-100..=100).map(|i| i as f64 / 10.0).collect()
}

/// `[-10, 10]` in steps of 0.25.
pub fn default_mu_grid() -> Vec<f64> {
    (-40..=40).map(|i| i as f64 / 4.0).collect()
}

pub fn default_a_values() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 3.0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: TruncFamily,
    pub sigma2: f64,
    pub tau2: f64,
    pub pair: QuantilePair,
    /// Observation values for length curves, parameter values for
    /// expected-length curves.
    pub grid: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.family.members()?;
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::validation("sigma2", format!("{} must be positive and finite", self.sigma2)));
        }
        if !(self.tau2 >= 0.0 && self.tau2.is_finite()) {
            return Err(Error::validation("tau2", format!("{} must be non-negative and finite", self.tau2)));
        }
        if self.grid.is_empty() {
            return Err(Error::validation("grid", "must not be empty"));
        }
        if let Some(g) = self.grid.iter().find(|g| !g.is_finite()) {
            return Err(Error::validation("grid", format!("{g} is not finite")));
        }
        if self.replicates == 0 {
            return Err(Error::validation("replicates", "must be at least 1"));
        }
        Ok(())
    }
}

/// The generator for one replicate: `master_seed` picks the key and the
/// replicate's counter picks the stream.
pub fn replicate_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Formats a float with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_a(a: Option<f64>) -> String {
    a.map(fmt_float).unwrap_or_default()
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Inconsistent(format!("write failed: {e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthRow {
    pub a: Option<f64>,
    pub x: f64,
    pub length: f64,
    pub bound: f64,
    pub unconditional_length: f64,
}

/// Interval length as a function of the observation, for each set.
pub fn length_curve(cfg: &ExperimentConfig) -> Result<Vec<LengthRow>> {
    cfg.validate()?;
    let unconditional = cfg.sigma2.sqrt() * cfg.pair.z_width();
    let mut jobs = Vec::new();
    for (a, t) in cfg.family.members()? {
        let fam = CondNormalFamily::new(cfg.sigma2, cfg.tau2, t)?;
        for &x in &cfg.grid {
            jobs.push((a, fam.clone(), x));
        }
    }
    jobs.into_par_iter()
        .map(|(a, fam, x)| {
            let ci = interval(&fam, x, cfg.pair)?;
            Ok(LengthRow {
                a,
                x,
                length: ci.length(),
                bound: length_bound(&fam, cfg.pair),
                unconditional_length: unconditional,
            })
        })
        .collect()
}

pub fn write_length_curve<W: Write>(rows: &[LengthRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "x", "length", "bound", "unconditional_length"]).map_err(io_error)?;
    for r in rows {
        w.write_record([
            fmt_a(r.a),
            fmt_float(r.x),
            fmt_float(r.length),
            fmt_float(r.bound),
            fmt_float(r.unconditional_length),
        ])
        .map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedLengthRow {
    pub a: Option<f64>,
    pub mu: f64,
    pub mean_length: f64,
    pub stderr: f64,
    pub replicates: usize,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Conditional expected interval length as a function of the parameter,
/// estimated from `replicates` exact draws per point.
pub fn expected_length_curve(cfg: &ExperimentConfig) -> Result<Vec<ExpectedLengthRow>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for (a, t) in cfg.family.members()? {
        let fam = CondNormalFamily::new(cfg.sigma2, cfg.tau2, t)?;
        for &mu in &cfg.grid {
            points.push((a, fam.clone(), mu));
        }
    }
    let reps = cfg.replicates as u64;
    let lengths: Vec<f64> = (0..points.len() as u64 * reps)
        .into_par_iter()
        .map(|job| {
            let (_, fam, mu) = &points[(job / reps) as usize];
            let mut rng = replicate_rng(cfg.master_seed, job);
            let x = fam.sample(*mu, &mut rng)?;
            Ok(interval(fam, x, cfg.pair)?.length())
        })
        .collect::<Result<_>>()?;
    Ok(points
        .iter()
        .zip(lengths.chunks(cfg.replicates))
        .map(|((a, _, mu), chunk)| {
            let (mean_length, stderr) = mean_and_stderr(chunk);
            ExpectedLengthRow {
                a: *a,
                mu: *mu,
                mean_length,
                stderr,
                replicates: chunk.len(),
            }
        })
        .collect())
}

pub fn write_expected_length<W: Write>(rows: &[ExpectedLengthRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "mu", "mc_mean_length", "mc_stderr", "replicates"]).map_err(io_error)?;
    for r in rows {
        w.write_record([
            fmt_a(r.a),
            fmt_float(r.mu),
            fmt_float(r.mean_length),
            fmt_float(r.stderr),
            r.replicates.to_string(),
        ])
        .map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

/// Which selective design a dominance experiment simulates.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignKind {
    Carving(CarvingDesign),
    RandResponse(RandResponseDesign),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceConfig {
    pub design: DesignKind,
    /// True mean of each observation.
    pub mu: f64,
    pub pair: QuantilePair,
    pub replicates: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceRow {
    pub replicate: usize,
    /// Draws needed until the selection event occurred.
    pub attempts: u64,
    pub selective_lower: f64,
    pub selective_upper: f64,
    pub splitting_lower: f64,
    pub splitting_upper: f64,
    pub covered_selective: bool,
    pub covered_splitting: bool,
}

impl DominanceRow {
    pub fn selective_length(&self) -> f64 {
        self.selective_upper - self.selective_lower
    }

    pub fn splitting_length(&self) -> f64 {
        self.splitting_upper - self.splitting_lower
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

fn dominance_replicate(cfg: &DominanceConfig, replicate: usize) -> Result<DominanceRow> {
    let mut rng = replicate_rng(cfg.master_seed, replicate as u64);
    let mu = cfg.mu;
    let mut attempts = 0;
    let (selective, splitting) = match &cfg.design {
        DesignKind::Carving(d) => {
            // The selection mean and the hold-out mean are independent and
            // together sufficient for the full sample.
            let sigma = d.sigma2().sqrt();
            let sel_sd = sigma / (d.selection_size() as f64).sqrt();
            let hold_sd = sigma / (d.holdout_size() as f64).sqrt();
            let sel_mean = loop {
                attempts += 1;
                let v = normal(&mut rng, mu, sel_sd);
                if d.trunc().contains(v) {
                    break v;
                }
                if attempts >= MAX_REJECTION_ATTEMPTS {
                    return Err(rejection_failure(replicate));
                }
            };
            let hold_mean = normal(&mut rng, mu, hold_sd);
            let full = (d.selection_size() as f64 * sel_mean + d.holdout_size() as f64 * hold_mean) / d.n() as f64;
            (d.carving_interval(full, cfg.pair)?, d.splitting_interval(hold_mean, cfg.pair)?)
        }
        DesignKind::RandResponse(d) => {
            let n = d.n() as f64;
            let y_sd = (d.sigma2() / n).sqrt();
            let w_sd = (d.tau2() / n).sqrt();
            let ybar = loop {
                attempts += 1;
                let y = normal(&mut rng, mu, y_sd);
                let w = normal(&mut rng, 0.0, w_sd);
                if d.trunc().contains(y + w) {
                    break y;
                }
                if attempts >= MAX_REJECTION_ATTEMPTS {
                    return Err(rejection_failure(replicate));
                }
            };
            // The split comparator selects on the other n - m observations,
            // so its inference mean is independent of the selection event.
            let m = d.split_size()? as f64;
            let split_mean = normal(&mut rng, mu, (d.sigma2() / m).sqrt());
            (d.randomized_interval(ybar, cfg.pair)?, d.splitting_interval(split_mean, cfg.pair)?)
        }
    };
    Ok(DominanceRow {
        replicate,
        attempts,
        selective_lower: selective.lower,
        selective_upper: selective.upper,
        splitting_lower: splitting.lower,
        splitting_upper: splitting.upper,
        covered_selective: selective.contains(mu),
        covered_splitting: splitting.contains(mu),
    })
}

fn rejection_failure(replicate: usize) -> Error {
    Error::NonConvergence(format!(
        "replicate {replicate}: selection event not observed in {MAX_REJECTION_ATTEMPTS} draws"
    ))
}

/// Simulates the full data until the selection event occurs, then builds
/// the selective interval and the sample-splitting interval.
pub fn dominance_experiment(cfg: &DominanceConfig) -> Result<Vec<DominanceRow>> {
    if cfg.replicates == 0 {
        return Err(Error::validation("replicates", "must be at least 1"));
    }
    if !cfg.mu.is_finite() {
        return Err(Error::validation("mu", "must be finite"));
    }
    if let DesignKind::RandResponse(d) = &cfg.design {
        d.split_size()?;
    }
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| dominance_replicate(cfg, r))
        .collect()
}

pub fn write_dominance<W: Write>(rows: &[DominanceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "replicate",
        "attempts",
        "selective_lower",
        "selective_upper",
        "selective_length",
        "splitting_length",
        "covered_selective",
        "covered_splitting",
    ])
    .map_err(io_error)?;
    for r in rows {
        w.write_record([
            r.replicate.to_string(),
            r.attempts.to_string(),
            fmt_float(r.selective_lower),
            fmt_float(r.selective_upper),
            fmt_float(r.selective_length()),
            fmt_float(r.splitting_length()),
            u8::from(r.covered_selective).to_string(),
            u8::from(r.covered_splitting).to_string(),
        ])
        .map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}
