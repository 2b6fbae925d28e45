//! `randsel`: selective confidence intervals for the mean of a normal
//! observation after selection on a randomized version of it.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use randsel::lasso_select::{read_regression_csv, selective_interval, selective_length_bound, RegressionProblem};
use randsel::oracle::selfcheck;
use randsel::quantile_ci::{interval, length_bound, QuantilePair};
use randsel::rand_cond_normal::CondNormalFamily;
use randsel::selective_designs::{CarvingDesign, RandResponseDesign};
use randsel::sim::{
    default_a_values, dominance_experiment, expected_length_curve, fmt_float, length_curve,
    write_dominance, write_expected_length, write_length_curve, DesignKind, DominanceConfig,
    ExperimentConfig, TruncFamily,
};
use randsel::trunc_set::TruncationSet;
use randsel::Error;

#[derive(Parser)]
#[command(name = "randsel", version, about = "Selective confidence intervals after randomized selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Confidence interval for the mean from one observation.
    #[command(allow_negative_numbers = true)]
    Ci(CiArgs),
    /// Interval length as a function of the observation (CSV).
    #[command(allow_negative_numbers = true)]
    LengthCurve(CurveArgs),
    /// Monte Carlo conditional expected length as a function of the mean (CSV).
    #[command(allow_negative_numbers = true)]
    ExpectedLength(ExpectedArgs),
    /// Selective intervals against sample splitting, per replicate (CSV).
    #[command(allow_negative_numbers = true)]
    Dominance(DominanceArgs),
    /// Randomized Lasso on a data file and a selective interval for a contrast.
    #[command(allow_negative_numbers = true)]
    LassoDemo(LassoArgs),
    /// Run the numerical oracle suite and report PASS/FAIL per check.
    #[command(allow_negative_numbers = true)]
    Selfcheck(SelfcheckArgs),
}

#[derive(Args, Clone)]
struct LawArgs {
    /// Variance of the observation X (squared data units).
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Variance of the randomization noise U (squared data units).
    #[arg(long, default_value_t = 1.0)]
    tau2: f64,
    /// Lower quantile level q1, in (0, 1).
    #[arg(long, default_value_t = 0.025)]
    q1: f64,
    /// Upper quantile level q2, in (q1, 1).
    #[arg(long, default_value_t = 0.975)]
    q2: f64,
}

#[derive(Args)]
struct OutArgs {
    /// Write output to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CiArgs {
    /// Observed value x (data units).
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    /// Selection set for X + U, e.g. "(-inf,-2),(2,inf)".
    #[arg(long, allow_hyphen_values = true)]
    trunc: TruncationSet,
    #[command(flatten)]
    law: LawArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    /// (-a, a) for each a
    Bounded,
    /// (-inf, -a) U (a, inf) for each a
    Gap,
    /// The set given by --trunc
    Custom,
}

#[derive(Args)]
struct CurveArgs {
    /// Shape of the selection sets.
    #[arg(long, value_enum, default_value_t = FamilyKind::Bounded)]
    family: FamilyKind,
    /// Comma-separated half-widths a > 0 for the bounded and gap families.
    #[arg(long, value_delimiter = ',', default_values_t = default_a_values())]
    a: Vec<f64>,
    /// Selection set for --family custom.
    #[arg(long, allow_hyphen_values = true)]
    trunc: Option<TruncationSet>,
    /// First grid point (data units).
    #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
    from: f64,
    /// Last grid point (data units).
    #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
    to: f64,
    /// Grid spacing (data units); the length curve default is 0.1.
    #[arg(long)]
    step: Option<f64>,
    #[command(flatten)]
    law: LawArgs,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ExpectedArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// Monte Carlo draws per grid point.
    #[arg(long, default_value_t = 2000)]
    replicates: usize,
    /// Master seed of the random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DesignFlag {
    /// Select on a fraction delta of the sample, infer on all of it
    Carving,
    /// Select on Y + omega, infer on Y
    Randresp,
}

#[derive(Args)]
struct DominanceArgs {
    /// Selective design to simulate.
    #[arg(long, value_enum)]
    design: DesignFlag,
    /// Sample size.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Fraction of the sample used for selection (carving); delta*n must be an integer.
    #[arg(long, default_value_t = 0.75)]
    delta: f64,
    /// Selection set for the selection-stage mean.
    #[arg(long, allow_hyphen_values = true, default_value = "(0,inf)")]
    trunc: TruncationSet,
    /// True mean of each observation (data units).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    mu: f64,
    /// Variance of one observation (squared data units).
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Variance of the per-observation randomization noise (randresp; squared data units).
    #[arg(long, default_value_t = 1.0)]
    tau2: f64,
    /// Lower quantile level q1, in (0, 1).
    #[arg(long, default_value_t = 0.025)]
    q1: f64,
    /// Upper quantile level q2, in (q1, 1).
    #[arg(long, default_value_t = 0.975)]
    q2: f64,
    /// Number of replicates kept after selection.
    #[arg(long, default_value_t = 2000)]
    replicates: usize,
    /// Master seed of the random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct LassoArgs {
    /// CSV file with a header row; first column is the response, the rest the design.
    #[arg(long)]
    data: PathBuf,
    /// Lasso penalty (required, > 0).
    #[arg(long)]
    lambda: f64,
    /// Contrast of the selected coefficients: a single integer selects that
    /// design column (0-based, must be selected); otherwise a comma-separated
    /// vector with one weight per selected variable.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Condition on the signs as well as the model.
    #[arg(long)]
    condition_on_signs: bool,
    #[command(flatten)]
    law: LawArgs,
    /// Seed of the randomization noise omega.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Seed of the random test problems.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

/// A failure with its exit code: 2 for invalid input, 3 for numerical
/// failure.
struct Failure {
    code: u8,
    message: String,
}

fn flag_name(field: &str) -> String {
    match field {
        "grid" => "--from/--to/--step".into(),
        "omega" | "z" => "--seed".into(),
        f => format!("--{}", f.replace('_', "-")),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation { field, reason } => Failure {
                code: 2,
                message: format!("invalid {}: {reason}", flag_name(&field)),
            },
            Error::NonConvergence(m) => Failure {
                code: 3,
                message: format!("no convergence: {m}"),
            },
            Error::NoSelection => Failure {
                code: 2,
                message: "invalid --lambda: no variable is selected at this penalty".into(),
            },
            Error::EnumerationTooLarge { .. } => Failure {
                code: 2,
                message: format!("{e}; pass --condition-on-signs"),
            },
            Error::Unsupported(m) => Failure {
                code: 2,
                message: format!("invalid --tau2: {m}"),
            },
            other => Failure {
                code: 3,
                message: other.to_string(),
            },
        }
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("invalid --out: {e}"),
    }
}

fn invalid(flag: &str, reason: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: format!("invalid {flag}: {reason}"),
    }
}

fn sink(out: &OutArgs) -> Result<Box<dyn Write>, Failure> {
    Ok(match &out.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io_failure)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn pair(q1: f64, q2: f64) -> Result<QuantilePair, Failure> {
    Ok(QuantilePair::new(q1, q2)?)
}

fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid("--threads", e))?;
    Ok(pool.install(job))
}

fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(from.is_finite() && to.is_finite() && from <= to) {
        return Err(invalid("--from/--to", "need finite values with from <= to"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("--step", "must be positive"));
    }
    let count = ((to - from) / step + 1e-9).floor();
    if count >= 1e6 {
        return Err(invalid("--step", "grid would exceed one million points"));
    }
    Ok((0..=count as usize).map(|i| from + step * i as f64).collect())
}

fn curve_config(c: &CurveArgs, default_step: f64, replicates: usize, seed: u64) -> Result<ExperimentConfig, Failure> {
    let family = match c.family {
        FamilyKind::Bounded => TruncFamily::Bounded(c.a.clone()),
        FamilyKind::Gap => TruncFamily::Gap(c.a.clone()),
        FamilyKind::Custom => TruncFamily::Custom(
            c.trunc
                .clone()
                .ok_or_else(|| invalid("--trunc", "required with --family custom"))?,
        ),
    };
    let cfg = ExperimentConfig {
        family,
        sigma2: c.law.sigma2,
        tau2: c.law.tau2,
        pair: pair(c.law.q1, c.law.q2)?,
        grid: grid(c.from, c.to, c.step.unwrap_or(default_step))?,
        replicates,
        master_seed: seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_ci(args: CiArgs) -> Result<(), Failure> {
    let p = pair(args.law.q1, args.law.q2)?;
    let fam = CondNormalFamily::new(args.law.sigma2, args.law.tau2, args.trunc)?;
    if !args.x.is_finite() {
        return Err(invalid("--x", "must be finite"));
    }
    let ci = interval(&fam, args.x, p)?;
    let mut w = sink(&args.out)?;
    writeln!(w, "x,lower,upper,length,bound").map_err(io_failure)?;
    writeln!(
        w,
        "{},{},{},{},{}",
        fmt_float(args.x),
        fmt_float(ci.lower),
        fmt_float(ci.upper),
        fmt_float(ci.length()),
        fmt_float(length_bound(&fam, p))
    )
    .map_err(io_failure)?;
    w.flush().map_err(io_failure)
}

fn run_length_curve(args: CurveArgs) -> Result<(), Failure> {
    let cfg = curve_config(&args, 0.1, 1, 0)?;
    let rows = with_threads(args.threads, || length_curve(&cfg))??;
    write_length_curve(&rows, sink(&args.out)?)?;
    Ok(())
}

fn run_expected_length(args: ExpectedArgs) -> Result<(), Failure> {
    if args.curve.law.tau2 <= 0.0 {
        return Err(invalid("--tau2", "the exact sampler needs tau2 > 0"));
    }
    let cfg = curve_config(&args.curve, 0.25, args.replicates, args.seed)?;
    let rows = with_threads(args.curve.threads, || expected_length_curve(&cfg))??;
    write_expected_length(&rows, sink(&args.curve.out)?)?;
    Ok(())
}

fn run_dominance(args: DominanceArgs) -> Result<(), Failure> {
    let p = pair(args.q1, args.q2)?;
    let design = match args.design {
        DesignFlag::Carving => DesignKind::Carving(CarvingDesign::new(args.n, args.delta, args.sigma2, args.trunc)?),
        DesignFlag::Randresp => {
            let d = RandResponseDesign::new(args.n, args.sigma2, args.tau2, args.trunc)?;
            d.split_size()?;
            DesignKind::RandResponse(d)
        }
    };
    let cfg = DominanceConfig {
        design,
        mu: args.mu,
        pair: p,
        replicates: args.replicates,
        master_seed: args.seed,
    };
    let rows = with_threads(args.threads, || dominance_experiment(&cfg))??;
    write_dominance(&rows, sink(&args.out)?)?;
    Ok(())
}

fn parse_gamma(text: Option<&str>, model: &[usize]) -> Result<DVector<f64>, Failure> {
    let Some(text) = text.map(str::trim) else {
        return Ok(DVector::from_fn(model.len(), |i, _| if i == 0 { 1.0 } else { 0.0 }));
    };
    if let Ok(column) = text.parse::<usize>() {
        let pos = model
            .iter()
            .position(|&j| j == column)
            .ok_or_else(|| invalid("--gamma", format!("column {column} is not in the selected model {model:?}")))?;
        return Ok(DVector::from_fn(model.len(), |i, _| if i == pos { 1.0 } else { 0.0 }));
    }
    let values = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| invalid("--gamma", e))?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("--gamma", "weights must be finite"));
    }
    if values.len() != model.len() {
        return Err(invalid(
            "--gamma",
            format!("{} weights given but {} variables are selected", values.len(), model.len()),
        ));
    }
    Ok(DVector::from_vec(values))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn run_lasso(args: LassoArgs) -> Result<(), Failure> {
    let p = pair(args.law.q1, args.law.q2)?;
    let file = File::open(&args.data).map_err(|e| invalid("--data", e))?;
    let (design, y) = read_regression_csv(file)?;
    let problem = RegressionProblem::new(design, y, args.law.sigma2, args.lambda, args.law.tau2)?;
    let noise = Normal::new(0.0, args.law.tau2.sqrt()).map_err(|e| invalid("--tau2", e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let omega = DVector::from_fn(problem.n(), |_, _| noise.sample(&mut rng));
    let selection = randsel::lasso_select::selection_event(&problem.design, &(&problem.y + &omega), problem.lambda)?;
    let gamma = parse_gamma(args.gamma.as_deref(), &selection.model)?;
    let result = selective_interval(&problem, &omega, &gamma, p, args.condition_on_signs)?;
    let bound = selective_length_bound(&problem, &result.target, p);
    let mut w = sink(&args.out)?;
    let rows = [
        ("model", join(&result.selection.model)),
        ("signs", join(result.selection.signs.iter().map(|s| if *s > 0.0 { "+" } else { "-" }))),
        ("gamma", join(result.target.gamma.iter().map(|v| fmt_float(*v)))),
        ("conditioning", if args.condition_on_signs { "model and signs" } else { "model" }.to_string()),
        ("truncation", result.trunc.to_string()),
        ("estimate", fmt_float(result.interval.x)),
        ("sigma2_contrast", fmt_float(result.target.sigma2_check)),
        ("tau2_contrast", fmt_float(result.target.tau2_check)),
        ("lower", fmt_float(result.interval.lower)),
        ("upper", fmt_float(result.interval.upper)),
        ("length", fmt_float(result.interval.length())),
        ("bound", fmt_float(bound)),
    ];
    writeln!(w, "field,value").map_err(io_failure)?;
    for (k, v) in rows {
        writeln!(w, "{k},{v}").map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)
}

fn run_selfcheck(args: SelfcheckArgs) -> Result<(), Failure> {
    let outcomes = with_threads(args.threads, || selfcheck(args.seed))??;
    let mut w = sink(&args.out)?;
    for o in &outcomes {
        writeln!(w, "{o}").map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)?;
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    if failed > 0 {
        return Err(Failure {
            code: 3,
            message: format!("{failed} of {} checks failed", outcomes.len()),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ci(a) => run_ci(a),
        Command::LengthCurve(a) => run_length_curve(a),
        Command::ExpectedLength(a) => run_expected_length(a),
        Command::Dominance(a) => run_dominance(a),
        Command::LassoDemo(a) => run_lasso(a),
        Command::Selfcheck(a) => run_selfcheck(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
