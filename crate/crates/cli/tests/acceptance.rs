//! Acceptance suite: one PASS/FAIL line per criterion, then a non-zero
//! exit if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use randsel::lasso_select::{
    kkt_residual, lasso_fit, selection_event, selective_interval, selective_length_bound, ContrastTarget,
    RegressionProblem, ACTIVE_THRESHOLD,
};
use randsel::quadrature::integrate;
use randsel::oracle::{check_cdf_routes, check_identities, check_length_bound, check_sampler, CheckOutcome};
use randsel::quantile_ci::{interval, length_bound, mu_q, QuantilePair};
use randsel::rand_cond_normal::CondNormalFamily;
use randsel::selective_designs::{CarvingDesign, RandResponseDesign};
use randsel::sim::{
    default_a_values, default_mu_grid, dominance_experiment, expected_length_curve, length_curve,
    replicate_rng, DesignKind, DominanceConfig, DominanceRow, ExperimentConfig, ExpectedLengthRow,
    TruncFamily,
};
use randsel::trunc_set::TruncationSet;

/// `σ(Φ⁻¹(0.975) - Φ⁻¹(0.025))` for `σ = 1`.
const UNCONDITIONAL_95: f64 = 3.919_927_969_080_108;
/// Coverage window for 2000 replicates at nominal 0.95.
const COVERAGE_WINDOW: (f64, f64) = (0.9354, 0.9646);
const KEPT_REPLICATES: usize = 2000;

struct Verdict {
    passed: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            passed: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        self.passed &= ok;
    }

    /// A line that explains a result without affecting the verdict.
    fn note(&mut self, what: impl Into<String>) {
        self.lines.push(format!("info {}", what.into()));
    }

    fn outcome(&mut self, o: &CheckOutcome) {
        self.check(o.passed(), o.to_string());
    }

    fn within(&mut self, elapsed: Duration, limit_s: f64, what: &str) {
        let s = elapsed.as_secs_f64();
        self.check(s <= limit_s, format!("{what} runtime {s:.1}s <= {limit_s}s"));
    }
}

fn pair95() -> QuantilePair {
    QuantilePair::new(0.025, 0.975).unwrap()
}

fn family(sigma2: f64, tau2: f64, t: &[(f64, f64)]) -> CondNormalFamily {
    CondNormalFamily::new(sigma2, tau2, TruncationSet::new(t.iter().copied()).unwrap()).unwrap()
}

fn coverage_in_window(v: &mut Verdict, covered: usize, kept: usize, what: &str) {
    let c = covered as f64 / kept as f64;
    v.check(
        kept >= KEPT_REPLICATES && (COVERAGE_WINDOW.0..=COVERAGE_WINDOW.1).contains(&c),
        format!("{what}: coverage {c:.4} over {kept} kept replicates, window [{}, {}]", COVERAGE_WINDOW.0, COVERAGE_WINDOW.1),
    );
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();
    match check_length_bound(10_000, 1) {
        Ok(o) => v.outcome(&o),
        Err(e) => v.check(false, format!("interval construction failed: {e}")),
    }
    v.within(start.elapsed(), 120.0, "10^4 random intervals");
    v
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new();
    let fam = family(1.0, 1.0, &[(-1.0, 1.0)]);
    let pair = pair95();
    let bound = length_bound(&fam, pair);
    let ci = interval(&fam, 50.0, pair).unwrap();
    let rel = (bound - ci.length()) / bound;
    v.check(
        (0.0..0.01).contains(&rel),
        format!("length at x=50 is {:.9}, bound {bound:.9}, relative gap {rel:.3e} < 1%", ci.length()),
    );
    for q in [0.025, 0.975] {
        let mu = mu_q(&fam, 40.0, q).unwrap();
        let g = fam.g_cdf(mu, 40.0, 1.0).unwrap();
        let err = (g - (1.0 - q)).abs();
        v.check(err < 1e-3, format!("q={q}: G at mu_q(40) and the upper endpoint = {g:.9}, |G - (1-q)| = {err:.3e} < 1e-3"));
        let gaps: Vec<String> = [40.0, 80.0, 160.0]
            .iter()
            .map(|&x| {
                let mu = mu_q(&fam, x, q).unwrap();
                format!("x={x}: {:.3e}", (fam.g_cdf(mu, x, 1.0).unwrap() - (1.0 - q)).abs())
            })
            .collect();
        v.note(format!("q={q}: |G - (1-q)| decays like 1/x: {}", gaps.join(", ")));
    }
    v
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new();
    let outward: Vec<f64> = (50..=500).map(|i| i as f64 / 10.0).collect();
    for sign in [1.0, -1.0] {
        let cfg = ExperimentConfig {
            family: TruncFamily::Bounded(default_a_values()),
            sigma2: 1.0,
            tau2: 1.0,
            pair: pair95(),
            grid: outward.iter().map(|x| sign * x).collect(),
            replicates: 1,
            master_seed: 0,
        };
        let rows = length_curve(&cfg).unwrap();
        for a in default_a_values() {
            let curve: Vec<_> = rows.iter().filter(|r| r.a == Some(a)).collect();
            let worst_drop = curve.windows(2).map(|w| w[0].length - w[1].length).fold(f64::NEG_INFINITY, f64::max);
            let below = curve.iter().all(|r| r.length < r.bound);
            let last = curve.last().unwrap();
            v.check(
                worst_drop <= 1e-9 && below,
                format!(
                    "bounded a={a}, x from {} to {}: largest decrease {worst_drop:.2e} <= 1e-9, below bound, final gap {:.2e}",
                    sign * 5.0,
                    sign * 50.0,
                    last.bound - last.length
                ),
            );
        }
    }
    let cfg = ExperimentConfig {
        family: TruncFamily::Gap(vec![3.0]),
        sigma2: 1.0,
        tau2: 1.0,
        pair: pair95(),
        grid: vec![0.0],
        replicates: 1,
        master_seed: 0,
    };
    let l0 = length_curve(&cfg).unwrap()[0].length;
    v.check(l0 < UNCONDITIONAL_95, format!("gap a=3: length at x=0 is {l0:.6} < {UNCONDITIONAL_95:.6}"));
    v
}

fn criterion_4() -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();
    let run = |family| {
        expected_length_curve(&ExperimentConfig {
            family,
            sigma2: 1.0,
            tau2: 1.0,
            pair: pair95(),
            grid: default_mu_grid(),
            replicates: KEPT_REPLICATES,
            master_seed: 2024,
        })
        .unwrap()
    };
    let bounded = run(TruncFamily::Bounded(default_a_values()));
    let gap = run(TruncFamily::Gap(default_a_values()));
    v.within(start.elapsed(), 600.0, "both default grids at 2000 draws per point");
    let at = |rows: &[ExpectedLengthRow], a: f64, mu: f64| -> ExpectedLengthRow {
        rows.iter().find(|r| r.a == Some(a) && r.mu == mu).unwrap().clone()
    };
    for a in default_a_values() {
        let zero = at(&bounded, a, 0.0);
        let worst = bounded
            .iter()
            .filter(|r| r.a == Some(a))
            .map(|r| zero.mean_length - (r.mean_length + 3.0 * r.stderr))
            .fold(f64::NEG_INFINITY, f64::max);
        v.check(
            worst <= 0.0,
            format!("bounded a={a}: mean at mu=0 is {:.6}, max excess over other points + 3 stderr {worst:.2e} <= 0", zero.mean_length),
        );
    }
    let a = default_a_values();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let (small, large) = (at(&bounded, a[i], 0.0), at(&bounded, a[j], 0.0));
            let slack = 3.0 * (small.stderr.powi(2) + large.stderr.powi(2)).sqrt();
            v.check(
                small.mean_length + slack >= large.mean_length,
                format!("bounded at mu=0: a={} gives {:.6} >= a={} gives {:.6} (3 stderr {slack:.1e})", a[i], small.mean_length, a[j], large.mean_length),
            );
        }
    }
    for a in default_a_values() {
        let r = at(&gap, a, 10.0);
        let fam = CondNormalFamily::new(1.0, 1.0, TruncationSet::symmetric_gap(a).unwrap()).unwrap();
        let exact = integrate(|x| interval(&fam, x, pair95()).unwrap().length() * fam.pdf(10.0, x), -2.0, 22.0, 1e-12, 1e-12).value[0];
        v.note(format!(
            "gap a={a}: expected length at mu=10 by quadrature {exact:.9} (excess over the limit {:.3e}); Monte Carlo minus quadrature {:.3e}",
            exact - UNCONDITIONAL_95,
            r.mean_length - exact
        ));
        let dev = r.mean_length - UNCONDITIONAL_95;
        v.check(
            dev.abs() <= 3.0 * r.stderr,
            format!(
                "gap a={a}: mean at mu=10 is {:.9}, deviation {dev:.3e} vs 3 stderr {:.3e}",
                r.mean_length,
                3.0 * r.stderr
            ),
        );
    }
    v
}

fn carving() -> CarvingDesign {
    CarvingDesign::new(100, 0.75, 1.0, TruncationSet::new([(0.1, f64::INFINITY)]).unwrap()).unwrap()
}

fn randresp() -> RandResponseDesign {
    RandResponseDesign::new(100, 1.0, 1.0, TruncationSet::new([(0.1, f64::INFINITY)]).unwrap()).unwrap()
}

fn dominance(design: DesignKind, replicates: usize, seed: u64) -> Vec<DominanceRow> {
    dominance_experiment(&DominanceConfig {
        design,
        mu: 0.0,
        pair: pair95(),
        replicates,
        master_seed: seed,
    })
    .unwrap()
}

fn criterion_5() -> Verdict {
    let mut v = Verdict::new();
    // The plain law, simulated by rejection on the joint draw of (X, U).
    let fam = family(1.0, 1.0, &[(f64::NEG_INFINITY, -1.0), (0.5, 2.0)]);
    let mu = 0.3;
    let (mut kept, mut covered, mut stream) = (0, 0, 0);
    while kept < KEPT_REPLICATES {
        let mut rng = replicate_rng(5, stream);
        stream += 1;
        let z: f64 = StandardNormal.sample(&mut rng);
        let x = mu + z;
        let u: f64 = StandardNormal.sample(&mut rng);
        if fam.trunc().contains(x + u) {
            kept += 1;
            covered += usize::from(interval(&fam, x, pair95()).unwrap().contains(mu));
        }
    }
    coverage_in_window(&mut v, covered, kept, "plain law, T=(-inf,-1)U(0.5,2), mu=0.3");
    for (name, design) in [("carving n=100 delta=0.75", DesignKind::Carving(carving())), ("randomized response n=100 tau2=sigma2", DesignKind::RandResponse(randresp()))] {
        let rows = dominance(design, KEPT_REPLICATES, 55);
        let covered = rows.iter().filter(|r| r.covered_selective).count();
        coverage_in_window(&mut v, covered, rows.len(), &format!("{name}, T=(0.1,inf), mu=0"));
    }
    v
}

fn criterion_6() -> Verdict {
    let mut v = Verdict::new();
    let z = pair95().z_width();
    for (name, design, limit) in [
        ("carving", DesignKind::Carving(carving()), z / (0.25f64 * 100.0).sqrt()),
        ("randomized response", DesignKind::RandResponse(randresp()), z / 50f64.sqrt()),
    ] {
        let rows = dominance(design, 10_000, 66);
        let violations = rows.iter().filter(|r| !(r.selective_length() < limit && r.selective_length() < r.splitting_length())).count();
        let longest = rows.iter().map(|r| r.selective_length()).fold(0.0, f64::max);
        v.check(
            violations == 0 && rows.len() == 10_000,
            format!("{name}: {violations} violations over {} replicates, longest {longest:.6} < {limit:.7}", rows.len()),
        );
    }
    v
}

fn criterion_7() -> Verdict {
    let mut v = Verdict::new();
    v.outcome(&check_cdf_routes(1000, 7, 1e-9));
    match check_sampler(20, 100_000, 7) {
        Ok(o) => v.outcome(&o),
        Err(e) => v.check(false, format!("sampler failed: {e}")),
    }
    v
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new();
    match check_identities(20, 10, 8) {
        Ok(outcomes) => outcomes.iter().for_each(|o| v.outcome(o)),
        Err(e) => v.check(false, format!("identity evaluation failed: {e}")),
    }
    v
}

fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(rng))
}

fn gaussian_vector<R: Rng>(rng: &mut R, n: usize, sd: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
}

fn read_off(beta: &DVector<f64>) -> (Vec<usize>, Vec<f64>) {
    let m: Vec<usize> = (0..beta.len()).filter(|&j| beta[j].abs() > ACTIVE_THRESHOLD).collect();
    let s = m.iter().map(|&j| beta[j].signum()).collect();
    (m, s)
}

fn criterion_9() -> Verdict {
    let mut v = Verdict::new();
    // Membership oracle on 50 random instances.
    let (mut disagreements, mut probes, mut worst_kkt) = (0, 0, 0.0f64);
    for inst in 0..50u64 {
        let mut rng = replicate_rng(9, inst);
        let a = gaussian_matrix(&mut rng, 20, 5);
        let y = gaussian_vector(&mut rng, 20, 2.0);
        let lambda = 0.5 * a.tr_mul(&y).amax();
        let sel = selection_event(&a, &y, lambda).unwrap();
        let radius = 0.5 * y.norm();
        for _ in 0..1000 {
            let dir = gaussian_vector(&mut rng, 20, 1.0).normalize();
            let r = radius * rng.random::<f64>().powf(1.0 / 20.0);
            let probe = &y + dir * r;
            let beta = lasso_fit(&a, &probe, lambda).unwrap();
            worst_kkt = worst_kkt.max(kkt_residual(&a, &probe, lambda, &beta));
            let (m, s) = read_off(&beta);
            probes += 1;
            disagreements += usize::from(sel.contains(&probe) != (m == sel.model && s == sel.signs));
        }
    }
    v.check(
        disagreements == 0 && worst_kkt <= 1e-8,
        format!("membership oracle: {disagreements} disagreements over {probes} probes in 50 instances, worst KKT residual {worst_kkt:.1e}"),
    );

    // Conditional coverage on a fixed design.
    let mut rng = replicate_rng(99, 0);
    let a = gaussian_matrix(&mut rng, 20, 5);
    let beta = DVector::from_vec(vec![1.5, -1.0, 0.0, 0.0, 0.0]);
    let theta = &a * &beta;
    let (sigma2, tau2, lambda): (f64, f64, f64) = (1.0, 1.0, 6.0);
    let (target_m, target_s) = read_off(&lasso_fit(&a, &theta, lambda).unwrap());
    for condition_on_signs in [true, false] {
        let (mut kept, mut covered, mut attempts, mut bound_violations) = (0, 0, 0u64, 0);
        while kept < KEPT_REPLICATES && attempts < 1_000_000 {
            let mut rng = replicate_rng(if condition_on_signs { 91 } else { 92 }, attempts);
            attempts += 1;
            let y = &theta + gaussian_vector(&mut rng, 20, sigma2.sqrt());
            let omega = gaussian_vector(&mut rng, 20, tau2.sqrt());
            let (m, s) = read_off(&lasso_fit(&a, &(&y + &omega), lambda).unwrap());
            if m != target_m || (condition_on_signs && s != target_s) {
                continue;
            }
            let problem = RegressionProblem::new(a.clone(), y, sigma2, lambda, tau2).unwrap();
            let gamma = DVector::from_fn(m.len(), |i, _| if i == 0 { 1.0 } else { 0.0 });
            let res = selective_interval(&problem, &omega, &gamma, pair95(), condition_on_signs).unwrap();
            let target = ContrastTarget::new(&problem, &m, gamma).unwrap().value(&theta);
            kept += 1;
            covered += usize::from(res.interval.contains(target));
            bound_violations += usize::from(res.interval.length() >= selective_length_bound(&problem, &res.target, pair95()));
        }
        let what = if condition_on_signs { "model and signs" } else { "model only" };
        coverage_in_window(&mut v, covered, kept, &format!("Lasso, conditioning on {what}, model {target_m:?} ({attempts} draws)"));
        v.check(bound_violations == 0, format!("Lasso, conditioning on {what}: {bound_violations} intervals at or above the length bound"));
    }
    v
}

fn criterion_10() -> Verdict {
    let mut v = Verdict::new();
    let dir = std::env::temp_dir().join(format!("randsel-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let data = dir.join("lasso.csv");
    let mut rng = replicate_rng(10, 0);
    let mut text = String::from("y,x1,x2,x3\n");
    for _ in 0..25 {
        let x: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
        let noise: f64 = StandardNormal.sample(&mut rng);
        text.push_str(&format!("{},{},{},{}\n", 2.0 * x[0] + noise, x[0], x[1], x[2]));
    }
    std::fs::write(&data, text).unwrap();
    let d = data.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["ci", "--x", "0.7", "--trunc", "(-inf,-1),(0.5,2)"],
        vec!["length-curve", "--family", "gap", "--a", "1,3"],
        vec!["expected-length", "--family", "bounded", "--a", "1", "--from", "-2", "--to", "2", "--step", "1", "--replicates", "100", "--seed", "42"],
        vec!["dominance", "--design", "carving", "--replicates", "200", "--seed", "42"],
        vec!["dominance", "--design", "randresp", "--replicates", "200", "--seed", "42"],
        vec!["lasso-demo", "--data", d, "--lambda", "8", "--seed", "42"],
        vec!["selfcheck", "--seed", "42"],
    ];
    let exe = env!("CARGO_BIN_EXE_randsel");
    for args in commands {
        let run = |extra: &[&str]| Command::new(exe).args(&args).args(extra).output().unwrap();
        let first = run(&[]);
        let second = run(&[]);
        let threaded = !matches!(args[0], "ci" | "lasso-demo");
        let (serial, parallel) = if threaded {
            (Some(run(&["--threads", "1"])), Some(run(&["--threads", "4"])))
        } else {
            (None, None)
        };
        let same = first.status.success()
            && first.stdout == second.stdout
            && serial.as_ref().is_none_or(|s| s.stdout == first.stdout)
            && parallel.as_ref().is_none_or(|p| p.stdout == first.stdout);
        v.check(
            same && !first.stdout.is_empty(),
            format!(
                "{}: {} bytes identical across repeated{} runs",
                args[0],
                first.stdout.len(),
                if threaded { ", serial and 4-thread" } else { "" }
            ),
        );
    }
    v
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("strict length bound on random problems", criterion_1),
        ("sharpness at large x", criterion_2),
        ("length curves", criterion_3),
        ("expected length curves", criterion_4),
        ("conditional coverage", criterion_5),
        ("dominance over sample splitting", criterion_6),
        ("distribution oracles", criterion_7),
        ("identity suite", criterion_8),
        ("Lasso pipeline", criterion_9),
        ("reproducibility", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label == *f || label.ends_with(&format!(" {f}"))) {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        println!(
            "{} {label}: {name} ({:.1}s)",
            if verdict.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for l in &verdict.lines {
            println!("    {l}");
        }
        if !verdict.passed {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
