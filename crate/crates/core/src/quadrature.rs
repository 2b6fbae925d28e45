//! Globally adaptive Gauss–Kronrod (10/21-point) integration.
//!
//! Integrands may be vector valued (`[f64; N]`) so that several integrals
//! sharing one set of panels are computed together; their ratios then
//! inherit correlated rather than independent discretization errors.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_132_734_331,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Estimated absolute error (maximum over components).
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    /// Error relative to the per-component target at the time of creation.
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gk21<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = [0.0; N];
    let mut resg = [0.0; N];
    let mut resabs = [0.0; N];
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    for c in 0..N {
        resk[c] = WGK[10] * fc[c];
        resabs[c] = (WGK[10] * fc[c]).abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            resk[c] += WGK[j] * (f1[c] + f2[c]);
            resabs[c] += WGK[j] * (f1[c].abs() + f2[c].abs());
            if j % 2 == 1 {
                resg[c] += WG[j / 2] * (f1[c] + f2[c]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut error = [0.0; N];
    let mut value = [0.0; N];
    for c in 0..N {
        let mean = 0.5 * resk[c];
        let mut resasc = WGK[10] * (fc[c] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j][c] - mean).abs() + (fv2[j][c] - mean).abs());
        }
        let abs_half = half.abs();
        let resasc = resasc * abs_half;
        let resabs_c = resabs[c] * abs_half;
        let mut err = ((resk[c] - resg[c]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs_c > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs_c);
        }
        error[c] = err;
        value[c] = resk[c] * half;
    }
    Panel {
        a,
        b,
        value,
        error,
        priority: 0.0,
    }
}

/// Integrates `f` over the finite interval `[a, b]`, refining the panel
/// with the largest relative error estimate until every component `c`
/// satisfies `err_c ≤ max(abs_tol, rel_tol·|I_c|)` or `max_panels` is
/// reached. Each component thus gets its own relative accuracy, even when
/// one is many orders of magnitude smaller than another.
pub fn integrate_vec<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult<N> {
    let target = |total: &[f64; N]| -> [f64; N] {
        let mut t = [0.0; N];
        for c in 0..N {
            t[c] = abs_tol.max(rel_tol * total[c].abs()).max(f64::MIN_POSITIVE);
        }
        t
    };
    let excess = |err: &[f64; N], tgt: &[f64; N]| -> f64 {
        (0..N).map(|c| err[c] / tgt[c]).fold(0.0, f64::max)
    };
    let mut first = gk21(&f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    first.priority = excess(&first.error, &target(&total));
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while excess(&total_err, &target(&total)) > 1.0 && heap.len() < max_panels {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let mut left = gk21(&f, worst.a, mid);
        let mut right = gk21(&f, mid, worst.b);
        for c in 0..N {
            total[c] += left.value[c] + right.value[c] - worst.value[c];
            total_err[c] += left.error[c] + right.error[c] - worst.error[c];
        }
        let tgt = target(&total);
        left.priority = excess(&left.error, &tgt);
        right.priority = excess(&right.error, &tgt);
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let mut value = [0.0; N];
    let mut errors = [0.0; N];
    for p in heap.iter() {
        for c in 0..N {
            value[c] += p.value[c];
            errors[c] += p.error[c];
        }
    }
    QuadResult {
        value,
        error: errors.iter().copied().fold(0.0, f64::max),
        panels: heap.len(),
        converged: excess(&errors, &target(&value)) <= 1.0,
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult<1> {
    integrate_vec(|x| [f(x)], a, b, abs_tol, rel_tol, 2000)
}

/// `∫_{-∞}^{upper} f(u) du` via `u = upper - (1-t)/t`, `t ∈ (0, 1]`.
pub fn integrate_lower_tail<F: Fn(f64) -> f64>(
    f: F,
    upper: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult<1> {
    integrate(
        |t| {
            let s = (1.0 - t) / t;
            f(upper - s) / (t * t)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// `∫_{lower}^{∞} f(u) du` via `u = lower + (1-t)/t`.
pub fn integrate_upper_tail<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult<1> {
    integrate(
        |t| {
            let s = (1.0 - t) / t;
            f(lower + s) / (t * t)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}
