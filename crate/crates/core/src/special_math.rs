//! Foundation numerics: log-gamma, log-beta, adaptive Gauss-Kronrod
//! quadrature over finite and infinite ranges, and guarded series summation.
//!
//! Everything here is a pure function of its inputs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// ½ ln(2π)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::domain("abs_tol must be > 0", abs_tol));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::domain("rel_tol must be > 0", rel_tol));
        }
        if max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be >= 1"));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
        }
    }
}

/// Truncation policy for [`sum_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSpec {
    pub term_rel_cutoff: f64,
    pub min_terms: usize,
    pub max_terms: usize,
}

impl SeriesSpec {
    pub fn new(term_rel_cutoff: f64, min_terms: usize, max_terms: usize) -> Result<Self> {
        if !(term_rel_cutoff > 0.0 && term_rel_cutoff < 1.0) {
            return Err(Error::domain(
                "term_rel_cutoff must lie in (0, 1)",
                term_rel_cutoff,
            ));
        }
        if min_terms == 0 || min_terms > max_terms {
            return Err(Error::invalid(format!(
                "need 1 <= min_terms <= max_terms (got {min_terms}, {max_terms})"
            )));
        }
        Ok(Self {
            term_rel_cutoff,
            min_terms,
            max_terms,
        })
    }

    /// Copy of `self` that will not stop before `n` terms.
    pub fn with_min_terms(self, n: usize) -> Self {
        let min_terms = self.min_terms.max(n);
        Self {
            min_terms,
            max_terms: self.max_terms.max(min_terms),
            ..self
        }
    }
}

impl Default for SeriesSpec {
    fn default() -> Self {
        Self {
            term_rel_cutoff: 1e-15,
            min_terms: 10,
            max_terms: 100_000,
        }
    }
}

// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma requires finite x > 0", x));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let mut series = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1).rev() {
        series += c / (x + i as f64);
    }
    let tmp = x + LANCZOS_G + 0.5;
    (x + 0.5) * tmp.ln() - tmp + LN_SQRT_2PI + (series / x).ln()
}

/// ln B(a, b) for a, b > 0.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("log_beta requires a > 0", a));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain("log_beta requires b > 0", b));
    }
    Ok(ln_beta_unchecked(a, b))
}

pub(crate) fn ln_beta_unchecked(a: f64, b: f64) -> f64 {
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

/// `a * ln(x)` with the convention `0 * ln(0) = 0`.
pub(crate) fn xlogy(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

/// ln(Σ exp(vᵢ)) without overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Sum `term(0) + term(1) + ...`, stopping once at least `min_terms` have
/// been added and a term falls below `term_rel_cutoff * |partial sum|`.
pub fn sum_series<F>(mut term: F, spec: &SeriesSpec) -> Result<f64>
where
    F: FnMut(usize) -> f64,
{
    let mut sum = 0.0;
    for i in 0..spec.max_terms {
        let t = term(i);
        if t.is_nan() {
            return Err(Error::invalid(format!("series term {i} is NaN")));
        }
        sum += t;
        if i + 1 >= spec.min_terms && t.abs() <= spec.term_rel_cutoff * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNonConvergence {
        terms: spec.max_terms,
    })
}

/// Result of an adaptive quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss rule.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_041_582_425,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod_21<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_nan() {
            Err(Error::NanIntegrand { at: x })
        } else {
            Ok(y)
        }
    };

    let fc = eval(center)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return Err(Error::Invalid(format!(
            "integrand is not integrable on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive_finite<F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    let first = gauss_kronrod_21(f, a, b)?;
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;

    let tolerance = |v: f64| spec.abs_tol.max(spec.rel_tol * v.abs());
    while total_error > tolerance(total_value) {
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                subdivisions,
                estimate: total_value,
                error: total_error,
            });
        }
        let worst = heap.pop().expect("heap always holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(Error::QuadratureNonConvergence {
                subdivisions,
                estimate: total_value,
                error: total_error,
            });
        }
        let left = gauss_kronrod_21(f, worst.a, mid)?;
        let right = gauss_kronrod_21(f, mid, worst.b)?;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // drift in the running sums is cleared periodically
        if subdivisions % 64 == 0 {
            total_value = heap.iter().map(|s| s.value).sum();
            total_error = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    let abs_error = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        abs_error,
        subdivisions,
    })
}

/// ∫ₐᵇ f over one piece. Infinite endpoints are mapped onto (0, 1) by
/// x = a + t/(1−t) (or its mirror).
fn integrate_piece<F>(f: &F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    let guarded = |x: f64, jac: f64| -> f64 {
        if !x.is_finite() || !jac.is_finite() {
            0.0
        } else {
            let y = f(x);
            if y == 0.0 {
                0.0
            } else {
                y * jac
            }
        }
    };
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => adaptive_finite(f, lower, upper, spec),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                if s <= 0.0 {
                    return 0.0;
                }
                guarded(lower + t / s, 1.0 / (s * s))
            };
            adaptive_finite(&g, 0.0, 1.0, spec)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                if s <= 0.0 {
                    return 0.0;
                }
                guarded(upper - t / s, 1.0 / (s * s))
            };
            adaptive_finite(&g, 0.0, 1.0, spec)
        }
        (false, false) => {
            let left = integrate_piece(f, f64::NEG_INFINITY, 0.0, spec)?;
            let right = integrate_piece(f, 0.0, f64::INFINITY, spec)?;
            Ok(Integral {
                value: left.value + right.value,
                abs_error: left.abs_error + right.abs_error,
                subdivisions: left.subdivisions + right.subdivisions,
            })
        }
    }
}

/// ∫ f(x) dx from `lower` to `upper`; either bound may be infinite.
pub fn integrate<F>(f: F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_with_breaks(f, lower, upper, &[], spec).map(|r| r.value)
}

/// Like [`integrate`], but splits the range at `breaks` first and reports
/// the accumulated error estimate. Breaks outside `(lower, upper)` are
/// ignored.
pub fn integrate_with_breaks<F>(
    f: F,
    lower: f64,
    upper: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if lower.is_nan() || upper.is_nan() {
        return Err(Error::invalid("integration bounds must not be NaN"));
    }
    if lower == upper {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    if lower > upper {
        return integrate_with_breaks(f, upper, lower, breaks, spec).map(|r| Integral {
            value: -r.value,
            ..r
        });
    }

    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lower && *b < upper)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(lower);
    edges.extend(points);
    edges.push(upper);

    let mut total = Integral {
        value: 0.0,
        abs_error: 0.0,
        subdivisions: 0,
    };
    for w in edges.windows(2) {
        let piece = integrate_piece(&f, w[0], w[1], spec)?;
        total.value += piece.value;
        total.abs_error += piece.abs_error;
        total.subdivisions += piece.subdivisions;
    }
    Ok(total)
}
