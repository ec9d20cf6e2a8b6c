//! Bayes factor functions: log BF₁₀ traced over a grid of effect sizes,
//! with a refined maximum, threshold crossings, and the product rule for
//! independent studies sharing one effect size.

use crate::closed_form::TestStatistic;
use crate::effect_map::{statistic_family_for, tau2_for, EffectSize, StudyDesign};
use crate::error::{Error, Result};

/// ω-width at which maximization and root refinement stop.
pub const OMEGA_TOLERANCE: f64 = 1e-6;

/// One reported statistic and the design that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    statistic: TestStatistic,
    design: StudyDesign,
    label: String,
}

impl Study {
    pub fn new(statistic: TestStatistic, design: StudyDesign, label: impl Into<String>) -> Result<Self> {
        statistic.validate()?;
        let label = label.into();
        let expected = statistic_family_for(&design);
        if statistic.family() != expected {
            return Err(Error::invalid(format!(
                "study '{label}': {} design expects a {expected} statistic, got {}",
                design.kind().as_str(),
                statistic.family()
            )));
        }
        if let (Some(dk), Some(sk)) = (design.k(), statistic.df1()) {
            if dk != sk {
                return Err(Error::invalid(format!(
                    "study '{label}': design k = {dk} but the statistic has df1 = {sk}"
                )));
            }
        }
        design.tau2_per_omega2()?;
        Ok(Self {
            statistic,
            design,
            label,
        })
    }

    pub fn statistic(&self) -> &TestStatistic {
        &self.statistic
    }

    pub fn design(&self) -> &StudyDesign {
        &self.design
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Prior scale for this study at effect size `omega`.
    pub fn tau2_at(&self, omega: f64) -> Result<f64> {
        tau2_for(&self.design, EffectSize::new(omega)?)
    }
}

/// Anything that yields ln BF₁₀ as a function of ω.
pub trait EffectCurve {
    fn log_bf_at(&self, omega: f64) -> Result<f64>;
}

impl EffectCurve for Study {
    fn log_bf_at(&self, omega: f64) -> Result<f64> {
        let tau2 = self.tau2_at(omega)?;
        if tau2 == 0.0 {
            return Ok(0.0);
        }
        self.statistic.log_bf(tau2)
    }
}

/// Product of per-study Bayes factors at a shared effect size.
#[derive(Debug, Clone, Copy)]
pub struct Combined<'a>(pub &'a [Study]);

impl EffectCurve for Combined<'_> {
    fn log_bf_at(&self, omega: f64) -> Result<f64> {
        self.0.iter().map(|s| s.log_bf_at(omega)).sum()
    }
}

impl<F> EffectCurve for F
where
    F: Fn(f64) -> Result<f64>,
{
    fn log_bf_at(&self, omega: f64) -> Result<f64> {
        self(omega)
    }
}

/// Linearly spaced effect-size grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectGrid {
    min: f64,
    max: f64,
    steps: usize,
}

impl EffectGrid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min >= 0.0) || !min.is_finite() {
            return Err(Error::domain("grid min must be finite and >= 0", min));
        }
        if !(max > min) || !max.is_finite() {
            return Err(Error::domain("grid max must be finite and > min", max));
        }
        if steps < 2 {
            return Err(Error::invalid("grid needs at least 2 steps"));
        }
        Ok(Self { min, max, steps })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn omegas(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * (i as f64 / last)
                }
            })
            .collect()
    }
}

impl Default for EffectGrid {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 1.0,
            steps: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub omega: f64,
    pub log_bf10: f64,
}

/// A Bayes factor function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BffCurve {
    pub points: Vec<CurvePoint>,
    pub max_log_bf: f64,
    pub argmax_omega: f64,
    /// Effect sizes where BF₁₀ crosses 1.
    pub crossings: Vec<f64>,
}

impl BffCurve {
    pub fn max_bf(&self) -> f64 {
        self.max_log_bf.exp()
    }
}

/// Evaluate any [`EffectCurve`] on `grid`, refine its maximum and locate
/// the BF = 1 crossings.
pub fn evaluate_curve<C>(curve: &C, grid: &EffectGrid) -> Result<BffCurve>
where
    C: EffectCurve + ?Sized,
{
    let points = grid
        .omegas()
        .into_iter()
        .map(|omega| {
            curve
                .log_bf_at(omega)
                .map(|log_bf10| CurvePoint { omega, log_bf10 })
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax_omega, max_log_bf) = refine_max(&points, curve)?;
    let crossings = find_crossings(&points, 0.0, curve)?;
    Ok(BffCurve {
        points,
        max_log_bf,
        argmax_omega,
        crossings,
    })
}

pub fn evaluate_bff(study: &Study, grid: &EffectGrid) -> Result<BffCurve> {
    evaluate_curve(study, grid)
}

/// Combined BFF of independent studies: per-study log BFs summed on one
/// shared grid, each study using its own τ²(ω).
pub fn combine(studies: &[Study], grid: &EffectGrid) -> Result<BffCurve> {
    if studies.is_empty() {
        return Err(Error::invalid("combine needs at least one study"));
    }
    evaluate_curve(&Combined(studies), grid)
}

/// Golden-section refinement of the best grid point within its two
/// neighbouring cells. Never returns less than the best grid value.
pub fn refine_max<C>(points: &[CurvePoint], curve: &C) -> Result<(f64, f64)>
where
    C: EffectCurve + ?Sized,
{
    let (best, _) = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.log_bf10.total_cmp(&b.1.log_bf10))
        .ok_or_else(|| Error::invalid("cannot maximize an empty curve"))?;
    let grid_best = points[best];
    if points.len() < 2 {
        return Ok((grid_best.omega, grid_best.log_bf10));
    }
    let lo = points[best.saturating_sub(1)].omega;
    let hi = points[(best + 1).min(points.len() - 1)].omega;
    let (omega, value) = golden_section_max(curve, lo, hi)?;
    if value > grid_best.log_bf10 {
        Ok((omega, value))
    } else {
        Ok((grid_best.omega, grid_best.log_bf10))
    }
}

fn golden_section_max<C>(curve: &C, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    C: EffectCurve + ?Sized,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = curve.log_bf_at(c)?;
    let mut fd = curve.log_bf_at(d)?;
    while b - a > OMEGA_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = curve.log_bf_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = curve.log_bf_at(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Effect sizes where the curve crosses `threshold_log_bf`. Sign changes
/// between consecutive grid points are bracketed and then bisected on the
/// underlying function. Points lying exactly on the threshold are not
/// counted unless the curve changes side across them; tangential touches
/// are not reported.
pub fn find_crossings<C>(points: &[CurvePoint], threshold_log_bf: f64, curve: &C) -> Result<Vec<f64>>
where
    C: EffectCurve + ?Sized,
{
    let side = |v: f64| {
        let d = v - threshold_log_bf;
        if d > 0.0 {
            1i8
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut out = Vec::new();
    // last grid point strictly off the threshold
    let mut prev: Option<(usize, i8)> = None;
    for (i, p) in points.iter().enumerate() {
        let s = side(p.log_bf10);
        if s == 0 {
            continue;
        }
        if let Some((j, ps)) = prev {
            if ps != s {
                if j + 1 < i {
                    // the curve sits exactly on the threshold in between
                    out.push(points[j + 1].omega);
                } else {
                    out.push(bisect(curve, threshold_log_bf, points[j].omega, points[i].omega, ps)?);
                }
            }
        }
        prev = Some((i, s));
    }
    Ok(out)
}

fn bisect<C>(curve: &C, threshold: f64, mut lo: f64, mut hi: f64, lo_side: i8) -> Result<f64>
where
    C: EffectCurve + ?Sized,
{
    while hi - lo > OMEGA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let d = curve.log_bf_at(mid)? - threshold;
        if d == 0.0 {
            return Ok(mid);
        }
        if (d > 0.0) == (lo_side > 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
