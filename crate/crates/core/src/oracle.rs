//! Brute-force verification of the closed-form Bayes factors.
//!
//! Null and noncentral densities of the four statistics are evaluated from
//! their textbook representations (a Poisson-weighted series for χ² and F,
//! an integral over the chi variate for t), and the alternative marginal is
//! obtained by integrating the noncentral density against the prior on λ.
//! This path is far slower than the closed forms and shares nothing with
//! them beyond `log_gamma`.

use crate::closed_form::TestStatistic;
use crate::error::{Error, Result};
use crate::priors::{gamma_log_pdf, GammaNcpPrior, NormalMomentPrior};
use crate::special_math::{
    integrate_with_breaks, ln_beta_unchecked, ln_gamma_unchecked, log_sum_exp, sum_series,
    xlogy, QuadratureSpec, SeriesSpec, LN_SQRT_2PI,
};

/// Largest tolerated ratio of Σ|term| to |Σ term| in the t series.
const MAX_SERIES_CANCELLATION: f64 = 1e4;

/// A statistic evaluated under a noncentral alternative with parameter λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralDensityQuery {
    pub statistic: TestStatistic,
    pub lambda: f64,
}

impl NoncentralDensityQuery {
    pub fn new(statistic: TestStatistic, lambda: f64) -> Result<Self> {
        statistic.validate()?;
        if !lambda.is_finite() {
            return Err(Error::domain("lambda must be finite", lambda));
        }
        if matches!(statistic, TestStatistic::ChiSq { .. } | TestStatistic::F { .. }) && lambda < 0.0 {
            return Err(Error::domain("chi-squared / F non-centrality must be >= 0", lambda));
        }
        Ok(Self { statistic, lambda })
    }
}

/// Numerical settings for the oracle; tighter than the library defaults so
/// that oracle error stays well below the 1e-6 comparison tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub quadrature: QuadratureSpec,
    pub series: SeriesSpec,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec {
                abs_tol: 1e-15,
                rel_tol: 1e-12,
                max_subdivisions: 2000,
            },
            series: SeriesSpec::default(),
        }
    }
}

fn log_chisq_density(h: f64, k: f64) -> f64 {
    let half = 0.5 * k;
    if h == 0.0 {
        return gamma_log_pdf(0.0, half, 0.5);
    }
    -half * std::f64::consts::LN_2 - ln_gamma_unchecked(half) + (half - 1.0) * h.ln() - 0.5 * h
}

fn log_f_density(f: f64, k: f64, m: f64) -> f64 {
    let half = 0.5 * k;
    if f == 0.0 {
        return match half.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
            Some(std::cmp::Ordering::Equal) => -ln_beta_unchecked(1.0, 0.5 * m) + (k / m).ln(),
            _ => f64::INFINITY,
        };
    }
    -ln_beta_unchecked(half, 0.5 * m) + half * (k / m).ln() + (half - 1.0) * f.ln()
        - 0.5 * (k + m) * (k * f / m).ln_1p()
}

fn log_t_density(t: f64, nu: f64) -> f64 {
    ln_gamma_unchecked(0.5 * (nu + 1.0))
        - ln_gamma_unchecked(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()
}

/// Central (null) log density of a statistic.
pub fn log_density_null(statistic: &TestStatistic) -> Result<f64> {
    statistic.validate()?;
    Ok(match *statistic {
        TestStatistic::Z { z } => -LN_SQRT_2PI - 0.5 * z * z,
        TestStatistic::T { t, nu } => log_t_density(t, f64::from(nu)),
        TestStatistic::ChiSq { h, k } => log_chisq_density(h, f64::from(k)),
        TestStatistic::F { f, k, m } => log_f_density(f, f64::from(k), f64::from(m)),
    })
}

impl Oracle {
    /// Noncentral log density at the query's λ.
    pub fn log_density_noncentral(&self, q: &NoncentralDensityQuery) -> Result<f64> {
        let lambda = q.lambda;
        match q.statistic {
            TestStatistic::Z { z } => Ok(-LN_SQRT_2PI - 0.5 * (z - lambda) * (z - lambda)),
            TestStatistic::T { t, nu } => self.log_noncentral_t_integral(t, f64::from(nu), lambda),
            TestStatistic::ChiSq { h, k } => self.log_noncentral_chisq(h, f64::from(k), lambda),
            TestStatistic::F { f, k, m } => {
                self.log_noncentral_f(f, f64::from(k), f64::from(m), lambda)
            }
        }
    }

    /// Noncentral t density from its integral form
    /// `C · e^{−νλ²/(2d²)} ∫₀^∞ yᵛ e^{−(y − λt/d)²/2} dy`, `d = √(t² + ν)`.
    fn log_noncentral_t_integral(&self, t: f64, nu: f64, lambda: f64) -> Result<f64> {
        let d2 = t * t + nu;
        let d = d2.sqrt();
        let mu = lambda * t / d;
        let log_c = 0.5 * nu * nu.ln()
            - 0.5 * std::f64::consts::PI.ln()
            - ln_gamma_unchecked(0.5 * nu)
            - 0.5 * (nu - 1.0) * std::f64::consts::LN_2
            - 0.5 * (nu + 1.0) * d2.ln();
        // integrand peaks at y* where ν/y = y − μ
        let y_peak = 0.5 * (mu + (mu * mu + 4.0 * nu).sqrt());
        let log_peak = nu * y_peak.ln() - 0.5 * (y_peak - mu) * (y_peak - mu);
        let integrand = |y: f64| {
            if y <= 0.0 {
                return 0.0;
            }
            (nu * y.ln() - 0.5 * (y - mu) * (y - mu) - log_peak).exp()
        };
        let spread = 1.0 + 0.5 * y_peak.min(1.0);
        let breaks = [y_peak - 4.0 * spread, y_peak, y_peak + 4.0 * spread];
        let integral = integrate_with_breaks(integrand, 0.0, f64::INFINITY, &breaks, &self.quadrature)?;
        Ok(log_c - 0.5 * nu * lambda * lambda / d2 + log_peak + integral.value.ln())
    }

    /// Noncentral t density from its power series in `√2·λt/d`:
    /// `νᵛᐟ² e^{−λ²/2} / (√π Γ(ν/2) d^{ν+1}) · Σⱼ Γ((ν+j+1)/2) (√2 λt/d)ʲ / j!`.
    /// Independent of the integral form; used to cross-check it. When
    /// `λt < 0` the terms alternate, and the sum is refused once cancellation
    /// would cost more than four digits.
    pub fn log_density_noncentral_t_series(&self, t: f64, nu: u32, lambda: f64) -> Result<f64> {
        let nu = f64::from(nu);
        if !(nu >= 1.0) || !t.is_finite() || !lambda.is_finite() {
            return Err(Error::invalid("t series needs finite t, lambda and nu >= 1"));
        }
        let d2 = t * t + nu;
        let log_prefix = 0.5 * nu * nu.ln()
            - 0.5 * lambda * lambda
            - 0.5 * std::f64::consts::PI.ln()
            - ln_gamma_unchecked(0.5 * nu)
            - 0.5 * (nu + 1.0) * d2.ln();
        let x = std::f64::consts::SQRT_2 * lambda * t / d2.sqrt();
        if x == 0.0 {
            return Ok(log_prefix + ln_gamma_unchecked(0.5 * (nu + 1.0)));
        }
        let log_abs_x = x.abs().ln();
        let log_term = |j: usize| {
            let j = j as f64;
            j * log_abs_x + ln_gamma_unchecked(0.5 * (nu + j + 1.0)) - ln_gamma_unchecked(j + 1.0)
        };
        let mut peak = 0usize;
        while log_term(peak + 1) > log_term(peak) {
            peak += 1;
        }
        let reference = log_term(peak);
        let negative = x < 0.0;
        let spec = self.series.with_min_terms(peak + 10);
        let sum = sum_series(
            |j| {
                let mag = (log_term(j) - reference).exp();
                if negative && j % 2 == 1 {
                    -mag
                } else {
                    mag
                }
            },
            &spec,
        )?;
        if negative {
            let magnitude = sum_series(|j| (log_term(j) - reference).exp(), &spec)?;
            if !(sum > 0.0) || magnitude / sum > MAX_SERIES_CANCELLATION {
                return Err(Error::invalid(
                    "t series is ill-conditioned here (alternating terms cancel)",
                ));
            }
        }
        Ok(log_prefix + reference + sum.ln())
    }

    /// Poisson(λ/2)-weighted mixture `Σᵢ w_i · component_i`, in log space.
    /// `ratio(i)` is term(i+1)/term(i), which must eventually fall below 1.
    fn poisson_mixture<L, R>(&self, lambda: f64, log_component: L, ratio: R) -> Result<f64>
    where
        L: Fn(f64) -> f64,
        R: Fn(f64) -> f64,
    {
        let half = 0.5 * lambda;
        let log_half = half.ln();
        let log_term = |i: usize| {
            let i = i as f64;
            -half + i * log_half - ln_gamma_unchecked(i + 1.0) + log_component(i)
        };
        let mut peak = 0usize;
        while ratio(peak as f64) > 1.0 {
            peak += 1;
            if peak > self.series.max_terms {
                return Err(Error::SeriesNonConvergence {
                    terms: self.series.max_terms,
                });
            }
        }
        // terms rise until the Poisson mode, so never stop before it
        let poisson_mode = half.ceil() as usize;
        let spec = self.series.with_min_terms(peak.max(poisson_mode) + 10);
        let reference = log_term(peak);
        let sum = sum_series(|i| (log_term(i) - reference).exp(), &spec)?;
        Ok(reference + sum.ln())
    }

    fn log_noncentral_chisq(&self, h: f64, k: f64, lambda: f64) -> Result<f64> {
        if lambda == 0.0 {
            return Ok(log_chisq_density(h, k));
        }
        if h == 0.0 {
            // only the i = 0 component is nonzero at the origin
            return Ok(-0.5 * lambda + log_chisq_density(0.0, k));
        }
        self.poisson_mixture(
            lambda,
            |i| log_chisq_density(h, k + 2.0 * i),
            |i| (0.5 * lambda) / (i + 1.0) * (0.5 * h) / (0.5 * k + i),
        )
    }

    fn log_noncentral_f(&self, f: f64, k: f64, m: f64, lambda: f64) -> Result<f64> {
        if lambda == 0.0 {
            return Ok(log_f_density(f, k, m));
        }
        if f == 0.0 {
            return Ok(-0.5 * lambda + log_f_density(0.0, k, m));
        }
        let kf_m = k * f / m;
        let log1p_kf_m = kf_m.ln_1p();
        let x = kf_m / (1.0 + kf_m);
        self.poisson_mixture(
            lambda,
            |r| {
                let a = 0.5 * k + r;
                -ln_beta_unchecked(a, 0.5 * m) + a * (k / m).ln() + xlogy(a - 1.0, f)
                    - (a + 0.5 * m) * log1p_kf_m
            },
            |r| (0.5 * lambda) / (r + 1.0) * x * (0.5 * (k + m) + r) / (0.5 * k + r),
        )
    }

    /// ln m₁(x | τ²), the alternative marginal, by quadrature over λ.
    pub fn log_marginal_quadrature(&self, statistic: &TestStatistic, tau2: f64) -> Result<f64> {
        let log_m0 = log_density_null(statistic)?;
        let shift = if log_m0.is_finite() { log_m0 } else { 0.0 };
        Ok(self.scaled_marginal(statistic, tau2, shift)? + shift)
    }

    /// ln BF₁₀ by quadrature: ln ∫ p(x|λ) π(λ|τ²) dλ − ln p₀(x).
    pub fn log_bf_quadrature(&self, statistic: &TestStatistic, tau2: f64) -> Result<f64> {
        let log_m0 = log_density_null(statistic)?;
        if !log_m0.is_finite() {
            return Err(Error::domain(
                "null density is zero or infinite at this statistic",
                statistic.value(),
            ));
        }
        self.scaled_marginal(statistic, tau2, log_m0)
    }

    /// ln ∫ exp(ln p(x|λ) + ln π(λ) − shift) dλ
    fn scaled_marginal(&self, statistic: &TestStatistic, tau2: f64, shift: f64) -> Result<f64> {
        statistic.validate()?;
        let value = statistic.value();
        let log_noncentral = |lambda: f64| -> Result<f64> {
            self.log_density_noncentral(&NoncentralDensityQuery {
                statistic: *statistic,
                lambda,
            })
        };
        // first error raised inside the integrand, if any
        let failure = std::cell::RefCell::new(None::<Error>);
        let guard = |r: Result<f64>| match r {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };

        let integral = match statistic {
            TestStatistic::Z { .. } | TestStatistic::T { .. } => {
                let prior = NormalMomentPrior::centered(tau2)?;
                let shrink = tau2 / (tau2 + 1.0);
                let tau = tau2.sqrt();
                let integrand = |lambda: f64| {
                    let lp = prior.log_density(lambda);
                    if lp == f64::NEG_INFINITY {
                        return 0.0;
                    }
                    guard(log_noncentral(lambda).map(|ln| (ln + lp - shift).exp()))
                };
                let breaks = [
                    -2.0 * tau,
                    -(2.0f64).sqrt() * tau,
                    0.0,
                    (2.0f64).sqrt() * tau,
                    2.0 * tau,
                    shrink * value,
                    value,
                ];
                integrate_with_breaks(integrand, f64::NEG_INFINITY, f64::INFINITY, &breaks, &self.quadrature)
            }
            TestStatistic::ChiSq { k, .. } | TestStatistic::F { k, .. } => {
                let prior = GammaNcpPrior::new(*k, tau2)?;
                let k = f64::from(*k);
                let integrand = |lambda: f64| {
                    if lambda <= 0.0 {
                        return 0.0;
                    }
                    let lp = guard(prior.log_density(lambda));
                    guard(log_noncentral(lambda).map(|ln| (ln + lp - shift).exp()))
                };
                let mle = (k * value - k).max(0.0);
                let breaks = [prior.mode(), 0.5 * prior.mode(), 2.0 * prior.mode(), mle, value];
                integrate_with_breaks(integrand, 0.0, f64::INFINITY, &breaks, &self.quadrature)
            }
        }?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if !(integral.value > 0.0) {
            return Err(Error::invalid("marginal integral underflowed to zero"));
        }
        Ok(integral.value.ln())
    }
}

/// ln m₁(h) as the two-component gamma mixture
/// `1/(τ²+1)·g(h; k/2, 1/(2(τ²+1))) + τ²/(τ²+1)·g(h; k/2+1, 1/(2(τ²+1)))`.
pub fn log_marginal_mixture_chisq(h: f64, k: u32, tau2: f64) -> Result<f64> {
    TestStatistic::ChiSq { h, k }.validate()?;
    if !(tau2 > 0.0) || !tau2.is_finite() {
        return Err(Error::domain("tau2 must be finite and > 0", tau2));
    }
    let k = f64::from(k);
    let rate = 1.0 / (2.0 * (tau2 + 1.0));
    let log_w0 = -tau2.ln_1p();
    let log_w1 = tau2.ln() - tau2.ln_1p();
    Ok(log_sum_exp(&[
        log_w0 + gamma_log_pdf(h, 0.5 * k, rate),
        log_w1 + gamma_log_pdf(h, 0.5 * k + 1.0, rate),
    ]))
}

/// ln m₁(f) as the scaled central-F mixture
/// `1/(1+τ²)·p_Y(f) + τ²/(1+τ²)·p_Z(f)` where `Y/(1+τ²) ~ F(k, m)` and
/// `kZ/((k+2)(1+τ²)) ~ F(k+2, m)`.
pub fn log_marginal_mixture_f(f: f64, k: u32, m: u32, tau2: f64) -> Result<f64> {
    TestStatistic::F { f, k, m }.validate()?;
    if !(tau2 > 0.0) || !tau2.is_finite() {
        return Err(Error::domain("tau2 must be finite and > 0", tau2));
    }
    let (k, m) = (f64::from(k), f64::from(m));
    let scale = 1.0 + tau2;
    let log_scale = tau2.ln_1p();
    let log_py = log_f_density(f / scale, k, m) - log_scale;
    let z_scale = k / ((k + 2.0) * scale);
    let log_pz = log_f_density(f * z_scale, k + 2.0, m) + z_scale.ln();
    Ok(log_sum_exp(&[
        -log_scale + log_py,
        tau2.ln() - log_scale + log_pz,
    ]))
}
