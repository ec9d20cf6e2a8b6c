//! Closed-form Bayes factors for z, t, χ² and F statistics, in log space.
//!
//! Each formula is rearranged so that no exponential of the statistic is
//! ever formed: the exp(·) factors become additive terms, and every
//! `ln(1 + x)` goes through [`f64::ln_1p`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family of a reported test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Z,
    T,
    #[serde(rename = "chisq")]
    ChiSq,
    F,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Z => "z",
            Family::T => "t",
            Family::ChiSq => "chisq",
            Family::F => "f",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A reported test statistic together with its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestStatistic {
    Z { z: f64 },
    T { t: f64, nu: u32 },
    ChiSq { h: f64, k: u32 },
    F { f: f64, k: u32, m: u32 },
}

impl TestStatistic {
    /// Build a statistic from the flat (family, value, df1, df2) shape used by
    /// study files and the C ABI.
    pub fn from_parts(
        family: Family,
        value: f64,
        df1: Option<u32>,
        df2: Option<u32>,
    ) -> Result<Self> {
        let need = |df: Option<u32>, name: &str| {
            df.ok_or_else(|| Error::invalid(format!("{family} statistic requires {name}")))
        };
        let stat = match family {
            Family::Z => TestStatistic::Z { z: value },
            Family::T => TestStatistic::T {
                t: value,
                nu: need(df1, "df1")?,
            },
            Family::ChiSq => TestStatistic::ChiSq {
                h: value,
                k: need(df1, "df1")?,
            },
            Family::F => TestStatistic::F {
                f: value,
                k: need(df1, "df1")?,
                m: need(df2, "df2")?,
            },
        };
        stat.validate()?;
        Ok(stat)
    }

    pub fn family(&self) -> Family {
        match self {
            TestStatistic::Z { .. } => Family::Z,
            TestStatistic::T { .. } => Family::T,
            TestStatistic::ChiSq { .. } => Family::ChiSq,
            TestStatistic::F { .. } => Family::F,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            TestStatistic::Z { z } => z,
            TestStatistic::T { t, .. } => t,
            TestStatistic::ChiSq { h, .. } => h,
            TestStatistic::F { f, .. } => f,
        }
    }

    pub fn df1(&self) -> Option<u32> {
        match *self {
            TestStatistic::Z { .. } => None,
            TestStatistic::T { nu, .. } => Some(nu),
            TestStatistic::ChiSq { k, .. } | TestStatistic::F { k, .. } => Some(k),
        }
    }

    pub fn df2(&self) -> Option<u32> {
        match *self {
            TestStatistic::F { m, .. } => Some(m),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let value = self.value();
        if !value.is_finite() {
            return Err(Error::domain("statistic must be finite", value));
        }
        match *self {
            TestStatistic::Z { .. } => Ok(()),
            TestStatistic::T { nu, .. } => positive_df(nu, "nu"),
            TestStatistic::ChiSq { h, k } => {
                non_negative(h, "chi-squared statistic must be >= 0")?;
                positive_df(k, "k")
            }
            TestStatistic::F { f, k, m } => {
                non_negative(f, "F statistic must be >= 0")?;
                positive_df(k, "k")?;
                positive_df(m, "m")
            }
        }
    }

    /// `ln BF₁₀` for this statistic at prior scale `tau2`.
    pub fn log_bf(&self, tau2: f64) -> Result<f64> {
        match *self {
            TestStatistic::Z { z } => log_bf_z(z, tau2),
            TestStatistic::T { t, nu } => log_bf_t(t, nu, tau2),
            TestStatistic::ChiSq { h, k } => log_bf_chisq(h, k, tau2),
            TestStatistic::F { f, k, m } => log_bf_f(f, k, m, tau2),
        }
    }
}

fn positive_df(df: u32, name: &str) -> Result<()> {
    if df >= 1 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be >= 1")))
    }
}

fn non_negative(x: f64, what: &'static str) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(what, x))
    }
}

fn check_tau2(tau2: f64) -> Result<()> {
    if tau2 > 0.0 && tau2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("tau2 must be finite and > 0", tau2))
    }
}

/// A Bayes factor in favour of the alternative, carried as `ln BF₁₀`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OddsValue {
    log_bf10: f64,
}

impl OddsValue {
    pub fn from_log(log_bf10: f64) -> Result<Self> {
        if log_bf10.is_finite() {
            Ok(Self { log_bf10 })
        } else {
            Err(Error::domain("log Bayes factor must be finite", log_bf10))
        }
    }

    pub fn from_bf(bf10: f64) -> Result<Self> {
        if bf10 > 0.0 && bf10.is_finite() {
            Ok(Self {
                log_bf10: bf10.ln(),
            })
        } else {
            Err(Error::domain("Bayes factor must be finite and > 0", bf10))
        }
    }

    pub fn log_bf10(&self) -> f64 {
        self.log_bf10
    }

    pub fn bf10(&self) -> f64 {
        self.log_bf10.exp()
    }

    pub fn favors_alternative(&self) -> bool {
        self.log_bf10 > 0.0
    }
}

/// Posterior odds `P(H₁|x)/P(H₀|x) = BF₁₀ × prior odds`.
pub fn posterior_odds(bf: OddsValue, prior_odds: f64) -> Result<f64> {
    if !(prior_odds > 0.0) || !prior_odds.is_finite() {
        return Err(Error::domain("prior odds must be finite and > 0", prior_odds));
    }
    Ok((bf.log_bf10 + prior_odds.ln()).exp())
}

/// z statistic with `λ ~ J(0, τ²)`:
/// `BF₁₀ = (τ²+1)^{−3/2} (1 + τ²z²/(τ²+1)) exp(τ²z²/(2(τ²+1)))`.
pub fn log_bf_z(z: f64, tau2: f64) -> Result<f64> {
    check_tau2(tau2)?;
    if !z.is_finite() {
        return Err(Error::domain("z must be finite", z));
    }
    let shrink = tau2 / (tau2 + 1.0);
    let u = shrink * z * z;
    Ok(-1.5 * tau2.ln_1p() + u.ln_1p() + 0.5 * u)
}

/// t statistic on `nu` degrees of freedom with `λ ~ J(0, τ²)`:
/// `BF₁₀ = (τ²+1)^{−3/2} (r/s)^{(ν+1)/2} (1 + q t²/s)` with
/// `r = 1 + t²/ν`, `s = 1 + t²/(ν(1+τ²))`, `q = τ²(ν+1)/(ν(1+τ²))`.
pub fn log_bf_t(t: f64, nu: u32, tau2: f64) -> Result<f64> {
    check_tau2(tau2)?;
    positive_df(nu, "nu")?;
    if !t.is_finite() {
        return Err(Error::domain("t must be finite", t));
    }
    let nu = f64::from(nu);
    let shrink = tau2 / (tau2 + 1.0);
    let x = t * t / nu;
    let s = 1.0 + x / (1.0 + tau2);
    // r/s = 1 + (r − s)/s, r − s = x·τ²/(1+τ²)
    let log_r_over_s = (x * shrink / s).ln_1p();
    let q_t2_over_s = shrink * (nu + 1.0) * x / s;
    Ok(-1.5 * tau2.ln_1p() + 0.5 * (nu + 1.0) * log_r_over_s + q_t2_over_s.ln_1p())
}

/// χ² statistic on `k` degrees of freedom with `λ ~ G(k/2+1, 1/(2τ²))`:
/// `BF₁₀ = (τ²+1)^{−k/2−1} (1 + τ²h/(k(τ²+1))) exp(τ²h/(2(τ²+1)))`.
pub fn log_bf_chisq(h: f64, k: u32, tau2: f64) -> Result<f64> {
    check_tau2(tau2)?;
    positive_df(k, "k")?;
    if !h.is_finite() {
        return Err(Error::domain("chi-squared statistic must be finite", h));
    }
    non_negative(h, "chi-squared statistic must be >= 0")?;
    let k = f64::from(k);
    let u = tau2 / (tau2 + 1.0) * h;
    Ok(-(0.5 * k + 1.0) * tau2.ln_1p() + (u / k).ln_1p() + 0.5 * u)
}

/// F statistic on `(k, m)` degrees of freedom with `λ ~ G(k/2+1, 1/(2τ²))`:
/// `BF₁₀ = (τ²+1)^{−k/2−1} [(1+kf/m)/(1+kf/v)]^{(k+m)/2}
/// [1 + (k+m)τ²f / (v(1+kf/v))]` with `v = m(τ²+1)`.
pub fn log_bf_f(f: f64, k: u32, m: u32, tau2: f64) -> Result<f64> {
    check_tau2(tau2)?;
    positive_df(k, "k")?;
    positive_df(m, "m")?;
    if !f.is_finite() {
        return Err(Error::domain("F statistic must be finite", f));
    }
    non_negative(f, "F statistic must be >= 0")?;
    let (k, m) = (f64::from(k), f64::from(m));
    let shrink = tau2 / (tau2 + 1.0);
    let x = k * f / m;
    let w = 1.0 + x / (1.0 + tau2); // 1 + kf/v
    let log_ratio = (x * shrink / w).ln_1p();
    let last = (k + m) / k * shrink * x / w;
    Ok(-(0.5 * k + 1.0) * tau2.ln_1p() + 0.5 * (k + m) * log_ratio + last.ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Linear-space transcriptions for moderate arguments.
    fn bf_z_linear(z: f64, tau2: f64) -> f64 {
        (tau2 + 1.0).powf(-1.5)
            * (1.0 + tau2 * z * z / (tau2 + 1.0))
            * (tau2 * z * z / (2.0 * (tau2 + 1.0))).exp()
    }

    fn bf_t_linear(t: f64, nu: f64, tau2: f64) -> f64 {
        let r = 1.0 + t * t / nu;
        let s = 1.0 + t * t / (nu * (1.0 + tau2));
        let q = tau2 * (nu + 1.0) / (nu * (1.0 + tau2));
        (tau2 + 1.0).powf(-1.5) * (r / s).powf((nu + 1.0) / 2.0) * (1.0 + q * t * t / s)
    }

    fn bf_chisq_linear(h: f64, k: f64, tau2: f64) -> f64 {
        (tau2 + 1.0).powf(-k / 2.0 - 1.0)
            * (1.0 + tau2 * h / (k * (tau2 + 1.0)))
            * (tau2 * h / (2.0 * (tau2 + 1.0))).exp()
    }

    fn bf_f_linear(f: f64, k: f64, m: f64, tau2: f64) -> f64 {
        let v = m * (tau2 + 1.0);
        (tau2 + 1.0).powf(-k / 2.0 - 1.0)
            * ((1.0 + k * f / m) / (1.0 + k * f / v)).powf((k + m) / 2.0)
            * (1.0 + (k + m) * tau2 * f / (v * (1.0 + k * f / v)))
    }

    #[test]
    fn log_forms_match_linear_transcriptions() {
        for &tau2 in &[0.05, 0.7, 3.0, 25.0] {
            for &x in &[0.0, 0.3, 1.7, 3.2] {
                let z = log_bf_z(x, tau2).unwrap();
                assert!((z - bf_z_linear(x, tau2).ln()).abs() < 1e-12);
                let t = log_bf_t(x, 12, tau2).unwrap();
                assert!((t - bf_t_linear(x, 12.0, tau2).ln()).abs() < 1e-12);
                let c = log_bf_chisq(x * x, 5, tau2).unwrap();
                assert!((c - bf_chisq_linear(x * x, 5.0, tau2).ln()).abs() < 1e-12);
                let f = log_bf_f(x, 3, 17, tau2).unwrap();
                assert!((f - bf_f_linear(x, 3.0, 17.0, tau2).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z_examples() {
        // z = 2, τ² = 100·0.15²/2
        let bf = log_bf_z(2.0, 1.125).unwrap().exp();
        assert!((bf - 2.90).abs() < 0.01, "{bf}");
        let v = log_bf_z(0.0, 1.0).unwrap();
        assert!((v - 2f64.powf(-1.5).ln()).abs() < 1e-15);
        assert!((v + 1.0397).abs() < 1e-4);
    }

    #[test]
    fn t_examples() {
        let v = log_bf_t(0.0, 10, 3.0).unwrap();
        assert!((v + 1.5 * 4f64.ln()).abs() < 1e-15);
        // t = 2.5, ν = 20, τ² = 1, reference from the quadrature oracle
        let v = log_bf_t(2.5, 20, 1.0).unwrap();
        assert!((v - 1.636_081_283_328_129).abs() < 1e-12);
    }

    #[test]
    fn chisq_examples() {
        let bf = log_bf_chisq(12.65, 6, 707.0 * 0.035 * 0.035).unwrap().exp();
        assert!((bf - 3.07).abs() < 0.01, "{bf}");
        let v = log_bf_chisq(0.0, 4, 5.0).unwrap();
        assert!((v + 3.0 * 6f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn f_examples() {
        let v = log_bf_f(0.0, 3, 11, 2.5).unwrap();
        assert!((v + 2.5 * 3.5f64.ln()).abs() < 1e-14);
        let v = log_bf_f(3.2, 3, 40, 2.0).unwrap();
        assert!((v - 1.362_641_889_722_377).abs() < 1e-12);
    }

    #[test]
    fn cross_family_identities() {
        for &x in &[0.5, 1.0, 2.0, 4.0] {
            for &tau2 in &[0.1, 1.0, 10.0] {
                let z = log_bf_z(x, tau2).unwrap();
                let c = log_bf_chisq(x * x, 1, tau2).unwrap();
                assert!((z - c).abs() <= 1e-12);
                for &nu in &[5, 30] {
                    let t = log_bf_t(x, nu, tau2).unwrap();
                    let f = log_bf_f(x * x, 1, nu, tau2).unwrap();
                    assert!((t - f).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn overflow_guard() {
        let v = log_bf_z(40.0, 1e4).unwrap();
        assert!(v.is_finite() && v > 700.0);
        assert!(log_bf_chisq(5000.0, 3, 1e6).unwrap().is_finite());
        assert!(log_bf_t(1e3, 4, 1e8).unwrap().is_finite());
        assert!(log_bf_f(1e4, 5, 8, 1e8).unwrap().is_finite());
    }

    #[test]
    fn small_tau2_limit() {
        for v in [
            log_bf_z(3.0, 1e-10).unwrap(),
            log_bf_t(3.0, 7, 1e-10).unwrap(),
            log_bf_chisq(9.0, 4, 1e-10).unwrap(),
            log_bf_f(4.0, 2, 30, 1e-10).unwrap(),
        ] {
            assert!(v.abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(log_bf_z(1.0, 0.0).is_err());
        assert!(log_bf_z(f64::NAN, 1.0).is_err());
        assert!(log_bf_t(1.0, 0, 1.0).is_err());
        assert!(log_bf_chisq(-1.0, 2, 1.0).is_err());
        assert!(log_bf_f(1.0, 2, 0, 1.0).is_err());
        assert!(log_bf_f(-0.1, 2, 3, 1.0).is_err());
        assert!(TestStatistic::from_parts(Family::T, 1.0, None, None).is_err());
        assert!(TestStatistic::from_parts(Family::F, 1.0, Some(2), None).is_err());
        assert!(TestStatistic::from_parts(Family::ChiSq, -2.0, Some(2), None).is_err());
    }

    #[test]
    fn posterior_odds_examples() {
        let three = OddsValue::from_bf(3.0).unwrap();
        assert!((posterior_odds(three, 1.0).unwrap() - 3.0).abs() < 1e-14);
        let b = OddsValue::from_bf(2.90).unwrap();
        assert!((posterior_odds(b, 0.5).unwrap() - 1.45).abs() < 1e-14);
        let one = OddsValue::from_log(0.0).unwrap();
        assert!((posterior_odds(one, 0.37).unwrap() - 0.37).abs() < 1e-15);
        assert!(posterior_odds(one, 0.0).is_err());
        assert!(posterior_odds(one, -2.0).is_err());
        assert!(OddsValue::from_log(f64::INFINITY).is_err());
    }
}
