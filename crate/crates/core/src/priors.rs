//! Prior densities on non-centrality parameters.
//!
//! The normal moment density `J(μ₀, τ²)` is used for z and t statistics;
//! the gamma density `G(k/2 + 1, 1/(2τ²))` for χ² and F statistics. Both
//! vanish at the null value, so each is a non-local alternative prior.
//! Densities are only exposed in log space.

use crate::error::{Error, Result};
use crate::special_math::{ln_gamma_unchecked, LN_SQRT_2PI};

fn check_tau2(tau2: f64) -> Result<()> {
    if tau2 > 0.0 && tau2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("tau2 must be finite and > 0", tau2))
    }
}

/// Normal moment density
/// `j(x | μ₀, τ²) = (x−μ₀)² / (√(2π) τ³) · exp(−(x−μ₀)² / (2τ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMomentPrior {
    mu0: f64,
    tau2: f64,
}

impl NormalMomentPrior {
    pub fn new(mu0: f64, tau2: f64) -> Result<Self> {
        check_tau2(tau2)?;
        if !mu0.is_finite() {
            return Err(Error::domain("mu0 must be finite", mu0));
        }
        Ok(Self { mu0, tau2 })
    }

    /// Centered prior `J(0, τ²)`, the one wired into the z and t Bayes factors.
    pub fn centered(tau2: f64) -> Result<Self> {
        Self::new(0.0, tau2)
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    /// `ln j(x | μ₀, τ²)`; `−∞` exactly at `x = μ₀`.
    pub fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mu0;
        let d2 = d * d;
        if d2 == 0.0 {
            return f64::NEG_INFINITY;
        }
        d2.ln() - LN_SQRT_2PI - 1.5 * self.tau2.ln() - d2 / (2.0 * self.tau2)
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// The two modes `μ₀ ± √2·τ`, smaller first.
    pub fn modes(&self) -> (f64, f64) {
        let offset = (2.0 * self.tau2).sqrt();
        (self.mu0 - offset, self.mu0 + offset)
    }
}

/// Gamma prior `G(k/2 + 1, 1/(2τ²))` (shape, rate) on a χ² or F
/// non-centrality parameter. Its mode sits at `k·τ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaNcpPrior {
    k: u32,
    tau2: f64,
}

impl GammaNcpPrior {
    pub fn new(k: u32, tau2: f64) -> Result<Self> {
        check_tau2(tau2)?;
        if k == 0 {
            return Err(Error::invalid("gamma prior requires k >= 1"));
        }
        Ok(Self { k, tau2 })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn shape(&self) -> f64 {
        f64::from(self.k) / 2.0 + 1.0
    }

    pub fn rate(&self) -> f64 {
        1.0 / (2.0 * self.tau2)
    }

    /// `ln g(x | shape, rate)`; `−∞` at the origin.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::domain("gamma density requires x >= 0", x));
        }
        Ok(gamma_log_pdf(x, self.shape(), self.rate()))
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }

    pub fn mode(&self) -> f64 {
        (self.shape() - 1.0) / self.rate()
    }
}

/// Log density of a gamma(shape, rate) variate at `x >= 0`.
pub(crate) fn gamma_log_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
            Some(std::cmp::Ordering::Equal) => rate.ln(),
            _ => f64::INFINITY,
        };
    }
    shape * rate.ln() - ln_gamma_unchecked(shape) + (shape - 1.0) * x.ln() - rate * x
}
