//! Mapping from standardized effect sizes to the prior scale τ².
//!
//! τ² is chosen so that the prior modes on the non-centrality parameter
//! line up with the non-centrality implied by an effect size ω (or by the
//! root mean square effect size ω̃ for vector-valued effects).

use serde::{Deserialize, Serialize};

use crate::closed_form::Family;
use crate::error::{Error, Result};

/// Test design, carrying whatever sample-size structure its τ² rule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyDesign {
    OneSampleZ { n: u32 },
    OneSampleT { n: u32 },
    TwoSampleZ { n1: u32, n2: u32 },
    TwoSampleT { n1: u32, n2: u32 },
    /// Pearson χ² for multinomial / Poisson counts; `n` is the total count.
    MultinomialChiSq { n: u32, k: u32 },
    LikelihoodRatioChiSq { n: u32, k: u32 },
    /// F test in a linear model; `k` is the numerator degrees of freedom.
    LinearModelF { n: u32, k: u32 },
}

/// Tag naming a [`StudyDesign`] variant, as used in study files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    OneSampleZ,
    OneSampleT,
    TwoSampleZ,
    TwoSampleT,
    MultinomialChisq,
    LikelihoodRatioChisq,
    LinearModelF,
}

impl DesignKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignKind::OneSampleZ => "one_sample_z",
            DesignKind::OneSampleT => "one_sample_t",
            DesignKind::TwoSampleZ => "two_sample_z",
            DesignKind::TwoSampleT => "two_sample_t",
            DesignKind::MultinomialChisq => "multinomial_chisq",
            DesignKind::LikelihoodRatioChisq => "likelihood_ratio_chisq",
            DesignKind::LinearModelF => "linear_model_f",
        }
    }
}

fn require(v: Option<u32>, kind: DesignKind, field: &str) -> Result<u32> {
    match v {
        Some(x) if x >= 1 => Ok(x),
        Some(_) => Err(Error::invalid(format!(
            "{} design: {field} must be >= 1",
            kind.as_str()
        ))),
        None => Err(Error::invalid(format!(
            "{} design requires {field}",
            kind.as_str()
        ))),
    }
}

impl StudyDesign {
    /// Assemble a design from optional sample-size fields, checking that the
    /// ones this design needs are present and positive.
    pub fn from_parts(
        kind: DesignKind,
        n: Option<u32>,
        n1: Option<u32>,
        n2: Option<u32>,
        k: Option<u32>,
    ) -> Result<Self> {
        Ok(match kind {
            DesignKind::OneSampleZ => StudyDesign::OneSampleZ {
                n: require(n, kind, "n")?,
            },
            DesignKind::OneSampleT => StudyDesign::OneSampleT {
                n: require(n, kind, "n")?,
            },
            DesignKind::TwoSampleZ => StudyDesign::TwoSampleZ {
                n1: require(n1, kind, "n1")?,
                n2: require(n2, kind, "n2")?,
            },
            DesignKind::TwoSampleT => StudyDesign::TwoSampleT {
                n1: require(n1, kind, "n1")?,
                n2: require(n2, kind, "n2")?,
            },
            DesignKind::MultinomialChisq => StudyDesign::MultinomialChiSq {
                n: require(n, kind, "n")?,
                k: require(k, kind, "k")?,
            },
            DesignKind::LikelihoodRatioChisq => StudyDesign::LikelihoodRatioChiSq {
                n: require(n, kind, "n")?,
                k: require(k, kind, "k")?,
            },
            DesignKind::LinearModelF => StudyDesign::LinearModelF {
                n: require(n, kind, "n")?,
                k: require(k, kind, "k")?,
            },
        })
    }

    pub fn kind(&self) -> DesignKind {
        match self {
            StudyDesign::OneSampleZ { .. } => DesignKind::OneSampleZ,
            StudyDesign::OneSampleT { .. } => DesignKind::OneSampleT,
            StudyDesign::TwoSampleZ { .. } => DesignKind::TwoSampleZ,
            StudyDesign::TwoSampleT { .. } => DesignKind::TwoSampleT,
            StudyDesign::MultinomialChiSq { .. } => DesignKind::MultinomialChisq,
            StudyDesign::LikelihoodRatioChiSq { .. } => DesignKind::LikelihoodRatioChisq,
            StudyDesign::LinearModelF { .. } => DesignKind::LinearModelF,
        }
    }

    /// Numerator degrees of freedom / effect dimension, for vector designs.
    pub fn k(&self) -> Option<u32> {
        match *self {
            StudyDesign::MultinomialChiSq { k, .. }
            | StudyDesign::LikelihoodRatioChiSq { k, .. }
            | StudyDesign::LinearModelF { k, .. } => Some(k),
            _ => None,
        }
    }

    pub fn is_vector(&self) -> bool {
        self.k().is_some()
    }

    /// τ² per unit ω², i.e. the coefficient in `τ²_ω = c·ω²`.
    pub fn tau2_per_omega2(&self) -> Result<f64> {
        let positive = |x: u32, name: &str| {
            if x >= 1 {
                Ok(f64::from(x))
            } else {
                Err(Error::invalid(format!("{name} must be >= 1")))
            }
        };
        Ok(match *self {
            StudyDesign::OneSampleZ { n } | StudyDesign::OneSampleT { n } => {
                positive(n, "n")? / 2.0
            }
            StudyDesign::TwoSampleZ { n1, n2 } | StudyDesign::TwoSampleT { n1, n2 } => {
                let (a, b) = (positive(n1, "n1")?, positive(n2, "n2")?);
                a * b / (2.0 * (a + b))
            }
            StudyDesign::MultinomialChiSq { n, k } | StudyDesign::LikelihoodRatioChiSq { n, k } => {
                positive(k, "k")?;
                positive(n, "n")?
            }
            StudyDesign::LinearModelF { n, k } => {
                positive(k, "k")?;
                positive(n, "n")? / 2.0
            }
        })
    }
}

/// A nonnegative standardized effect size (ω for scalar tests, RMSES ω̃
/// for vector tests).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EffectSize(f64);

impl EffectSize {
    pub fn new(omega_tilde: f64) -> Result<Self> {
        if omega_tilde >= 0.0 && omega_tilde.is_finite() {
            Ok(Self(omega_tilde))
        } else {
            Err(Error::domain(
                "effect size must be finite and >= 0",
                omega_tilde,
            ))
        }
    }

    /// A signed scalar effect. The priors are symmetric, so only |ω| matters.
    pub fn from_signed(omega: f64) -> Result<Self> {
        Self::new(omega.abs())
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Root mean square effect size `√((1/k) Σ ωᵢ²)`.
pub fn rmses(omegas: &[f64]) -> Result<EffectSize> {
    if omegas.is_empty() {
        return Err(Error::invalid("rmses needs at least one effect"));
    }
    let mean_sq = omegas.iter().map(|w| w * w).sum::<f64>() / omegas.len() as f64;
    EffectSize::new(mean_sq.sqrt())
}

/// Prior scale τ²_ω for `design` at `effect`. Returns 0 at ω = 0, which
/// downstream code reads as the point-null limit (BF = 1).
pub fn tau2_for(design: &StudyDesign, effect: EffectSize) -> Result<f64> {
    let w = effect.value();
    Ok(design.tau2_per_omega2()? * w * w)
}

pub fn statistic_family_for(design: &StudyDesign) -> Family {
    match design {
        StudyDesign::OneSampleZ { .. } | StudyDesign::TwoSampleZ { .. } => Family::Z,
        StudyDesign::OneSampleT { .. } | StudyDesign::TwoSampleT { .. } => Family::T,
        StudyDesign::MultinomialChiSq { .. } | StudyDesign::LikelihoodRatioChiSq { .. } => {
            Family::ChiSq
        }
        StudyDesign::LinearModelF { .. } => Family::F,
    }
}

/// Qualitative effect-size band. Boundaries are left-closed:
/// `[0, 0.1)`, `[0.1, 0.35)`, `[0.35, 0.65)`, `[0.65, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    VerySmall,
    Small,
    Medium,
    Large,
}

impl Zone {
    pub const ALL: [Zone; 4] = [Zone::VerySmall, Zone::Small, Zone::Medium, Zone::Large];

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::VerySmall => "very_small",
            Zone::Small => "small",
            Zone::Medium => "medium",
            Zone::Large => "large",
        }
    }

    pub fn parse(s: &str) -> Option<Zone> {
        Zone::ALL.into_iter().find(|z| z.as_str() == s)
    }

    /// Lower edge of the band.
    pub fn lower(self) -> f64 {
        match self {
            Zone::VerySmall => 0.0,
            Zone::Small => 0.1,
            Zone::Medium => 0.35,
            Zone::Large => 0.65,
        }
    }

    /// Fill colour used in plots (red, orange, blue, green).
    pub fn color(self) -> &'static str {
        match self {
            Zone::VerySmall => "#d62728",
            Zone::Small => "#ff7f0e",
            Zone::Medium => "#1f77b4",
            Zone::Large => "#2ca02c",
        }
    }
}

pub fn classify_zone(effect: EffectSize) -> Zone {
    let w = effect.value();
    if w < 0.1 {
        Zone::VerySmall
    } else if w < 0.35 {
        Zone::Small
    } else if w < 0.65 {
        Zone::Medium
    } else {
        Zone::Large
    }
}
