//! Bayes factor functions: Bayes factors for z, t, χ² and F statistics,
//! indexed by a standardized effect size instead of a single prior.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bff_engine;
pub mod cli;
pub mod closed_form;
pub mod effect_map;
pub mod error;
pub mod io;
pub mod oracle;
pub mod priors;
pub mod special_math;

pub use bff_engine::{combine, evaluate_bff, BffCurve, CurvePoint, EffectCurve, EffectGrid, Study};
pub use closed_form::{log_bf_chisq, log_bf_f, log_bf_t, log_bf_z, Family, OddsValue, TestStatistic};
pub use effect_map::{classify_zone, rmses, tau2_for, DesignKind, EffectSize, StudyDesign, Zone};
pub use error::{Error, Result};
