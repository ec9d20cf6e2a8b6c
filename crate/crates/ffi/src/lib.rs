//! C ABI over `bff-core`.
//!
//! Every function returns a [`BffStatus`]; results come back through out
//! pointers. Studies and curves are opaque heap handles released with their
//! `_free` function. After a non-OK status, [`bff_last_error`] describes the
//! failure on the calling thread. Integer sample-size and df arguments use 0
//! for "not given".

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bff_core::bff_engine::{combine, evaluate_bff, Combined};
use bff_core::io::{to_json, CurveExport};
use bff_core::{
    tau2_for, BffCurve as CoreCurve, DesignKind, EffectGrid, EffectSize, Error, Family, Study, StudyDesign,
    TestStatistic,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NonConvergence = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BffFamily {
    Z = 0,
    T = 1,
    Chisq = 2,
    F = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BffDesign {
    OneSampleZ = 0,
    OneSampleT = 1,
    TwoSampleZ = 2,
    TwoSampleT = 3,
    MultinomialChisq = 4,
    LikelihoodRatioChisq = 5,
    LinearModelF = 6,
}

/// Opaque study handle.
pub struct BffStudy {
    inner: Study,
}

/// Opaque curve handle; keeps its studies so thresholds can be refined later.
pub struct BffCurve {
    curve: CoreCurve,
    studies: Vec<Study>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BffStatus {
    match e {
        Error::Domain { .. } => BffStatus::Domain,
        Error::QuadratureNonConvergence { .. } | Error::NanIntegrand { .. } | Error::SeriesNonConvergence { .. } => {
            BffStatus::NonConvergence
        }
        Error::Invalid(_) | Error::Parse(_) => BffStatus::InvalidArgument,
        Error::Io(_) => BffStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard<F>(f: F) -> BffStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BffStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            BffStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            BffStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

fn opt(x: u32) -> Option<u32> {
    (x != 0).then_some(x)
}

fn family_of(f: BffFamily) -> Family {
    match f {
        BffFamily::Z => Family::Z,
        BffFamily::T => Family::T,
        BffFamily::Chisq => Family::ChiSq,
        BffFamily::F => Family::F,
    }
}

fn design_kind_of(d: BffDesign) -> DesignKind {
    match d {
        BffDesign::OneSampleZ => DesignKind::OneSampleZ,
        BffDesign::OneSampleT => DesignKind::OneSampleT,
        BffDesign::TwoSampleZ => DesignKind::TwoSampleZ,
        BffDesign::TwoSampleT => DesignKind::TwoSampleT,
        BffDesign::MultinomialChisq => DesignKind::MultinomialChisq,
        BffDesign::LikelihoodRatioChisq => DesignKind::LikelihoodRatioChisq,
        BffDesign::LinearModelF => DesignKind::LinearModelF,
    }
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn bff_log_bf_z(z: f64, tau2: f64, out: *mut f64) -> BffStatus {
    guard(|| write(out, bff_core::log_bf_z(z, tau2)?, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn bff_log_bf_t(t: f64, nu: u32, tau2: f64, out: *mut f64) -> BffStatus {
    guard(|| write(out, bff_core::log_bf_t(t, nu, tau2)?, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn bff_log_bf_chisq(h: f64, k: u32, tau2: f64, out: *mut f64) -> BffStatus {
    guard(|| write(out, bff_core::log_bf_chisq(h, k, tau2)?, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn bff_log_bf_f(f: f64, k: u32, m: u32, tau2: f64, out: *mut f64) -> BffStatus {
    guard(|| write(out, bff_core::log_bf_f(f, k, m, tau2)?, "out"))
}

/// Prior scale τ² for `design` at effect size `omega >= 0`.
#[no_mangle]
pub unsafe extern "C" fn bff_tau2_for(
    design: BffDesign,
    n: u32,
    n1: u32,
    n2: u32,
    k: u32,
    omega: f64,
    out: *mut f64,
) -> BffStatus {
    guard(|| {
        let d = StudyDesign::from_parts(design_kind_of(design), opt(n), opt(n1), opt(n2), opt(k))?;
        write(out, tau2_for(&d, EffectSize::new(omega)?)?, "out")
    })
}

/// Build a study. For vector designs `k` = 0 means "same as df1".
#[no_mangle]
pub unsafe extern "C" fn bff_study_new(
    family: BffFamily,
    value: f64,
    df1: u32,
    df2: u32,
    design: BffDesign,
    n: u32,
    n1: u32,
    n2: u32,
    k: u32,
    out: *mut *mut BffStudy,
) -> BffStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let statistic = TestStatistic::from_parts(family_of(family), value, opt(df1), opt(df2))?;
        let kind = design_kind_of(design);
        let k = match kind {
            DesignKind::MultinomialChisq | DesignKind::LikelihoodRatioChisq | DesignKind::LinearModelF => {
                opt(k).or(opt(df1))
            }
            _ => opt(k),
        };
        let d = StudyDesign::from_parts(kind, opt(n), opt(n1), opt(n2), k)?;
        let study = Study::new(statistic, d, "study")?;
        write(out, Box::into_raw(Box::new(BffStudy { inner: study })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bff_study_free(study: *mut BffStudy) {
    if !study.is_null() {
        drop(Box::from_raw(study));
    }
}

#[no_mangle]
pub unsafe extern "C" fn bff_curve_evaluate(
    study: *const BffStudy,
    omega_min: f64,
    omega_max: f64,
    steps: usize,
    out: *mut *mut BffCurve,
) -> BffStatus {
    guard(|| {
        let s = &borrow(study, "study")?.inner;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let grid = EffectGrid::new(omega_min, omega_max, steps)?;
        let curve = evaluate_bff(s, &grid)?;
        let handle = BffCurve {
            curve,
            studies: vec![s.clone()],
        };
        write(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// Combined curve of `count` independent studies sharing one effect size.
#[no_mangle]
pub unsafe extern "C" fn bff_curve_combine(
    studies: *const *const BffStudy,
    count: usize,
    omega_min: f64,
    omega_max: f64,
    steps: usize,
    out: *mut *mut BffCurve,
) -> BffStatus {
    guard(|| {
        if studies.is_null() {
            return Err(Fail::Null("studies"));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let ptrs = std::slice::from_raw_parts(studies, count);
        let owned = ptrs
            .iter()
            .map(|&p| borrow(p, "studies[i]").map(|s| s.inner.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let grid = EffectGrid::new(omega_min, omega_max, steps)?;
        let curve = combine(&owned, &grid)?;
        write(out, Box::into_raw(Box::new(BffCurve { curve, studies: owned })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bff_curve_len(curve: *const BffCurve, out: *mut usize) -> BffStatus {
    guard(|| write(out, borrow(curve, "curve")?.curve.points.len(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn bff_curve_point(
    curve: *const BffCurve,
    index: usize,
    omega: *mut f64,
    log_bf10: *mut f64,
) -> BffStatus {
    guard(|| {
        let c = borrow(curve, "curve")?;
        let p = c.curve.points.get(index).ok_or_else(|| {
            Error::Invalid(format!("index {index} out of range for {} points", c.curve.points.len()))
        })?;
        write(omega, p.omega, "omega")?;
        write(log_bf10, p.log_bf10, "log_bf10")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bff_curve_max(
    curve: *const BffCurve,
    argmax_omega: *mut f64,
    max_log_bf: *mut f64,
) -> BffStatus {
    guard(|| {
        let c = borrow(curve, "curve")?;
        write(argmax_omega, c.curve.argmax_omega, "argmax_omega")?;
        write(max_log_bf, c.curve.max_log_bf, "max_log_bf")
    })
}

/// BF = 1 crossings. Writes up to `capacity` values into `buf` (which may be
/// NULL when `capacity` is 0) and the total count into `count`.
#[no_mangle]
pub unsafe extern "C" fn bff_curve_crossings(
    curve: *const BffCurve,
    buf: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> BffStatus {
    guard(|| {
        let c = borrow(curve, "curve")?;
        let xs = &c.curve.crossings;
        let n = xs.len().min(capacity);
        if n > 0 {
            if buf.is_null() {
                return Err(Fail::Null("buf"));
            }
            std::ptr::copy_nonoverlapping(xs.as_ptr(), buf, n);
        }
        write(count, xs.len(), "count")
    })
}

/// JSON export of a curve with crossings for `n_thresholds` BF values.
/// Free the returned string with [`bff_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bff_curve_to_json(
    curve: *const BffCurve,
    thresholds: *const f64,
    n_thresholds: usize,
    out: *mut *mut c_char,
) -> BffStatus {
    guard(|| {
        let c = borrow(curve, "curve")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let th: &[f64] = if n_thresholds == 0 {
            &[]
        } else if thresholds.is_null() {
            return Err(Fail::Null("thresholds"));
        } else {
            std::slice::from_raw_parts(thresholds, n_thresholds)
        };
        let export = CurveExport::new(&c.curve, &Combined(&c.studies), th)?;
        let text = to_json(&export)?;
        let s = CString::new(text).map_err(|e| Error::Io(e.to_string()))?;
        write(out, s.into_raw(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn bff_curve_free(curve: *mut BffCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}
