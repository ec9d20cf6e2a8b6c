use std::ffi::CStr;
use std::ptr;

use bff_ffi::*;

fn last_error() -> String {
    let p = bff_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_entry_points() {
    let mut out = f64::NAN;
    unsafe {
        assert_eq!(bff_log_bf_z(2.0, 1.125, &mut out), BffStatus::Ok);
        assert!((out - bff_core::log_bf_z(2.0, 1.125).unwrap()).abs() == 0.0);
        assert_eq!(bff_log_bf_t(2.5, 20, 1.0, &mut out), BffStatus::Ok);
        assert!((out - 1.636_081_283_328_129).abs() < 1e-12);
        assert_eq!(bff_log_bf_chisq(12.65, 6, 0.8661, &mut out), BffStatus::Ok);
        assert!((out.exp() - 3.07).abs() < 0.01);
        assert_eq!(bff_log_bf_f(3.2, 3, 40, 2.0, &mut out), BffStatus::Ok);
        assert!((out - 1.362_641_889_722_377).abs() < 1e-12);

        assert_eq!(bff_log_bf_z(2.0, 1.0, ptr::null_mut()), BffStatus::NullPointer);
        assert_eq!(bff_log_bf_z(2.0, -1.0, &mut out), BffStatus::Domain);
        assert!(last_error().contains("tau2"));
        assert_eq!(bff_log_bf_chisq(1.0, 0, 1.0, &mut out), BffStatus::InvalidArgument);

        assert_eq!(bff_tau2_for(BffDesign::OneSampleZ, 100, 0, 0, 0, 0.15, &mut out), BffStatus::Ok);
        assert!((out - 1.125).abs() < 1e-12);
        assert_eq!(bff_tau2_for(BffDesign::TwoSampleT, 0, 50, 50, 0, 0.2, &mut out), BffStatus::Ok);
        assert!((out - 0.5).abs() < 1e-12);
        assert_eq!(bff_tau2_for(BffDesign::LinearModelF, 85, 0, 0, 0, 0.2, &mut out), BffStatus::InvalidArgument);
    }
}

#[test]
fn curve_handles() {
    unsafe {
        let mut study: *mut BffStudy = ptr::null_mut();
        assert_eq!(
            bff_study_new(BffFamily::Z, 2.0, 0, 0, BffDesign::OneSampleZ, 100, 0, 0, 0, &mut study),
            BffStatus::Ok
        );
        let mut curve: *mut BffCurve = ptr::null_mut();
        assert_eq!(bff_curve_evaluate(study, 0.0, 1.0, 201, &mut curve), BffStatus::Ok);

        let mut len = 0usize;
        assert_eq!(bff_curve_len(curve, &mut len), BffStatus::Ok);
        assert_eq!(len, 201);
        let (mut w, mut l) = (0.0, 0.0);
        assert_eq!(bff_curve_point(curve, 200, &mut w, &mut l), BffStatus::Ok);
        assert_eq!(w, 1.0);
        assert_eq!(bff_curve_point(curve, 201, &mut w, &mut l), BffStatus::InvalidArgument);
        assert_eq!(bff_curve_max(curve, &mut w, &mut l), BffStatus::Ok);
        assert!((l.exp() - 2.90).abs() < 0.01);
        assert!((w - 0.150).abs() < 0.005);

        let mut count = 0usize;
        assert_eq!(bff_curve_crossings(curve, ptr::null_mut(), 0, &mut count), BffStatus::Ok);
        assert_eq!(count, 1);
        let mut buf = [0.0f64; 4];
        assert_eq!(bff_curve_crossings(curve, buf.as_mut_ptr(), 4, &mut count), BffStatus::Ok);
        assert!((buf[0] - 0.39967).abs() < 1e-4);

        let th = [0.2f64];
        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(bff_curve_to_json(curve, th.as_ptr(), 1, &mut json), BffStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        bff_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 201);
        let w5 = v["summary"]["threshold_crossings"][0]["omegas"][0].as_f64().unwrap();
        assert!((w5 - 0.76815).abs() < 1e-4);

        bff_curve_free(curve);
        bff_study_free(study);
        bff_curve_free(ptr::null_mut());
        bff_study_free(ptr::null_mut());
    }
}

#[test]
fn combine_matches_core() {
    unsafe {
        let mut a: *mut BffStudy = ptr::null_mut();
        let mut b: *mut BffStudy = ptr::null_mut();
        assert_eq!(
            bff_study_new(BffFamily::F, 4.05, 2, 82, BffDesign::LinearModelF, 85, 0, 0, 0, &mut a),
            BffStatus::Ok
        );
        assert_eq!(
            bff_study_new(BffFamily::F, 1.99, 2, 137, BffDesign::LinearModelF, 140, 0, 0, 0, &mut b),
            BffStatus::Ok
        );
        let list = [a as *const BffStudy, b as *const BffStudy];
        let mut curve: *mut BffCurve = ptr::null_mut();
        assert_eq!(bff_curve_combine(list.as_ptr(), 2, 0.0, 0.5, 501, &mut curve), BffStatus::Ok);
        let (mut w, mut l) = (0.0, 0.0);
        assert_eq!(bff_curve_max(curve, &mut w, &mut l), BffStatus::Ok);
        assert!((l.exp() - 5.753).abs() < 1e-3);
        bff_curve_free(curve);

        assert_eq!(bff_curve_combine(list.as_ptr(), 0, 0.0, 0.5, 501, &mut curve), BffStatus::InvalidArgument);
        let bad = [a as *const BffStudy, ptr::null()];
        assert_eq!(bff_curve_combine(bad.as_ptr(), 2, 0.0, 0.5, 501, &mut curve), BffStatus::NullPointer);
        bff_study_free(a);
        bff_study_free(b);
    }
}

#[test]
fn study_validation() {
    unsafe {
        let mut s: *mut BffStudy = ptr::null_mut();
        assert_eq!(
            bff_study_new(BffFamily::T, 2.0, 10, 0, BffDesign::OneSampleZ, 100, 0, 0, 0, &mut s),
            BffStatus::InvalidArgument
        );
        assert!(last_error().contains("expects a z statistic"));
        assert!(s.is_null());
        assert_eq!(
            bff_study_new(BffFamily::Z, 2.0, 0, 0, BffDesign::OneSampleZ, 0, 0, 0, 0, &mut s),
            BffStatus::InvalidArgument
        );
        assert_eq!(
            bff_study_new(BffFamily::Z, 2.0, 0, 0, BffDesign::OneSampleZ, 10, 0, 0, 0, ptr::null_mut()),
            BffStatus::NullPointer
        );
    }
}

/// Compile and run a C program against the generated header and static
/// library. Skipped when no C compiler or static archive is available.
#[test]
fn c_header_smoke() {
    let manifest = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| manifest.join("../../target"));
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let archive = target.join(profile).join("libbff_ffi.a");
    if !archive.exists() || std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C smoke test: no cc or {}", archive.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "bff.h"
int main(void) {
    double v = 0.0;
    if (bff_log_bf_z(2.0, 1.125, &v) != BFF_STATUS_OK) return 1;
    if (fabs(exp(v) - 2.9) > 0.01) return 2;
    if (bff_log_bf_z(2.0, -1.0, &v) != BFF_STATUS_DOMAIN) return 3;
    if (bff_last_error() == NULL) return 4;
    BffStudy *s = NULL;
    if (bff_study_new(BFF_FAMILY_CHISQ, 12.65, 6, 0, BFF_DESIGN_MULTINOMIAL_CHISQ, 707, 0, 0, 0, &s) != BFF_STATUS_OK) return 5;
    BffCurve *c = NULL;
    if (bff_curve_evaluate(s, 0.0, 0.2, 201, &c) != BFF_STATUS_OK) return 6;
    double w = 0.0, l = 0.0;
    bff_curve_max(c, &w, &l);
    printf("%.4f %.4f\n", w, exp(l));
    bff_curve_free(c);
    bff_study_free(s);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C smoke exited with {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut it = text.split_whitespace().map(|x| x.parse::<f64>().unwrap());
    let (w, bf) = (it.next().unwrap(), it.next().unwrap());
    assert!((w - 0.035).abs() < 0.003 && (bf - 3.07).abs() < 0.01, "{text}");
}
