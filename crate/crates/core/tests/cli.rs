use std::path::PathBuf;
use std::process::{Command, Output};

fn bff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bff")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn z_summary() {
    let o = bff(&["z", "--stat", "2", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let first = s.lines().next().unwrap();
    assert!(first.starts_with("max BF 2.90 at omega 0.15"), "{s}");
    assert!(s.contains("odds 2.90:1 for H1"), "{s}");
    assert!(s.contains("BF=1 crossings: 0.39967"), "{s}");
}

#[test]
fn chisq_summary() {
    let o = bff(&["chisq", "--stat", "12.65", "--df", "6", "--n", "707", "--mapping", "multinomial"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("max BF 3.07 at omega 0.035\n"), "{}", stdout(&o));
}

#[test]
fn no_evidence_case() {
    let o = bff(&["z", "--stat", "0", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("max BF 1.00 at omega 0.000\n"), "{s}");
    assert!(s.contains("BF=1 crossings: none"), "{s}");
}

#[test]
fn oracle_flag_reports_small_discrepancy() {
    let o = bff(&["t", "--stat", "2.5", "--df", "20", "--n1", "11", "--n2", "11", "--steps", "11", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let line = s.lines().find(|l| l.starts_with("oracle")).unwrap();
    let d: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(d < 1e-6, "{line}");
}

#[test]
fn single_study_file_matches_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o1 = bff(&["combine", "--studies", &data("single_study.json"), "--format", "json", "--out", a.to_str().unwrap()]);
    let o2 = bff(&["z", "--stat", "2", "--n", "100", "--format", "json", "--out", b.to_str().unwrap()]);
    assert_eq!(o1.status.code(), Some(0));
    assert_eq!(o2.status.code(), Some(0));
    assert_eq!(stdout(&o1), stdout(&o2));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn combine_outputs_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    for fmt in ["csv", "json", "svg"] {
        let path = dir.path().join(format!("out.{fmt}"));
        let o = bff(&[
            "combine",
            "--studies",
            &data("two_studies.json"),
            "--per-study",
            "--format",
            fmt,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{fmt}");
        assert!(stdout(&o).starts_with("max BF 5.75 at omega 0.139\n"), "{}", stdout(&o));
        let text = std::fs::read_to_string(&path).unwrap();
        match fmt {
            "csv" => assert!(text.starts_with("omega,bf10,log_bf10,zone\n")),
            "json" => {
                let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                assert_eq!(v["per_study"].as_array().unwrap().len(), 2);
                assert_eq!(v["points"].as_array().unwrap().len(), 501);
            }
            _ => assert_eq!(text.matches("class=\"study\"").count(), 2),
        }
    }
}

#[test]
fn mixed_designs_warn() {
    let o = bff(&["combine", "--studies", &data("mixed_designs.json")]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("warning"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(bff(&["z", "--stat", "2"]).status.code(), Some(2));
    assert_eq!(bff(&["chisq", "--stat", "2", "--df", "2", "--n", "9"]).status.code(), Some(2));
    assert_eq!(bff(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bff(&["z", "--stat", "2", "--n", "100", "--steps", "1"]).status.code(), Some(2));
    assert_eq!(bff(&["chisq", "--stat", "-1", "--df", "2", "--n", "9", "--mapping", "lrt"]).status.code(), Some(2));
    assert_eq!(bff(&["z", "--stat", "2", "--n", "100", "--format", "png"]).status.code(), Some(2));
    assert_eq!(
        bff(&["z", "--stat", "2", "--n", "100", "--out", "/nonexistent/dir/x.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(bff(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"studies": [{"family": "z", "value": 2, "design": "nope", "n": 5}]}"#).unwrap();
    let o = bff(&["combine", "--studies", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("nope"));
}
