mod common;

use std::fs;

use common::{data, files, run, status};
use quasiline_core::measures::SignedMeasure;

fn text(dir: &std::path::Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn thm2_statuses_follow_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    for (w, st, kind) in [("weight_dense.txt", 0, "Dense"), ("weight_notdense.txt", 0, "NotDense"), ("weight_inconclusive.txt", 0, "Inconclusive")] {
        let out = tmp.path().join(w);
        let o = run(&["thm2", "--weight", &data(w)], &out);
        assert_eq!(status(&o), st, "{w}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(text(&out, "thm2.txt").contains(kind), "{w}");
        let manifest: serde_json::Value = serde_json::from_str(&text(&out, "manifest.json")).unwrap();
        assert_eq!(manifest["command"], "thm2");
        assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn missing_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["thm2", "--weight", "no/such/weight.txt"], tmp.path());
    assert_eq!(status(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/weight.txt"));
}

#[test]
fn parse_error_exits_2_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.txt");
    fs::write(&bad, "bp 0 0\nbp one 1\n").unwrap();
    let o = run(&["conjugate", "--p", bad.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(status(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.txt") && err.contains("line 2"), "{err}");
}

#[test]
fn bad_grid_and_tolerance_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["transform", "--measure", &data("measure_atoms.txt"), "--grid", "0:1"], tmp.path());
    assert_eq!(status(&o), 2);
    let o = run(&["transform", "--measure", &data("measure_atoms.txt"), "--tolerance", "-1"], tmp.path());
    assert_eq!(status(&o), 2);
}

#[test]
fn conjugate_reports_involution() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["conjugate", "--p", &data("profile_pl.txt")], tmp.path());
    assert_eq!(status(&o), 0);
    assert!(text(tmp.path(), "summary.txt").contains("involution exact: true"));
    let csv = text(tmp.path(), "conjugate.csv");
    assert!(csv.starts_with("t,p,p_star\n"));
    let parsed = quasiline_core::convexcalc::PlConvex::parse(&text(tmp.path(), "conjugate.txt")).unwrap();
    assert!(parsed.conjugate().is_ok());
}

#[test]
fn counterexample_then_vulchain() {
    let tmp = tempfile::tempdir().unwrap();
    let ce = tmp.path().join("ce");
    let o = run(&["counterexample", "--p", &data("profile_counterexample.txt")], &ce);
    assert_eq!(status(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let measure_text = text(&ce, "measure.txt");
    let sigma = SignedMeasure::parse(&measure_text).unwrap();
    assert_eq!(sigma.to_text(), measure_text);
    assert!(sigma.total_variation() > 1e-2);

    let m = ce.join("measure.txt");
    let vc = tmp.path().join("vc");
    let o = run(&["vulchain", "--measure", m.to_str().unwrap(), "--p", &data("profile_counterexample.txt")], &vc);
    assert_eq!(status(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(text(&vc, "certificate.txt").contains("C_dec"));

    // shrunken constants are a corrupted certificate
    let bad = tmp.path().join("bad");
    let o = run(&["vulchain", "--measure", m.to_str().unwrap(), "--p", &data("profile_counterexample.txt"), "--cert-scale", "0.001", "--no-carleman"], &bad);
    assert_eq!(status(&o), 1);
    assert!(files(&bad).iter().any(|(k, v)| k.ends_with(".csv") && String::from_utf8_lossy(v).contains(",false")));
}

#[test]
fn emitted_weight_inputs_round_trip() {
    for w in ["weight_dense.txt", "weight_notdense.txt", "weight_inconclusive.txt", "weight_density.txt"] {
        let t = fs::read_to_string(data(w)).unwrap();
        let wt = quasiline_core::quasidc::TwoSidedWeight::parse(&t).unwrap();
        assert_eq!(quasiline_core::quasidc::TwoSidedWeight::parse(&wt.to_text()).unwrap(), wt, "{w}");
    }
}

#[test]
fn sequential_flag_gives_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["transform", "--measure", &data("measure_laplace.txt")];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(status(&run(&args, &a)), 0);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(status(&run(&seq, &b)), 0);
    assert_eq!(common::csvs(&a), common::csvs(&b));
}
