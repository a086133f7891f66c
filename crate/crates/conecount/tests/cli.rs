use std::process::{Command, Output};

use conecount::cli::verify_report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conecount")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constants_prints_cap_constant() {
    let o = run(&["constants", "--n", "2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "c_cap(2)=0.25"), "{s}");
    assert!(s.contains("khintchine_exponent=0.8333333333333334"));
    assert!(s.contains("cap_t_exponent="));
}

#[test]
fn enumerate_small_circle() {
    let o = run(&["enumerate", "--form", "standard:1", "--qmax", "5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("q,v_1,v_2,v_3"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.contains(&"5,3,4,5") && rows.contains(&"1,0,-1,1"));
    assert!(!s.contains('\r'));
}

#[test]
fn full_sphere_cap_matches_enumeration() {
    let e = run(&["enumerate", "--form", "standard:2", "--qmax", "29"]);
    let rows = stdout(&e).lines().count() - 1;
    let c = run(&["count-cap", "--form", "standard:2", "--alpha", "1,-2,2", "--r", "3", "--T", "30"]);
    assert!(c.status.success());
    let text = stdout(&c);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["count"].as_u64().unwrap() as usize, rows);
    verify_report(&text).unwrap();
}

#[test]
fn reports_verify_and_detect_edits() {
    let o = run(&["measure", "--region", "cap:1/2@1,0,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let m = verify_report(&text).unwrap();
    assert!(m.form_fingerprint.is_none());
    assert!(verify_report(&text.replace("\"exact\"", "\"leading\"")).is_err());
    let s = run(&["spectral", "--n", "3", "--s", "2", "--rho", "1,2", "--cap-r", "0.5"]);
    assert!(s.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&s)).unwrap();
    assert!(v["M"].as_f64().unwrap() > 0.0 && v["tail_bound"].as_f64().unwrap() >= 0.0);
    verify_report(&stdout(&s)).unwrap();
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["enumerate", "--form", "standard:1", "--qmax", "5", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["nosuch"]).status.code(), Some(1));
    assert_eq!(run(&["count-cap", "--form", "standard:2", "--alpha", "1,0", "--r", "1", "--T", "10"]).status.code(), Some(1));
    let h = run(&["valdist", "--help"]);
    assert_eq!(h.status.code(), Some(0));
    assert!(stdout(&h).contains("--target"));
}

#[test]
fn entropy_seed_is_printed_and_reproduces() {
    let a = run(&["count-khintchine", "--form", "standard:2", "--psi", "pow:c=1/2,lambda=1", "--T", "100", "--trials", "3"]);
    assert!(a.status.success());
    let err = String::from_utf8(a.stderr.clone()).unwrap();
    let seed = err.lines().find_map(|l| l.strip_prefix("seed: ")).expect("seed printed").to_string();
    let b = run(&["count-khintchine", "--form", "standard:2", "--psi", "pow:c=1/2,lambda=1", "--T", "100", "--trials", "3", "--seed", &seed]);
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        v.as_object_mut().unwrap().remove("manifest");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.txt");
    std::fs::write(&cfg, "kind = sum-integral\nn = 2\nT = 100, 1000, 10000\nseed = 1\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert!(csv.starts_with("kind,n,T,param,trial,seed,count,main,disc,relerr\n"));
    assert_eq!(csv.lines().count(), 10);
    let fit = std::fs::read_to_string(out.join("fit.json")).unwrap();
    assert_eq!(verify_report(&fit).unwrap().seed, Some(1));
    assert!(std::fs::read_to_string(out.join("verdict.txt")).unwrap().starts_with("PASS"));
}

#[test]
fn failing_verdict_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.txt");
    // A 0.1% relative error bound is far too tight at this scale.
    std::fs::write(&cfg, "kind = equidistribution\nn = 2\nT = 100, 200, 400\ntrials = 5\nseed = 2\nmax_relerr = 0.001\n").unwrap();
    let o = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));
}
