use std::f64::consts::PI;
use std::process::Command;

use fracsolve_cli::record::records_to_csv;
use fracsolve_cli::svg::work_precision_svg;
use fracsolve_cli::{run, ErrorValue, WorkPrecisionRecord};

fn exec(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fracsolve").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// `exp(x^2) erfc(x)` by continued fraction.
fn erfcx(x: f64) -> f64 {
    let mut frac = 0.0;
    for k in (1..400).rev() {
        frac = (k as f64 / 2.0) / (x + frac);
    }
    1.0 / (PI.sqrt() * (x + frac))
}

#[test]
fn solve_writes_initial_row_and_mesh() {
    let (code, out, err) = exec(&["solve", "--case", "linear1", "--method", "pitrap", "--dt", "0.25", "--tf", "1"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,u1");
    assert_eq!(lines[1], "0,0");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("1,"));
    assert!(err.contains("retcode=Success"));
}

#[test]
fn solve_chua_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chua.csv");
    let (code, out, _) =
        exec(&["solve", "--case", "chua", "--method", "pece", "--dt", "0.01", "--fft", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("retcode=Success"));
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 10_002);
    assert_eq!(text.lines().next(), Some("t,u1,u2,u3"));
}

#[test]
fn solve_usage_errors() {
    let (code, _, err) = exec(&["solve", "--case", "linear1", "--method", "bogus", "--dt", "0.1"]);
    assert_eq!(code, 1);
    assert!(err.contains("pitrap") && err.contains("bdf2"));
    let (code, _, err) = exec(&["solve", "--case", "nowhere", "--method", "pece", "--dt", "0.1"]);
    assert_eq!(code, 1);
    assert!(err.contains("nonstiff3"));
    assert_eq!(exec(&["solve", "--case", "linear1", "--method", "mtpece", "--dt", "0.1"]).0, 1);
    assert_eq!(exec(&["solve", "--case", "bagley", "--method", "bdf2", "--dt", "0.1"]).0, 1);
    assert_eq!(exec(&["solve", "--case", "linear1", "--method", "pece", "--dt", "-0.1"]).0, 1);
    assert_eq!(exec(&["solve", "--case", "linear1"]).0, 1);
    assert_eq!(exec(&["--help"]).0, 0);
}

#[test]
fn solve_multiterm_tokens() {
    let plain = exec(&["solve", "--case", "mtosc", "--method", "pece", "--dt", "0.125", "--tf", "5"]);
    let explicit = exec(&["solve", "--case", "mtosc", "--method", "mtpece", "--dt", "0.125", "--tf", "5"]);
    assert_eq!(plain.0, 0);
    assert_eq!(plain.1, explicit.1);
    assert!(plain.1.lines().nth(1) == Some("0,1"));
}

#[test]
fn solve_divergence_exit_code() {
    let (code, out, err) = exec(&["solve", "--case", "stiff3", "--method", "piex", "--dt", "0.00390625"]);
    assert_eq!(code, 2);
    assert!(err.contains("retcode=Diverged"));
    assert!(out.lines().skip(1).all(|l| l.split(',').all(|f| f.parse::<f64>().unwrap().is_finite())));
}

#[test]
fn solve_is_deterministic() {
    let args = ["solve", "--case", "nonstiff3", "--method", "bdf2", "--dt", "0.03125"];
    let first = exec(&args).1;
    assert_eq!(first, exec(&args).1);
    assert_eq!(first.lines().count(), 162);
}

fn bench_records(args: &[&str]) -> Vec<WorkPrecisionRecord> {
    let (code, out, err) = exec(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn bench_nonstiff_record_count() {
    let records = bench_records(&["bench", "--case", "nonstiff3", "--methods", "pece,pitrap,bdf2", "--reps", "1"]);
    assert_eq!(records.len(), 18);
    let methods: Vec<&str> = records.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(&methods[..6], &["pece"; 6]);
    assert_eq!(records[0].dt, 0.25);
    assert_eq!(records[5].dt, 2f64.powi(-7));
    for r in &records {
        assert_eq!(r.case_id, "nonstiff3");
        assert!(r.wall_time_s >= 0.0);
        if r.retcode == "Success" {
            assert!(r.error.value().is_some_and(|e| e >= 0.0));
        }
    }
}

#[test]
fn bench_stiff_explicit_failures_are_data() {
    let records = bench_records(&["bench", "--case", "stiff3", "--methods", "pece", "--reps", "1"]);
    assert_eq!(records.len(), 6);
    for r in &records {
        let failed = r.retcode != "Success" || r.error.value().is_none_or(|e| e > 1.0);
        assert!(failed, "{r:?}");
    }
}

#[test]
fn bench_requires_oracle() {
    let (code, _, err) = exec(&["bench", "--case", "chua", "--metric", "final_time"]);
    assert_eq!(code, 1);
    assert!(err.contains("no analytical oracle"));
    assert_eq!(exec(&["bench", "--case", "linear1", "--metric", "rms"]).0, 1);
    assert_eq!(exec(&["bench", "--case", "mtosc", "--methods", "bdf2"]).0, 1);
}

#[test]
fn bench_files_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("w.json");
    let csv = dir.path().join("w.csv");
    let svg = dir.path().join("w.svg");
    let base = ["bench", "--case", "linear1", "--methods", "pitrap,bdf2", "--nmin", "3", "--nmax", "5", "--reps", "3"];
    let mut args = base.to_vec();
    args.extend(["--out", json.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(exec(&args).0, 0);
    let text = std::fs::read_to_string(&json).unwrap();
    let records: Vec<WorkPrecisionRecord> = serde_json::from_str(&text).unwrap();
    assert_eq!(records.len(), 6);
    let again: Vec<WorkPrecisionRecord> = serde_json::from_str(&serde_json::to_string(&records).unwrap()).unwrap();
    assert_eq!(again, records);

    let picture = std::fs::read_to_string(&svg).unwrap();
    assert!(picture.starts_with("<svg"));
    assert_eq!(picture.matches("<polyline").count(), 2);

    let mut args = base.to_vec();
    args.extend(["--out", csv.to_str().unwrap()]);
    assert_eq!(exec(&args).0, 0);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().next(), Some("case_id,method,dt,error,wall_time_s,retcode"));
    assert_eq!(table.lines().count(), 7);
}

#[test]
fn diverged_marker_serialization() {
    let r = WorkPrecisionRecord {
        case_id: "stiff3".into(),
        method: "piex".into(),
        dt: 0.5,
        error: ErrorValue::Diverged,
        wall_time_s: 1e-4,
        retcode: "Diverged".into(),
    };
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains(r#""error":"diverged""#));
    assert_eq!(serde_json::from_str::<WorkPrecisionRecord>(&json).unwrap(), r);
    assert!(serde_json::from_str::<WorkPrecisionRecord>(&json.replace("diverged", "lost")).is_err());
    assert_eq!(records_to_csv(std::slice::from_ref(&r)).lines().nth(1), Some("stiff3,piex,0.5,diverged,0.0001,Diverged"));
    assert_eq!(ErrorValue::from_error(f64::INFINITY), ErrorValue::Diverged);
    // a chart of failures only is still a valid document
    assert!(work_precision_svg(&[r], "empty").ends_with("</svg>\n"));
}

#[test]
fn threaded_sweep_keeps_order() {
    let bin = env!("CARGO_BIN_EXE_fracsolve");
    let sweep = |threads: &str| {
        let out = Command::new(bin)
            .env("FRACSOLVE_THREADS", threads)
            .args(["bench", "--case", "nonlinear1", "--methods", "pitrap,trapezoidal,pece", "--reps", "1"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        let records: Vec<WorkPrecisionRecord> = serde_json::from_slice(&out.stdout).unwrap();
        records.into_iter().map(|r| (r.method, r.dt, r.error)).collect::<Vec<_>>()
    };
    assert_eq!(sweep("1"), sweep("4"));
}

#[test]
fn mittleff_values() {
    assert_eq!(exec(&["mittleff", "--alpha", "1", "--beta", "1", "--z", "1"]).1, "2.71828182845905\n");
    assert_eq!(exec(&["mittleff", "--alpha", "2", "--beta", "1", "--z", "-1"]).1, "0.540302305868140\n");
    let (code, out, _) = exec(&["mittleff", "--alpha", "0.5", "--beta", "1", "--z", "-10"]);
    assert_eq!(code, 0);
    let printed: f64 = out.trim().parse().unwrap();
    assert!((printed - erfcx(10.0)).abs() <= 1e-14 * erfcx(10.0), "{out}");
    assert_eq!(out.trim().trim_start_matches("0.0"), "561409927438226");
    let (code, _, err) = exec(&["mittleff", "--alpha", "-1", "--beta", "1", "--z", "1"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fracsolve");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["solve", "--case", "linear1", "--method", "bogus", "--dt", "0.1"]), Some(1));
    assert_eq!(status(&["solve", "--case", "stiff3", "--method", "piex", "--dt", "0.00390625"]), Some(2));
    assert_eq!(status(&["mittleff", "--alpha", "1", "--beta", "1", "--z", "1"]), Some(0));
}
