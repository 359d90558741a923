use std::path::Path;
use std::process::{Command, Output};

use qnr_kit::io::read_instance;
use qnr_kit::lp_format::parse_lp;

fn qnr(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_qnr")).args(args).current_dir(dir).output().expect("binary runs");
    assert!(
        out.status.success(),
        "qnr {:?} failed:\n{}\n{}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_solve_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qnr(&["generate", "--family", "boxqp", "--n", "5", "--density", "0.6", "--seed", "4", "--out", "b.json"], d);
    let inst = read_instance(&d.join("b.json")).unwrap();
    assert_eq!(inst.n, 5);

    let plain = stdout(&qnr(&["solve", "--input", "b.json", "--out", "plain.json"], d));
    assert!(plain.contains("status: OPTIMAL"), "{plain}");
    let with = stdout(&qnr(&["solve", "--input", "b.json", "--qnr", "--out", "qnr.json"], d));
    assert!(with.contains("status: OPTIMAL"), "{with}");
    let read = |f: &str| -> serde_json::Value { serde_json::from_slice(&std::fs::read(d.join(f)).unwrap()).unwrap() };
    let (a, b) = (read("plain.json")["incumbent"].as_f64().unwrap(), read("qnr.json")["incumbent"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{a} vs {b}");

    qnr(&["export", "--input", "b.json", "--out", "b.lp"], d);
    let lp = parse_lp(&std::fs::read_to_string(d.join("b.lp")).unwrap()).unwrap();
    assert_eq!(lp.names.len(), 5);
    qnr(&["export", "--input", "b.json", "--qnr", "--out", "q.lp"], d);
    let lp = parse_lp(&std::fs::read_to_string(d.join("q.lp")).unwrap()).unwrap();
    assert!(lp.names.len() > 5);
}

#[test]
fn reformulate_writes_instance_and_admm_log() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qnr(&["generate", "--family", "hard-stqp", "--n", "6", "--seed", "2", "--out", "s.json"], d);
    let text = stdout(&qnr(&["reformulate", "--input", "s.json", "--out", "q.json", "--admm-log", "log.csv"], d));
    assert!(text.contains("parameters: SDP_OPTIMAL"), "{text}");
    let q = read_instance(&d.join("q.json")).unwrap();
    assert!(q.aux >= 1);
    let log = std::fs::read_to_string(d.join("log.csv")).unwrap();
    assert!(log.starts_with("iter,primal_res,dual_res,gap,primal_obj,dual_obj,dual_bound\n"));
    assert!(log.lines().count() > 1);
}

#[test]
fn bound_reports_recovered_box() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qnr(&["generate", "--family", "qcqp", "--n", "2", "--m", "2", "--seed", "1", "--out", "q.json"], d);
    let text = stdout(&qnr(&["bound", "--input", "q.json"], d));
    assert!(text.contains("x0 in ["), "{text}");
    assert!(text.contains("plain McCormick bound:"));
    assert!(text.contains("reformulated McCormick bound:"));
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["bench", "--family", "boxqp", "--n", "4", "--count", "2", "--deterministic", "--out-dir", "out"];
    qnr(&args, d);
    let csv = std::fs::read_to_string(d.join("out/results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "id,family,n,m,rb_plain,rb_qnr,sdr,opt,gc,nodes_plain,nodes_qnr,t_reform_ms,t_plain_ms,t_qnr_ms,status"
    );
    assert_eq!(lines.count(), 2);
    assert!(d.join("out/report.md").exists());
}

#[test]
fn schema_errors_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"kind": "BOXQP", "n": 1, "objective": {"Q": [[1]], "c": [0]}}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qnr")).args(["solve", "--input", "bad.json"]).current_dir(d).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bounds required"));
}
