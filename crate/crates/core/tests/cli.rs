use std::path::Path;
use std::process::{Command, Output};

fn fi_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fi-lab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TRUNC02: &str = "fi-presentation v1\nprime 10007\ntruncation 12\ngenerators 0\nrelation 3: 1 g0 0->3:\n";

#[test]
fn invariants_of_truncated_free() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.fip", TRUNC02);
    let o = fi_lab(&["invariants", &file]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for line in ["t0 = 0", "t1 = 3", "width1 = 3", "width2 = 4", "width3 = 5", "h0 = 2", "reg_from_t = 2"] {
        assert!(text.lines().any(|l| l.starts_with(line)), "missing `{line}` in\n{text}");
    }

    let o = fi_lab(&["invariants", "--json", &file]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["t"], serde_json::json!([0, 3, 4, 5]));
    assert_eq!(v["h0"], 2);
    assert_eq!(v["window"], 7);
}

#[test]
fn free_module_is_h0_acyclic() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "f.fip", "fi-presentation v1\nprime 101\ntruncation 8\ngenerators 1\n");
    let o = fi_lab(&["invariants", &file]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("width1 = -inf") && text.contains("note: H0-acyclic"), "{text}");
}

#[test]
fn malformed_injection_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.fip", &TRUNC02.replace("0->3:", "0->3:7"));
    let o = fi_lab(&["invariants", &file]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn short_window_exits_3_with_required_n() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.fip", &TRUNC02.replace("truncation 12", "truncation 5"));
    let o = fi_lab(&["invariants", &file]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("need N >= 7"), "{}", stderr(&o));
}

#[test]
fn verify_family_passes() {
    let o = fi_lab(&["verify", "--family", "trunc(0,2)", "--imax", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let records: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.iter().all(|r| r["verdict"] != "fail"));
    let a: Vec<&serde_json::Value> = records.iter().filter(|r| r["check"] == "width_reg").collect();
    assert_eq!(a.len(), 2);
    assert!(a.iter().all(|r| r["witness"]["width"] == serde_json::json!([3, 4, 5])));
    for key in ["check", "instance", "params", "verdict", "reason", "witness", "window", "prime"] {
        assert!(records[0].get(key).is_some(), "missing field {key}");
    }
    assert!(stderr(&o).contains("0 failed"));
}

#[test]
fn verify_random_inequalities_and_prime_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.ndjson");
    let out_s = out.to_string_lossy().into_owned();
    let args = [
        "verify", "--family", "rand(2;3;0.5;42)", "--checks", "ineq", "--prime", "101", "--prime", "10007", "--out", &out_s,
    ];
    let o = fi_lab(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = stdout(&o);
    assert!(summary.contains("p=101 ok/fail/skip") && summary.contains("width_bound"), "{summary}");
    let first = std::fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.lines().any(|l| l.contains("\"width_monotone\"")));
    assert!(!text.contains("\"width_reg\""));

    fi_lab(&args);
    assert_eq!(std::fs::read(&out).unwrap(), first, "reports differ between runs");
}

#[test]
fn dump_round_trips_through_invariants() {
    let o = fi_lab(&["dump", "--family", "trunc(0,2)"]);
    assert_eq!(stdout(&o), TRUNC02);
    let o = fi_lab(&["dump", "--family", "syz(0,2,1)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_drives_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "suite.toml",
        "prime = [10007]\nfamily = [\"syz(1,1,1)\"]\nimax = 2\nchecks = \"width_reg,delta_drop\"\n",
    );
    let o = fi_lab(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert!(lines.iter().any(|l| l.contains("\"width_reg\"") && l.contains("\"pass\"")));
    let broken = write(dir.path(), "broken.toml", "prime = [10007]\nimax = \"three\"\n");
    assert_eq!(fi_lab(&["verify", "--config", &broken]).status.code(), Some(2));
}
