use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubbard-bounds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gap_report_is_deterministic() {
    let args = ["gap", "--dim", "2", "--length", "8", "--coupling", "1"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["passed"], true);
    let delta = doc["results"]["gap"]["delta"].as_f64().unwrap();
    assert!(delta > 0.0 && delta < 0.5);
}

#[test]
fn timings_are_opt_in() {
    let plain = json(&run(&["gap"]));
    assert!(plain.get("timings").map_or(true, Value::is_null));
    let timed = json(&run(&["gap", "--timings"]));
    assert!(timed["timings"].is_object());
}

#[test]
fn invalid_input_exits_two() {
    let out = run(&["gap", "--length", "6"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("multiple of 4"), "{}", stderr(&out));
    assert_eq!(code(&run(&["gap", "--coupling", "0"])), 2);
    assert_eq!(code(&run(&["gap", "--coupling", "-1"])), 2);
    assert_eq!(code(&run(&["verify", "thm2", "--epsilon", "0.7"])), 2);
    assert_eq!(code(&run(&["verify", "car", "--fock-cap", "30"])), 2);
    assert_eq!(code(&run(&["sweep", "--lengths"])), 2);
    assert_eq!(code(&run(&["export-projector"])), 2);
}

#[test]
fn fock_cap_exits_four_with_hint() {
    let out = run(&["verify", "thm1", "--length", "8", "--fock-cap", "12"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("--fock-cap 16"), "{}", stderr(&out));
    let out = run(&["verify", "car", "--dim", "2", "--length", "4"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("hard limit"), "{}", stderr(&out));
}

#[test]
fn large_coupling_warns() {
    let out = run(&["gap", "--coupling", "3"]);
    assert_eq!(code(&out), 0);
    assert!(!stderr(&out).is_empty());
}

#[test]
fn sweep_csv_has_one_row_per_length() {
    let out = run(&["sweep", "--dim", "3", "--lengths", "4,8,12,16,20", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L,delta,q7_per_vol,a_half,passed");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn thm3_has_no_fock_cap() {
    let out = run(&["verify", "thm3", "--dim", "2", "--length", "64", "--coupling", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn car_passes_and_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("car.csv");
    let out = run(&["verify", "car", "--coupling", "1", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("check,name,relation,measured,bound,margin,tolerance,status"));
    assert!(text.lines().skip(1).all(|l| !l.ends_with(",fail")));
}

#[test]
fn wick_failure_names_the_offending_coefficient() {
    let out = run(&["verify", "wick", "--coupling", "1"]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("FAIL: wick.residual"), "{err}");
    assert!(err.contains("FAIL: wick.coefficient_number_shift"), "{err}");
    assert!(!err.contains("FAIL: wick.coefficient_q"), "{err}");
}

#[test]
fn projector_export_has_header_and_entries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.bin");
    let out = run(&["export-projector", "--length", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 32 + 16 * 8 * 8);
    assert_eq!(u64::from_le_bytes(bytes[0..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 4);
    assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2.0);
}

#[test]
fn operator_export_is_hermitian_coo() {
    let out = run(&["export-operator", "t-hf", "--coupling", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let entries: Vec<(usize, usize, f64, f64)> = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    assert!(!entries.is_empty());
    for &(i, j, re, im) in &entries {
        assert!(i < 256 && j < 256);
        let mirror = entries.iter().find(|e| e.0 == j && e.1 == i).expect("transpose entry");
        assert!((mirror.2 - re).abs() < 1e-14 && (mirror.3 + im).abs() < 1e-14);
    }
}
