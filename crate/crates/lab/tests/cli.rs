use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_w2lab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON: {line}: {e}"))
}

#[test]
fn writes_csv_and_json_mirror() {
    let dir = scratch("integrals");
    let out = run(&["integrals", "--seed", "1", "--n", "1e4,1e8", "--rho", "0.6", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("integrals.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "kind,n_or_rho,value,centered_or_ratio,error_estimate,evaluations,seed,reps,config_hash");
    assert!(csv.lines().any(|l| l.starts_with("limit_moment,") && l.contains(",inf,")));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("integrals.json")).unwrap()).unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), csv.lines().count() - 1);
    assert_eq!(json["config"]["seed"], 1);
    assert_eq!(rows[0]["config_hash"], json["config_hash"]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("config");
    let cfg = dir.join("run.json");
    fs::write(&cfg, r#"{"experiment": "one_sample", "n": [50], "reps": 10, "seed": 3}"#).unwrap();
    let out_dir = dir.join("out");
    let out = run(&["one-sample", "--config", cfg.to_str().unwrap(), "--reps", "12", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("one_sample.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("50,"));
    assert!(row.contains(",3,12,"), "{row}");
}

#[test]
fn failures_exit_nonzero_with_json_error() {
    let out = run(&["one-sample", "--n", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("seed"));

    let out = run(&["limit-compare", "--seed", "1", "--rho", "0", "--out", scratch("refused").to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "config");

    let out = run(&["two-sample", "--seed", "1", "--rho", "1.5"]);
    assert!(!out.status.success());
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("rho"));
}

#[test]
fn csv_bytes_do_not_depend_on_worker_count() {
    let mut bodies = Vec::new();
    for workers in ["1", "3"] {
        let dir = scratch(&format!("workers{workers}"));
        let out = run(&[
            "two-sample", "--seed", "42", "--n", "300,600", "--rho", "-0.3,0.5", "--reps", "30", "--workers", workers, "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        bodies.push(fs::read(dir.join("two_sample.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}
