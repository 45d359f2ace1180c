use std::path::Path;
use std::process::{Command, Output};

fn surrogate(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surrogate")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run_manifest.json")).unwrap()).unwrap()
}

const AT2: &str = "PEER NGA STRONG MOTION DATABASE RECORD
tiny test record
ACCELERATION TIME SERIES IN UNITS OF G
NPTS=   8, DT=   .0100 SEC
  0.0000000E+00  1.0000000E-01  2.0000000E-01 -1.0000000E-01  5.0000000E-02
 -2.0000000E-01  1.0000000E-01  0.0000000E+00
";

#[test]
fn missing_record_is_a_user_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", "structure = \"frame\"\nrecords.files = [\"nowhere.at2\"]\n");
    let out = surrogate(tmp.path(), &["simulate", "--config", "c.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.at2"));
    let m = manifest(&tmp.path().join("o"));
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("nowhere.at2"));
}

#[test]
fn unknown_key_and_missing_config_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", "structure = \"frame\"\nrecords.sythetic = 2\n");
    let out = surrogate(tmp.path(), &["simulate", "--config", "c.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sythetic"));
    let out = surrogate(tmp.path(), &["simulate", "--out", "o2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(manifest(&tmp.path().join("o2"))["status"], "error");
    assert_eq!(surrogate(tmp.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_one_csv_per_record_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "r1.at2", AT2);
    write(
        tmp.path(),
        "c.toml",
        "structure = \"frame\"\nrecords.files = [\"*.at2\"]\nrecords.synthetic = 1\nrecords.synthetic_duration = 2.0\n",
    );
    for run in ["a", "b"] {
        let out = surrogate(tmp.path(), &["simulate", "--config", "c.toml", "--out", run]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["frame_r1.csv", "frame_syn0.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        assert_eq!(a, std::fs::read(tmp.path().join("b").join(name)).unwrap());
    }
    let m = manifest(&tmp.path().join("a"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    let out = surrogate(tmp.path(), &["simulate", "rocking", "--config", "c.toml", "--out", "r"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("r/rocking_r1.csv")).unwrap();
    assert!(csv.starts_with("time,theta,theta_norm,theta_dot,overturned\n"));
}

#[test]
fn seed_flag_changes_synthetic_records() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.toml",
        "structure = \"frame\"\nrecords.synthetic = 1\nrecords.synthetic_duration = 2.0\nrecords.pga_target = 0.4\n",
    );
    assert_eq!(surrogate(tmp.path(), &["scale", "--config", "c.toml", "--seed", "42", "--out", "o"]).status.code(), Some(0));
    let table = std::fs::read_to_string(tmp.path().join("o/scale_factors.csv")).unwrap();
    assert!(table.lines().nth(1).unwrap().starts_with("syn42,"));
    assert!(tmp.path().join("o/syn42.at2").is_file());
    assert_eq!(manifest(&tmp.path().join("o"))["seed"], 42);
}

#[test]
fn train_eval_bench_round() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.toml",
        "structure = \"frame\"\nseed = 2\nrecords.synthetic = 3\nrecords.synthetic_duration = 8.0\nrecords.sa_target = 3.0\n",
    );
    let out = surrogate(tmp.path(), &["train", "--config", "c.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(tmp.path().join("o/train_summary.csv")).unwrap();
    let arch = summary.lines().find_map(|l| l.strip_prefix("architecture,")).unwrap();
    let log = std::fs::read_to_string(tmp.path().join("o/train_log.csv")).unwrap();
    let last: Vec<&str> = log.lines().last().unwrap().split(',').collect();
    assert_eq!(last[6], arch);
    if summary.contains("converged,true") {
        assert!(last[3].parse::<f64>().unwrap() <= 3.0);
    }

    let out = surrogate(tmp.path(), &["eval", "--config", "c.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let eval = std::fs::read_to_string(tmp.path().join("o/eval.csv")).unwrap();
    let roles: Vec<&str> = eval.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(roles, ["Training", "Training", "Testing"]);
    let svg = std::fs::read_to_string(tmp.path().join("o/overlay_syn4.svg")).unwrap();
    assert!(svg.contains(">prediction<") && svg.contains(">oracle<"));

    let out = surrogate(tmp.path(), &["bench", "--config", "c.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let bench = std::fs::read_to_string(tmp.path().join("o/bench.csv")).unwrap();
    assert!(bench.contains("\nsingle_total,") && bench.contains("\nmulti_total,"));

    // A frame network does not fit the rocking structure.
    write(tmp.path(), "rock.toml", "structure = \"rocking\"\nrecords.synthetic = 1\n");
    let out = surrogate(tmp.path(), &["eval", "--config", "rock.toml", "--out", "r", "--network", "o/network.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("9/3") && err.contains("5/1"), "{err}");
}

#[test]
fn eval_without_records_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.toml",
        "structure = \"rocking\"\nrecords.synthetic = 2\nrecords.synthetic_duration = 3.0\nrecords.pga_target = 1.5\n",
    );
    assert_eq!(surrogate(tmp.path(), &["train", "--config", "c.toml", "--out", "o"]).status.code(), Some(0));
    write(tmp.path(), "empty.toml", "structure = \"rocking\"\n");
    let out = surrogate(tmp.path(), &["eval", "--config", "empty.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(tmp.path().join("o/eval.csv")).unwrap().lines().count(), 1);
}

#[test]
fn spectrum_and_plot_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", "structure = \"frame\"\nrecords.synthetic = 1\nrecords.synthetic_duration = 3.0\nspectrum.points = 5\n");
    assert_eq!(surrogate(tmp.path(), &["spectrum", "--config", "c.toml", "--out", "o"]).status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("o/spectrum_syn0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert_eq!(surrogate(tmp.path(), &["plot", "--config", "c.toml", "--out", "o"]).status.code(), Some(0));
    let svg = std::fs::read_to_string(tmp.path().join("o/plot_syn0.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("floor3"));
}
