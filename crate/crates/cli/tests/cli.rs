use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn knill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knill")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const CONFIG: &str = r#"{"name": "cc", "kind": "code_capacity",
    "code": {"family": "surface", "distance": 3}, "q": [0.0, 0.05], "shots": 3000, "seed": 4}"#;

#[test]
fn run_is_reproducible_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", CONFIG);
    let out = dir.path().join("out");
    let a = knill(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = knill(&["--threads", "1", "run", &cfg]);
    assert_eq!(stdout(&a), stdout(&b));
    let csv = stdout(&a);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("config_hash,q,shots,failures,rate,ci_low,ci_high,seconds"));
    let zero: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(zero[3], "0");
    let files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 3);
    assert!(out.join("by_code/surface_d3_code_capacity.csv").exists());
    let c = knill(&["run", &cfg, "--shots", "10"]);
    assert!(stdout(&c).contains(",10,"));
}

#[test]
fn validate_echoes_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", CONFIG);
    let o = knill(&["validate", &cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"per_observable\": false"));
    let bad = write(dir.path(), "bad.json", r#"{"kind": "knill", "code": {"family": "surface", "distance": 3}, "q": [0.01], "shots": 5}"#);
    let o = knill(&["validate", &bad]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("rounds"));
}

#[test]
fn failed_points_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"kind": "code_capacity", "code": {"family": "lifted_product", "path": "/missing/base.txt"},
            "q": [0.01], "shots": 5}"#,
    );
    let o = knill(&["run", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/missing/base.txt"));
}

#[test]
fn dem_then_decode() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(
        dir.path(),
        "rep.circ",
        "QUBITS 5\nRESET_Z 0 1 2 3 4\nNOISE_XFLIP 0 1 2 p=0.05\nCNOT 0 3 1 3 1 4 2 4\n\
         MEASURE_Z 3 4\nMEASURE_Z 0 1 2\nDETECTOR rec=0\nDETECTOR rec=1\nOBSERVABLE 0 rec=2\n",
    );
    let o = knill(&["dem", &circuit]);
    assert!(o.status.success());
    let dem = write(dir.path(), "rep.dem", &stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("error")).count(), 3);
    let syn = write(dir.path(), "syn.txt", "10\n11\n01\n00\n");
    for decoder in ["bp", "bposd", "mwpm"] {
        let o = knill(&["decode", "--dem", &dem, "--syndromes", &syn, "--decoder", decoder]);
        assert!(o.status.success());
        let first: Vec<String> = stdout(&o).lines().map(|l| l.split(' ').next().unwrap().to_string()).collect();
        assert_eq!(first, ["100", "010", "001", "000"], "{decoder}");
    }
    let short = write(dir.path(), "short.txt", "1\n");
    assert!(!knill(&["decode", "--dem", &dem, "--syndromes", &short]).status.success());
}

#[test]
fn ld_check_reports_json() {
    let o = knill(&["ld-check", "--bell-pairs", "4", "--shots", "20000"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
    let dir = tempfile::tempdir().unwrap();
    let dump = write(dir.path(), "sup.txt", &"0 1 2\n".repeat(50));
    let o = knill(&["ld-check", "--supports", &dump, "--qubits", "3", "--tau", "0.5"]);
    assert!(!o.status.success());
}
