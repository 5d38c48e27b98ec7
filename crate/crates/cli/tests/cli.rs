use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn hardylab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardylab")).args(args).current_dir(cwd).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn unknown_key_exits_2_with_line_and_suggestion() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.cfg",
        "function = pow(x, 1.5)\ncommand = circle-check\n\n[circle-check]\nN = 1e6\ns = 4\nsigm=0.1\n",
    );
    let out = hardylab(&["run", &cfg], d.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 7"), "{err}");
    assert!(err.contains("did you mean `sigma`"), "{err}");
    assert!(err.contains("expected:"), "{err}");
}

#[test]
fn missing_function_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.cfg", "command = represent\n[represent]\nN = 1e6\ns = 5\n");
    let out = hardylab(&["run", &cfg], d.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing required key `function`"));
}

#[test]
fn out_of_scope_is_a_structured_compute_error() {
    let d = tempfile::tempdir().unwrap();
    let out = hardylab(&["represent", "--function", "pow(x, 1.5)", "--N", "1000000", "--s", "5"], d.path());
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "compute");
    assert_eq!(err["exit_code"], 3);
}

#[test]
fn bitset_budget_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "sumset-gaps",
        "--function",
        "pow(x, 2)",
        "--s",
        "3",
        "--lo",
        "0",
        "--hi",
        "1000000",
        "--set",
        "bitset_budget=1000",
    ];
    let out = hardylab(&args, d.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(!d.path().join("out/gaps.json").exists());
}

#[test]
fn hk_node_budget_exits_4_with_report() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "hk-solve",
        "--k",
        "3",
        "--s",
        "40",
        "--targets",
        "4000,600000,100000000",
        "--xmax",
        "1000",
        "--set",
        "node_budget=1000",
    ];
    let out = hardylab(&args, d.path());
    assert_eq!(out.status.code(), Some(4));
    let hk: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("out/hk.json")).unwrap()).unwrap();
    assert_eq!(hk["outcome"]["status"], "budget_exceeded");
}

#[test]
fn dry_run_writes_nothing() {
    let d = tempfile::tempdir().unwrap();
    let out = hardylab(&["circle-check", "--function", "pow(x, 2)", "--N", "10000", "--s", "3", "--dry-run"], d.path());
    assert_eq!(out.status.code(), Some(0));
    let est: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(est["command"], "circle-check");
    assert!(est["estimate"]["terms"].as_f64().unwrap() > 0.0);
    assert!(!d.path().join("out").exists());
}

#[test]
fn every_command_has_a_dry_run() {
    let d = tempfile::tempdir().unwrap();
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/ci");
    for e in std::fs::read_dir(corpus).unwrap() {
        let p = e.unwrap().path();
        let out = hardylab(&["run", p.to_str().unwrap(), "--dry-run"], d.path());
        assert_eq!(out.status.code(), Some(0), "{}", p.display());
    }
    assert!(std::fs::read_dir(d.path()).unwrap().next().is_none());
}

#[test]
fn manifest_and_checksums_match_files() {
    let d = tempfile::tempdir().unwrap();
    let args = ["density", "--function", "pow(x, 1.5)", "--q", "1,5", "--n-max", "20000", "--out", "res"];
    let out = hardylab(&args, d.path());
    assert_eq!(out.status.code(), Some(0));
    let dir = d.path().join("res");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    let manifest = report["manifest"].as_array().unwrap();
    assert!(!manifest.is_empty());
    for e in manifest {
        let bytes = std::fs::read(dir.join(e["file"].as_str().unwrap())).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), e["sha256"].as_str().unwrap());
    }
    let sums = std::fs::read_to_string(dir.join("SHA256SUMS")).unwrap();
    assert_eq!(sums.lines().count(), manifest.len());
    assert_eq!(report["config"]["command"], "density");
    assert!(report["wall_time_s"].as_f64().unwrap() >= 0.0);
    // only the final files remain after the temp-file renames
    let names: Vec<String> =
        std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names.len(), manifest.len() + 2, "{names:?}");
}

fn plot_columns(dir: &Path, file: &str) -> String {
    let text = std::fs::read_to_string(dir.join(file)).unwrap();
    let line = text.lines().nth(1).unwrap().to_string();
    assert!(text.lines().skip(2).all(|l| !l.starts_with('#') && !l.is_empty()));
    line
}

#[test]
fn plotdata_headers() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    hardylab(
        &[
            "expsum-scan",
            "--function",
            "pow(x, 1.5)",
            "--set",
            "lo=100",
            "--set",
            "hi=400",
            "--samples",
            "20",
            "--out",
            "a",
        ],
        p,
    );
    assert_eq!(plot_columns(&p.join("a"), "expsum.dat"), "# columns: alpha |S|");
    hardylab(&["density", "--function", "pow(x, 1.5)", "--q", "5", "--n-max", "5000", "--out", "b"], p);
    assert_eq!(plot_columns(&p.join("b"), "density_q5.dat"), "# columns: bin_center frequency");
    hardylab(
        &[
            "represent-scan",
            "--function",
            "add(pow(x, 2), log(x))",
            "--n-start",
            "1000000",
            "--count",
            "5",
            "--s",
            "5",
            "--out",
            "c",
        ],
        p,
    );
    assert_eq!(plot_columns(&p.join("c"), "represent_scan.dat"), "# columns: N residual_int");
    let csv = std::fs::read_to_string(p.join("c/represent_scan.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "N,X,residual_int,residual_real,hk_status");
}

#[test]
fn classify_reports_class_two() {
    let d = tempfile::tempdir().unwrap();
    let out = hardylab(&["classify", "--function", "pow(x,1.5)"], d.path());
    assert_eq!(out.status.code(), Some(0));
    let c: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("out/classify.json")).unwrap()).unwrap();
    assert_eq!(c["profile"]["class"], "II");
    assert!((c["profile"]["c_f"].as_f64().unwrap() - 1.5).abs() < 1e-6);
}

#[test]
fn rerun_is_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/ci/represent-scan.cfg");
    let cfg = cfg.to_str().unwrap();
    hardylab(&["run", cfg, "--out", "one", "--parallelism", "1"], d.path());
    hardylab(&["run", cfg, "--out", "two", "--parallelism", "4"], d.path());
    let a = std::fs::read(d.path().join("one/SHA256SUMS")).unwrap();
    let b = std::fs::read(d.path().join("two/SHA256SUMS")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn flags_override_config_values() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.cfg",
        "function = pow(x, 2)\ncommand = sequence\noutput = from_file\n[sequence]\ncount = 5\n",
    );
    let out = hardylab(&["run", &cfg, "--out", "from_flag"], d.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(d.path().join("from_flag/sequence.csv").exists());
    assert!(!d.path().join("from_file").exists());
}
