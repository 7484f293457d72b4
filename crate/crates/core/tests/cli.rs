use std::path::Path;
use std::process::{Command, Output};

fn bernconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bernconv"))
        .args(args)
        .env_remove("BERNCONV_CACHE_DIR")
        .output()
        .expect("run bernconv")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit status")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn certified_exits_zero() {
    let o = bernconv(&["certify", "--lambda", "0.70710678", "--depth", "40", "--grid", "8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["status"], "certified");
    assert_eq!(v["scale"], 0.125);
    assert!(v["witness"].is_null());
}

#[test]
fn refuted_exits_three() {
    let o = bernconv(&["certify", "--lambda", "0.61803399", "--depth", "40", "--grid", "50"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["status"], "refuted");
    assert!(v["witness_x"].as_f64().unwrap() < 0.5);
}

#[test]
fn parameter_errors_exit_one_and_name_the_parameter() {
    for (args, name) in [
        (&["certify", "--lambda", "0.7", "--depth", "13"][..], "depth"),
        (&["certify", "--lambda", "0.4"][..], "lambda"),
        (&["certify", "--lambda", "0.7", "--grid", "1"][..], "grid"),
        (&["certify-interval", "--lambda", "0.51", "--eps", "0.02"][..], "eps"),
        (&["rychlik", "--lambda", "0.8", "--n", "2", "--depth", "16"][..], "n"),
        (&["scan", "--from", "0.7", "--to", "0.6", "--step", "0.1"][..], "from"),
        (&["certify", "--lambda", "0.7", "--threads", "0"][..], "threads"),
    ] {
        let o = bernconv(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(name), "{args:?}: {}", stderr(&o));
    }
    let o = bernconv(&["certify", "--no-such-flag"]);
    assert_eq!(code(&o), 1);
    let o = bernconv(&["--help"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn memory_cap_is_a_resource_error() {
    let o = bernconv(&["certify", "--lambda", "0.7", "--depth", "40", "--mem-cap", "4096"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("resource"));
}

#[test]
fn envelope_csv_schema() {
    let o = bernconv(&["envelope", "--lambda", "0.75", "--depth", "20", "--grid", "50"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,phi_lower,phi_upper");
    assert_eq!(lines.len(), 52);
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(f.len(), 3);
        assert!(f[1] <= f[2]);
    }
    assert!(lines[1].starts_with("0.0000000000000000e0,"));
    // Symmetric rows.
    assert_eq!(lines[11].split_once(',').unwrap().1, lines[41].split_once(',').unwrap().1);
}

#[test]
fn envelope_json_and_cdf_csv() {
    let o = bernconv(&["envelope", "--lambda", "0.75", "--depth", "16", "--grid", "8", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["lo"].as_array().unwrap().len(), 5);

    let o = bernconv(&["cdf", "--lambda", "0.75", "--depth", "16", "--grid", "4"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,f_lower_num,f_upper_num,denom_log2");
    assert_eq!(lines.len(), 6);
    let last: Vec<&str> = lines[5].split(',').collect();
    // The top sum is 1 − λ^L, just above the lower-bound threshold at x = 1.
    assert_eq!(&last[2..], ["65536", "16"]);
    assert!(last[1].parse::<u64>().unwrap() < 65536);
}

#[test]
fn scan_csv_and_refuted_exit() {
    let o = bernconv(&["scan", "--from", "0.6", "--to", "0.64", "--step", "0.02", "--depth", "24", "--grid", "50"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,status,scale,witness_x,min_margin");
    assert_eq!(lines.len(), 4);
    let any_refuted = lines[1..].iter().any(|l| l.split(',').nth(1) == Some("refuted"));
    assert_eq!(code(&o), if any_refuted { 3 } else { 0 });
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["envelope", "--lambda", "0.8", "--depth", "24", "--grid", "50"];
    let one = bernconv(&[&args[..], &["--threads", "1"]].concat());
    let many = bernconv(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let o = bernconv(&[
        "certify",
        "--lambda-preset",
        "sqrt2",
        "--depth",
        "24",
        "--grid",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["grid"], 8);
}

fn only_file(dir: &Path) -> std::path::PathBuf {
    let files: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1, "{files:?}");
    files[0].clone()
}

#[test]
fn cache_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["envelope", "--lambda", "0.7", "--depth", "20", "--grid", "16", "--cache-dir", d];
    let first = bernconv(&args);
    assert_eq!(code(&first), 0);
    let file = only_file(dir.path());
    assert!(file.file_name().unwrap().to_str().unwrap().starts_with("bchs-"));
    let second = bernconv(&args);
    assert_eq!(first.stdout, second.stdout);

    let mut bytes = std::fs::read(&file).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    std::fs::write(&file, &bytes).unwrap();
    let o = bernconv(&args);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("integrity"), "{}", stderr(&o));
}

#[test]
fn oracle_check_and_rychlik() {
    let o = bernconv(&["oracle-check", "--lambda", "0.75", "--depth", "12", "--checks", "50"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["mismatches"], 0);

    let o = bernconv(&["rychlik", "--lambda-preset", "sqrt2", "--source", "exact"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["hypothesis"], "piecewise-convex");
    assert!(v["sup_bound"].as_f64().unwrap() >= 1.70710);
}
