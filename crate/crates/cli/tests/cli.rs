use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn itflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itflow"))
        .args(args)
        .env_remove("ITFLOW_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV document.
fn rows(text: &str) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn network_file() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../power/data/ieee39.net")
}

#[test]
fn two_state_transfer_value() {
    let out = itflow(&[
        "transfer",
        "--demo",
        "two-state",
        "--mu",
        "0.5",
        "--from",
        "y",
        "--to",
        "x",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# itflow-csv/1"));
    assert_eq!(lines.next(), Some("t,source,target,value,units"));
    let row = &rows(&text)[0];
    assert_eq!(
        (
            row[0].as_str(),
            row[1].as_str(),
            row[2].as_str(),
            row[4].as_str()
        ),
        ("steady-state", "y", "x", "nats")
    );
    let v: f64 = row[3].parse().unwrap();
    assert!((v - 0.392).abs() < 5e-4, "{v}");
}

#[test]
fn bits_are_nats_over_ln2() {
    let nats = itflow(&[
        "transfer",
        "--demo",
        "two-state",
        "--from",
        "y",
        "--to",
        "x",
    ]);
    let bits = itflow(&[
        "transfer",
        "--demo",
        "two-state",
        "--from",
        "y",
        "--to",
        "x",
        "--units",
        "bits",
    ]);
    let n: f64 = rows(&stdout(&nats))[0][3].parse().unwrap();
    let b: f64 = rows(&stdout(&bits))[0][3].parse().unwrap();
    assert!((b - n / std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn series_starts_at_zero_and_approaches_steady_state() {
    let out = itflow(&[
        "transfer",
        "--demo",
        "mass-spring",
        "--from",
        "z1,z2",
        "--to",
        "z3,z4",
        "--steps",
        "400",
    ]);
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 401);
    assert_eq!(r[0][0], "0");
    let steady = itflow(&[
        "transfer",
        "--demo",
        "mass-spring",
        "--from",
        "z1,z2",
        "--to",
        "z3,z4",
    ]);
    let s: f64 = rows(&stdout(&steady))[0][3].parse().unwrap();
    let last: f64 = r[400][3].parse().unwrap();
    assert!((last - s).abs() < 1e-6 * s.abs().max(1.0), "{last} vs {s}");
}

#[test]
fn three_bus_sweep_flags_in_order() {
    let out = itflow(&["sweep", "--demo", "three-bus", "--transfer", "V->*"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1), Some("param,max_re_eig,class,V->*"));
    let flags: Vec<(String, f64)> = rows(&text)
        .into_iter()
        .filter(|r| r[2].starts_with('S'))
        .map(|r| (r[2].clone(), r[0].parse().unwrap()))
        .collect();
    let names: Vec<&str> = flags.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["S1-hopf", "S2-hopf", "S3-saddle-node"]);
    assert!(flags[0].1 < flags[1].1 && flags[1].1 < flags[2].1);
    // Rows stay in parameter order; unstable rows have no transfer.
    let all = rows(&text);
    let params: Vec<f64> = all.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(params.windows(2).all(|w| w[0] <= w[1]));
    assert!(all
        .iter()
        .filter(|r| r[2] == "oscillatory-unstable")
        .all(|r| r[3].is_empty()));
}

#[test]
fn counterexample_participation_is_identity() {
    let out = itflow(&["participation", "--demo", "pf-counterexample"]);
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 2);
    for (i, row) in r.iter().enumerate() {
        for j in 0..2 {
            let v: f64 = row[j + 1].parse().unwrap();
            assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-6);
        }
    }
}

#[test]
fn mode_transfer_per_state() {
    let out = itflow(&[
        "mode-transfer",
        "--demo",
        "pf-counterexample",
        "--mode",
        "0",
        "--tau",
        "1",
    ]);
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 2);
    assert_eq!((r[1][1].as_str(), r[1][2].as_str()), ("x2", "mode0"));
    assert!(r[1][3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn json_mirrors_csv() {
    let args = ["transfer-matrix", "--demo", "mass-spring"];
    let csv = rows(&stdout(&itflow(&args)));
    let json: Value = serde_json::from_str(&stdout(&itflow(
        &[&args[..], &["--format", "json"]].concat(),
    )))
    .unwrap();
    assert_eq!(json["format"], "itflow-json/1");
    assert_eq!(
        json["columns"],
        serde_json::json!(["t", "source", "target", "value", "units"])
    );
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), csv.len());
    for (c, j) in csv.iter().zip(jrows) {
        assert_eq!(j["source"], c[1].as_str());
        assert_eq!(j["value"].as_f64().unwrap(), c[3].parse::<f64>().unwrap());
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: Option<&str>| {
        let path = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_itflow"));
        cmd.args(["transfer-matrix", "--model"])
            .arg(network_file())
            .arg("--output")
            .arg(&path);
        match threads {
            Some(t) => cmd.env("ITFLOW_THREADS", t),
            None => cmd.env_remove("ITFLOW_THREADS"),
        };
        assert!(cmd.status().unwrap().success());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", None);
    assert_eq!(a, run("b.csv", None));
    assert_eq!(a, run("c.csv", Some("1")));
    // Ten generators give ninety ordered pairs.
    assert_eq!(rows(&String::from_utf8(a).unwrap()).len(), 90);
}

#[test]
fn oracle_is_seeded() {
    let args = [
        "oracle",
        "--demo",
        "two-state",
        "--from",
        "y",
        "--to",
        "x",
        "--samples",
        "20000",
        "--seed",
        "7",
    ];
    let a = itflow(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, itflow(&args).stdout);
    let r = &rows(&stdout(&a))[0];
    let diff: f64 = r[4].parse().unwrap();
    assert!(diff < 0.05, "{diff}");
}

#[test]
fn validation_errors_exit_2_with_a_record() {
    let out = itflow(&[
        "transfer",
        "--demo",
        "two-state",
        "--from",
        "y",
        "--to",
        "nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1), Some("error,message"));
    assert!(text.lines().nth(2).unwrap().starts_with("ValidationError,"));

    let overlap = itflow(&[
        "transfer",
        "--demo",
        "two-state",
        "--from",
        "x,y",
        "--to",
        "y",
    ]);
    assert_eq!(overlap.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.net");
    let text = std::fs::read_to_string(network_file())
        .unwrap()
        .replacen("p_load", "p_lood", 1);
    std::fs::write(&bad, text).unwrap();
    let out = itflow(&[
        "transfer-matrix",
        "--format",
        "json",
        "--model",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["error"]["name"], "ParseError");

    let threads = Command::new(env!("CARGO_BIN_EXE_itflow"))
        .args([
            "transfer",
            "--demo",
            "two-state",
            "--from",
            "y",
            "--to",
            "x",
        ])
        .env("ITFLOW_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3_with_the_module_error() {
    let out = itflow(&[
        "transfer",
        "--demo",
        "two-state",
        "--mu",
        "1.5",
        "--from",
        "y",
        "--to",
        "x",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["error"]["name"], "UnstableSystem");

    let out = itflow(&["transfer-matrix", "--demo", "ieee39", "--param", "3.0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(rows(&stdout(&out))[0][0] == "PowerFlowDivergence");
}

#[test]
fn network_sweep_reports_the_nose() {
    let out = itflow(&[
        "sweep",
        "--demo",
        "ieee39",
        "--range",
        "1.2:1.3",
        "--points",
        "4",
        "--transfer",
        "G10/*->*",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let r = rows(&text);
    assert_eq!(r.len(), 5);
    assert_eq!(r[0][0], "1.2");
    assert_eq!(r[0][2], "stable");
    assert!(r[0][3].parse::<f64>().unwrap() > 0.0);
    assert_eq!(r[4][2], "oscillatory-unstable");
    assert!(r[4][3].is_empty());
}

#[test]
fn demos_run() {
    for name in [
        "two-state",
        "mass-spring",
        "pf-counterexample",
        "three-bus",
        "ieee39",
    ] {
        let out = itflow(&["demo", name]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!rows(&stdout(&out)).is_empty());
    }
}
