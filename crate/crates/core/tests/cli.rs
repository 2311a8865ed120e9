use std::process::Command;

use ritt::cli::{load_spec, run, EXIT_FAILED, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use ritt::growth::Source;
use ritt::Error;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ritt").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn call_json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn indicator_example() {
    let v = call_json(&[
        "indicator",
        "--spec",
        "expexp:a=2,c=1",
        "--p",
        "2",
        "--q",
        "0",
        "--sigma",
        "5:30:200",
    ]);
    assert!((v["rho"].as_f64().unwrap() - 2.0).abs() < 1e-3);
    assert!((v["lambda"].as_f64().unwrap() - 2.0).abs() < 1e-3);
    assert!((v["delta"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(v["estimates"].as_array().unwrap().len(), 6);
}

#[test]
fn single_kind_and_plot() {
    let v = call_json(&[
        "indicator",
        "--spec",
        "ee-1-3",
        "--p",
        "2",
        "--q",
        "0",
        "--kind",
        "type",
    ]);
    assert!((v["delta"].as_f64().unwrap() - 3.0).abs() < 1e-3);
    assert_eq!(v["estimates"][0]["kind"], "type");

    let (code, out, _) = call(&[
        "indicator",
        "--spec",
        "ee-1-3",
        "--p",
        "2",
        "--q",
        "0",
        "--kind",
        "order",
        "--plot",
    ]);
    assert_eq!(code, EXIT_OK);
    let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 200);
    let cols: Vec<f64> = data[199]
        .split_whitespace()
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(cols[0], 30.0);
    // log log M / sigma at sigma = 30 with ln M ~ 3 e^sigma
    assert!((cols[1] - (30.0 + 3f64.ln()) / 30.0).abs() < 1e-9);
}

#[test]
fn oracle_example() {
    let (code, out, _) = call(&[
        "oracle",
        "--instances",
        "10000",
        "--seed",
        "7",
        "--format",
        "table",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l == "0 violations"), "{out}");
    let v = call_json(&["oracle", "--instances", "100", "--seed", "7"]);
    assert_eq!(v["violations"], 0);
    assert_eq!(v["summary"], "0 violations");
}

#[test]
fn check_example_and_failure_status() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("triples.json");
    std::fs::write(
        &batch,
        r#"[{"theorem": "T1", "f": "ee-2-1", "g": "ee-1-1", "h": "ee-3-1"}]"#,
    )
    .unwrap();
    let v = call_json(&["check", "--batch", batch.to_str().unwrap(), "--tol", "2e-2"]);
    assert_eq!(v["summary"]["pass"], 1);
    assert_eq!(v["reports"][0]["verdict"], "pass");

    // the estimated lower-type bound misses by about 3e-9, which only a near-zero tolerance exposes
    std::fs::write(
        &batch,
        r#"[{"theorem": "Ct2", "f": "ee-1-6", "g": "ee-1-2", "h": "ee-1-3"}]"#,
    )
    .unwrap();
    let (code, out, _) = call(&[
        "check",
        "--batch",
        batch.to_str().unwrap(),
        "--tol",
        "1e-12",
    ]);
    assert_eq!(code, EXIT_FAILED);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"]["fail"], 1);
    let (code, _, _) = call(&["check", "--batch", batch.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn spec_loading() {
    assert_eq!(
        load_spec(r#"{"family":"expexp","a":1,"c":3}"#).unwrap(),
        Source::Expexp {
            a: 1.0,
            c: 3.0,
            log_scale: 0.0
        }
    );
    assert_eq!(
        load_spec(r#"{"family":"osc_profile","rho":2,"lambda":1,"p":2,"q":0}"#).unwrap(),
        Source::OscProfile {
            rho: 2.0,
            lambda: 1.0,
            p: 2,
            q: 0
        }
    );
    assert!(matches!(
        load_spec(r#"{"family":"nope"}"#),
        Err(Error::Schema(_))
    ));
    assert!(matches!(
        load_spec(r#"{"family":"expexp","a":1,"c":3,"b":0}"#),
        Err(Error::Schema(_))
    ));
    assert_eq!(
        load_spec("ee-1-3").unwrap(),
        load_spec("expexp:a=1,c=3").unwrap()
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(
        &path,
        "{\n  \"family\": \"tower\",\n  \"k\": 2,\n  \"rho\": 1.5\n}\n",
    )
    .unwrap();
    match load_spec(path.to_str().unwrap()) {
        Err(Error::Schema(m)) => assert!(m.contains("spec.json") && m.contains("`q`"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn exit_statuses() {
    assert_eq!(
        call(&["validate", "--spec", r#"{"family":"nope"}"#]).0,
        EXIT_USAGE
    );
    assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(call(&["indicator", "--spec", "ee-1-1"]).0, EXIT_USAGE);
    assert_eq!(
        call(&[
            "indicator",
            "--spec",
            "ee-1-1",
            "--p",
            "2",
            "--q",
            "0",
            "--sigma",
            "30:5:10"
        ])
        .0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&["detect", "--spec", "ee-1-1", "--p-max", "7"]).0,
        EXIT_USAGE
    );
    assert_eq!(call(&["oracle", "--window", "2"]).0, EXIT_USAGE);
    assert_eq!(call(&["corpus", "describe", "ee-1"]).0, EXIT_USAGE);
    assert_eq!(
        call(&["profile", "--spec", "linear:slope=-1,intercept=0"]).0,
        EXIT_NUMERIC
    );
    assert_eq!(
        call(&[
            "indicator",
            "--spec",
            "ee-1-1",
            "--p",
            "2",
            "--q",
            "0",
            "--sigma",
            "1e6:1e7:20"
        ])
        .0,
        EXIT_NUMERIC
    );
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("oracle"));
}

#[test]
fn detect_and_relative() {
    let v = call_json(&["detect", "--spec", "power-1-2"]);
    assert_eq!(v["pair"]["p"], 2);
    assert_eq!(v["pair"]["q"], 1);
    let v = call_json(&["detect", "--spec", "ee-2-1", "--g", "ee-1-1"]);
    assert_eq!(v["pair"]["p"], 0);
    assert!((v["rho"].as_f64().unwrap() - 2.0).abs() < 1e-2);

    let v = call_json(&[
        "relative", "--f", "ee-1-5", "--g", "ee-1-2", "--p", "0", "--q", "0",
    ]);
    assert!((v["rho"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    let delta = v["estimates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["kind"] == "relative_type")
        .unwrap();
    assert!((delta["value"].as_f64().unwrap() - 2.5).abs() < 1e-2);
}

#[test]
fn profiles_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = [
        "profile",
        "--spec",
        "ee-1-1",
        "--sigma",
        "1:10:10",
        "--format",
        "csv",
        "--cache-dir",
        cache,
    ];
    let (code, cold, _) = call(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let (_, warm, _) = call(&args);
    assert_eq!(cold, warm);
    let (_, uncached, _) = call(&args[..7]);
    assert_eq!(cold, uncached);
    let lines: Vec<&str> = cold.lines().collect();
    assert_eq!(lines[0], "sigma,level,mantissa,level_index");
    assert_eq!(lines.len(), 11);
}

#[test]
fn corpus_listing() {
    let (code, out, _) = call(&["corpus", "list", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), ritt::corpus::REGISTERED.len() + 1);
    let v = call_json(&["corpus", "describe", "osc-2-1-2-0"]);
    assert_eq!(v["regular"], false);
}

#[test]
fn validate_batch() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("b.json");
    std::fs::write(
        &batch,
        r#"{"instances": [{"theorem": "C5", "f": "ee-2-1", "g": "ee-1-1"}]}"#,
    )
    .unwrap();
    let (code, out, _) = call(&[
        "validate",
        "--batch",
        batch.to_str().unwrap(),
        "--format",
        "table",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("C5"));
}

#[test]
fn binary_is_deterministic() {
    let exe = env!("CARGO_BIN_EXE_ritt");
    let args = [
        "relative", "--f", "ee-2-1", "--g", "ee-1-1", "--p", "0", "--q", "0",
    ];
    let a = Command::new(exe).args(args).output().unwrap();
    let b = Command::new(exe).args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
