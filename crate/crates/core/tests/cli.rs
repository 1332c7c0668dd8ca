use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bbrecog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbrecog"))
        .args(args)
        .env_remove("BBRECOG_RETRY_BUDGET")
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = bbrecog(&all);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (v, out.status.code().unwrap())
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn sym4_examples() {
    for (args, target, order) in [
        ("--flavor pgl2 --p 3 --k 2 --seed 42", "Sym4", 24),
        ("--flavor psl2 --p 11 --k 1 --seed 7", "Alt4", 12),
        (
            "--flavor sl2 --p 5 --k 1 --seed 7",
            "SL2(3)-normalizer(order24)",
            24,
        ),
    ] {
        let mut a = vec!["sym4", "--verify"];
        a.extend(args.split(' '));
        let (v, code) = json(&a);
        assert_eq!(code, 0, "{args}");
        assert_eq!(v["verified"], true);
        assert_eq!(v["result"]["target"], target);
        assert_eq!(v["fingerprint"]["order"], order);
        assert!(v["counters"]["mul"].as_u64().unwrap() > 0);
        assert!(v["counters"]["rand"].as_u64().unwrap() > 0);
        assert!(v["wall_time_ms"].is_u64());
    }
}

#[test]
fn subfield_examples() {
    for (args, target, order) in [
        ("--flavor pgl2 --p 7 --k 2 --a 1 --seed 3", "PGL2(7^1)", 336),
        ("--flavor pgl2 --p 5 --k 2 --a 1", "Sym4", 24),
        ("--flavor pgl2 --p 3 --k 4 --a 2", "PGL2(3^2)", 720),
    ] {
        let mut a = vec!["subfield", "--verify"];
        a.extend(args.split(' '));
        let (v, code) = json(&a);
        assert_eq!(code, 0, "{args}");
        assert_eq!(v["verified"], true);
        assert_eq!(v["result"]["target"], target);
        assert_eq!(v["fingerprint"]["order"], order);
    }
}

#[test]
fn field_size_examples() {
    let (v, code) = json(&[
        "field-size",
        "--flavor",
        "pgl2",
        "--p",
        "3",
        "--k",
        "3",
        "--kmax",
        "16",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["recovered_k"], 3);
    assert_eq!(v["result"]["matches"], true);
    let (v, _) = json(&["field-size", "--p", "5", "--k", "1", "--kmax", "4"]);
    assert_eq!(v["result"]["recovered_k"], 1);
    let (v, code) = json(&[
        "field-size",
        "--p",
        "3",
        "--k",
        "3",
        "--kmax",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 1);
    assert!(v["error"].as_str().unwrap().contains("up to 2"));
}

#[test]
fn invalid_input_exits_2() {
    for args in [
        &["subfield", "--p", "3", "--k", "4", "--a", "3"][..],
        &["sym4", "--flavor", "gl2", "--p", "3", "--k", "2"],
        &["sym4", "--p", "9", "--k", "1"],
        &["sym4", "--p", "2", "--k", "3"],
        &["sym4", "--p", "3"],
        &[
            "field-size",
            "--p",
            "3",
            "--k",
            "2",
            "--kmax",
            "4",
            "--samples",
            "1",
        ],
    ] {
        assert_eq!(bbrecog(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn retry_budget_from_environment() {
    let run = |budget: &str| {
        Command::new(env!("CARGO_BIN_EXE_bbrecog"))
            .args([
                "subfield", "--p", "7", "--k", "2", "--a", "1", "--seed", "3",
            ])
            .env("BBRECOG_RETRY_BUDGET", budget)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("1"), Some(1));
    assert_eq!(run("0"), Some(2));
    assert_eq!(run("512"), Some(0));
}

#[test]
fn reports_are_reproducible() {
    let args = [
        "sym4", "--flavor", "psl2", "--p", "17", "--k", "1", "--seed", "5", "--verify",
    ];
    let (a, _) = json(&args);
    let (b, _) = json(&args);
    assert_eq!(without_time(a.clone()), without_time(b));
    let (c, _) = json(&[
        "sym4", "--flavor", "psl2", "--p", "17", "--k", "1", "--seed", "6", "--verify",
    ]);
    assert_ne!(without_time(a)["result"], without_time(c)["result"]);
}

fn write_result(dir: &Path, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join("result.json");
    let mut a = args.to_vec();
    a.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(bbrecog(&a).status.code(), Some(0));
    path
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_result(dir.path(), &["sym4", "--p", "5", "--k", "2", "--seed", "8"]);
    let input = path.to_str().unwrap();
    let (v, code) = json(&["verify", "--input", input]);
    assert_eq!((code, &v["verified"]), (0, &Value::Bool(true)));

    let (v, code) = json(&["verify", "--input", input, "--cap", "10"]);
    assert_eq!((code, &v["verified"]), (0, &Value::from("skipped")));

    let mut report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entry = &mut report["result"]["generators"][0]["rows"][0][1][0];
    let old = entry.as_u64().unwrap();
    *entry = Value::from((old + 1) % 5);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, report.to_string()).unwrap();
    let (v, code) = json(&["verify", "--input", tampered.to_str().unwrap()]);
    assert_eq!((code, &v["verified"]), (3, &Value::Bool(false)));

    report["result"]["generators"][0]["rows"][0][1][0] = Value::from(99);
    std::fs::write(&tampered, report.to_string()).unwrap();
    assert_eq!(
        bbrecog(&["verify", "--input", tampered.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );

    let missing = dir.path().join("missing.json");
    assert_eq!(
        bbrecog(&["verify", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_accepts_a_bare_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_result(
        dir.path(),
        &[
            "subfield", "--flavor", "psl2", "--p", "7", "--k", "2", "--a", "1",
        ],
    );
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::write(&path, report["result"].to_string()).unwrap();
    let (v, code) = json(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["target"], "Sym4");
}

#[test]
fn bench_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let o = bbrecog(&[
        "bench",
        "--p",
        "3",
        "--k-list",
        "2,3",
        "--trials",
        "3",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("median rand"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["k"], 3);
    assert!(rows[0]["stages"]["order3"]["mul"].as_u64().unwrap() > 0);
}
