use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use wfusion::planner::{compare_protocols, Protocol};
use wfusion::rational::{self, ratio};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfusion"))
        .args(args)
        .env_remove("WFUSION_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_of(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--output", "json"]);
    let o = run(&a);
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", stderr(&o)))
}

fn frac(v: &Value) -> rational::Rational {
    ratio(v["num"].as_i64().unwrap(), v["den"].as_i64().unwrap())
}

fn validate(schema: &str, instance: &Value) {
    let path = root().join("docs/schemas/v1").join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
}

#[test]
fn gate_verify_passes_on_both_backends() {
    let o = run(&["gate-verify"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("scalar = 1/(2√2); Table 3 reproduced; PASS"));
    let o = run(&["gate-verify", "--backend", "float"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn shipped_circuit_file_verifies() {
    let path = root().join("circuits/partial_swap.json");
    let o = run(&["gate-verify", "--circuit", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn wrong_plate_fails_naming_the_input() {
    let o = run(&["gate-verify", "--circuit", &fixture("wrong_hwp.json")]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("input VH"), "{err}");
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn inexact_plate_needs_float_backend() {
    let o = run(&["gate-verify", "--circuit", &fixture("inexact_angle.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("float backend"));
    let o = run(&["gate-verify", "--circuit", &fixture("inexact_angle.json"), "--backend", "float"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["fuse", "--sizes", "3,0"],
        vec!["fuse", "--sizes", "3,x"],
        vec!["fuse", "--sizes", "2,2,2,2"],
        vec!["fuse", "--sizes", "3,3", "--bogus"],
        vec!["chain", "--sizes", "3"],
        vec!["plan", "--target", "5"],
        vec!["plan", "--target", "2", "--primitive", "3"],
        vec!["gate-verify", "--circuit", "/nonexistent/circuit.json"],
        vec!["fuse", "--sizes", "3,3", "--output", "yaml"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn blocked_plan_names_the_inventory() {
    let o = run(&["plan", "--target", "4", "--primitive", "3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("{W3}"), "{}", stderr(&o));
}

#[test]
fn resource_bound_exits_3() {
    let o = run(&["fuse", "--sizes", "5,5,5", "--dense"]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("13/125") && err.contains("without --dense"), "{err}");
    let o = run(&["chain", "--sizes", "4,4,4,4"]);
    assert_eq!(code(&o), 3);
    let o = run(&["chain", "--sizes", "4,4,4,4", "--analytic"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn fuse_examples() {
    let o = run(&["fuse", "--sizes", "3,3", "--dense"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("Success 5/9 (≈0.555556)"));
    let v = json_of(&["fuse", "--sizes", "3,3", "--dense"]);
    for e in v["entries"].as_array().unwrap() {
        assert_eq!(frac(&e["fidelity"]), ratio(1, 1));
    }

    let v = json_of(&["fuse", "--sizes", "2,2,2"]);
    let probs: Vec<_> = v["entries"].as_array().unwrap().iter().map(|e| frac(&e["prob"])).collect();
    assert_eq!(probs, [ratio(1, 8), ratio(1, 8), ratio(1, 4), ratio(1, 2)]);

    let v = json_of(&["fuse", "--sizes", "1,4"]);
    let success = v["entries"].as_array().unwrap().iter().find(|e| e["class"] == "Success").unwrap();
    assert_eq!(frac(&success["prob"]), ratio(1, 1));
}

#[test]
fn chain_reports_fused_size() {
    let v = json_of(&["chain", "--sizes", "3,3,3"]);
    assert_eq!(v["fused_size"], 7);
    assert_eq!(v["method"], "dense");
    let success = v["entries"].as_array().unwrap().iter().find(|e| e["class"] == "Success").unwrap();
    assert_eq!(frac(&success["prob"]), ratio(7, 27));
}

#[test]
fn plan_examples() {
    let v = json_of(&["plan", "--target", "3", "--primitive", "3"]);
    assert_eq!(frac(&v["cost"]["primitives"]), ratio(1, 1));
    assert_eq!(frac(&v["cost"]["rounds"]), ratio(0, 1));
    assert!(v["empirical"].is_null());

    let v = json_of(&["plan", "--target", "3", "--primitive", "2"]);
    assert_eq!(frac(&v["cost"]["primitives"]), ratio(8, 3));
}

#[test]
fn seeded_plan_is_reproducible() {
    let args = ["plan", "--target", "9", "--primitive", "3", "--trials", "2000", "--seed", "7", "--output", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let mean = v["empirical"]["primitives"]["mean"].as_f64().unwrap();
    let se = v["empirical"]["primitives"]["stderr"].as_f64().unwrap();
    assert!((mean - 10.0).abs() < 4.0 * se, "{mean} ± {se}");
    let c = run(&["plan", "--target", "9", "--primitive", "3", "--trials", "2000", "--seed", "8", "--output", "json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn json_reports_match_schemas() {
    validate("gate-verify", &json_of(&["gate-verify"]));
    validate("gate-verify", &json_of(&["gate-verify", "--backend", "float"]));
    let failing = run(&["gate-verify", "--circuit", &fixture("wrong_hwp.json"), "--output", "json"]);
    validate("gate-verify", &serde_json::from_slice(&failing.stdout).unwrap());
    validate("gate-table3", &json_of(&["gate-table3"]));
    validate("fuse", &json_of(&["fuse", "--sizes", "3,3"]));
    validate("fuse", &json_of(&["fuse", "--sizes", "2,3,4", "--dense"]));
    validate("fuse", &json_of(&["fuse", "--sizes", "2,2", "--dense", "--accounting", "physical"]));
    validate("fuse", &json_of(&["chain", "--sizes", "2,2,2,2"]));
    validate("plan", &json_of(&["plan", "--target", "5", "--primitive", "3"]));
    validate(
        "plan",
        &json_of(&["plan", "--target", "5", "--primitive", "3", "--trials", "50", "--accounting", "physical"]),
    );
    validate("compare", &json_of(&["compare", "--sizes", "3,3"]));
    validate("compare", &json_of(&["compare", "--sizes", "2,2,2"]));
    validate("compare", &json_of(&["compare", "--sizes", "2,2,2,2"]));
}

#[test]
fn schema_rejects_a_malformed_report() {
    let mut v = json_of(&["fuse", "--sizes", "3,3"]);
    v["entries"][0]["class"] = "Failure".into();
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(root().join("docs/schemas/v1/fuse.schema.json")).unwrap(),
    )
    .unwrap();
    assert!(!jsonschema::validator_for(&schema).unwrap().is_valid(&v));
}

fn csv_records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn rewrite(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).unwrap();
    for r in rows {
        w.write_record(r).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[test]
fn compare_csv_round_trips() {
    let o = run(&["compare", "--sizes", "2,2,2,2", "--output", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let (header, rows) = csv_records(&text);
    assert_eq!(rewrite(&header, &rows), text);
    assert_eq!(header[0], "protocol");
    let lib = compare_protocols(&[2, 2, 2, 2]).unwrap();
    assert_eq!(rows.len(), lib.len());
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for (row, want) in rows.iter().zip(&lib) {
        assert_eq!(row[col("protocol")].parse::<Protocol>().unwrap(), want.protocol);
        assert_eq!(rational::parse(&row[col("success")]).unwrap(), want.probs.success);
        assert_eq!(rational::parse(&row[col("fail")]).unwrap(), want.probs.fail);
        assert_eq!(row[col("gate_cost")].parse::<usize>().unwrap(), want.gate_cost);
    }
    let toffoli = &rows[0];
    assert_eq!(toffoli[col("fail")], "-1/4");
    assert_eq!(toffoli[col("fail_corrected")], "11/16");
    assert!(!toffoli[col("issues")].is_empty());
}

#[test]
fn other_csv_outputs_round_trip() {
    for args in [
        vec!["fuse", "--sizes", "2,3,4"],
        vec!["fuse", "--sizes", "3,3", "--dense"],
        vec!["gate-table3"],
        vec!["plan", "--target", "5", "--primitive", "3", "--trials", "100"],
    ] {
        let mut a = args.clone();
        a.extend(["--output", "csv"]);
        let o = run(&a);
        assert_eq!(code(&o), 0, "{args:?}");
        let text = stdout(&o);
        let (header, rows) = csv_records(&text);
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.len() == header.len()));
        assert_eq!(rewrite(&header, &rows), text, "{args:?}");
    }
}

#[test]
fn out_path_honours_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wfusion"))
        .args(["fuse", "--sizes", "3,3", "--output", "json", "--out", "reports/fuse.json"])
        .env("WFUSION_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("reports/fuse.json")).unwrap();
    let v: Value = serde_json::from_str(&written).unwrap();
    validate("fuse", &v);
}

#[test]
fn failing_verification_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let o = run(&[
        "gate-verify",
        "--circuit",
        &fixture("wrong_hwp.json"),
        "--output",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
}
