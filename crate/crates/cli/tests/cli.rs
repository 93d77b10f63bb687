use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

use riskcal::measures::{lambda_value_at_risk, parse_measure, LambdaFn, LambdaMode};
use riskcal::portfolio::{optimize_portfolio, ScenarioMatrix};
use riskcal::prob::ScenarioTable;
use riskcal::Witness;

const BIN: &str = env!("CARGO_BIN_EXE_riskcal");

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/v1")
}

/// Validates a report against the schema named by its `command`, or the error schema.
fn validate(doc: &Value) {
    let name = if doc.get("error").is_some() { "error" } else { doc["command"].as_str().expect("command tag") };
    let text = std::fs::read_to_string(schema_dir().join(format!("{name}.json"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{name} report violates its schema: {errors:?}");
}

struct Run {
    code: i32,
    stdout: String,
    json: Value,
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("RISKCAL_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json: Value = serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("not JSON ({e}): {stdout}"));
    validate(&json);
    Run { code: out.status.code().unwrap(), stdout, json }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let f = Files { dir: TempDir::new().unwrap() };
        f.write("x.csv", "prob,X,Y,Z\n0.25,-2,1,0\n0.25,-1,0,0.5\n0.25,1,2,-1\n0.25,2,-1,3\n");
        f.write("two.csv", "prob,X\n0.5,0\n0.5,1\n");
        f.write("two_level.json", r#"{"breakpoints": [0], "values": [0.75, 0.25]}"#);
        f.write("losses.csv", "prob,risky,safe\n0.25,-0.5,0.1\n0.25,-0.3,0.1\n0.25,0.2,0.1\n0.25,1.5,0.1\n");
        f
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.dir.path().join(name), text).unwrap();
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_string()
    }
}

#[test]
fn measure_matches_library() {
    let f = Files::new();
    let r = run(&[
        "measure",
        "--kind",
        "lambda_var",
        "--lambda",
        &f.path("two_level.json"),
        "--scenarios",
        &f.path("x.csv"),
        "--var",
        "X",
    ]);
    assert_eq!(r.code, 0);
    let table = ScenarioTable::from_path(f.path("x.csv")).unwrap();
    let lam: LambdaFn = serde_json::from_str(r#"{"breakpoints": [0], "values": [0.75, 0.25]}"#).unwrap();
    let want = lambda_value_at_risk(table.column("X").unwrap(), &lam, LambdaMode::Primal);
    assert_eq!(r.json["value"], serde_json::to_value(want).unwrap());
    assert_eq!(r.json["value"], 0.0);

    for mode in ["inf_envelope", "sup_envelope"] {
        let m = run(&[
            "measure",
            "--kind",
            "lambda_var",
            "--lambda",
            &f.path("two_level.json"),
            "--mode",
            mode,
            "--scenarios",
            &f.path("x.csv"),
            "--var",
            "X",
        ]);
        assert_eq!(m.json["value"], 0.0, "{mode}");
    }
    let es = run(&["measure", "--measure", "es:0.5", "--scenarios", &f.path("x.csv"), "--var", "Y"]);
    assert_eq!(es.json["value"], 1.5);
}

#[test]
fn structured_parameter_files() {
    let f = Files::new();
    f.write("tl.json", r#"{"f": {"kind": "deductible_limit", "d": 1, "l": 2}, "side": "insurer"}"#);
    f.write("losses3.csv", "prob,X\n0.3333333333333333,0\n0.3333333333333333,2\n0.3333333333333334,4\n");
    let r = run(&[
        "measure",
        "--kind",
        "transformed_loss",
        "--params",
        &f.path("tl.json"),
        "--scenarios",
        &f.path("losses3.csv"),
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!((r.json["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    f.write("lv.json", r#"{"alpha": 0.25, "beta": 0.75, "z": 0}"#);
    let r = run(&[
        "measure",
        "--kind",
        "two_level",
        "--params",
        &f.path("lv.json"),
        "--scenarios",
        &f.path("x.csv"),
        "--var",
        "X",
    ]);
    assert_eq!(r.json["value"], 0.0);

    f.write("bad.json", r#"{"alpha": 0.25, "beta": 0.75}"#);
    let r = run(&[
        "measure",
        "--kind",
        "two_level",
        "--params",
        &f.path("bad.json"),
        "--scenarios",
        &f.path("x.csv"),
        "--var",
        "X",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn failed_check_reports_a_replayable_witness() {
    let f = Files::new();
    let r = run(&["check", "--axiom", "quasi_convexity", "--measure", "var:0.3", "--seed", "7"]);
    assert_eq!(r.code, 3);
    assert_eq!(r.json["verdict"], "fail");
    let w: Witness = serde_json::from_value(r.json["witness"].clone()).unwrap();
    assert!(w.replay(&parse_measure("var:0.3").unwrap(), 1e-9));

    f.write("report.json", &r.stdout);
    let again = run(&["check", "--axiom", "quasi_convexity", "--measure", "var:0.3", "--case", &f.path("report.json")]);
    assert_eq!(again.code, 3);
    assert_eq!(again.json["witness"]["case"], r.json["witness"]["case"]);

    let passes = run(&["check", "--axiom", "quasi_convexity", "--measure", "es:0.3", "--seed", "7", "--trials", "300"]);
    assert_eq!(passes.code, 0);
    assert!(passes.json["witness"].is_null());
}

#[test]
fn reports_are_byte_identical() {
    let args = ["check", "--axiom", "convexity", "--measure", "var:0.9", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let one = run_env(&args, &[("RISKCAL_THREADS", "1")]);
    let four = run_env(&args, &[("RISKCAL_THREADS", "4")]);
    assert_eq!(one.stdout, a.stdout);
    assert_eq!(four.stdout, a.stdout);
}

#[test]
fn star_shapedness_suite() {
    let r = run(&["replicate", "remark-star-shapedness"]);
    assert_eq!(r.code, 0);
    let suite = &r.json["suites"][0];
    assert_eq!(suite["passed"], true);
    assert!(suite["lines"][1].as_str().unwrap().starts_with("value(1) = 1 > 0.5 * value(2) + 0.5 * value(0) = 0.5"));
    assert_eq!(suite["data"]["star_shapedness"]["witness"]["lhs"], 1.0);
    assert_eq!(suite["data"]["star_shapedness"]["witness"]["rhs"], 0.5);
    assert_eq!(suite["data"]["quasi_star_shapedness"]["verdict"], "pass");
}

#[test]
fn all_suites() {
    let r = run(&["replicate", "all", "--seed", "3"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json["suites"].as_array().unwrap().len(), riskcal::replicate::SUITES.len());
}

#[test]
fn envelope_report() {
    let f = Files::new();
    let r = run(&[
        "envelope",
        "--kind",
        "rho_Z",
        "--base-measure",
        "var:0.5",
        "--anchors",
        &f.path("x.csv"),
        "--var",
        "Y",
        "--trials",
        "200",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.json["equality"], true);
    assert_eq!(r.json["per_anchor"].as_array().unwrap().len(), 3);
    assert_eq!(r.json["anchors"][r.json["attaining_anchor"].as_u64().unwrap() as usize], "Y");

    let r = run(&[
        "envelope",
        "--kind",
        "tilde_rho_Z",
        "--base-kind",
        "lambda_var",
        "--lambda",
        &f.path("two_level.json"),
        "--anchors",
        &f.path("x.csv"),
        "--var",
        "X",
        "--trials",
        "200",
        "--check-members",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(!r.json["member_checks"].as_array().unwrap().is_empty());

    let r = run(&[
        "envelope",
        "--kind",
        "monetary_acceptance",
        "--base-measure",
        "es:0.5",
        "--anchors",
        &f.path("x.csv"),
        "--var",
        "X",
        "--trials",
        "200",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.json["anchors"][0], "X");
    assert_eq!(r.json["per_anchor"].as_array().unwrap().len(), 4);
}

#[test]
fn inf_convolution_report() {
    let f = Files::new();
    let brute = run(&["infconv", "--measures", "es:0.25,es:0.75", "--scenarios", &f.path("two.csv")]);
    let como = run(&["infconv", "--measures", "es:0.25,es:0.75", "--scenarios", &f.path("two.csv"), "--comonotone"]);
    assert_eq!((brute.code, como.code), (0, 0));
    let tol = brute.json["grid_tolerance"].as_f64().unwrap() + como.json["grid_tolerance"].as_f64().unwrap();
    let gap = (brute.json["value"].as_f64().unwrap() - como.json["value"].as_f64().unwrap()).abs();
    assert!(gap <= tol && tol <= 0.05);
    assert_eq!(como.json["allocation"]["comonotonic"], true);
    for row in como.json["allocation"]["rows"].as_array().unwrap() {
        let sum: f64 = row["components"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).sum();
        assert!((sum - row["x"].as_f64().unwrap()).abs() < 1e-9);
    }
    f.write("zero.csv", "prob,X\n0.5,0\n0.5,0\n");
    let div = run(&["infconv", "--measures", "capped_mean:0,capped_mean:0", "--scenarios", &f.path("zero.csv")]);
    assert_eq!(div.json["diverged"], true);
    assert_eq!(div.json["value"], "-inf");
    assert!(div.json["allocation"].is_null());
}

#[test]
fn portfolio_matches_library() {
    let f = Files::new();
    let r = run(&[
        "portfolio",
        "--scenarios",
        &f.path("losses.csv"),
        "--lambda",
        &f.path("two_level.json"),
        "--level",
        "0.3",
        "--resolution",
        "10",
    ]);
    assert_eq!(r.code, 0);
    let l = ScenarioMatrix::from_table(&ScenarioTable::from_path(f.path("losses.csv")).unwrap()).unwrap();
    let lam: LambdaFn = serde_json::from_str(r#"{"breakpoints": [0], "values": [0.75, 0.25]}"#).unwrap();
    let sol = optimize_portfolio(&l, &lam, 0.3, 10).unwrap().unwrap();
    assert_eq!(r.json["weights"], serde_json::to_value(sol.weights.values()).unwrap());
    assert_eq!(r.json["value"], sol.value);

    let none = run(&[
        "portfolio",
        "--scenarios",
        &f.path("losses.csv"),
        "--lambda",
        &f.path("two_level.json"),
        "--level",
        "-1",
        "--resolution",
        "10",
    ]);
    assert_eq!(none.code, 0);
    assert_eq!(none.json["feasible"], false);
    assert!(none.json["weights"].is_null());
}

#[test]
fn usage_errors_exit_two() {
    let f = Files::new();
    let cases: Vec<Vec<String>> = vec![
        vec!["measure".into(), "--bogus".into()],
        vec!["check".into(), "--axiom".into(), "nope".into(), "--measure".into(), "mean".into()],
        vec![
            "measure".into(),
            "--measure".into(),
            "es:0.5".into(),
            "--kind".into(),
            "rdeu".into(),
            "--scenarios".into(),
            f.path("x.csv"),
        ],
        vec![
            "measure".into(),
            "--measure".into(),
            "es:2".into(),
            "--scenarios".into(),
            f.path("x.csv"),
            "--var".into(),
            "X".into(),
        ],
        vec!["measure".into(), "--measure".into(), "mean".into(), "--scenarios".into(), f.path("x.csv")],
        vec!["measure".into(), "--measure".into(), "mean".into(), "--scenarios".into(), f.path("missing.csv")],
        vec!["replicate".into(), "nope".into()],
        vec![
            "infconv".into(),
            "--measures".into(),
            "mean".into(),
            "--scenarios".into(),
            f.path("two.csv"),
            "--resolution".into(),
            "10".into(),
        ],
        vec![
            "envelope".into(),
            "--kind".into(),
            "rho_Z".into(),
            "--base-measure".into(),
            "mean".into(),
            "--anchors".into(),
            f.path("x.csv"),
            "--var".into(),
            "W".into(),
        ],
    ];
    for args in &cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = run(&args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stdout);
        assert_eq!(r.json["error"]["kind"], "usage");
    }
    let r = run_env(&["replicate", "infconv"], &[("RISKCAL_THREADS", "zero")]);
    assert_eq!(r.code, 2);
}

#[test]
fn output_flag_writes_file() {
    let f = Files::new();
    let out = f.path("report.json");
    let status = Command::new(BIN)
        .args(["measure", "--measure", "mean", "--scenarios", &f.path("two.csv"), "--output", &out])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    validate(&doc);
    assert_eq!(doc["value"], 0.5);
}
