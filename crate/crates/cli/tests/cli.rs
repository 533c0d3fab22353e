//! End-to-end CLI behavior: exit codes, output formats, determinism.

use std::io::Write;
use std::process::{Command, Output};

fn ffec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const LEGENDRE: &str = r#"{"label":"f5-legendre","q":5,"a":["0","-t-1","0","t","0"]}"#;

#[test]
fn analyze_emits_json_and_exit_zero() {
    let out = ffec(&["analyze", "--curve", LEGENDRE]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "OK");
    assert_eq!(report["label"], "f5-legendre");
    assert_eq!(report["invariants"]["conductor_degree"], 4);
    assert_eq!(report["l_function"]["analytic_rank"], 0);
    assert!(report["meta"]["timestamp_unix_ms"].is_number());
}

#[test]
fn analyze_markdown_prints_verdict_lines() {
    let out = ffec(&["analyze", "--curve", LEGENDRE, "--markdown"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("- status: OK"));
    assert!(text.contains("regulator-lower-bound"));
    assert!(text.contains("HOLDS"));
    assert!(text.contains("e0")); // sides rendered in scientific notation
}

#[test]
fn analyze_output_is_stable_apart_from_meta() {
    let strip = |text: &str| {
        let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
        v.as_object_mut().unwrap().remove("meta");
        serde_json::to_string(&v).unwrap()
    };
    let first = ffec(&["analyze", "--curve", LEGENDRE]);
    let second = ffec(&["analyze", "--curve", LEGENDRE]);
    assert_eq!(strip(&stdout(&first)), strip(&stdout(&second)));
}

#[test]
fn isotrivial_curve_exits_three() {
    let out = ffec(&["analyze", "--curve", r#"{"q":5,"A":"0","B":"t"}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("isotrivial"));
}

#[test]
fn bad_input_exits_one() {
    // malformed JSON
    assert_eq!(ffec(&["analyze", "--curve", "{oops"]).status.code(), Some(1));
    // not a prime power
    assert_eq!(
        ffec(&["analyze", "--curve", r#"{"q":6,"A":"t","B":"1"}"#]).status.code(),
        Some(1)
    );
    // singular curve
    assert_eq!(
        ffec(&["analyze", "--curve", r#"{"q":5,"A":"0","B":"0"}"#]).status.code(),
        Some(1)
    );
    // missing curve source entirely
    assert_eq!(ffec(&["analyze"]).status.code(), Some(1));
    // unknown subcommand
    assert_eq!(ffec(&["transmogrify"]).status.code(), Some(1));
    // bad tolerance
    assert_eq!(
        ffec(&["analyze", "--curve", LEGENDRE, "--tol", "-3"]).status.code(),
        Some(1)
    );
}

#[test]
fn curve_file_and_label_override() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"{{"q":5,"A":"t","B":"1"}}"#).unwrap();
    let path = file.path().to_str().unwrap().to_string();
    let out = ffec(&["heights", "--curve-file", &path, "--label", "renamed", "--search-bound", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["label"], "renamed");
    assert!(report["points"].as_array().map_or(false, |p| !p.is_empty()));
}

#[test]
fn batch_isolates_bad_entries_and_exits_one() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(
        file,
        r#"[{{"label":"ok","q":5,"a":["0","-t-1","0","t","0"]}},
            {{"label":"broken","q":6,"A":"t","B":"1"}}]"#
    )
    .unwrap();
    let path = file.path().to_str().unwrap().to_string();
    let out = ffec(&["batch", "--corpus", &path, "--search-bound", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "ERROR");
    assert_eq!(report["curves"], 2);
    assert_eq!(report["errors"], 1);
    assert_eq!(report["entries"][0]["outcome"], "OK");
    assert_eq!(report["entries"][1]["outcome"], "ERROR");
}

#[test]
fn batch_all_good_exits_zero() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"[{{"label":"ok","q":5,"a":["0","-t-1","0","t","0"]}}]"#).unwrap();
    let path = file.path().to_str().unwrap().to_string();
    let out = ffec(&["batch", "--corpus", &path, "--search-bound", "1", "--markdown", "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("- ok: OK"));
    assert!(text.contains("violations 0"));
}

#[test]
fn friedman_bundled_table_holds() {
    let out = ffec(&["friedman", "--markdown"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("20 fields"));
    assert!(text.contains("all rows hold: true"));
    assert!(text.contains("minimum margin"));

    let json_out = ffec(&["friedman"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    assert_eq!(report["status"], "OK");
    assert_eq!(report["fields"], 20);
    assert_eq!(report["rows"][0]["dirichlet_ok"], true);
}

#[test]
fn friedman_rejects_malformed_table() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "label,d,r1,r2,regulator,w\nX,3,2,2,1.0,2\n").unwrap();
    let path = file.path().to_str().unwrap().to_string();
    let out = ffec(&["friedman", "--fields", &path]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lfunc_reports_frozen_coefficients() {
    let out = ffec(&["lfunc", "--curve", r#"{"label":"r1","q":5,"A":"t","B":"1"}"#]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["l_function"]["coeffs"][0], "1");
    assert_eq!(report["l_function"]["coeffs"][1], "-5");
    assert_eq!(report["l_function"]["analytic_rank"], 1);
}

#[test]
fn precision_env_var_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_ffec"))
        .args(["analyze", "--curve", LEGENDRE, "--no-lfunc"])
        .env("FFEC_PRECISION_BITS", "96")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["constants"]["precision_bits"], 96);

    // flag beats the environment
    let out = Command::new(env!("CARGO_BIN_EXE_ffec"))
        .args(["analyze", "--curve", LEGENDRE, "--no-lfunc", "--precision-bits", "160"])
        .env("FFEC_PRECISION_BITS", "96")
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["constants"]["precision_bits"], 160);

    // garbage env is an input error
    let out = Command::new(env!("CARGO_BIN_EXE_ffec"))
        .args(["analyze", "--curve", LEGENDRE])
        .env("FFEC_PRECISION_BITS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
