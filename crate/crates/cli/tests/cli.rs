//! Supplementary command-line checks beyond the acceptance contract.

use std::process::Command;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_leray"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn emitted_model_file_reproduces_the_builtin_run() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let builtin = dir.path().join("builtin.md");
    let (code, _, _) = run_cli(&[
        "leray",
        "heisenberg",
        "--window",
        "1",
        "--emit-model",
        model.to_str().unwrap(),
        "--output",
        builtin.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    // validate accepts the emitted model
    let (code, out, _) = run_cli(&["validate", model.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    // replaying from the file gives the same grids and verdicts (the model
    // name line differs only if the file changes it, which it does not)
    let from_file = dir.path().join("fromfile.md");
    let (code, _, _) = run_cli(&[
        "leray",
        model.to_str().unwrap(),
        "--output",
        from_file.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let a = std::fs::read_to_string(&builtin).unwrap();
    let b = std::fs::read_to_string(&from_file).unwrap();
    // identical except the lambda note, which only builtin runs carry
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("twist lambda"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn verbose_report_includes_base_connection_matrices() {
    let (code, out, _) = run_cli(&[
        "leray",
        "heisenberg",
        "--window",
        "1",
        "--lambda",
        "1/2",
        "--verbose",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("base connection matrices"), "{out}");
    // the k + 1/2 coefficients at the representative sector
    assert!(out.contains("1/2"), "{out}");
}

#[test]
fn json_reports_parse_back() {
    let (code, out, _) = run_cli(&["leray", "identity", "--window", "2", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["convergence_ok"], serde_json::Value::Bool(true));
    assert_eq!(v["einf_totals"][0], 1);
    assert_eq!(v["einf_totals"][1], 1);
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, _) = run_cli(&["leray", "heisenberg", "--lambda", "1/0"]);
    assert_eq!(code, 2);
    let (code, _, _) = run_cli(&["leray", "heisenberg", "--rmax", "0"]);
    assert_eq!(code, 2);
    let (code, _, _) = run_cli(&["pages", "/nonexistent/file.json"]);
    assert_eq!(code, 2);
    let (code, _, _) = run_cli(&["leray", "identity", "--lambda", "3"]);
    assert_eq!(code, 2);
}
