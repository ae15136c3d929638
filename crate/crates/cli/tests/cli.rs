use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn frames(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frames"))
        .args(args)
        .env_remove("FRAMES_TOL")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("frames-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

// Blocks [1, 1]; F takes diag(1, 1) at one atom and diag(1, 2) at the other.
const SAMPLE_A: &str = "[[[[[1, 0]]], [[[1, 0]]]]]";
const SAMPLE_B: &str = "[[[[[1, 0]]], [[[2, 0]]]]]";

fn small(extra_maps: &str) -> String {
    format!(
        r#"{{
  "algebra": {{"blocks": [1, 1]}},
  "rank": 1,
  "measure": {{"type": "discrete", "points": [0, 1], "masses": [1, 1]}},
  "maps": {{{extra_maps}
    "F": {{"tabulated": [{SAMPLE_A}, {SAMPLE_B}]}}
  }}
}}"#
    )
}

#[test]
fn example_pair_is_dual() {
    let out = frames(&["dual-check", "--frame", "F", "--dual", "G"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["command"], "dual-check");
    assert_eq!(r["status"], "pass");
    assert!(r["certificate"]["residual_norm"].as_f64().unwrap() < 1e-12);
}

#[test]
fn claimed_bounds_have_expected_margins() {
    let out = frames(&["verify-bounds", "--frame", "F", "--lower", "0.5", "--upper", "4.5"]);
    assert_eq!(code(&out), 0);
    let c = &report(&out)["certificate"];
    // eigenvalues of the frame operator [[5/3, 5/3], [5/3, 10/3]]
    let lower = 2.5 - 125f64.sqrt() / 6.0;
    assert!((c["lower_margin"].as_f64().unwrap() - (lower - 0.5)).abs() < 1e-12);
    assert!((c["optimal"]["upper"].as_f64().unwrap() - (2.5 + 125f64.sqrt() / 6.0)).abs() < 1e-12);
}

#[test]
fn scaled_dual_is_rejected_with_unit_residual() {
    let out = frames(&["dual-check", "--frame", "F", "--dual", "G_scaled2"]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert!((r["certificate"]["residual_norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn worked_example_reproduces() {
    let out = frames(&["example25"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    for m in report(&out)["matrices"].as_array().unwrap() {
        assert!(m["max_abs_error"].as_f64().unwrap() <= 1e-12, "{}", m["name"]);
    }
}

#[test]
fn missing_name_is_an_input_error() {
    let out = frames(&["bounds", "--frame", "Nope"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Nope"));
}

#[test]
fn off_block_entry_is_an_input_error() {
    let body = small(&format!(
        r#"
    "B": {{"tabulated": [[{{"dense": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]}}], {SAMPLE_A}]}},"#
    ));
    let path = scratch("offblock.json", &body);
    let out = frames(&["--file", path.to_str().unwrap(), "bounds", "--frame", "F"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("block_pattern_violation"), "{err}");
    assert!(err.contains("$.maps.B"), "{err}");
}

#[test]
fn malformed_json_reports_its_line() {
    let path = scratch("bad.json", "{\n  \"algebra\": {\"blocks\": [2]},\n  \"rank\": 1,,\n}");
    let out = frames(&["--file", path.to_str().unwrap(), "bounds", "--frame", "F"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn discrete_problem_file_is_certified() {
    let path = scratch("small.json", &small(""));
    let out = frames(&["--file", path.to_str().unwrap(), "bounds", "--frame", "F"]);
    assert_eq!(code(&out), 0);
    let b = &report(&out)["certificate"]["optimal"];
    assert!((b["lower"].as_f64().unwrap() - 2.0).abs() < 1e-12, "{b}");
    assert!((b["upper"].as_f64().unwrap() - 5.0).abs() < 1e-12, "{b}");
}

#[test]
fn tolerance_from_env_and_flag() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_frames"));
        c.args(extra).args(["dual-check", "--frame", "F", "--dual", "G_scaled2"]);
        match env {
            Some(v) => c.env("FRAMES_TOL", v),
            None => c.env_remove("FRAMES_TOL"),
        };
        c.output().unwrap()
    };
    let loose = run(Some("2"), &[]);
    assert_eq!(code(&loose), 0);
    assert_eq!(report(&loose)["certificate"]["tolerance"], 2.0);
    assert_eq!(code(&run(Some("2"), &["--tol", "1e-9"])), 1);
    assert_eq!(code(&run(None, &["--tol", "-1"])), 2);
    assert_eq!(code(&run(Some("nan"), &[])), 2);
}

#[test]
fn sum_dual_weight_kinds() {
    let affine = frames(&[
        "sum-dual", "--frame", "F", "--dual", "G", "--other", "V1", "--alpha", "alpha", "--beta", "beta",
    ]);
    assert_eq!(code(&affine), 0);
    let bad = frames(&["sum-dual", "--frame", "F", "--dual", "G", "--other", "V1", "--a1", "two", "--a2", "two"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(report(&bad)["failure"]["kind"], "affinity_violated");
    let mixed = frames(&[
        "sum-dual", "--frame", "F", "--dual", "G", "--other", "V1", "--x1", "X1", "--x2", "X2", "--alpha", "alpha",
        "--beta", "beta",
    ]);
    assert_eq!(code(&mixed), 2);
}

#[test]
fn sequence_closed_form_matches_iteration() {
    let it = report(&frames(&["dual-seq", "--frame", "F", "--dual", "G", "--steps", "3"]));
    let cl = report(&frames(&["dual-seq", "--frame", "F", "--dual", "G", "--closed", "2"]));
    assert_eq!(it["status"], "pass");
    let a = &it["iterates"][2]["map"]["polynomial"];
    let b = &cl["iterates"][0]["map"]["polynomial"];
    let flat = |v: &Value| -> Vec<f64> {
        fn walk(v: &Value, out: &mut Vec<f64>) {
            match v {
                Value::Array(xs) => xs.iter().for_each(|x| walk(x, out)),
                Value::Number(n) => out.push(n.as_f64().unwrap()),
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(v, &mut out);
        out
    };
    let (a, b) = (flat(a), flat(b));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
}

#[test]
fn output_is_byte_stable() {
    let args = ["k-op", "--frame", "F", "--dual", "G", "--seed", "7"];
    let first = frames(&args);
    let second = frames(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn exit_codes_for_every_command() {
    let example = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/example25.json");
    // (arguments, exit code, status printed on stdout)
    let transcript: &[(&[&str], i32, Option<&str>)] = &[
        (&["bounds", "--frame", "F"], 0, Some("pass")),
        (&["verify-bounds", "--frame", "F", "--lower", "0.7", "--upper", "4.5"], 1, Some("fail")),
        (&["canonical-dual", "--frame", "F"], 0, Some("pass")),
        (&["dual-check", "--frame", "F", "--dual", "V1"], 0, Some("pass")),
        (&["dual-seq", "--frame", "F", "--dual", "G", "--steps", "2"], 0, Some("pass")),
        (&["dual-seq", "--frame", "F", "--dual", "G", "--side", "left"], 0, Some("pass")),
        (&["dual-decompose", "--frame", "F", "--dual", "G_scaled2"], 1, Some("fail")),
        (&["null-family", "--frame", "F", "--degree", "1"], 0, Some("pass")),
        (&["k-op", "--frame", "F", "--dual", "G"], 0, Some("pass")),
        (&["k-op", "--frame", "F", "--dual", "G_scaled2"], 1, Some("fail")),
        (&["kernel-symmetry", "--frame", "F", "--dual", "G"], 1, Some("fail")),
        (&["minimality", "--frame", "F", "--dual", "G"], 0, Some("pass")),
        (&["sum-frame", "--frame", "F", "--dual", "G", "--x1", "X1", "--x2", "X2"], 0, Some("pass")),
        (&["sum-frame", "--frame", "F", "--dual", "G", "--x1", "X1", "--x2", "I"], 1, Some("fail")),
        (&["sum-dual", "--frame", "F", "--dual", "G", "--other", "V1", "--x1", "X1", "--x2", "X2"], 1, Some("fail")),
        (&["scaled", "--frame", "F", "--element", "phase"], 0, Some("pass")),
        (&["riesz-diagnostic", "--frame", "F"], 0, Some("pass")),
        (&["no-such-command"], 2, None),
        (&["scaled", "--frame", "F", "--element", "missing"], 2, None),
    ];
    for (args, want, status) in transcript {
        let mut full = vec!["--file", example];
        full.extend_from_slice(args);
        let out = frames(&full);
        assert_eq!(code(&out), *want, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        match status {
            Some(s) => assert_eq!(report(&out)["status"], *s, "{args:?}"),
            None => assert!(out.stdout.is_empty(), "{args:?}"),
        }
    }
}

#[test]
fn empty_maps_fail_downstream() {
    let path = scratch(
        "empty.json",
        r#"{"algebra": {"blocks": [2]}, "rank": 1,
            "measure": {"type": "interval", "a": 0, "b": 1}, "maps": {}}"#,
    );
    let out = frames(&["--file", path.to_str().unwrap(), "bounds", "--frame", "F"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("named_object_missing"));
}
