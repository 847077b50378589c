use std::process::{Command, Output};

use serde_json::Value;

fn spraylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spraylab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_presets() {
    let out = spraylab(&["analyze", "--preset", "flat2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "spraylab-report/1");
    assert_eq!(r["result"]["classification"]["class"], "flat");
    for c in r["result"]["identities"].as_array().unwrap() {
        assert_eq!(c["verdict"]["level"], "symbolic_zero", "{c}");
    }
    for (name, class) in [("anderson-thompson", "isotropic"), ("yang(lambda=0.5)", "isotropic")] {
        let r = json(&spraylab(&["analyze", "--preset", name]));
        assert_eq!(r["result"]["classification"]["class"], class);
        assert_eq!(r["pass"], true);
    }
}

#[test]
fn metrizable_exit_codes() {
    let ok = spraylab(&["metrizable", "--preset", "flat2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(json(&ok)["result"]["failures"].as_array().unwrap().is_empty());

    let at = spraylab(&["metrizable", "--preset", "anderson-thompson", "--finsler", "sqrt(y1^2+y2^2)"]);
    assert_eq!(at.status.code(), Some(2));
    let r = json(&at);
    assert_eq!(r["result"]["failures"], serde_json::json!(["d_h"]));
    assert!(r["result"]["conditions"]["d_h"]["witness"].is_object());

    let deg = spraylab(&["metrizable", "--preset", "flat2", "--theta", "x1,0"]);
    assert_eq!(deg.status.code(), Some(2));
    let f = json(&deg)["result"]["failures"].clone();
    assert!(f.as_array().unwrap().contains(&"rank".into()) && f.as_array().unwrap().contains(&"positivity".into()));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(spraylab(&["metrizable", "--preset", "anderson-thompson"]).status.code(), Some(1));
    assert_eq!(spraylab(&["analyze", "--preset", "no-such-spray"]).status.code(), Some(1));
    assert_eq!(spraylab(&["analyze"]).status.code(), Some(1));
    assert_eq!(spraylab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(spraylab(&["--help"]).status.code(), Some(0));
}

#[test]
fn definition_file_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sphere.json");
    std::fs::write(
        &input,
        r#"{"dim": 2, "G": ["(y1^2 + y2^2)/2", "2*y1*y2"], "theta": ["y1/sqrt(y1^2+y2^2)", "y2/sqrt(y1^2+y2^2)"], "name": "at-file"}"#,
    )
    .unwrap();
    let report = dir.path().join("report.txt");
    let out = spraylab(&["metrizable", "--input", input.to_str().unwrap(), "--format", "text", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("at-file") && text.contains("FAIL d_h theta") && text.ends_with("FAIL\n"), "{text}");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "G": ["y1^3", "y2"]}"#).unwrap();
    assert_eq!(spraylab(&["analyze", "--input", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn preset_and_equivalent_file_share_digest() {
    let dir = tempfile::tempdir().unwrap();
    let preset = json(&spraylab(&["analyze", "--preset", "flat2"]));
    let file = dir.path().join("flat.json");
    std::fs::write(&file, r#"{"dim": 2, "G": ["0", "0"], "F": "sqrt(y1^2 + y2^2)", "name": "flat2"}"#).unwrap();
    let from_file = json(&spraylab(&["analyze", "--input", file.to_str().unwrap()]));
    assert_eq!(preset["input"]["sha256"], from_file["input"]["sha256"]);
    let other = json(&spraylab(&["analyze", "--preset", "flat2", "--seed", "7"]));
    assert_eq!(other["sampling"]["seed"], 7);
}

#[test]
fn geodesic_traces() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let js = dir.path().join("yang.json");
    let out = spraylab(&[
        "geodesics", "--preset", "flat2", "--x0", "0,0", "--y0", "1,0", "--T", "1", "--steps", "100",
        "--trace", csv.to_str().unwrap(), "--compare", "yang(0.5)", "--compare-trace", js.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,y1,y2"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - v[0]).abs() < 1e-12 && v[2] == 0.0);
    }
    let trace: Value = serde_json::from_str(&std::fs::read_to_string(&js).unwrap()).unwrap();
    assert_eq!(trace["method"], "rk4");
    let r = json(&out);
    for s in r["result"]["compare"]["equivalence"]["factor"]["samples"].as_array().unwrap() {
        let y: Vec<f64> = s["point"]["y"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let want = 0.5 * y.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((s["p"].as_f64().unwrap() - want).abs() < 1e-9 * want);
    }

    let at = spraylab(&["geodesics", "--preset", "flat2", "--compare", "anderson-thompson", "--y0", "1,1"]);
    assert_eq!(at.status.code(), Some(2));
    let w = &json(&at)["result"]["compare"]["equivalence"]["factor"]["witness"]["point"]["y"];
    assert_eq!(w, &serde_json::json!([1.0, 1.0]));
}

#[test]
fn halted_trace_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("decay.json");
    std::fs::write(&input, r#"{"dim": 1, "G": ["y1^2"]}"#).unwrap();
    let out = spraylab(&["geodesics", "--input", input.to_str().unwrap(), "--x0", "0", "--y0", "-1", "--T", "3", "--steps", "3000"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let halted = &json(&out)["result"]["trace"]["halted"];
    assert!(halted["time"].as_f64().unwrap() > 0.0, "{halted}");
}

#[test]
fn involutivity_reports() {
    let out = spraylab(&["involutivity", "--preset", "flat3", "--n-points", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["expected"]["per_j"], serde_json::json!([6, 3, 0]));
    for p in r["result"]["points"].as_array().unwrap() {
        assert_eq!((p["dim_g1"].as_u64(), p["dim_g2"].as_u64()), (Some(9), Some(18)));
    }
    let un = spraylab(&["involutivity", "--preset", "anderson-thompson", "--n-points", "2", "--basis", "unshifted"]);
    assert_eq!(un.status.code(), Some(2));
    assert_eq!(json(&un)["result"]["points"][0]["cartan_sum"], 7);
}
