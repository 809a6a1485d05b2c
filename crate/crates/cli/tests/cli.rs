use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn gbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbs"))
        .args(args)
        .env_remove("GBS_TOLERANCE_OVERRIDE")
        .output()
        .expect("binary runs")
}

fn gbs_env(args: &[&str], scale: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbs"))
        .args(args)
        .env("GBS_TOLERANCE_OVERRIDE", scale)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "stderr: {}", stderr(out));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn binomial_amplitudes() {
    let r = json(&gbs(&["binomial", "--eta", "0.5", "--m", "2"]));
    assert_eq!(r["command"], "binomial");
    let amps: Vec<f64> = r["results"]["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let expected = [0.5, 0.5f64.sqrt(), 0.5];
    for (a, e) in amps.iter().zip(expected) {
        assert!((a - e).abs() < 1e-15);
    }
    assert!(r["diagnostics"]["ladder_residual"].as_f64().unwrap() < 1e-14);
}

#[test]
fn binomial_endpoint_is_number_state() {
    let r = json(&gbs(&["binomial", "--eta", "1.0", "--m", "3"]));
    assert_eq!(r["results"]["amplitudes"], serde_json::json!([0.0, 0.0, 0.0, 1.0]));
    assert!(r["diagnostics"]["ladder_residual"].is_null());
}

#[test]
fn binomial_rejects_eta_out_of_range() {
    let out = gbs(&["binomial", "--eta", "1.5", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("eta") && msg.contains("[0, 1]"), "{msg}");
}

#[test]
fn gbs_triangular_spectrum() {
    let r = json(&gbs(&[
        "gbs", "--mu-re", "1", "--nu-re", "0", "--eta", "0.25", "--m", "2",
    ]));
    let mut s: Vec<f64> = r["results"]["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| complex(z).0)
        .collect();
    s.sort_by(f64::total_cmp);
    for (a, e) in s.iter().zip([-0.5, 0.0, 0.5]) {
        assert!((a - e).abs() < 1e-14);
    }
    assert_eq!(r["results"]["kind"], "generic");
    assert_eq!(r["results"]["oracle"]["passed"], true);
}

#[test]
fn gbs_degenerate_branch() {
    let r = json(&gbs(&[
        "gbs", "--mu-re", "1", "--nu-re", "1", "--eta", "0.5", "--m", "3",
    ]));
    assert_eq!(r["results"]["kind"], "degenerate-a-plus-zero");
    assert_eq!(r["diagnostics"]["degenerate"], true);
}

#[test]
fn gbs_secondary_root() {
    let eta: f64 = 0.36;
    let base = ["gbs", "--mu-re", "1", "--eta", "0.36", "--m", "4"];
    let p = json(&gbs(&base));
    let s = json(&gbs(&[&base[..], &["--root", "secondary"]].concat()));
    let (re, im) = complex(&s["results"]["delta"]);
    assert!((re + eta.sqrt() / (1.0 - eta).sqrt()).abs() < 1e-14 && im == 0.0);

    let sorted = |r: &Value| {
        let mut v: Vec<f64> = r["results"]["spectrum"]
            .as_array()
            .unwrap()
            .iter()
            .map(|z| complex(z).0)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    for (a, b) in sorted(&p).iter().zip(sorted(&s)) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn gbs_eigenstate_and_index_check() {
    let r = json(&gbs(&[
        "gbs", "--nu-re", "0.2", "--nu-im", "-0.1", "--eta", "0.4", "--m", "3", "--k", "2",
    ]));
    let amps = r["results"]["eigenstate"]["amplitudes"].as_array().unwrap();
    let norm: f64 = amps
        .iter()
        .map(|z| {
            let (a, b) = complex(z);
            a * a + b * b
        })
        .sum();
    assert!((norm - 1.0).abs() < 1e-12);

    let out = gbs(&["gbs", "--eta", "0.4", "--m", "3", "--k", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gbs_invalid_params_exit_2() {
    assert_eq!(gbs(&["gbs", "--eta", "1.0", "--m", "3"]).status.code(), Some(2));
    assert_eq!(
        gbs(&["gbs", "--mu-re", "0", "--eta", "0.5", "--m", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        gbs(&["gbs", "--eta", "0.5", "--m", "3", "--root", "third"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn gbs_defective_is_loud() {
    // eta + 4 (1 - eta) mu nu = 0
    let out = gbs(&["gbs", "--mu-re", "1", "--nu-re", "-0.0625", "--eta", "0.2", "--m", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["results"]["kind"], "defective-a-zero-zero");
    assert!(stderr(&out).contains("defective"));
}

#[test]
fn limit_number_rows() {
    let rows = csv_rows(&gbs(&[
        "limit",
        "number",
        "--mu-re",
        "1",
        "--nu-re",
        "0.4",
        "--m",
        "6",
        "--k",
        "2",
        "--etas",
        "0.9,0.99,0.999",
    ]));
    assert_eq!(rows[0], ["m_or_eta", "fidelity", "residual"]);
    assert_eq!(rows.len(), 4);
    let f: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn limit_coherent_converges() {
    let rows = csv_rows(&gbs(&["limit", "coherent", "--alpha", "1", "--ms", "50,100,200,400"]));
    let last: f64 = rows[4][1].parse().unwrap();
    assert!(last >= 0.999);
    assert_eq!(rows[4][0], "400");
}

#[test]
fn limit_squeezed_validation() {
    let out = gbs(&["limit", "squeezed", "--nu-re", "1.0", "--alpha", "1", "--ms", "50,100"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gbs(&["limit", "squeezed", "--nu-re", "0.3", "--alpha", "1", "--ms", "100,50"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gbs(&["limit", "squeezed", "--alpha", "8", "--ms", "50"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn limit_squeezed_reports_verdict() {
    let r = json(&gbs(&[
        "limit",
        "squeezed",
        "--nu-re",
        "0.3",
        "--alpha",
        "1",
        "--ms",
        "50,100,200",
        "--format",
        "json",
    ]));
    assert_eq!(r["results"]["verdict"], "half");
    assert_eq!(r["diagnostics"]["residual_nonincreasing"], true);
}

#[test]
fn evolve_examples() {
    let r = json(&gbs(&[
        "evolve", "--eta", "0.3", "--m", "8", "--k", "4", "--t", "0", "--format", "json",
    ]));
    assert!((r["results"]["fidelity_with_input"].as_f64().unwrap() - 1.0).abs() < 1e-15);

    let t = (PI / 3.0).to_string();
    let r = json(&gbs(&[
        "evolve", "--eta", "0.3", "--m", "8", "--k", "4", "--t", &t, "--format", "json",
    ]));
    assert!(r["results"]["phase_shift_fidelity"].as_f64().unwrap() >= 1.0 - 1e-12);

    let t = (2.0 * PI).to_string();
    let r = json(&gbs(&[
        "evolve", "--eta", "0.3", "--m", "8", "--k", "8", "--t", &t, "--format", "json",
    ]));
    assert!((r["results"]["fidelity_with_input"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = gbs(&["evolve", "--eta", "0", "--m", "8", "--k", "4", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subset_and_override() {
    let out = gbs(&["verify", "--criteria", "9,10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);

    let out = gbs_env(&["verify", "--criteria", "9"], "1e-9");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("[FAIL]"));

    assert_eq!(gbs_env(&["verify", "--criteria", "9"], "-1").status.code(), Some(2));
    assert_eq!(gbs(&["verify", "--criteria", "11"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "gbs", "--mu-re", "0.7", "--mu-im", "0.2", "--nu-re", "0.5", "--eta", "0.3", "--m", "6", "--k", "3",
    ];
    assert_eq!(gbs(&args).stdout, gbs(&args).stdout);
    let args = ["verify", "--criteria", "2,8", "--format", "json"];
    assert_eq!(gbs(&args).stdout, gbs(&args).stdout);
}

#[test]
fn file_output_uses_lf() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let p = path.to_str().unwrap();
    let out = gbs(&[
        "limit", "number", "--m", "2", "--k", "1", "--etas", "0.9,0.99", "--out", p,
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn json_round_trips_exactly() {
    let out = gbs(&[
        "gbs", "--mu-re", "0.31", "--nu-im", "0.77", "--eta", "0.123", "--m", "5", "--k", "1",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let first: Value = serde_json::from_str(&text).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&first).unwrap()).unwrap();
    assert_eq!(first, again);
    assert_eq!(first["params"]["gbs"]["eta"].as_f64().unwrap(), 0.123);
}

/// Required keys and JSON types declared by the published schema, checked
/// for one record of every command.
#[test]
fn records_carry_schema_required_fields() {
    let schema: Value = serde_json::from_str(include_str!("../schema/run_record.schema.json")).unwrap();
    let records = [
        gbs(&["binomial", "--eta", "0.2", "--m", "3"]),
        gbs(&["gbs", "--nu-re", "0.3", "--eta", "0.4", "--m", "3", "--k", "1"]),
        gbs(&[
            "limit", "number", "--m", "3", "--k", "1", "--etas", "0.9", "--format", "json",
        ]),
        gbs(&["limit", "squeezed", "--alpha", "1", "--ms", "50", "--format", "json"]),
        gbs(&["limit", "coherent", "--alpha", "1", "--ms", "50", "--format", "json"]),
        gbs(&[
            "evolve", "--eta", "0.3", "--m", "3", "--k", "1", "--t", "1", "--format", "json",
        ]),
        gbs(&["verify", "--criteria", "9", "--format", "json"]),
    ];
    let commands: Vec<&str> = schema["properties"]["command"]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(commands.len(), records.len());

    for out in &records {
        let r = json(out);
        let obj = r.as_object().unwrap();
        for key in schema["required"].as_array().unwrap() {
            assert!(obj.contains_key(key.as_str().unwrap()), "missing {key}");
        }
        assert_eq!(obj.len(), schema["properties"].as_object().unwrap().len());
        let command = r["command"].as_str().unwrap();
        assert!(commands.contains(&command));

        let branch = schema["allOf"]
            .as_array()
            .unwrap()
            .iter()
            .find(|b| b["if"]["properties"]["command"]["const"] == command)
            .expect("every command has a schema branch");
        for section in ["params", "results", "diagnostics"] {
            assert!(r[section].is_object());
            if let Some(required) = branch["then"]["properties"][section]["required"].as_array() {
                for key in required {
                    let key = key.as_str().unwrap();
                    assert!(r[section].get(key).is_some(), "{command}.{section} lacks {key}");
                }
            }
        }
    }
}
