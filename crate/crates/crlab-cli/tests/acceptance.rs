//! Binary-level checks: reproducibility of seeded batch reports, exit-code
//! policy, and JSON/CSV plumbing, all through the installed `crlab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crlab::construct::gen_sequences;
use serde_json::Value;

fn crlab_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crlab"))
}

fn run(args: &[&str]) -> Output {
    crlab_cmd()
        .args(args)
        .output()
        .expect("binary must spawn")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout must be a JSON envelope: {e}\n--- stdout ---\n{}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn write_family(path: &Path, n: usize, spikes: &[usize], m_max: usize) {
    let family = gen_sequences(n, spikes, m_max).unwrap();
    let mut text = serde_json::to_string_pretty(&family).unwrap();
    text.push('\n');
    fs::write(path, text).unwrap();
}

#[test]
fn a11_fixed_seed_batch_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    let gen = run(&[
        "gen-seq",
        "--n",
        "2",
        "--spikes",
        "3,6,9,12",
        "--mmax",
        "36",
        "--out",
        family.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0), "{}", String::from_utf8_lossy(&gen.stderr));

    let mut artifacts = Vec::new();
    for round in 1..=2 {
        let report = dir.path().join(format!("batch{round}.json"));
        let curves = dir.path().join(format!("curves{round}"));
        let output = run(&[
            "obstruct-batch",
            "--family",
            family.to_str().unwrap(),
            "--curves",
            curves.to_str().unwrap(),
            "--seed",
            "42",
            "--count",
            "100",
            "--deg",
            "5",
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(
            output.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
        artifacts.push((fs::read(&report).unwrap(), output.stdout, curves));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "report files must match byte for byte");
    assert_eq!(artifacts[0].1, artifacts[1].1, "stdout envelopes must match byte for byte");
    for i in 0..100 {
        let name = format!("curve_{i:03}.json");
        assert_eq!(
            fs::read(artifacts[0].2.join(&name)).unwrap(),
            fs::read(artifacts[1].2.join(&name)).unwrap(),
            "drawn curve {name} must match across runs"
        );
    }
    let envelope: Value = serde_json::from_slice(&artifacts[0].0).unwrap();
    assert_eq!(envelope["pass"], Value::Bool(true));
    assert_eq!(envelope["results"]["certificates"].as_array().unwrap().len(), 100);
    println!(
        "ACCEPTANCE 11 seeded batch determinism: PASS (100 curves, report + stdout + curve files byte-identical)"
    );
}

#[test]
fn generated_family_file_carries_the_reference_value() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    let output = run(&[
        "gen-seq",
        "--n",
        "1",
        "--spikes",
        "2,4",
        "--mmax",
        "6",
        "--out",
        family.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let parsed: Value = serde_json::from_str(&fs::read_to_string(&family).unwrap()).unwrap();
    assert_eq!(parsed["a"][0][1], Value::String("69".into()));
    let envelope = stdout_json(&output);
    assert_eq!(envelope["command"], Value::String("gen-seq".into()));
    assert_eq!(envelope["pass"], Value::Bool(true));
}

#[test]
fn slice_check_passes_and_tangency_reports_the_leading_spike() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    write_family(&family, 1, &[2], 4);

    let xm = run(&["xm-check", "--family", family.to_str().unwrap(), "--m", "3"]);
    assert_eq!(xm.status.code(), Some(0));
    let envelope = stdout_json(&xm);
    assert_eq!(envelope["pass"], Value::Bool(true));
    assert_eq!(envelope["results"]["per_component"][0]["order"], Value::String("4".into()));

    // h = t, g = −t: composition leaves 69·t² leading.
    let curve = dir.path().join("curve.json");
    fs::write(
        &curve,
        r#"{
  "h": [{ "K": 4, "coeffs": [
    {"re":"0/1","im":"0/1"}, {"re":"1/1","im":"0/1"}, {"re":"0/1","im":"0/1"},
    {"re":"0/1","im":"0/1"}, {"re":"0/1","im":"0/1"} ] }],
  "g": { "K": 4, "coeffs": [
    {"re":"0/1","im":"0/1"}, {"re":"-1/1","im":"0/1"}, {"re":"0/1","im":"0/1"},
    {"re":"0/1","im":"0/1"}, {"re":"0/1","im":"0/1"} ] }
}"#,
    )
    .unwrap();
    let out_path = dir.path().join("tangency.json");
    let tangency = run(&[
        "tangency",
        "--family",
        family.to_str().unwrap(),
        "--curve",
        curve.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(tangency.status.code(), Some(0), "{}", String::from_utf8_lossy(&tangency.stderr));
    let envelope = stdout_json(&tangency);
    assert_eq!(envelope["results"]["order"], Value::String("2".into()));
    assert_eq!(
        envelope["results"]["leading"]["coeff"]["re"],
        Value::String("69/1".into())
    );
    let written: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(written["order"], Value::String("2".into()));
}

#[test]
fn malformed_curve_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    write_family(&family, 1, &[2], 4);
    let curve = dir.path().join("curve.json");
    fs::write(
        &curve,
        r#"{
  "h": [{ "K": 1, "coeffs": [ {"re":"0/1","im":"0/1"}, {"re":"not-a-ratio","im":"0/1"} ] }],
  "g": { "K": 1, "coeffs": [ {"re":"0/1","im":"0/1"}, {"re":"0/1","im":"0/1"} ] }
}"#,
    )
    .unwrap();
    let output = run(&[
        "obstruct",
        "--family",
        family.to_str().unwrap(),
        "--curve",
        curve.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("coeffs") || stderr.contains("h[0]"),
        "stderr must name the offending field, got: {stderr}"
    );
}

#[test]
fn certification_shortfall_exits_1_with_the_witness_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    write_family(&family, 1, &[2], 4);
    // Leading coefficient 1/5 pushes the spike threshold past every spike in
    // this small family: certification honestly fails.
    let curve = dir.path().join("curve.json");
    fs::write(
        &curve,
        r#"{
  "h": [{ "K": 4, "coeffs": [
    {"re":"0/1","im":"0/1"}, {"re":"1/5","im":"0/1"}, {"re":"0/1","im":"0/1"},
    {"re":"0/1","im":"0/1"}, {"re":"0/1","im":"0/1"} ] }],
  "g": { "K": 4, "coeffs": [
    {"re":"0/1","im":"0/1"}, {"re":"0/1","im":"0/1"}, {"re":"0/1","im":"0/1"},
    {"re":"0/1","im":"0/1"}, {"re":"0/1","im":"0/1"} ] }
}"#,
    )
    .unwrap();
    let output = run(&[
        "obstruct",
        "--family",
        family.to_str().unwrap(),
        "--curve",
        curve.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "{}", String::from_utf8_lossy(&output.stderr));
    let envelope = stdout_json(&output);
    assert_eq!(envelope["pass"], Value::Bool(false));
    assert_eq!(
        envelope["results"]["error"],
        Value::String("truncation_too_small".into())
    );
    assert_eq!(envelope["results"]["k0"], Value::Number(6.into()));
}

#[test]
fn subharmonic_and_taylor_emit_reports_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("mild.json");
    write_family(&family, 1, &[], 4);

    let report = dir.path().join("sub.json");
    let csv = dir.path().join("sub.csv");
    let sub = run(&[
        "check-subharmonic",
        "--family",
        family.to_str().unwrap(),
        "--M",
        "4",
        "--samples",
        "50",
        "--tol",
        "1e-9",
        "--report",
        report.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(sub.status.code(), Some(0), "{}", String::from_utf8_lossy(&sub.stderr));
    let file_envelope: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(file_envelope["pass"], Value::Bool(true));
    let csv_text = fs::read_to_string(&csv).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("j,m,r_or_annulus,value"));
    assert_eq!(lines.count(), 5, "4 annuli + 1 global row");

    let tcsv = dir.path().join("taylor.csv");
    let taylor = run(&[
        "taylor-extract",
        "--family",
        family.to_str().unwrap(),
        "--M",
        "4",
        "--m",
        "2",
        "--r",
        "1e-3",
        "--nodes",
        "256",
        "--csv",
        tcsv.to_str().unwrap(),
    ]);
    assert_eq!(taylor.status.code(), Some(0), "{}", String::from_utf8_lossy(&taylor.stderr));
    let envelope = stdout_json(&taylor);
    let rel: f64 = envelope["results"]["rel_error"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!(rel < 1e-9, "relative error {rel}");
    let csv_text = fs::read_to_string(&tcsv).unwrap();
    assert!(csv_text.starts_with("m,extracted,rel_error\n"));
    assert_eq!(csv_text.lines().count(), 2);
}

#[test]
fn type_commands_resolve_the_quartic_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    fs::write(
        &model,
        r#"{ "n": 1, "terms": [ { "alpha": [2], "beta": [2], "coeff": {"re":"1/1","im":"0/1"} } ] }"#,
    )
    .unwrap();
    let bg = run(&["bg-type", "--model", model.to_str().unwrap(), "--K", "8"]);
    assert_eq!(bg.status.code(), Some(0), "{}", String::from_utf8_lossy(&bg.stderr));
    assert_eq!(stdout_json(&bg)["results"]["bg_type"], Value::String("4".into()));

    let dangelo = run(&[
        "dangelo-bound",
        "--model",
        model.to_str().unwrap(),
        "--budget",
        "2",
        "--K",
        "8",
    ]);
    assert_eq!(dangelo.status.code(), Some(0));
    let envelope = stdout_json(&dangelo);
    assert_eq!(envelope["results"]["bound"], Value::String("4/1".into()));
    assert_eq!(envelope["results"]["witness"]["exponents"][0], Value::Number(1.into()));
}

#[test]
fn thread_cap_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    fs::write(
        &model,
        r#"{ "n": 1, "terms": [ { "alpha": [2], "beta": [2], "coeff": {"re":"1/1","im":"0/1"} } ] }"#,
    )
    .unwrap();
    for bad in ["0", "many"] {
        let output = crlab_cmd()
            .env("CRLAB_THREADS", bad)
            .args(["bg-type", "--model", model.to_str().unwrap(), "--K", "8"])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(2), "CRLAB_THREADS={bad}");
        assert!(String::from_utf8_lossy(&output.stderr).contains("CRLAB_THREADS"));
    }
    let output = crlab_cmd()
        .env("CRLAB_THREADS", "1")
        .args(["bg-type", "--model", model.to_str().unwrap(), "--K", "8"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn family_that_fails_verification_is_rejected_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    write_family(&family, 1, &[2], 4);
    // Tamper: lower the spike value in the serialized file.
    let mut parsed: Value = serde_json::from_str(&fs::read_to_string(&family).unwrap()).unwrap();
    parsed["a"][0][1] = Value::String("68".into());
    fs::write(&family, serde_json::to_string_pretty(&parsed).unwrap()).unwrap();
    let output = run(&["xm-check", "--family", family.to_str().unwrap(), "--m", "2"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("fails verification"), "{stderr}");
}
