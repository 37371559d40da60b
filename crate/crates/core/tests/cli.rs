use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn riskcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskcast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn rcf_quantile_on_small_file() {
    let class = fixture("three_projects.csv");
    let o = riskcast(&["rcf", "quantile", "--class", &class, "--p", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    // n=3: h = 3*0.8 + 0.5 = 2.9 -> 0.2 + 0.9*0.1
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.29).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn rcf_outliers_all_equal() {
    let o = riskcast(&["rcf", "outliers", "--class", &fixture("all_equal.csv")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("outliers   5"));
    assert!(out.contains("share      1"));
}

#[test]
fn rcf_scurve_row_count() {
    let o = riskcast(&["rcf", "scurve", "--class", &fixture("mixed_class.csv"), "--resolution", "99"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("uplift,probability"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 99);
    assert_eq!(rows[0].split(',').nth(1), Some("0.01"));
}

#[test]
fn rcf_category_filter_and_cdf() {
    let class = fixture("mixed_class.csv");
    let o = riskcast(&["rcf", "cdf", "--class", &class, "--category", "road", "--x", "0.1"]);
    assert_eq!(stdout(&o).trim(), "0.5");
    let o = riskcast(&["rcf", "uplift", "--class", &class, "--category", "road", "--p", "0.1"]);
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn rcf_errors_exit_nonzero_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "project_id,category,overrun,baseline\na,rail,0.1,unknown\nb,rail,oops,unknown\n").unwrap();
    let o = riskcast(&["rcf", "quantile", "--class", bad.to_str().unwrap(), "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = riskcast(&["rcf", "quantile", "--class", &fixture("three_projects.csv"), "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("probability out of range"));
}

#[test]
fn qra_certain_risk() {
    let o = riskcast(&["qra", "--register", &fixture("certain_risk.json"), "--trials", "500", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("P50                7.0000"), "{out}");
    assert!(out.contains("P90                7.0000"), "{out}");
}

#[test]
fn qra_requires_explicit_seed() {
    let o = riskcast(&["qra", "--register", &fixture("certain_risk.json")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn qra_report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let args = |w: &str| {
        vec![
            "qra".to_string(), "--register".into(), fixture("register.json"),
            "--correlation".into(), fixture("correlation.json"),
            "--trials".into(), "20000".into(), "--seed".into(), "2018".into(),
            "--base-cost".into(), "100".into(), "--workers".into(), w.to_string(),
            "--out".into(), out.display().to_string(),
        ]
    };
    let mut reports = Vec::new();
    let mut stdouts = Vec::new();
    for w in ["1", "3"] {
        let a = args(w);
        let o = riskcast(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        reports.push(std::fs::read(&out).unwrap());
        stdouts.push(o.stdout);
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(stdouts[0], stdouts[1]);

    let report: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(report["result"]["excluded_catastrophic"][0], "TR");
    assert_eq!(report["manifest"]["subcommand"], "qra");
    assert!(!report["manifest"]["arguments"].to_string().contains("workers"));

    let o = riskcast(&["replay", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("byte-for-byte"));
}

#[test]
fn qra_oracle_deltas() {
    let o = riskcast(&[
        "qra", "--register", &fixture("ten_fixed.json"), "--trials", "50000", "--seed", "1", "--oracle",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("oracle exact mean"));
    assert_eq!(out.matches("oracle P").count(), 3);

    let o = riskcast(&[
        "qra", "--register", &fixture("register.json"), "--trials", "100", "--seed", "1", "--oracle",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn qra_schema_errors_name_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"risks": [{"id": "A", "name": "a", "probability": 2, "impact": {"kind": "fixed", "value": 1}}]}"#).unwrap();
    let o = riskcast(&["qra", "--register", bad.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("probability"));

    let infeasible = dir.path().join("corr.json");
    std::fs::write(&infeasible, r#"[{"a": "UT", "b": "GC", "rho": 0.9}, {"a": "UT", "b": "DS", "rho": 0.9}, {"a": "GC", "b": "DS", "rho": -0.9}]"#).unwrap();
    let o = riskcast(&[
        "qra", "--register", &fixture("register.json"), "--correlation", infeasible.to_str().unwrap(), "--seed", "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible correlation target for pair"));
}

#[test]
fn audit_exit_codes() {
    let o = riskcast(&["audit", "mean-plus-six", "--total", "580", "--p-risk", "51.6", "--mean-risk", "38.6"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.contains("benchmark                72.6"));
    assert!(out.contains("verdict  fail"));

    let o = riskcast(&["audit", "bcr", "--benefits", "592", "--costs", "335"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bcr_rounded              1.77"));

    let o = riskcast(&["audit", "overrun", "--actual", "100", "--estimated", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("overrun                  0.0000"));

    let o = riskcast(&["audit", "gap", "--inside", "0.15", "--outside", "0.70"]);
    assert_eq!(o.status.code(), Some(2));

    let o = riskcast(&["audit", "headroom", "--funding", "450", "--estimate", "500"]);
    assert_eq!(o.status.code(), Some(2));

    let o = riskcast(&["audit", "bcr", "--benefits", "592"]);
    assert_eq!(o.status.code(), Some(1));
    let o = riskcast(&["audit", "bcr", "--benefits", "1", "--costs", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = riskcast(&["audit", "npv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn audit_writes_structured_finding() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let o = riskcast(&[
        "audit", "mean-plus-six", "--total", "585", "--p-risk", "51.6", "--mean-risk", "38.6",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let r = &v["result"];
    for key in ["rule_id", "verdict", "inputs", "computed", "message"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["verdict"], "fail");
    assert!((r["computed"]["benchmark"].as_f64().unwrap() - 72.9).abs() < 0.05);
}

#[test]
fn ob_lookups_and_override() {
    let o = riskcast(&["ob", "stage", "--kind", "capex", "--stage", "3"]);
    assert_eq!(stdout(&o).trim(), "0.4");
    let o = riskcast(&["ob", "stage", "--kind", "capex", "--stage", "7"]);
    assert_eq!(o.status.code(), Some(1));
    let o = riskcast(&["ob", "confidence", "--type", "rail", "--p", "0.8"]);
    assert_eq!(stdout(&o).trim(), "0.57");

    let o = riskcast(&["ob", "mitigate", "--assessment", &fixture("assessment_procurement.json"), "--require-objective"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.6468).abs() < 1e-12);

    let o = riskcast(&["ob", "sensitivity", "--base", "100", "--type", "standard_civil", "--central", "0.24"]);
    let out = stdout(&o);
    assert!(out.contains("low      103.0") && out.contains("central  124.0") && out.contains("high     144.0"));

    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.csv");
    let text = riskcast::optimism_bias::EMBEDDED_SCHEDULE.replace("rail,confidence,0.80,0.57", "rail,confidence,0.80,0.61");
    std::fs::write(&sched, text).unwrap();
    let o = riskcast(&["ob", "--schedule", sched.to_str().unwrap(), "confidence", "--type", "rail", "--p", "0.8"]);
    assert_eq!(stdout(&o).trim(), "0.61");
}

#[test]
fn estimate_command() {
    let o = riskcast(&["estimate", "--base", "528.4", "--mean-risk", "38.6", "--uplift", "0.06", "--stage", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("OB adjustment    34.0"));
    assert!(out.contains("total            601.0"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(riskcast(&["--help"]).status.code(), Some(0));
    assert_eq!(riskcast(&["audit", "--help"]).status.code(), Some(0));
}
