mod common;

use common::*;
use serde_json::Value;

#[test]
fn reports_match_oracle_and_rerun_identically() {
    check_ecosystem().unwrap();
}

#[test]
fn k1_evolve_equals_scan_at_end() {
    let (scan, _) = run_json(&analysis_args("scan", &["--at", "end"])).unwrap();
    let (evolve, _) = run_json(&analysis_args("evolve", &["--snapshots", "1"])).unwrap();
    assert_eq!(
        without_deps(&project_intervals(&scan)),
        project_intervals(&evolve)
    );
}

#[test]
fn evolve_release_visibility_is_monotone() {
    let (report, _) = run_json(&analysis_args("evolve", &["--snapshots", "5"])).unwrap();
    let visible: Vec<u64> = report["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|iv| iv["visible_releases"].as_u64().unwrap())
        .collect();
    assert_eq!(visible.len(), 5);
    assert!(visible.windows(2).all(|w| w[0] <= w[1]), "{visible:?}");
    let fractions: Vec<f64> = report["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|iv| iv["lifespan_fraction"].as_f64().unwrap())
        .collect();
    assert_eq!(fractions, [0.2, 0.4, 0.6, 0.8, 1.0]);
}

#[test]
fn jobs_do_not_change_results() {
    let strip = |mut v: Value| {
        v["config"]["jobs"] = Value::Null;
        v
    };
    let (one, _) = run_json(&analysis_args("scan", &["--at", "end", "--jobs", "1"])).unwrap();
    let (many, _) = run_json(&analysis_args("scan", &["--at", "end", "--jobs", "4"])).unwrap();
    assert_eq!(strip(one), strip(many));
}

#[test]
fn report_embeds_version_and_config() {
    let (report, _) = run_json(&analysis_args(
        "evolve",
        &["--snapshots", "5", "--preset", "paper-2019"],
    ))
    .unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["tool"]["version"], env!("CARGO_PKG_VERSION"));
    let config = &report["config"];
    assert_eq!(config["snapshots"], 5);
    assert_eq!(config["at"], Value::Null);
    assert_eq!(config["preset"], "paper-2019");
    assert_eq!(config["maturity"]["min_commits"], 100);
    assert_eq!(config["histories"].as_array().unwrap().len(), 4);
    assert_eq!(report["inputs"]["advisories"]["excluded_advisories"], 1);
    assert_eq!(report["inputs"]["applications"]["filtered"], 2);
}

#[test]
fn corrupt_history_is_a_partial_failure() {
    let mut args = analysis_args("scan", &["--at", "end"]);
    let broken = ecosystem("broken-history.json").display().to_string();
    // Keep three applications: two good, one corrupt.
    args.retain(|a| !a.ends_with("blog-engine.json") && !a.ends_with("cli-helper.json"));
    let pos = args.iter().position(|a| a == "--history").unwrap();
    args.insert(pos + 1, broken.clone());
    let out = depthreat(&args);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let apps = report["intervals"][0]["applications"].as_array().unwrap();
    assert_eq!(apps.len(), 2);
    assert_eq!(report["failures"][0]["source"], broken);
}

#[test]
fn missing_advisories_is_an_input_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let mut args = analysis_args("scan", &["--at", "end", "--out"]);
    args.push(out_path.display().to_string());
    let i = args.iter().position(|a| a == "--advisories").unwrap();
    args[i + 1] = dir.path().join("nope.json").display().to_string();
    let out = depthreat(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_path.exists());
    assert!(out.stdout.is_empty());
}

#[test]
fn zero_snapshots_is_a_usage_error() {
    let out = depthreat(analysis_args("evolve", &["--snapshots", "0"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 1"));
}

#[test]
fn bad_flags_exit_1() {
    assert_eq!(depthreat(["scan", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        depthreat(analysis_args("scan", &["--at", "yesterday"]))
            .status
            .code(),
        Some(1)
    );
    let out = depthreat(analysis_args("blame", &["--at", "end", "--snapshots", "2"]));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(depthreat(["--help"]).status.code(), Some(0));
}

#[test]
fn blame_without_high_findings_reports_null_shares() {
    let (report, _) = run_json(&analysis_args("blame", &["--at", "2014-12-01"])).unwrap();
    let blame = &report["intervals"][0]["blame"];
    assert_eq!(blame["high_findings"], 1);
    let (report, _) = run_json(&analysis_args("blame", &["--at", "2014-07-15"])).unwrap();
    let blame = &report["intervals"][0]["blame"];
    assert_eq!(blame["high_findings"], 0);
    assert_eq!(blame["package_to_blame_share"], Value::Null);
    assert_eq!(blame["application_to_blame_share"], Value::Null);
}

#[test]
fn csv_projections() {
    let out = depthreat(analysis_args("scan", &["--at", "end", "--format", "csv"]));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("interval,application,at,commit_id,package"));
    assert!(text.contains("shop-front"));
    let out = depthreat(analysis_args(
        "blame",
        &["--snapshots", "5", "--format", "csv"],
    ));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
    let out = depthreat(analysis_args(
        "evolve",
        &["--snapshots", "2", "--format", "csv"],
    ));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().count(),
        1 + 2 * 4
    );
}
