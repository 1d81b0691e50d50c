#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

pub fn ecosystem(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/ecosystem")
        .join(rel)
}

pub const APPS: [&str; 4] = ["blog-engine", "cli-helper", "ledger-api", "shop-front"];

pub fn depthreat<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_depthreat"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// `--registry ... --advisories ... --history <every fixture app>` followed
/// by `extra`.
pub fn analysis_args(command: &str, extra: &[&str]) -> Vec<String> {
    let mut args = vec![
        command.to_string(),
        "--registry".into(),
        ecosystem("registry.json").display().to_string(),
        "--advisories".into(),
        ecosystem("advisories.json").display().to_string(),
        "--history".into(),
    ];
    for app in APPS {
        args.push(
            ecosystem(&format!("histories/{app}.json"))
                .display()
                .to_string(),
        );
    }
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

pub fn run_json(args: &[String]) -> Result<(Value, Vec<u8>), String> {
    let out = depthreat(args);
    if out.status.code() != Some(0) {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok((value, out.stdout))
}

pub fn expected() -> Value {
    let text = std::fs::read_to_string(ecosystem("expected.json")).expect("expected.json present");
    serde_json::from_str(&text).expect("expected.json parses")
}

fn blame_kind(b: &Value) -> Value {
    b.get("kind").cloned().unwrap_or(Value::Null)
}

fn project_dependency(d: &Value) -> Value {
    json!({
        "package": d["package"],
        "resolved": d["resolved"],
        "verdict": d["verdict"],
        "exclusion": d["exclusion"],
        "blame": blame_kind(&d["blame"]),
        "major_barrier": d["blame"].get("major_barrier").cloned().unwrap_or(Value::Null),
        "advisories": d["advisories"].as_array().unwrap().iter()
            .map(|a| json!([a["id"], a["level"], blame_kind(&a["blame"])]))
            .collect::<Vec<_>>(),
    })
}

fn project_summary(s: &Value) -> Value {
    json!({
        "n_total": s["n_total"],
        "m_total": s["m_total"],
        "low": s["level_totals"]["low"],
        "medium": s["level_totals"]["medium"],
        "high": s["level_totals"]["high"],
        "affected_applications": s["affected_applications"],
        "affected_application_fraction": s["affected_application_fraction"],
        "median_fraction": s["median_fraction"],
        "median_fraction_affected": s["median_fraction_affected"],
        "median_level_fractions": s["median_level_fractions"],
        "blame": s["blame"],
    })
}

/// Reduces a scan or evolve report to the oracle's shape. Per-dependency
/// detail is only present in scan reports.
pub fn project_intervals(report: &Value) -> Value {
    let intervals = report["intervals"].as_array().expect("intervals");
    Value::Array(
        intervals
            .iter()
            .map(|iv| {
                let summary = &iv["summary"];
                let apps: Vec<Value> = match iv.get("applications") {
                    Some(apps) => apps.as_array().unwrap().iter()
                        .map(|a| json!({
                            "application": a["application"],
                            "at": a["at"],
                            "commit_id": a["commit_id"],
                            "n": a["n"],
                            "m": a["m"],
                            "low": a["level_counts"]["low"],
                            "medium": a["level_counts"]["medium"],
                            "high": a["level_counts"]["high"],
                            "deps": a["dependencies"].as_array().unwrap().iter().map(project_dependency).collect::<Vec<_>>(),
                        }))
                        .collect(),
                    None => summary["applications"].as_array().unwrap().iter()
                        .map(|a| json!({
                            "application": a["application"],
                            "at": a["at"],
                            "commit_id": a["commit_id"],
                            "n": a["n"],
                            "m": a["m"],
                            "low": a["level_counts"]["low"],
                            "medium": a["level_counts"]["medium"],
                            "high": a["level_counts"]["high"],
                        }))
                        .collect(),
                };
                json!({
                    "index": iv["index"],
                    "lifespan_fraction": iv["lifespan_fraction"],
                    "visible_releases": iv["visible_releases"],
                    "absent": iv["absent"].as_array().unwrap().iter()
                        .map(|a| json!([a["application"], a["at"]]))
                        .collect::<Vec<_>>(),
                    "apps": apps,
                    "summary": project_summary(summary),
                })
            })
            .collect(),
    )
}

/// Drops per-dependency detail from oracle intervals.
pub fn without_deps(intervals: &Value) -> Value {
    let mut v = intervals.clone();
    for iv in v.as_array_mut().unwrap() {
        for app in iv["apps"].as_array_mut().unwrap() {
            app.as_object_mut().unwrap().remove("deps");
        }
    }
    v
}

/// Structural equality with numbers compared to within 1e-12.
pub fn same(actual: &Value, expected: &Value, path: &str) -> Result<(), String> {
    match (actual, expected) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if (a - b).abs() <= 1e-12 {
                Ok(())
            } else {
                Err(format!("{path}: {a} != {b}"))
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                return Err(format!("{path}: length {} != {}", a.len(), b.len()));
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                same(x, y, &format!("{path}[{i}]"))?;
            }
            Ok(())
        }
        (Value::Object(a), Value::Object(b)) => {
            let keys_a: Vec<_> = a.keys().collect();
            let keys_b: Vec<_> = b.keys().collect();
            if keys_a != keys_b {
                return Err(format!("{path}: keys {keys_a:?} != {keys_b:?}"));
            }
            for (k, x) in a {
                same(x, &b[k], &format!("{path}.{k}"))?;
            }
            Ok(())
        }
        (a, b) if a == b => Ok(()),
        (a, b) => Err(format!("{path}: {a} != {b}")),
    }
}

/// High-threat findings implied by oracle intervals, in report order.
pub fn expected_findings(intervals: &Value) -> Vec<Value> {
    let mut out = Vec::new();
    for iv in intervals.as_array().unwrap() {
        let mut rows = Vec::new();
        for app in iv["apps"].as_array().unwrap() {
            for d in app["deps"].as_array().unwrap() {
                if d["verdict"] == "high" {
                    rows.push(json!({
                        "application": app["application"],
                        "at": app["at"],
                        "package": d["package"],
                        "resolved": d["resolved"],
                        "blame": {"kind": d["blame"], "major_barrier": d["major_barrier"]},
                        "advisories": d["advisories"].as_array().unwrap().iter()
                            .filter(|a| a[1] == "high").map(|a| a[0].clone()).collect::<Vec<_>>(),
                    }));
                }
            }
        }
        out.push(json!({"index": iv["index"], "blame": iv["summary"]["blame"], "findings": rows}));
    }
    out
}

pub fn project_blame(report: &Value) -> Vec<Value> {
    report["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|iv| {
            json!({
                "index": iv["index"],
                "blame": iv["blame"],
                "findings": iv["findings"].as_array().unwrap().iter()
                    .map(|f| json!({
                        "application": f["application"],
                        "at": f["at"],
                        "package": f["package"],
                        "resolved": f["resolved"],
                        "blame": f["blame"],
                        "advisories": f["advisories"],
                    }))
                    .collect::<Vec<_>>(),
            })
        })
        .collect()
}

/// Every scan, evolve and blame run of the fixture against the oracle, plus
/// byte-identical reruns. Returns the first discrepancy.
pub fn check_ecosystem() -> Result<(), String> {
    let expected = expected();
    let cases: [(&str, &[&str], &str); 5] = [
        ("scan", &["--at", "end"], "scan_end"),
        ("scan", &["--at", "2015-01-01"], "scan_2015_01_01"),
        ("scan", &["--at", "2017-01-28T00:00:00Z"], "scan_2017_01_28"),
        ("evolve", &["--snapshots", "1"], "evolve_1"),
        ("evolve", &["--snapshots", "5"], "evolve_5"),
    ];
    for (command, extra, key) in cases {
        let args = analysis_args(command, extra);
        let (report, bytes) = run_json(&args)?;
        let want = if command == "scan" {
            expected[key].clone()
        } else {
            without_deps(&expected[key])
        };
        same(&project_intervals(&report), &want, key)?;
        let (_, again) = run_json(&args)?;
        if again != bytes {
            return Err(format!("{key}: rerun is not byte-identical"));
        }
    }

    let (report, _) = run_json(&analysis_args("blame", &["--snapshots", "5"]))?;
    same(
        &Value::Array(project_blame(&report)),
        &Value::Array(expected_findings(&expected["evolve_5"])),
        "blame_5",
    )?;

    let (report, _) = run_json(&analysis_args(
        "scan",
        &["--at", "end", "--preset", "paper-2019"],
    ))?;
    let filtered: serde_json::Map<String, Value> = report["filtered"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            (
                f["application"].as_str().unwrap().to_string(),
                f["reasons"].clone(),
            )
        })
        .collect();
    same(
        &Value::Object(filtered),
        &expected["scan_end_preset_2019"]["filtered"],
        "preset_2019.filtered",
    )?;
    same(
        &project_intervals(&report),
        &expected["scan_end_preset_2019"]["intervals"],
        "preset_2019.intervals",
    )?;
    Ok(())
}
