//! `depthreat` command implementations. `main.rs` only parses arguments and
//! maps the outcome to an exit status.

pub mod analysis;
pub mod args;
pub mod inputs;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use depthreat_core::history::extract_history;
use depthreat_core::registry::{fetch_packument, ReleaseIndex};
use depthreat_core::stats::{
    cliffs_delta, format_p_value, mann_whitney_one_sided, Magnitude, Method,
};
use serde::Serialize;
use serde_json::json;

use crate::analysis::Plan;
use crate::args::{AnalysisArgs, Command, Format, IngestCommand, StatsArgs};
use crate::report::{AnalysisReport, Detail, RunConfig, SCHEMA_VERSION, TOOL};

pub const EXIT_OK: i32 = 0;
/// Some applications or packages were skipped; the report lists why.
pub const EXIT_PARTIAL: i32 = 2;

/// Runs one command. `Err` means an input or usage error: nothing was
/// written and the process should exit with status 1.
pub fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Scan(a) => analyse("scan", &a.analysis, Plan::At(a.at), Detail::Full),
        Command::Evolve(a) => analyse(
            "evolve",
            &a.analysis,
            Plan::Intervals(a.snapshots),
            Detail::Summary,
        ),
        Command::Blame(a) => {
            let plan = match (a.at, a.snapshots) {
                (Some(at), None) => Plan::At(at),
                (None, Some(k)) => Plan::Intervals(k),
                _ => bail!("exactly one of --at and --snapshots is required"),
            };
            analyse("blame", &a.analysis, plan, Detail::Blame)
        }
        Command::Stats(a) => stats(a),
        Command::Ingest(c) => ingest(c),
    }
}

fn analyse(command: &'static str, args: &AnalysisArgs, plan: Plan, detail: Detail) -> Result<i32> {
    let config = RunConfig::new(args, plan);
    let analysis = analysis::run(args, plan)?;
    let report = AnalysisReport::new(command, config, plan, analysis, detail);
    let bytes = match args.output.format {
        Format::Json => report::to_json(&report)?,
        Format::Csv => report::analysis_csv(&report, detail)?,
    };
    emit(args.output.out.as_deref(), &bytes)?;
    Ok(if report.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    })
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct StatsConfig {
    x: String,
    y: String,
    method: Method,
    format: Format,
    out: Option<String>,
}

#[derive(Debug, Serialize)]
struct StatsOutput {
    n_x: usize,
    n_y: usize,
    u_statistic: f64,
    p_value: f64,
    /// Floored at 2.2e-16.
    p_value_display: String,
    method: Method,
    delta: f64,
    magnitude: Magnitude,
}

#[derive(Debug, Serialize)]
struct StatsReport {
    schema_version: u32,
    tool: report::Tool,
    command: &'static str,
    config: StatsConfig,
    result: StatsOutput,
}

fn stats(args: &StatsArgs) -> Result<i32> {
    let x = inputs::read_sample(&args.x)?;
    let y = inputs::read_sample(&args.y)?;
    let method = Method::from(args.method);
    let mw = mann_whitney_one_sided(&x, &y, method).with_context(|| sample_names(args))?;
    let (delta, magnitude) = cliffs_delta(&x, &y).with_context(|| sample_names(args))?;
    let result = StatsOutput {
        n_x: x.len(),
        n_y: y.len(),
        u_statistic: mw.u,
        p_value: mw.p,
        p_value_display: format_p_value(mw.p),
        method: mw.method,
        delta,
        magnitude,
    };
    let bytes = match args.output.format {
        Format::Json => report::to_json(&StatsReport {
            schema_version: SCHEMA_VERSION,
            tool: TOOL,
            command: "stats",
            config: StatsConfig {
                x: args.x.display().to_string(),
                y: args.y.display().to_string(),
                method,
                format: args.output.format,
                out: args.output.out.as_ref().map(|p| p.display().to_string()),
            },
            result,
        })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "n_x",
                "n_y",
                "u_statistic",
                "p_value",
                "p_value_display",
                "method",
                "delta",
                "magnitude",
            ])?;
            w.write_record([
                result.n_x.to_string(),
                result.n_y.to_string(),
                result.u_statistic.to_string(),
                result.p_value.to_string(),
                result.p_value_display,
                serde_json::to_value(result.method)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                result.delta.to_string(),
                result.magnitude.to_string(),
            ])?;
            w.into_inner().context("flushing CSV")?
        }
    };
    emit(args.output.out.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn sample_names(args: &StatsArgs) -> String {
    format!("samples {} and {}", args.x.display(), args.y.display())
}

fn ingest_report(
    command: &str,
    config: serde_json::Value,
    body: serde_json::Value,
) -> Result<Vec<u8>> {
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL,
        "command": command,
        "config": config,
    });
    if let (Some(doc), Some(body)) = (doc.as_object_mut(), body.as_object()) {
        doc.extend(body.clone());
    }
    report::to_json(&doc)
}

fn display(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn ingest(command: &IngestCommand) -> Result<i32> {
    match command {
        IngestCommand::Advisories {
            input,
            emit: data,
            out,
        } => {
            let (store, curation) = inputs::load_advisories(input)?;
            if let Some(path) = data {
                emit(Some(path), store.to_json().as_bytes())?;
            }
            let bytes = ingest_report(
                "ingest advisories",
                json!({"input": input.display().to_string(), "emit": display(data), "out": display(out)}),
                json!({"curation": curation}),
            )?;
            emit(out.as_deref(), &bytes)?;
            Ok(EXIT_OK)
        }
        IngestCommand::Registry {
            input,
            emit: data,
            out,
        } => {
            let index = inputs::load_registry(input)?;
            if let Some(path) = data {
                emit(Some(path), index.to_json().as_bytes())?;
            }
            let releases: usize = index.packages().map(|(_, r)| r.len()).sum();
            let bytes = ingest_report(
                "ingest registry",
                json!({"input": input.display().to_string(), "emit": display(data), "out": display(out)}),
                json!({"registry": {"packages": index.len(), "releases": releases}}),
            )?;
            emit(out.as_deref(), &bytes)?;
            Ok(EXIT_OK)
        }
        IngestCommand::Fetch {
            endpoint,
            packages,
            emit: data,
            out,
        } => {
            let mut index = ReleaseIndex::new();
            let mut fetched = Vec::new();
            let mut failures = Vec::new();
            let mut names = packages.clone();
            names.sort();
            names.dedup();
            for name in &names {
                let result = fetch_packument(endpoint, name)
                    .map_err(anyhow::Error::from)
                    .and_then(|records| {
                        let n = records.len();
                        index.insert_package(name, records)?;
                        Ok(n)
                    });
                match result {
                    Ok(n) => fetched.push(json!({"package": name, "releases": n})),
                    Err(e) => failures.push(json!({"source": name, "cause": format!("{e:#}")})),
                }
            }
            if fetched.is_empty() {
                bail!(
                    "no package could be fetched: {}",
                    serde_json::to_string(&failures)?
                );
            }
            if let Some(path) = data {
                emit(Some(path), index.to_json().as_bytes())?;
            }
            let partial = !failures.is_empty();
            let bytes = ingest_report(
                "ingest fetch",
                json!({"endpoint": endpoint, "packages": names, "emit": display(data), "out": display(out)}),
                json!({"fetched": fetched, "failures": failures}),
            )?;
            emit(out.as_deref(), &bytes)?;
            Ok(if partial { EXIT_PARTIAL } else { EXIT_OK })
        }
        IngestCommand::History {
            repos,
            emit_dir,
            out,
        } => {
            let mut mined = Vec::new();
            let mut failures = Vec::new();
            for repo in repos {
                match extract_history(repo) {
                    Ok(h) => mined.push((repo.display().to_string(), h)),
                    Err(e) => failures.push(
                        json!({"source": repo.display().to_string(), "cause": e.to_string()}),
                    ),
                }
            }
            if mined.is_empty() {
                bail!(
                    "no repository could be mined: {}",
                    serde_json::to_string(&failures)?
                );
            }
            let mut applications = Vec::new();
            for (source, h) in &mined {
                let emitted = match emit_dir {
                    Some(dir) => {
                        let path =
                            dir.join(format!("{}.json", h.application.replace(['/', '\\'], "_")));
                        emit(Some(&path), h.to_json().as_bytes())?;
                        Some(path.display().to_string())
                    }
                    None => None,
                };
                applications.push(json!({
                    "application": h.application,
                    "source": source,
                    "total_commits": h.total_commits,
                    "contributors": h.contributors,
                    "first_commit_at": depthreat_core::time::format_rfc3339(&h.first_commit_at),
                    "last_commit_at": depthreat_core::time::format_rfc3339(&h.last_commit_at),
                    "manifest_snapshots": h.snapshots.len(),
                    "emitted": emitted,
                }));
            }
            let partial = !failures.is_empty();
            let bytes = ingest_report(
                "ingest history",
                json!({"repos": repos.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                       "emit_dir": display(emit_dir), "out": display(out)}),
                json!({"applications": applications, "failures": failures}),
            )?;
            emit(out.as_deref(), &bytes)?;
            Ok(if partial { EXIT_PARTIAL } else { EXIT_OK })
        }
    }
}
