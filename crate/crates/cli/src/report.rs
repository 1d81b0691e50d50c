//! Report documents. Field order is fixed by the struct definitions and all
//! lists are sorted before serialisation, so equal inputs give equal bytes.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use depthreat_core::advisories::CurationReport;
use depthreat_core::history::MaturityCriteria;
use depthreat_core::stats::{summarize_cohort, BlameTally, CohortSummary};
use depthreat_core::threat::{
    Blame, DependencyAssessment, ExclusionCause, LevelCounts, Resolution, SnapshotAssessment,
    ThreatLevel, Verdict,
};
use depthreat_core::time::{self, Timestamp};
use serde::Serialize;

use crate::analysis::{Absent, Analysis, FilteredApp, Plan};
use crate::args::{AnalysisArgs, Format, Preset, SnapshotAt};
use crate::inputs::AppFailure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "depthreat",
    version: env!("CARGO_PKG_VERSION"),
};

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn paths(ps: &[PathBuf]) -> Vec<String> {
    ps.iter().map(|p| path_str(p)).collect()
}

/// Effective configuration of an analysis command.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub registry: String,
    pub advisories: String,
    pub histories: Vec<String>,
    pub repos: Vec<String>,
    pub at: Option<SnapshotAt>,
    pub snapshots: Option<u32>,
    pub preset: Option<Preset>,
    pub maturity: Option<MaturityCriteria>,
    pub format: Format,
    pub out: Option<String>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn new(args: &AnalysisArgs, plan: Plan) -> RunConfig {
        let (at, snapshots) = match plan {
            Plan::At(at) => (Some(at), None),
            Plan::Intervals(k) => (None, Some(k)),
        };
        RunConfig {
            registry: path_str(&args.registry),
            advisories: path_str(&args.advisories),
            histories: paths(&args.sources.histories),
            repos: paths(&args.sources.repos),
            at,
            snapshots,
            preset: args.maturity.preset,
            maturity: crate::analysis::maturity_criteria(&args.maturity),
            format: args.output.format,
            out: args.output.out.as_deref().map(path_str),
            jobs: args.jobs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegistryStats {
    pub packages: usize,
    pub releases: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AppCounts {
    pub requested: usize,
    pub filtered: usize,
    pub failed: usize,
    pub analysed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Inputs {
    pub registry: RegistryStats,
    pub advisories: CurationReport,
    pub applications: AppCounts,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdvisoryMatch {
    pub id: String,
    pub title: String,
    pub kind: String,
    pub affected: String,
    pub patched: Option<String>,
    #[serde(with = "time::rfc3339")]
    pub reported_at: Timestamp,
    #[serde(with = "time::rfc3339::option")]
    pub published_at: Option<Timestamp>,
    pub level: ThreatLevel,
    pub blame: Option<Blame>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DependencyReport {
    pub package: String,
    pub constraint: String,
    pub resolved: Option<String>,
    /// `low`, `medium`, `high`, `not_vulnerable` or `excluded`.
    pub verdict: &'static str,
    pub exclusion: Option<ExclusionCause>,
    pub unsupported_reason: Option<String>,
    pub blame: Option<Blame>,
    pub advisories: Vec<AdvisoryMatch>,
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Vulnerable(ThreatLevel::Low) => "low",
        Verdict::Vulnerable(ThreatLevel::Medium) => "medium",
        Verdict::Vulnerable(ThreatLevel::High) => "high",
        Verdict::NotVulnerable => "not_vulnerable",
        Verdict::Excluded(_) => "excluded",
    }
}

impl DependencyReport {
    fn new(d: &DependencyAssessment) -> DependencyReport {
        let (resolved, unsupported_reason) = match &d.resolution {
            Resolution::Resolved(v) => (Some(v.to_string()), None),
            Resolution::Unsupported(reason) => (None, Some(reason.clone())),
            Resolution::Unresolvable | Resolution::UnknownPackage => (None, None),
        };
        DependencyReport {
            package: d.spec.package.clone(),
            constraint: d.spec.constraint_text.clone(),
            resolved,
            verdict: verdict_str(d.overall),
            exclusion: match d.overall {
                Verdict::Excluded(cause) => Some(cause),
                _ => None,
            },
            unsupported_reason,
            blame: d.blame,
            advisories: d
                .advisories_matched
                .iter()
                .map(|m| AdvisoryMatch {
                    id: m.advisory.id.clone(),
                    title: m.advisory.title.clone(),
                    kind: m.advisory.kind.clone(),
                    affected: m.advisory.affected_text().to_string(),
                    patched: m.advisory.patched_text().map(str::to_string),
                    reported_at: m.advisory.reported_at,
                    published_at: m.advisory.published_at,
                    level: m.level,
                    blame: m.blame,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AppReport {
    pub application: String,
    pub source: String,
    #[serde(with = "time::rfc3339")]
    pub at: Timestamp,
    pub commit_id: String,
    pub n: usize,
    pub m: usize,
    pub fraction: Option<f64>,
    pub level_counts: LevelCounts,
    pub dependencies: Vec<DependencyReport>,
}

impl AppReport {
    fn new(source: &str, s: &SnapshotAssessment) -> AppReport {
        AppReport {
            application: s.application.clone(),
            source: source.to_string(),
            at: s.at,
            commit_id: s.commit_id.clone(),
            n: s.n_dependencies,
            m: s.m_vulnerable,
            fraction: s.vulnerable_fraction(),
            level_counts: s.per_level_counts,
            dependencies: s.assessments.iter().map(DependencyReport::new).collect(),
        }
    }
}

/// A high-threat dependency and who is responsible for it.
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub application: String,
    #[serde(with = "time::rfc3339")]
    pub at: Timestamp,
    pub package: String,
    pub constraint: String,
    pub resolved: String,
    pub blame: Blame,
    /// Published advisories behind the finding.
    pub advisories: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detail {
    /// Per-dependency results and the cohort summary.
    Full,
    /// Cohort summary only.
    Summary,
    /// Blame tally and high-threat findings.
    Blame,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalReport {
    /// 1-based.
    pub index: usize,
    pub lifespan_fraction: Option<f64>,
    pub visible_releases: usize,
    pub absent: Vec<Absent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub applications: Option<Vec<AppReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<CohortSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blame: Option<BlameTally>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub findings: Option<Vec<Finding>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: &'static str,
    pub config: RunConfig,
    pub inputs: Inputs,
    pub filtered: Vec<FilteredApp>,
    pub failures: Vec<AppFailure>,
    pub intervals: Vec<IntervalReport>,
}

impl AnalysisReport {
    pub fn new(
        command: &'static str,
        config: RunConfig,
        plan: Plan,
        analysis: Analysis,
        detail: Detail,
    ) -> Self {
        let registry = RegistryStats {
            packages: analysis.index.len(),
            releases: analysis.index.packages().map(|(_, r)| r.len()).sum(),
        };
        let mut failures = analysis.failures;
        failures.sort_by(|a, b| a.source.cmp(&b.source));
        let intervals = analysis
            .intervals
            .into_iter()
            .enumerate()
            .map(|(i, interval)| {
                let snapshots: Vec<SnapshotAssessment> = interval
                    .assessments
                    .iter()
                    .map(|(_, s)| s.clone())
                    .collect();
                let summary = summarize_cohort(&snapshots, i + 1);
                let (applications, summary, blame, findings) = match detail {
                    Detail::Full => (
                        Some(
                            interval
                                .assessments
                                .iter()
                                .map(|(src, s)| AppReport::new(src, s))
                                .collect(),
                        ),
                        Some(summary),
                        None,
                        None,
                    ),
                    Detail::Summary => (None, Some(summary), None, None),
                    Detail::Blame => (None, None, Some(summary.blame), Some(findings(&snapshots))),
                };
                IntervalReport {
                    index: i + 1,
                    lifespan_fraction: plan.lifespan_fraction(i),
                    visible_releases: interval.visible_releases,
                    absent: interval.absent,
                    applications,
                    summary,
                    blame,
                    findings,
                }
            })
            .collect();
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            tool: TOOL,
            command,
            config,
            inputs: Inputs {
                registry,
                advisories: analysis.curation,
                applications: AppCounts {
                    requested: analysis.requested,
                    filtered: analysis.filtered.len(),
                    failed: failures.len(),
                    analysed: analysis.analysed,
                },
            },
            filtered: analysis.filtered,
            failures,
            intervals,
        }
    }
}

fn findings(snapshots: &[SnapshotAssessment]) -> Vec<Finding> {
    let mut out = Vec::new();
    for s in snapshots {
        for d in s.high() {
            let (Some(blame), Resolution::Resolved(v)) = (d.blame, &d.resolution) else {
                continue;
            };
            out.push(Finding {
                application: s.application.clone(),
                at: s.at,
                package: d.spec.package.clone(),
                constraint: d.spec.constraint_text.clone(),
                resolved: v.to_string(),
                blame,
                advisories: d
                    .advisories_matched
                    .iter()
                    .filter(|m| m.level == ThreatLevel::High)
                    .map(|m| m.advisory.id.clone())
                    .collect(),
            });
        }
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serialising report")?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Flattened projection: one row per dependency, application or interval,
/// depending on the detail level.
pub fn analysis_csv(report: &AnalysisReport, detail: Detail) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match detail {
        Detail::Full => {
            w.write_record([
                "interval",
                "application",
                "at",
                "commit_id",
                "package",
                "constraint",
                "resolved",
                "verdict",
                "exclusion",
                "blame",
                "major_barrier",
                "advisories",
            ])?;
            for interval in &report.intervals {
                for app in interval.applications.iter().flatten() {
                    for d in &app.dependencies {
                        let ids: Vec<&str> = d.advisories.iter().map(|a| a.id.as_str()).collect();
                        w.write_record([
                            interval.index.to_string(),
                            app.application.clone(),
                            time::format_rfc3339(&app.at),
                            app.commit_id.clone(),
                            d.package.clone(),
                            d.constraint.clone(),
                            d.resolved.clone().unwrap_or_default(),
                            d.verdict.to_string(),
                            opt(d.exclusion.map(exclusion_str)),
                            opt(d.blame.map(blame_str)),
                            opt(d.blame.map(|b| b.major_barrier)),
                            ids.join(";"),
                        ])?;
                    }
                }
            }
        }
        Detail::Summary => {
            w.write_record([
                "interval",
                "lifespan_fraction",
                "application",
                "at",
                "n",
                "m",
                "fraction",
                "low",
                "medium",
                "high",
            ])?;
            for interval in &report.intervals {
                for app in interval.summary.iter().flat_map(|s| &s.applications) {
                    w.write_record([
                        interval.index.to_string(),
                        opt(interval.lifespan_fraction),
                        app.application.clone(),
                        time::format_rfc3339(&app.at),
                        app.n.to_string(),
                        app.m.to_string(),
                        opt(app.fraction),
                        app.level_counts.low.to_string(),
                        app.level_counts.medium.to_string(),
                        app.level_counts.high.to_string(),
                    ])?;
                }
            }
        }
        Detail::Blame => {
            w.write_record([
                "interval",
                "lifespan_fraction",
                "high_findings",
                "package_to_blame",
                "application_to_blame",
                "major_barrier",
                "package_to_blame_share",
                "application_to_blame_share",
                "major_barrier_share",
            ])?;
            for interval in &report.intervals {
                let b = interval.blame.unwrap_or_default();
                w.write_record([
                    interval.index.to_string(),
                    opt(interval.lifespan_fraction),
                    b.high_findings.to_string(),
                    b.package_to_blame.to_string(),
                    b.application_to_blame.to_string(),
                    b.major_barrier.to_string(),
                    opt(b.package_to_blame_share),
                    opt(b.application_to_blame_share),
                    opt(b.major_barrier_share),
                ])?;
            }
        }
    }
    w.into_inner().context("flushing CSV")
}

fn exclusion_str(c: ExclusionCause) -> &'static str {
    match c {
        ExclusionCause::Unresolvable => "unresolvable",
        ExclusionCause::UnknownPackage => "unknown_package",
        ExclusionCause::UnsupportedSpecifier => "unsupported_specifier",
    }
}

fn blame_str(b: Blame) -> &'static str {
    match b.kind {
        depthreat_core::threat::BlameKind::PackageToBlame => "package_to_blame",
        depthreat_core::threat::BlameKind::ApplicationToBlame => "application_to_blame",
    }
}
