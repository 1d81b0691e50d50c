//! Dependency-change timelines of applications.

mod git;
mod manifest;

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::semver::VersionRange;
use crate::time::Timestamp;

pub use git::extract_history;
pub use manifest::parse_manifest;

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("history format error at line {line}, column {column}: {message}")]
    Format {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("malformed manifest: {0}")]
    ManifestParse(String),
    #[error("{0} is not a git repository")]
    NotARepository(String),
    #[error("no commit ever touched the manifest")]
    NoManifestHistory,
    #[error("git: {0}")]
    Git(String),
    #[error("i/o error reading history: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for HistoryError {
    fn from(e: serde_json::Error) -> Self {
        HistoryError::Format {
            message: e.to_string(),
            line: e.line(),
            column: e.column(),
        }
    }
}

fn format_error(message: impl Into<String>) -> HistoryError {
    HistoryError::Format {
        message: message.into(),
        line: 0,
        column: 0,
    }
}

/// A parsed constraint, or the reason it is not a version range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Range(VersionRange),
    Unsupported { reason: String },
}

/// One production dependency as written in the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencySpec {
    pub package: String,
    pub constraint_text: String,
    pub constraint: Constraint,
}

impl DependencySpec {
    pub fn new(package: impl Into<String>, constraint_text: impl Into<String>) -> Self {
        let constraint_text = constraint_text.into();
        let constraint = match constraint_text.parse::<VersionRange>() {
            Ok(r) => Constraint::Range(r),
            Err(e) => Constraint::Unsupported {
                reason: e.to_string(),
            },
        };
        DependencySpec {
            package: package.into(),
            constraint_text,
            constraint,
        }
    }

    pub fn range(&self) -> Option<&VersionRange> {
        match &self.constraint {
            Constraint::Range(r) => Some(r),
            Constraint::Unsupported { .. } => None,
        }
    }
}

impl Serialize for DependencySpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DependencyRecord {
            package: self.package.clone(),
            constraint: self.constraint_text.clone(),
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestSnapshot {
    pub commit_id: String,
    #[serde(with = "crate::time::rfc3339")]
    pub committed_at: Timestamp,
    pub dependencies: Vec<DependencySpec>,
}

/// An application's manifest timeline plus the repository facts the
/// maturity filter needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestHistory {
    pub application: String,
    pub total_commits: u64,
    pub contributors: u64,
    #[serde(with = "crate::time::rfc3339")]
    pub first_commit_at: Timestamp,
    #[serde(with = "crate::time::rfc3339")]
    pub last_commit_at: Timestamp,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub fork: bool,
    pub snapshots: Vec<ManifestSnapshot>,
}

#[derive(Serialize, Deserialize)]
struct DependencyRecord {
    package: String,
    constraint: String,
}

#[derive(Deserialize)]
struct SnapshotRecord {
    commit_id: String,
    #[serde(with = "crate::time::rfc3339")]
    committed_at: Timestamp,
    dependencies: Vec<DependencyRecord>,
}

#[derive(Deserialize)]
struct HistoryRecord {
    application: String,
    total_commits: u64,
    contributors: u64,
    #[serde(with = "crate::time::rfc3339")]
    first_commit_at: Timestamp,
    #[serde(with = "crate::time::rfc3339")]
    last_commit_at: Timestamp,
    #[serde(default)]
    fork: bool,
    snapshots: Vec<SnapshotRecord>,
}

/// Non-fatal problems repaired while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HistoryWarning {
    UnsortedHistory,
}

impl ManifestHistory {
    /// Reads the `history-json` format. Out-of-order snapshots are sorted and
    /// reported as a warning.
    pub fn load(mut source: impl Read) -> Result<(Self, Vec<HistoryWarning>), HistoryError> {
        let mut raw = String::new();
        source.read_to_string(&mut raw)?;
        let record: HistoryRecord = serde_json::from_str(&raw)?;
        if record.snapshots.is_empty() {
            return Err(format_error("history has no snapshots"));
        }
        if record.first_commit_at > record.last_commit_at {
            return Err(format_error("first_commit_at is after last_commit_at"));
        }

        let mut snapshots = Vec::with_capacity(record.snapshots.len());
        for snap in record.snapshots {
            let mut seen = HashSet::new();
            if let Some(dup) = snap
                .dependencies
                .iter()
                .find(|d| !seen.insert(d.package.as_str()))
            {
                return Err(format_error(format!(
                    "snapshot {} lists {:?} twice",
                    snap.commit_id, dup.package
                )));
            }
            if snap.committed_at < record.first_commit_at
                || snap.committed_at > record.last_commit_at
            {
                return Err(format_error(format!(
                    "snapshot {} lies outside the commit lifespan",
                    snap.commit_id
                )));
            }
            let mut dependencies: Vec<DependencySpec> = snap
                .dependencies
                .into_iter()
                .map(|d| DependencySpec::new(d.package, d.constraint))
                .collect();
            dependencies.sort_by(|a, b| a.package.cmp(&b.package));
            snapshots.push(ManifestSnapshot {
                commit_id: snap.commit_id,
                committed_at: snap.committed_at,
                dependencies,
            });
        }

        let mut warnings = Vec::new();
        if snapshots
            .windows(2)
            .any(|w| w[0].committed_at > w[1].committed_at)
        {
            tracing::warn!(application = %record.application, "history snapshots out of order; sorting");
            snapshots.sort_by_key(|s| s.committed_at);
            warnings.push(HistoryWarning::UnsortedHistory);
        }
        Ok((
            ManifestHistory {
                application: record.application,
                snapshots,
                first_commit_at: record.first_commit_at,
                last_commit_at: record.last_commit_at,
                total_commits: record.total_commits,
                contributors: record.contributors,
                fork: record.fork,
            },
            warnings,
        ))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("history serializes")
    }

    /// The manifest in force at `t`: the latest snapshot committed at or
    /// before `t`, or `None` when `t` precedes the first one.
    pub fn snapshot_at(&self, t: Timestamp) -> Option<&ManifestSnapshot> {
        let after = self.snapshots.partition_point(|s| s.committed_at <= t);
        after.checked_sub(1).map(|i| &self.snapshots[i])
    }

    pub fn latest(&self) -> &ManifestSnapshot {
        self.snapshots.last().expect("history is never empty")
    }

    pub fn passes_maturity_filter(&self, criteria: &MaturityCriteria) -> MaturityVerdict {
        let mut reasons = Vec::new();
        if self.total_commits < criteria.min_commits {
            reasons.push(MaturityFailure::MinCommits);
        }
        if self.contributors < criteria.min_contributors {
            reasons.push(MaturityFailure::MinContributors);
        }
        if (self.latest().dependencies.len() as u64) < criteria.min_dependencies {
            reasons.push(MaturityFailure::MinDependencies);
        }
        if matches!(criteria.created_before, Some(t) if self.first_commit_at >= t) {
            reasons.push(MaturityFailure::CreatedBefore);
        }
        if matches!(criteria.active_after, Some(t) if self.last_commit_at <= t) {
            reasons.push(MaturityFailure::ActiveAfter);
        }
        if criteria.exclude_forks && self.fork {
            reasons.push(MaturityFailure::Fork);
        }
        MaturityVerdict {
            passed: reasons.is_empty(),
            reasons,
        }
    }
}

/// Thresholds an application must meet to be studied. Counts are inclusive
/// minimums; dates are strict (`first commit < created_before`,
/// `last commit > active_after`). The dependency count is taken from the
/// latest manifest snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaturityCriteria {
    pub min_commits: u64,
    pub min_contributors: u64,
    pub min_dependencies: u64,
    #[serde(with = "crate::time::rfc3339::option")]
    pub created_before: Option<Timestamp>,
    #[serde(with = "crate::time::rfc3339::option")]
    pub active_after: Option<Timestamp>,
    pub exclude_forks: bool,
}

impl MaturityCriteria {
    /// At least 100 commits by more than two contributors, more than two
    /// dependencies, created before and still active after 2017-01-01, not a fork.
    pub fn preset_2019() -> Self {
        let cutoff = chrono::NaiveDate::from_ymd_opt(2017, 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid date")
            .and_utc();
        MaturityCriteria {
            min_commits: 100,
            min_contributors: 3,
            min_dependencies: 3,
            created_before: Some(cutoff),
            active_after: Some(cutoff),
            exclude_forks: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaturityFailure {
    MinCommits,
    MinContributors,
    MinDependencies,
    CreatedBefore,
    ActiveAfter,
    Fork,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaturityVerdict {
    pub passed: bool,
    pub reasons: Vec<MaturityFailure>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::parse_instant;
    use proptest::prelude::*;

    fn ts(s: &str) -> Timestamp {
        parse_instant(s).unwrap()
    }

    fn snapshot(id: &str, at: &str, deps: &[(&str, &str)]) -> ManifestSnapshot {
        ManifestSnapshot {
            commit_id: id.into(),
            committed_at: ts(at),
            dependencies: deps
                .iter()
                .map(|(p, c)| DependencySpec::new(*p, *c))
                .collect(),
        }
    }

    fn history(snapshots: Vec<ManifestSnapshot>) -> ManifestHistory {
        ManifestHistory {
            application: "app".into(),
            first_commit_at: snapshots[0].committed_at,
            last_commit_at: snapshots.last().unwrap().committed_at,
            snapshots,
            total_commits: 100,
            contributors: 3,
            fork: false,
        }
    }

    const MINIMAL: &str = r#"{"application": "app", "total_commits": 5, "contributors": 2,
        "first_commit_at": "2015-01-01T00:00:00Z", "last_commit_at": "2016-01-01T00:00:00Z",
        "snapshots": [{"commit_id": "c1", "committed_at": "2015-02-01T00:00:00Z",
                       "dependencies": [{"package": "a", "constraint": "^1.0.0"}]}]}"#;

    #[test]
    fn loads_minimal_history() {
        let (h, warnings) = ManifestHistory::load(MINIMAL.as_bytes()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(h.snapshots.len(), 1);
        assert_eq!(h.snapshots[0].dependencies[0].package, "a");
    }

    #[test]
    fn unsorted_snapshots_are_sorted_with_warning() {
        let raw = r#"{"application": "app", "total_commits": 5, "contributors": 2,
            "first_commit_at": "2015-01-01T00:00:00Z", "last_commit_at": "2016-01-01T00:00:00Z",
            "snapshots": [
              {"commit_id": "c2", "committed_at": "2015-06-01T00:00:00Z", "dependencies": []},
              {"commit_id": "c1", "committed_at": "2015-02-01T00:00:00Z", "dependencies": []}]}"#;
        let (h, warnings) = ManifestHistory::load(raw.as_bytes()).unwrap();
        assert_eq!(warnings, vec![HistoryWarning::UnsortedHistory]);
        assert_eq!(h.snapshots[0].commit_id, "c1");
    }

    #[test]
    fn duplicate_package_in_snapshot_is_rejected() {
        let raw = MINIMAL.replace(
            r#"[{"package": "a", "constraint": "^1.0.0"}]"#,
            r#"[{"package": "a", "constraint": "^1.0.0"}, {"package": "a", "constraint": "2.0.0"}]"#,
        );
        assert!(matches!(
            ManifestHistory::load(raw.as_bytes()),
            Err(HistoryError::Format { .. })
        ));
    }

    #[test]
    fn snapshot_outside_lifespan_is_rejected() {
        let raw = MINIMAL.replace("2015-02-01T00:00:00Z", "2014-02-01T00:00:00Z");
        assert!(matches!(
            ManifestHistory::load(raw.as_bytes()),
            Err(HistoryError::Format { .. })
        ));
    }

    #[test]
    fn export_then_load_round_trips() {
        let (h, _) = ManifestHistory::load(MINIMAL.as_bytes()).unwrap();
        let (again, _) = ManifestHistory::load(h.to_json().as_bytes()).unwrap();
        assert_eq!(again, h);
    }

    #[test]
    fn snapshot_at_latest_before() {
        let h = history(vec![
            snapshot("d1", "2015-01-01", &[]),
            snapshot("d2", "2015-06-01", &[]),
        ]);
        assert_eq!(h.snapshot_at(ts("2015-03-01")).unwrap().commit_id, "d1");
        assert_eq!(h.snapshot_at(ts("2015-06-01")).unwrap().commit_id, "d2");
        assert!(h.snapshot_at(ts("2014-12-31")).is_none());
    }

    fn mature() -> ManifestHistory {
        let mut h = history(vec![
            snapshot("c1", "2016-06-01", &[("a", "1.0.0")]),
            snapshot(
                "c2",
                "2017-06-01",
                &[("a", "1.0.0"), ("b", "^2.0.0"), ("c", "~3.0.0")],
            ),
        ]);
        h.total_commits = 100;
        h.contributors = 3;
        h
    }

    #[test]
    fn preset_2019_thresholds_accept_boundary_application() {
        let v = mature().passes_maturity_filter(&MaturityCriteria::preset_2019());
        assert!(v.passed, "{v:?}");
    }

    #[test]
    fn one_commit_short_fails() {
        let mut h = mature();
        h.total_commits = 99;
        let v = h.passes_maturity_filter(&MaturityCriteria::preset_2019());
        assert_eq!(v.reasons, vec![MaturityFailure::MinCommits]);
    }

    #[test]
    fn two_contributors_is_not_more_than_two() {
        let mut h = mature();
        h.contributors = 2;
        let v = h.passes_maturity_filter(&MaturityCriteria::preset_2019());
        assert_eq!(v.reasons, vec![MaturityFailure::MinContributors]);
    }

    #[test]
    fn every_failed_criterion_is_listed() {
        let mut h = mature();
        h.fork = true;
        h.snapshots.truncate(1);
        h.first_commit_at = ts("2017-01-01");
        h.snapshots[0].committed_at = ts("2017-01-01");
        h.last_commit_at = ts("2017-01-01");
        let v = h.passes_maturity_filter(&MaturityCriteria::preset_2019());
        assert_eq!(
            v.reasons,
            vec![
                MaturityFailure::MinDependencies,
                MaturityFailure::CreatedBefore,
                MaturityFailure::ActiveAfter,
                MaturityFailure::Fork
            ]
        );
    }

    proptest! {
        #[test]
        fn snapshot_at_matches_linear_scan(days in prop::collection::btree_set(0i64..400, 1..10), probe in -5i64..420) {
            let base = ts("2015-01-01");
            let snaps: Vec<_> = days.iter().map(|d| ManifestSnapshot {
                commit_id: format!("c{d}"),
                committed_at: base + chrono::Duration::days(*d),
                dependencies: Vec::new(),
            }).collect();
            let h = history(snaps);
            let t = base + chrono::Duration::days(probe);
            let oracle = h.snapshots.iter().rfind(|s| s.committed_at <= t);
            prop_assert_eq!(h.snapshot_at(t), oracle);
        }
    }
}
