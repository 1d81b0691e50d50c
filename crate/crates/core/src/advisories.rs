//! Vulnerability advisories: ingestion, curation and version matching.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::semver::{Version, VersionRange};
use crate::time::Timestamp;

/// Advisory kind dropped during curation: typo-squatting packages carry no
/// vulnerable code of their own.
pub const MALICIOUS_PACKAGE_KIND: &str = "Malicious Package";

/// One vulnerability report against a package.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advisory {
    pub id: String,
    pub package: String,
    pub title: String,
    pub kind: String,
    pub affected: VersionRange,
    pub patched: Option<VersionRange>,
    pub reported_at: Timestamp,
    /// `None` while the advisory has not been made public.
    pub published_at: Option<Timestamp>,
    affected_text: String,
    patched_text: Option<String>,
}

impl Advisory {
    pub fn affected_text(&self) -> &str {
        &self.affected_text
    }

    pub fn patched_text(&self) -> Option<&str> {
        self.patched_text.as_deref()
    }

    pub fn affects(&self, v: &Version) -> bool {
        self.affected.satisfies(v)
    }

    pub fn is_malicious_package(&self) -> bool {
        self.kind
            .trim()
            .eq_ignore_ascii_case(MALICIOUS_PACKAGE_KIND)
    }

    fn to_record(&self) -> AdvisoryRecord {
        AdvisoryRecord {
            id: self.id.clone(),
            package: self.package.clone(),
            title: self.title.clone(),
            kind: self.kind.clone(),
            affected: self.affected_text.clone(),
            patched: self.patched_text.clone(),
            reported_at: self.reported_at,
            published_at: self.published_at,
        }
    }
}

impl Serialize for Advisory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

/// Row of the `advisories-json` format.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct AdvisoryRecord {
    id: String,
    package: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    kind: String,
    affected: String,
    #[serde(default)]
    patched: Option<String>,
    #[serde(with = "crate::time::rfc3339")]
    reported_at: Timestamp,
    #[serde(default, with = "crate::time::rfc3339::option")]
    published_at: Option<Timestamp>,
}

#[derive(Debug, Error)]
pub enum AdvisoryError {
    #[error("advisories format error at line {line}, column {column}: {message}")]
    Format {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("duplicate advisory id {0:?}")]
    DuplicateAdvisoryId(String),
    #[error("i/o error reading advisories: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for AdvisoryError {
    fn from(e: serde_json::Error) -> Self {
        AdvisoryError::Format {
            message: e.to_string(),
            line: e.line(),
            column: e.column(),
        }
    }
}

/// What curation removed and what looked suspicious.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CurationReport {
    pub input_advisories: usize,
    pub retained_advisories: usize,
    pub excluded_advisories: usize,
    pub excluded_packages: usize,
    pub retained_packages: usize,
    /// Advisories whose affected and patched ranges overlap.
    pub overlapping_ranges: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdvisoryStore {
    by_package: BTreeMap<String, Vec<Advisory>>,
}

impl AdvisoryStore {
    /// Reads `advisories-json`, dropping malicious-package reports.
    pub fn ingest(mut source: impl Read) -> Result<(Self, CurationReport), AdvisoryError> {
        let mut raw = String::new();
        source.read_to_string(&mut raw)?;
        let records: Vec<AdvisoryRecord> = serde_json::from_str(&raw)?;

        let mut report = CurationReport {
            input_advisories: records.len(),
            ..Default::default()
        };
        let mut seen = HashSet::new();
        let mut excluded_packages = BTreeSet::new();
        let mut store = AdvisoryStore::default();
        for record in records {
            if !seen.insert(record.id.clone()) {
                return Err(AdvisoryError::DuplicateAdvisoryId(record.id));
            }
            let advisory = advisory_from_record(record)?;
            if advisory.is_malicious_package() {
                excluded_packages.insert(advisory.package.clone());
                report.excluded_advisories += 1;
                continue;
            }
            if let Some(patched) = &advisory.patched {
                if advisory.affected.intersects(patched) {
                    warn!(id = %advisory.id, "affected and patched ranges overlap");
                    report.overlapping_ranges.push(advisory.id.clone());
                }
            }
            store
                .by_package
                .entry(advisory.package.clone())
                .or_default()
                .push(advisory);
        }
        for list in store.by_package.values_mut() {
            list.sort_by(|a, b| a.id.cmp(&b.id));
        }
        report.retained_advisories = report.input_advisories - report.excluded_advisories;
        report.excluded_packages = excluded_packages.len();
        report.retained_packages = store.by_package.len();
        report.overlapping_ranges.sort();
        Ok((store, report))
    }

    pub fn for_package(&self, package: &str) -> &[Advisory] {
        self.by_package
            .get(package)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    /// Every advisory of `package` whose affected range contains `v`, ordered by id.
    pub fn find_vulnerabilities(&self, package: &str, v: &Version) -> Vec<&Advisory> {
        self.for_package(package)
            .iter()
            .filter(|a| a.affects(v))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Advisory> {
        self.by_package.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_package.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_package.is_empty()
    }

    /// Renders the store back into `advisories-json`, ordered by package then id.
    pub fn to_json(&self) -> String {
        let records: Vec<AdvisoryRecord> = self.iter().map(Advisory::to_record).collect();
        serde_json::to_string_pretty(&records).expect("advisories serialize")
    }
}

fn advisory_from_record(record: AdvisoryRecord) -> Result<Advisory, AdvisoryError> {
    let range_err = |what: &str, e: crate::semver::SemverError| AdvisoryError::Format {
        message: format!("advisory {}: {what} range: {e}", record.id),
        line: 0,
        column: 0,
    };
    if record.package.is_empty() {
        return Err(AdvisoryError::Format {
            message: format!("advisory {}: empty package name", record.id),
            line: 0,
            column: 0,
        });
    }
    let affected = record
        .affected
        .parse()
        .map_err(|e| range_err("affected", e))?;
    let patched = record
        .patched
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(|e| range_err("patched", e))?;
    Ok(Advisory {
        affected,
        patched,
        affected_text: record.affected,
        patched_text: record.patched,
        id: record.id,
        package: record.package,
        title: record.title,
        kind: record.kind,
        reported_at: record.reported_at,
        published_at: record.published_at,
    })
}
