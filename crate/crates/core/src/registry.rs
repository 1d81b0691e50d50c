//! Release timelines per package and time-travel resolution.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::semver::{Version, VersionRange};
use crate::time::{self, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseRecord {
    pub version: Version,
    #[serde(with = "crate::time::rfc3339")]
    pub released_at: Timestamp,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("release index format error at line {line}, column {column}: {message}")]
    Format {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("duplicate release {package}@{version}")]
    DuplicateRelease { package: String, version: Version },
    #[error("i/o error reading release index: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for RegistryError {
    fn from(e: serde_json::Error) -> Self {
        RegistryError::Format {
            message: e.to_string(),
            line: e.line(),
            column: e.column(),
        }
    }
}

/// Why no version could be selected for a dependency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("package is not present in the release index")]
    UnknownPackage,
    #[error("no release satisfying the constraint existed before the snapshot time")]
    Unresolvable,
}

/// Per-package release lists, each sorted by version precedence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReleaseIndex {
    packages: BTreeMap<String, Vec<ReleaseRecord>>,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    packages: BTreeMap<String, Vec<ReleaseRecord>>,
}

impl ReleaseIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds (or replaces) a package's release list. Records are sorted by
    /// precedence; two records with equal precedence are rejected.
    pub fn insert_package(
        &mut self,
        name: impl Into<String>,
        mut records: Vec<ReleaseRecord>,
    ) -> Result<(), RegistryError> {
        let name = name.into();
        records.sort_by(|a, b| a.version.cmp(&b.version));
        if let Some(w) = records.windows(2).find(|w| w[0].version == w[1].version) {
            return Err(RegistryError::DuplicateRelease {
                package: name,
                version: w[1].version.clone(),
            });
        }
        self.packages.insert(name, records);
        Ok(())
    }

    pub fn releases(&self, package: &str) -> Option<&[ReleaseRecord]> {
        self.packages.get(package).map(Vec::as_slice)
    }

    pub fn contains(&self, package: &str) -> bool {
        self.packages.contains_key(package)
    }

    pub fn packages(&self) -> impl Iterator<Item = (&str, &[ReleaseRecord])> {
        self.packages
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.packages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packages.is_empty()
    }

    /// Releases of `package` published strictly before `t`, ascending by precedence.
    pub fn visible_at<'a>(
        &'a self,
        package: &str,
        t: Timestamp,
    ) -> impl DoubleEndedIterator<Item = &'a ReleaseRecord> + 'a {
        self.packages
            .get(package)
            .map(Vec::as_slice)
            .unwrap_or_default()
            .iter()
            .filter(move |r| r.released_at < t)
    }

    /// The version npm would have installed at `t`: the highest-precedence
    /// release satisfying `constraint` that was published strictly before `t`.
    pub fn resolve_at(
        &self,
        package: &str,
        constraint: &VersionRange,
        t: Timestamp,
    ) -> Result<Version, ResolveError> {
        let releases = self
            .packages
            .get(package)
            .ok_or(ResolveError::UnknownPackage)?;
        releases
            .iter()
            .rev()
            .find(|r| r.released_at < t && constraint.satisfies(&r.version))
            .map(|r| r.version.clone())
            .ok_or(ResolveError::Unresolvable)
    }

    /// Reads the `release-index-json` format.
    pub fn from_reader(mut source: impl Read) -> Result<Self, RegistryError> {
        let mut raw = String::new();
        source.read_to_string(&mut raw)?;
        let file: IndexFile = serde_json::from_str(&raw)?;
        let mut index = ReleaseIndex::new();
        for (name, records) in file.packages {
            if name.is_empty() {
                return Err(RegistryError::Format {
                    message: "empty package name".into(),
                    line: 0,
                    column: 0,
                });
            }
            index.insert_package(name, records)?;
        }
        Ok(index)
    }

    pub fn to_json(&self) -> String {
        let file = IndexFile {
            packages: self.packages.clone(),
        };
        serde_json::to_string_pretty(&file).expect("index serializes")
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("network error: {0}")]
    Network(String),
    #[error("package {0:?} not found in registry")]
    NotFound(String),
    #[error("malformed package metadata: {0}")]
    MetadataParse(String),
}

/// Release records extracted from a registry metadata document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packument {
    pub records: Vec<ReleaseRecord>,
    /// `time` entries that were not usable releases, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Extracts releases from the `time` map of an npm registry document.
pub fn parse_packument(body: &[u8]) -> Result<Packument, FetchError> {
    let doc: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| FetchError::MetadataParse(e.to_string()))?;
    let times = doc
        .get("time")
        .and_then(|t| t.as_object())
        .ok_or_else(|| FetchError::MetadataParse("missing \"time\" object".into()))?;

    let mut records: Vec<ReleaseRecord> = Vec::with_capacity(times.len());
    let mut skipped = Vec::new();
    for (key, value) in times {
        if key == "created" || key == "modified" {
            continue;
        }
        let version = match key.parse::<Version>() {
            Ok(v) => v,
            Err(e) => {
                warn!(key = %key, "skipping unparseable version in packument: {e}");
                skipped.push((key.clone(), e.to_string()));
                continue;
            }
        };
        let released_at = match value.as_str().map(time::parse_rfc3339) {
            Some(Ok(t)) => t,
            _ => {
                warn!(key = %key, "skipping release with unparseable timestamp");
                skipped.push((key.clone(), format!("bad timestamp {value}")));
                continue;
            }
        };
        if records.iter().any(|r| r.version == version) {
            warn!(key = %key, "skipping duplicate release in packument");
            skipped.push((key.clone(), "duplicate version".into()));
            continue;
        }
        records.push(ReleaseRecord {
            version,
            released_at,
        });
    }
    records.sort_by(|a, b| a.version.cmp(&b.version));
    Ok(Packument { records, skipped })
}

/// GETs `<endpoint>/<package>` and extracts its release timeline. The
/// caller decides what to do with the records; no index is touched.
pub fn fetch_packument(endpoint: &str, package: &str) -> Result<Vec<ReleaseRecord>, FetchError> {
    let url = format!(
        "{}/{}",
        endpoint.trim_end_matches('/'),
        package.replace('/', "%2F")
    );
    let response = reqwest::blocking::Client::new()
        .get(&url)
        .header("Accept", "application/json")
        .send()
        .map_err(|e| FetchError::Network(e.to_string()))?;
    if response.status() == reqwest::StatusCode::NOT_FOUND {
        return Err(FetchError::NotFound(package.to_string()));
    }
    if !response.status().is_success() {
        return Err(FetchError::Network(format!(
            "{url}: HTTP {}",
            response.status()
        )));
    }
    let body = response
        .bytes()
        .map_err(|e| FetchError::Network(e.to_string()))?;
    parse_packument(&body).map(|p| p.records)
}
