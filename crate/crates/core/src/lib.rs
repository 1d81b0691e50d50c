//! Time-travel vulnerability analysis of npm application dependencies.
//!
//! Given a package registry with release dates, a set of security advisories
//! and the manifest history of an application, this crate resolves what the
//! application would have installed at any instant and how exposed each
//! dependency was at that instant.

pub mod advisories;
pub mod history;
pub mod registry;
pub mod semver;
pub mod stats;
pub mod threat;
pub mod time;

pub use advisories::{Advisory, AdvisoryError, AdvisoryStore, CurationReport};
pub use history::{
    extract_history, Constraint, DependencySpec, HistoryError, HistoryWarning, ManifestHistory,
    ManifestSnapshot, MaturityCriteria, MaturityFailure, MaturityVerdict,
};
pub use registry::{RegistryError, ReleaseIndex, ReleaseRecord, ResolveError};
pub use semver::{SemverError, Version, VersionRange};
pub use stats::{CohortSummary, Magnitude, SnapshotSchedule, StatResult, StatsError};
pub use threat::{
    assess_dependency, assess_snapshot, attribute_blame, classify, weakest_link, AssessError,
    Blame, BlameKind, DependencyAssessment, ExclusionCause, LevelCounts, Resolution,
    SnapshotAssessment, ThreatLevel, Verdict,
};
pub use time::Timestamp;
