//! Threat levels of vulnerable dependencies at a snapshot instant, and who
//! is responsible for the high-threat ones.
//!
//! Boundary semantics: an advisory event at exactly `t` has happened
//! (`<=`), while a release at exactly `t` was not yet installable (`<`).

use serde::Serialize;
use thiserror::Error;

use crate::advisories::{Advisory, AdvisoryStore};
use crate::history::{Constraint, DependencySpec, ManifestHistory};
use crate::registry::{ReleaseIndex, ResolveError};
use crate::semver::{Version, VersionRange};
use crate::time::Timestamp;

/// How exploitable a vulnerability was at a given instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThreatLevel {
    /// Not yet reported.
    Low,
    /// Reported but not published.
    Medium,
    /// Published.
    High,
}

impl ThreatLevel {
    pub const ALL: [ThreatLevel; 3] = [ThreatLevel::Low, ThreatLevel::Medium, ThreatLevel::High];
}

pub fn classify(advisory: &Advisory, t: Timestamp) -> ThreatLevel {
    match advisory.published_at {
        Some(published) if published <= t => ThreatLevel::High,
        _ if advisory.reported_at <= t => ThreatLevel::Medium,
        _ => ThreatLevel::Low,
    }
}

/// Weakest link: a version is as threatened as its worst advisory.
pub fn weakest_link(levels: impl IntoIterator<Item = ThreatLevel>) -> Option<ThreatLevel> {
    levels.into_iter().max()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlameKind {
    /// No fixed release existed yet.
    PackageToBlame,
    /// A fixed release existed but was not adopted.
    ApplicationToBlame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Blame {
    pub kind: BlameKind,
    /// Every available fix lives in a different major release than the
    /// installed version. Always false for [`BlameKind::PackageToBlame`].
    pub major_barrier: bool,
}

impl Blame {
    pub const PACKAGE: Blame = Blame {
        kind: BlameKind::PackageToBlame,
        major_barrier: false,
    };

    pub fn application(major_barrier: bool) -> Blame {
        Blame {
            kind: BlameKind::ApplicationToBlame,
            major_barrier,
        }
    }
}

/// Decides responsibility for a published vulnerability affecting `resolved`.
///
/// A safe version is any release of the advisory's package published before
/// `t` that satisfies the patched range, regardless of the application's own
/// constraint. Prerelease fixes only count when `constraint` opts in to
/// prereleases of that exact release line.
pub fn attribute_blame(
    advisory: &Advisory,
    index: &ReleaseIndex,
    resolved: &Version,
    t: Timestamp,
    constraint: Option<&VersionRange>,
) -> Blame {
    let Some(patched) = &advisory.patched else {
        return Blame::PACKAGE;
    };
    let mut any_safe = false;
    let mut all_other_major = true;
    for release in index.visible_at(&advisory.package, t) {
        let v = &release.version;
        if !patched.satisfies(v) {
            continue;
        }
        if v.is_prerelease() && !constraint.is_some_and(|c| c.admits_prerelease_of(v)) {
            continue;
        }
        any_safe = true;
        all_other_major &= v.major != resolved.major;
    }
    if any_safe {
        Blame::application(all_other_major)
    } else {
        Blame::PACKAGE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Resolved(Version),
    Unresolvable,
    UnknownPackage,
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionCause {
    Unresolvable,
    UnknownPackage,
    UnsupportedSpecifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Vulnerable(ThreatLevel),
    NotVulnerable,
    Excluded(ExclusionCause),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedAdvisory {
    pub advisory: Advisory,
    pub level: ThreatLevel,
    /// Present for high-threat matches only.
    pub blame: Option<Blame>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyAssessment {
    pub spec: DependencySpec,
    pub resolution: Resolution,
    pub advisories_matched: Vec<MatchedAdvisory>,
    pub overall: Verdict,
    /// Present iff `overall` is high threat.
    pub blame: Option<Blame>,
}

impl DependencyAssessment {
    pub fn level(&self) -> Option<ThreatLevel> {
        match self.overall {
            Verdict::Vulnerable(level) => Some(level),
            _ => None,
        }
    }

    pub fn is_excluded(&self) -> bool {
        matches!(self.overall, Verdict::Excluded(_))
    }
}

/// Runs resolution, matching, classification and blame for one dependency.
pub fn assess_dependency(
    index: &ReleaseIndex,
    store: &AdvisoryStore,
    spec: &DependencySpec,
    t: Timestamp,
) -> DependencyAssessment {
    let excluded = |resolution, cause| DependencyAssessment {
        spec: spec.clone(),
        resolution,
        advisories_matched: Vec::new(),
        overall: Verdict::Excluded(cause),
        blame: None,
    };
    let range = match &spec.constraint {
        Constraint::Range(r) => r,
        Constraint::Unsupported { reason } => {
            return excluded(
                Resolution::Unsupported(reason.clone()),
                ExclusionCause::UnsupportedSpecifier,
            )
        }
    };
    let resolved = match index.resolve_at(&spec.package, range, t) {
        Ok(v) => v,
        Err(ResolveError::UnknownPackage) => {
            return excluded(Resolution::UnknownPackage, ExclusionCause::UnknownPackage)
        }
        Err(ResolveError::Unresolvable) => {
            return excluded(Resolution::Unresolvable, ExclusionCause::Unresolvable)
        }
    };

    let advisories_matched: Vec<MatchedAdvisory> = store
        .find_vulnerabilities(&spec.package, &resolved)
        .into_iter()
        .map(|advisory| {
            let level = classify(advisory, t);
            let blame = (level == ThreatLevel::High)
                .then(|| attribute_blame(advisory, index, &resolved, t, Some(range)));
            MatchedAdvisory {
                advisory: advisory.clone(),
                level,
                blame,
            }
        })
        .collect();

    let overall = match weakest_link(advisories_matched.iter().map(|m| m.level)) {
        Some(level) => Verdict::Vulnerable(level),
        None => Verdict::NotVulnerable,
    };
    let blame = (overall == Verdict::Vulnerable(ThreatLevel::High))
        .then(|| combine_blame(advisories_matched.iter().filter_map(|m| m.blame)));

    DependencyAssessment {
        spec: spec.clone(),
        resolution: Resolution::Resolved(resolved),
        advisories_matched,
        overall,
        blame,
    }
}

/// Dependency-level blame over its high-threat advisories: the application
/// is responsible only if every one of them had a fix available.
fn combine_blame(blames: impl Iterator<Item = Blame>) -> Blame {
    let mut barrier = false;
    for b in blames {
        match b.kind {
            BlameKind::PackageToBlame => return Blame::PACKAGE,
            BlameKind::ApplicationToBlame => barrier |= b.major_barrier,
        }
    }
    Blame::application(barrier)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LevelCounts {
    pub low: usize,
    pub medium: usize,
    pub high: usize,
}

impl LevelCounts {
    pub fn get(&self, level: ThreatLevel) -> usize {
        match level {
            ThreatLevel::Low => self.low,
            ThreatLevel::Medium => self.medium,
            ThreatLevel::High => self.high,
        }
    }

    pub fn add(&mut self, level: ThreatLevel, n: usize) {
        match level {
            ThreatLevel::Low => self.low += n,
            ThreatLevel::Medium => self.medium += n,
            ThreatLevel::High => self.high += n,
        }
    }

    pub fn total(&self) -> usize {
        self.low + self.medium + self.high
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotAssessment {
    pub application: String,
    pub at: Timestamp,
    /// Manifest commit the dependency list was taken from.
    pub commit_id: String,
    pub assessments: Vec<DependencyAssessment>,
    /// N: dependencies that resolved to a version.
    pub n_dependencies: usize,
    /// M: resolved dependencies matched by at least one advisory.
    pub m_vulnerable: usize,
    pub per_level_counts: LevelCounts,
}

impl SnapshotAssessment {
    /// M / N, or `None` when nothing resolved.
    pub fn vulnerable_fraction(&self) -> Option<f64> {
        (self.n_dependencies > 0).then(|| self.m_vulnerable as f64 / self.n_dependencies as f64)
    }

    pub fn high(&self) -> impl Iterator<Item = &DependencyAssessment> {
        self.assessments
            .iter()
            .filter(|a| a.overall == Verdict::Vulnerable(ThreatLevel::High))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AssessError {
    #[error("the snapshot time precedes the application's first manifest")]
    NoneBefore,
}

/// Assesses every production dependency of the manifest in force at `t`.
pub fn assess_snapshot(
    index: &ReleaseIndex,
    store: &AdvisoryStore,
    history: &ManifestHistory,
    t: Timestamp,
) -> Result<SnapshotAssessment, AssessError> {
    let snapshot = history.snapshot_at(t).ok_or(AssessError::NoneBefore)?;
    let assessments: Vec<DependencyAssessment> = snapshot
        .dependencies
        .iter()
        .map(|spec| assess_dependency(index, store, spec, t))
        .collect();

    let mut per_level_counts = LevelCounts::default();
    let mut n_dependencies = 0;
    for a in &assessments {
        if !a.is_excluded() {
            n_dependencies += 1;
        }
        if let Some(level) = a.level() {
            per_level_counts.add(level, 1);
        }
    }
    Ok(SnapshotAssessment {
        application: history.application.clone(),
        at: t,
        commit_id: snapshot.commit_id.clone(),
        n_dependencies,
        m_vulnerable: per_level_counts.total(),
        per_level_counts,
        assessments,
    })
}
