use serde::Serialize;

use crate::threat::{BlameKind, LevelCounts, SnapshotAssessment, ThreatLevel};
use crate::time::{self, Timestamp};

/// Share of an application's vulnerable dependencies at each threat level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelFractions {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl LevelFractions {
    fn of(counts: &LevelCounts) -> Option<LevelFractions> {
        let m = counts.total();
        (m > 0).then(|| LevelFractions {
            low: counts.low as f64 / m as f64,
            medium: counts.medium as f64 / m as f64,
            high: counts.high as f64 / m as f64,
        })
    }

    pub fn get(&self, level: ThreatLevel) -> f64 {
        match level {
            ThreatLevel::Low => self.low,
            ThreatLevel::Medium => self.medium,
            ThreatLevel::High => self.high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppFraction {
    pub application: String,
    #[serde(with = "time::rfc3339")]
    pub at: Timestamp,
    pub commit_id: String,
    pub n: usize,
    pub m: usize,
    /// M / N; null when nothing resolved.
    pub fraction: Option<f64>,
    pub level_counts: LevelCounts,
    /// Null when M = 0.
    pub level_fractions: Option<LevelFractions>,
}

/// Responsibility for high-threat dependencies. Shares are null when there
/// is nothing to divide.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BlameTally {
    pub high_findings: usize,
    pub package_to_blame: usize,
    pub application_to_blame: usize,
    /// Application-to-blame findings whose fixes all need a major upgrade.
    pub major_barrier: usize,
    pub package_to_blame_share: Option<f64>,
    pub application_to_blame_share: Option<f64>,
    /// Among application-to-blame findings.
    pub major_barrier_share: Option<f64>,
}

impl BlameTally {
    fn finish(mut self) -> BlameTally {
        let share = |part: usize, whole: usize| (whole > 0).then(|| part as f64 / whole as f64);
        self.package_to_blame_share = share(self.package_to_blame, self.high_findings);
        self.application_to_blame_share = share(self.application_to_blame, self.high_findings);
        self.major_barrier_share = share(self.major_barrier, self.application_to_blame);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortSummary {
    pub schedule_index: usize,
    /// Sorted by application name.
    pub applications: Vec<AppFraction>,
    pub n_total: usize,
    pub m_total: usize,
    pub level_totals: LevelCounts,
    /// Applications with M >= 1.
    pub affected_applications: usize,
    pub affected_application_fraction: Option<f64>,
    /// Median of M / N over applications with N > 0.
    pub median_fraction: Option<f64>,
    /// Median of M / N over affected applications only.
    pub median_fraction_affected: Option<f64>,
    /// Per-level medians over affected applications.
    pub median_level_fractions: Option<LevelFractions>,
    pub blame: BlameTally,
}

pub fn summarize_cohort(
    assessments: &[SnapshotAssessment],
    schedule_index: usize,
) -> CohortSummary {
    let mut applications: Vec<AppFraction> = assessments
        .iter()
        .map(|s| AppFraction {
            application: s.application.clone(),
            at: s.at,
            commit_id: s.commit_id.clone(),
            n: s.n_dependencies,
            m: s.m_vulnerable,
            fraction: s.vulnerable_fraction(),
            level_counts: s.per_level_counts,
            level_fractions: LevelFractions::of(&s.per_level_counts),
        })
        .collect();
    applications.sort_by(|a, b| a.application.cmp(&b.application).then(a.at.cmp(&b.at)));

    let mut level_totals = LevelCounts::default();
    for a in &applications {
        for level in ThreatLevel::ALL {
            level_totals.add(level, a.level_counts.get(level));
        }
    }
    let affected: Vec<&AppFraction> = applications.iter().filter(|a| a.m > 0).collect();
    let fractions: Vec<f64> = applications.iter().filter_map(|a| a.fraction).collect();
    let affected_fractions: Vec<f64> = affected.iter().filter_map(|a| a.fraction).collect();
    let level_median = |level| {
        let values: Vec<f64> = affected
            .iter()
            .filter_map(|a| a.level_fractions.map(|f| f.get(level)))
            .collect();
        median(&values)
    };
    let median_level_fractions = (!affected.is_empty()).then(|| LevelFractions {
        low: level_median(ThreatLevel::Low).unwrap_or(0.0),
        medium: level_median(ThreatLevel::Medium).unwrap_or(0.0),
        high: level_median(ThreatLevel::High).unwrap_or(0.0),
    });

    let mut blame = BlameTally::default();
    for dep in assessments.iter().flat_map(|s| s.high()) {
        blame.high_findings += 1;
        match dep.blame {
            Some(b) if b.kind == BlameKind::ApplicationToBlame => {
                blame.application_to_blame += 1;
                blame.major_barrier += usize::from(b.major_barrier);
            }
            _ => blame.package_to_blame += 1,
        }
    }

    CohortSummary {
        schedule_index,
        n_total: applications.iter().map(|a| a.n).sum(),
        m_total: applications.iter().map(|a| a.m).sum(),
        level_totals,
        affected_applications: affected.len(),
        affected_application_fraction: (!applications.is_empty())
            .then(|| affected.len() as f64 / applications.len() as f64),
        median_fraction: median(&fractions),
        median_fraction_affected: median(&affected_fractions),
        median_level_fractions,
        blame: blame.finish(),
        applications,
    }
}

/// Median with the two middle values averaged; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}
