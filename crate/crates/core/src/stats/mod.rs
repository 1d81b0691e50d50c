//! Lifespan segmentation, two-sample tests and cohort aggregation.

mod cohort;
mod effect;
mod mann_whitney;

use chrono::Duration;
use serde::Serialize;
use thiserror::Error;

use crate::history::ManifestHistory;
use crate::time::{self, Timestamp};

pub use cohort::{
    median, summarize_cohort, AppFraction, BlameTally, CohortSummary, LevelFractions,
};
pub use effect::{cliffs_delta, Magnitude};
pub use mann_whitney::{mann_whitney_one_sided, MannWhitney, Method, EXACT_MAX_TOTAL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("lifespan is degenerate: first commit {first} is not before last commit {last}")]
    DegenerateLifespan { first: String, last: String },
    #[error("number of snapshots must be at least 1")]
    ZeroSnapshots,
    #[error("exact test is limited to 100 pooled observations, got {total}")]
    ExactTooLarge { total: usize },
}

/// Splits `(first, last]` into `k` equal intervals and returns their right
/// ends. The last instant is `last` itself; the others are truncated to the
/// second.
pub fn segment_lifespan(
    first: Timestamp,
    last: Timestamp,
    k: u32,
) -> Result<Vec<Timestamp>, StatsError> {
    if first >= last {
        return Err(StatsError::DegenerateLifespan {
            first: time::format_rfc3339(&first),
            last: time::format_rfc3339(&last),
        });
    }
    if k == 0 {
        return Err(StatsError::ZeroSnapshots);
    }
    let span = (last - first).num_seconds() as i128;
    let k = i128::from(k);
    Ok((1..=k)
        .map(|i| first + Duration::seconds((i * span / k) as i64))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnapshotSchedule {
    pub application: String,
    #[serde(with = "time::rfc3339::vec")]
    pub snapshot_times: Vec<Timestamp>,
}

impl SnapshotSchedule {
    /// Evenly spaced snapshots over the application's commit lifespan.
    pub fn for_history(history: &ManifestHistory, k: u32) -> Result<SnapshotSchedule, StatsError> {
        Ok(SnapshotSchedule {
            application: history.application.clone(),
            snapshot_times: segment_lifespan(history.first_commit_at, history.last_commit_at, k)?,
        })
    }
}

/// Both tests of a two-sample comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub delta: f64,
    pub magnitude: Magnitude,
}

/// Mann-Whitney (alternative: `x` greater) and Cliff's delta of `x` over `y`.
pub fn compare_samples(x: &[f64], y: &[f64]) -> Result<StatResult, StatsError> {
    let mw = mann_whitney_one_sided(x, y, Method::Auto)?;
    let (delta, magnitude) = cliffs_delta(x, y)?;
    Ok(StatResult {
        u_statistic: mw.u,
        p_value: mw.p,
        method: mw.method,
        delta,
        magnitude,
    })
}

/// Smallest p-value reported as a number.
pub const P_VALUE_FLOOR: f64 = 2.2e-16;

pub fn format_p_value(p: f64) -> String {
    if p < P_VALUE_FLOOR {
        "< 2.2e-16".to_string()
    } else if p < 1e-4 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

fn check_sample(sample: &[f64]) -> Result<(), StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteSample);
    }
    Ok(())
}
