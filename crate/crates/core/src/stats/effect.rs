use serde::Serialize;

use super::{check_sample, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    /// |d| < 0.147 negligible, < 0.33 small, < 0.474 medium, otherwise large.
    pub fn of(delta: f64) -> Magnitude {
        let d = delta.abs();
        if d < 0.147 {
            Magnitude::Negligible
        } else if d < 0.33 {
            Magnitude::Small
        } else if d < 0.474 {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        }
    }
}

impl std::fmt::Display for Magnitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cliff's delta of `x` over `y`, in O((n + m) log m).
pub fn cliffs_delta(x: &[f64], y: &[f64]) -> Result<(f64, Magnitude), StatsError> {
    check_sample(x)?;
    check_sample(y)?;
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for &xi in x {
        let below = sorted.partition_point(|&v| v < xi);
        let not_above = sorted.partition_point(|&v| v <= xi);
        let above = sorted.len() - not_above;
        dominance += below as i64 - above as i64;
    }
    let delta = dominance as f64 / (x.len() as f64 * y.len() as f64);
    Ok((delta, Magnitude::of(delta)))
}
