use libm::erfc;
use serde::Serialize;

use super::{check_sample, StatsError};

/// Pooled sample sizes up to this use the exact null distribution under
/// [`Method::Auto`].
pub const EXACT_MAX_TOTAL: usize = 16;

/// Above this the exact counts would overflow.
const EXACT_HARD_LIMIT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    /// U of `x`: pairs with x > y, plus half the tied pairs.
    pub u: f64,
    /// One-sided, alternative: `x` stochastically greater than `y`.
    pub p: f64,
    /// Path actually taken; never `Auto`.
    pub method: Method,
}

pub fn mann_whitney_one_sided(
    x: &[f64],
    y: &[f64],
    method: Method,
) -> Result<MannWhitney, StatsError> {
    check_sample(x)?;
    check_sample(y)?;
    let n = x.len() + y.len();
    let method = match method {
        Method::Auto if n <= EXACT_MAX_TOTAL => Method::Exact,
        Method::Auto => Method::Normal,
        m => m,
    };
    let ranks = Ranks::of(x, y);
    let nx = x.len() as u64;
    let u = (ranks.x_sum2 - nx * (nx + 1)) as f64 / 2.0;
    let p = match method {
        Method::Exact if n > EXACT_HARD_LIMIT => {
            return Err(StatsError::ExactTooLarge { total: n });
        }
        Method::Exact => exact_p(&ranks.doubled, x.len(), ranks.x_sum2),
        _ => normal_p(u, x.len(), y.len(), ranks.tie_term),
    };
    Ok(MannWhitney { u, p, method })
}

/// Midranks of the pooled sample, doubled so they stay integral.
struct Ranks {
    doubled: Vec<u64>,
    x_sum2: u64,
    /// Sum of t^3 - t over tie groups.
    tie_term: f64,
}

impl Ranks {
    fn of(x: &[f64], y: &[f64]) -> Ranks {
        let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        let mut order: Vec<usize> = (0..pooled.len()).collect();
        order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
        let mut doubled = vec![0u64; pooled.len()];
        let mut tie_term = 0.0;
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
                j += 1;
            }
            // Positions i..=j hold ranks i+1..=j+1.
            for &k in &order[i..=j] {
                doubled[k] = (i + j + 2) as u64;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let x_sum2 = doubled[..x.len()].iter().sum();
        Ranks {
            doubled,
            x_sum2,
            tie_term,
        }
    }
}

/// Share of all size-`nx` subsets of the pooled ranks whose doubled rank sum
/// reaches `observed`.
fn exact_p(doubled: &[u64], nx: usize, observed: u64) -> f64 {
    let max_sum: usize = doubled.iter().sum::<u64>() as usize;
    // ways[j][s]: subsets of size j with doubled rank sum s.
    let mut ways = vec![vec![0u128; max_sum + 1]; nx + 1];
    ways[0][0] = 1;
    for &r in doubled {
        let r = r as usize;
        for j in (1..=nx).rev() {
            let (lower, upper) = ways.split_at_mut(j);
            let (from, to) = (&lower[j - 1], &mut upper[0]);
            for s in (r..=max_sum).rev() {
                to[s] += from[s - r];
            }
        }
    }
    let total: u128 = ways[nx].iter().sum();
    let hits: u128 = ways[nx][observed as usize..].iter().sum();
    hits as f64 / total as f64
}

fn normal_p(u: f64, nx: usize, ny: usize, tie_term: f64) -> f64 {
    let (nx, ny) = (nx as f64, ny as f64);
    let n = nx + ny;
    let mean = nx * ny / 2.0;
    let var = nx * ny / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        // Every value tied: no evidence either way.
        return 1.0;
    }
    let z = (u - mean - 0.5) / var.sqrt();
    (0.5 * erfc(z / std::f64::consts::SQRT_2)).clamp(0.0, 1.0)
}
