//! Synthetic inputs for the benchmarks.

use chrono::{DateTime, Duration};
use depthreat_core::registry::{ReleaseIndex, ReleaseRecord};
use depthreat_core::semver::Version;
use depthreat_core::time::Timestamp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn epoch() -> Timestamp {
    DateTime::from_timestamp(1_400_000_000, 0).expect("valid epoch")
}

/// `packages` packages with `per_package` releases each, released one day
/// apart in version order.
pub fn registry(packages: usize, per_package: usize, seed: u64) -> ReleaseIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut index = ReleaseIndex::new();
    for p in 0..packages {
        let mut version = Version::new(0, 1, 0);
        let mut records = Vec::with_capacity(per_package);
        for i in 0..per_package {
            records.push(ReleaseRecord {
                version: version.clone(),
                released_at: epoch() + Duration::days(i as i64),
            });
            version = match rng.gen_range(0..10) {
                0 => Version::new(version.major + 1, 0, 0),
                1..=3 => Version::new(version.major, version.minor + 1, 0),
                _ => Version::new(version.major, version.minor, version.patch + 1),
            };
        }
        index
            .insert_package(format!("pkg{p}"), records)
            .expect("unique versions");
    }
    index
}

pub fn sample(n: usize, shift: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>() + shift).collect()
}
