use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use depthreat_core::advisories::{AdvisoryStore, CurationReport};
use depthreat_core::history::{extract_history, ManifestHistory};
use depthreat_core::registry::ReleaseIndex;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::Sources;

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

pub fn load_registry(path: &Path) -> Result<ReleaseIndex> {
    ReleaseIndex::from_reader(open(path)?)
        .with_context(|| format!("invalid registry {}", path.display()))
}

pub fn load_advisories(path: &Path) -> Result<(AdvisoryStore, CurationReport)> {
    AdvisoryStore::ingest(open(path)?)
        .with_context(|| format!("invalid advisories {}", path.display()))
}

#[derive(Debug, Clone)]
pub struct LoadedApp {
    pub source: String,
    pub history: ManifestHistory,
}

/// An application that could not be analysed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppFailure {
    pub source: String,
    pub cause: String,
}

/// Loads every history file and mines every repository. Failures are
/// collected rather than returned so the remaining applications can proceed.
pub fn load_apps(sources: &Sources) -> (Vec<LoadedApp>, Vec<AppFailure>) {
    let jobs: Vec<(String, bool)> = sources
        .histories
        .iter()
        .map(|p| (p.display().to_string(), false))
        .chain(
            sources
                .repos
                .iter()
                .map(|p| (p.display().to_string(), true)),
        )
        .collect();
    let results: Vec<Result<ManifestHistory>> = jobs
        .par_iter()
        .map(|(source, is_repo)| {
            let path = Path::new(source);
            if *is_repo {
                Ok(extract_history(path)?)
            } else {
                let (history, warnings) = ManifestHistory::load(open(path)?)?;
                for w in warnings {
                    tracing::warn!(file = %source, "{w:?}");
                }
                Ok(history)
            }
        })
        .collect();

    let mut loaded = Vec::new();
    let mut failures = Vec::new();
    let mut names = BTreeSet::new();
    for ((source, _), result) in jobs.into_iter().zip(results) {
        match result {
            Ok(history) if !names.insert(history.application.clone()) => {
                failures.push(AppFailure {
                    cause: format!("duplicate application name {:?}", history.application),
                    source,
                })
            }
            Ok(history) => loaded.push(LoadedApp { source, history }),
            Err(e) => failures.push(AppFailure {
                source,
                cause: format!("{e:#}"),
            }),
        }
    }
    (loaded, failures)
}

/// Numbers separated by whitespace or commas, `#` comments, or a JSON array.
pub fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text)
            .with_context(|| format!("invalid JSON sample {}", path.display()));
    }
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for token in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            match token.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) => bail!("{}:{}: not a number: {token:?}", path.display(), lineno + 1),
            }
        }
    }
    Ok(values)
}
