//! Manifest history mining through the `git` command line.
//!
//! Commands used (all read-only):
//!
//! * `git rev-parse --git-dir` to confirm the path is a repository
//! * `git log --format=%H%x09%cI%x09%aE HEAD` for commit and contributor counts
//! * `git log --format=%H%x09%cI -- package.json` for manifest-touching commits
//! * `git show <commit>:package.json` for the manifest content at each of those

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use tracing::warn;

use super::{parse_manifest, HistoryError, ManifestHistory, ManifestSnapshot};
use crate::time::{self, Timestamp};

const MANIFEST: &str = "package.json";

fn git(repo: &Path, args: &[&str]) -> Result<std::process::Output, HistoryError> {
    Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["-c", "core.quotepath=off", "-c", "log.showSignature=false"])
        .args(args)
        .env("GIT_TERMINAL_PROMPT", "0")
        .env("LC_ALL", "C")
        .output()
        .map_err(|e| HistoryError::Git(format!("cannot run git: {e}")))
}

fn git_stdout(repo: &Path, args: &[&str]) -> Result<String, HistoryError> {
    let out = git(repo, args)?;
    if !out.status.success() {
        return Err(HistoryError::Git(format!(
            "git {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    String::from_utf8(out.stdout).map_err(|e| HistoryError::Git(e.to_string()))
}

fn parse_time(raw: &str) -> Result<Timestamp, HistoryError> {
    time::parse_rfc3339(raw).map_err(|e| HistoryError::Git(e.to_string()))
}

/// Builds a [`ManifestHistory`] from the repository at `repo`, one snapshot
/// per commit that modified the root `package.json`, timestamped with the
/// committer date.
pub fn extract_history(repo: &Path) -> Result<ManifestHistory, HistoryError> {
    let probe = git(repo, &["rev-parse", "--git-dir"])?;
    if !probe.status.success() {
        return Err(HistoryError::NotARepository(repo.display().to_string()));
    }
    let head = git(repo, &["rev-parse", "--verify", "--quiet", "HEAD"])?;
    if !head.status.success() {
        return Err(HistoryError::NoManifestHistory);
    }

    let log = git_stdout(repo, &["log", "--format=%H%x09%cI%x09%aE", "HEAD"])?;
    let mut total_commits = 0u64;
    let mut authors = BTreeSet::new();
    let mut first: Option<Timestamp> = None;
    let mut last: Option<Timestamp> = None;
    for line in log.lines().filter(|l| !l.is_empty()) {
        let mut fields = line.split('\t');
        let (_, when, email) = (fields.next(), fields.next(), fields.next());
        let when = parse_time(when.unwrap_or_default())?;
        total_commits += 1;
        authors.insert(email.unwrap_or_default().trim().to_string());
        first = Some(first.map_or(when, |f| f.min(when)));
        last = Some(last.map_or(when, |l| l.max(when)));
    }

    let touched = git_stdout(repo, &["log", "--format=%H%x09%cI", "HEAD", "--", MANIFEST])?;
    let mut snapshots = Vec::new();
    for line in touched.lines().filter(|l| !l.is_empty()) {
        let (commit_id, when) = line
            .split_once('\t')
            .ok_or_else(|| HistoryError::Git(format!("unexpected log line {line:?}")))?;
        let committed_at = parse_time(when)?;
        let show = git(repo, &["show", &format!("{commit_id}:{MANIFEST}")])?;
        // a commit that deleted the manifest leaves no dependencies
        let dependencies = if show.status.success() {
            match parse_manifest(&show.stdout) {
                Ok(deps) => deps,
                Err(e) => {
                    warn!(commit = commit_id, "skipping unparseable manifest: {e}");
                    continue;
                }
            }
        } else {
            Vec::new()
        };
        snapshots.push(ManifestSnapshot {
            commit_id: commit_id.to_string(),
            committed_at,
            dependencies,
        });
    }
    if snapshots.is_empty() {
        return Err(HistoryError::NoManifestHistory);
    }
    // git lists newest first
    snapshots.reverse();
    snapshots.sort_by_key(|s| s.committed_at);

    let application = repo
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| repo.display().to_string());
    Ok(ManifestHistory {
        application,
        snapshots,
        first_commit_at: first.expect("HEAD exists"),
        last_commit_at: last.expect("HEAD exists"),
        total_commits,
        contributors: authors.len() as u64,
        fork: false,
    })
}
