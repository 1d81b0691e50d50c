//! node-semver compatible versions and ranges.
//!
//! Parsing follows the strict (non-loose) mode of node-semver 6: a single
//! leading `v` and surrounding whitespace are tolerated, everything else must
//! be well formed. Ranges are desugared into primitive comparator sets at
//! parse time, so evaluation never has to look at caret/tilde/x-range syntax.

mod range;
mod version;

use thiserror::Error;

pub use range::{Comparator, Op, VersionRange};
pub use version::{Identifier, Version, MAX_SAFE_INTEGER};

/// Why a dependency specifier was rejected as "not a version range".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecifierKind {
    Git,
    Url,
    Path,
    Protocol,
    Tag,
}

impl std::fmt::Display for SpecifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpecifierKind::Git => "git dependency",
            SpecifierKind::Url => "tarball url",
            SpecifierKind::Path => "local path",
            SpecifierKind::Protocol => "protocol specifier",
            SpecifierKind::Tag => "dist-tag",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemverError {
    #[error("malformed version {input:?}: {reason}")]
    MalformedVersion { input: String, reason: &'static str },
    #[error("malformed range {input:?}: {reason}")]
    MalformedRange { input: String, reason: String },
    #[error("unsupported specifier {input:?} ({kind})")]
    UnsupportedSpecifier { input: String, kind: SpecifierKind },
}

/// Parses a strict version string.
pub fn parse_version(text: &str) -> Result<Version, SemverError> {
    text.parse()
}

/// Parses and desugars a range expression.
pub fn parse_range(text: &str) -> Result<VersionRange, SemverError> {
    text.parse()
}

pub fn satisfies(version: &Version, range: &VersionRange) -> bool {
    range.satisfies(version)
}
