use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SemverError;

/// Largest component value node-semver accepts (`Number.MAX_SAFE_INTEGER`).
pub const MAX_SAFE_INTEGER: u64 = (1 << 53) - 1;

const MAX_LENGTH: usize = 256;

/// One dot-separated prerelease identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Identifier {
    Numeric(u64),
    AlphaNumeric(String),
}

impl Ord for Identifier {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Identifier::Numeric(a), Identifier::Numeric(b)) => a.cmp(b),
            (Identifier::Numeric(_), Identifier::AlphaNumeric(_)) => Ordering::Less,
            (Identifier::AlphaNumeric(_), Identifier::Numeric(_)) => Ordering::Greater,
            (Identifier::AlphaNumeric(a), Identifier::AlphaNumeric(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Identifier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identifier::Numeric(n) => write!(f, "{n}"),
            Identifier::AlphaNumeric(s) => f.write_str(s),
        }
    }
}

/// A semantic version.
///
/// Equality, ordering and hashing follow SemVer precedence, so build
/// metadata is carried for display but never distinguishes two versions.
#[derive(Debug, Clone)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub prerelease: Vec<Identifier>,
    pub build: Vec<String>,
}

impl Version {
    pub const fn new(major: u64, minor: u64, patch: u64) -> Self {
        Version {
            major,
            minor,
            patch,
            prerelease: Vec::new(),
            build: Vec::new(),
        }
    }

    pub fn is_prerelease(&self) -> bool {
        !self.prerelease.is_empty()
    }

    pub fn same_triple(&self, other: &Version) -> bool {
        self.major == other.major && self.minor == other.minor && self.patch == other.patch
    }

    pub(crate) fn without_build(mut self) -> Self {
        self.build.clear();
        self
    }

    /// Parses `MAJOR.MINOR.PATCH[-PRE][+BUILD]` with no prefix or padding.
    pub(crate) fn parse_core(input: &str, text: &str) -> Result<Self, SemverError> {
        let err = |reason| SemverError::MalformedVersion {
            input: input.to_string(),
            reason,
        };
        let (rest, build) = match text.split_once('+') {
            Some((rest, build)) => (
                rest,
                parse_build(build).ok_or_else(|| err("bad build metadata"))?,
            ),
            None => (text, Vec::new()),
        };
        let (main, prerelease) = match rest.split_once('-') {
            Some((main, pre)) => (
                main,
                parse_prerelease(pre).ok_or_else(|| err("bad prerelease"))?,
            ),
            None => (rest, Vec::new()),
        };
        let mut parts = main.split('.');
        let mut component = || -> Result<u64, SemverError> {
            let part = parts
                .next()
                .ok_or_else(|| err("expected MAJOR.MINOR.PATCH"))?;
            parse_numeric(part).ok_or_else(|| err("bad numeric component"))
        };
        let (major, minor, patch) = (component()?, component()?, component()?);
        if parts.next().is_some() {
            return Err(err("expected MAJOR.MINOR.PATCH"));
        }
        Ok(Version {
            major,
            minor,
            patch,
            prerelease,
            build,
        })
    }
}

/// `0|[1-9][0-9]*`, bounded by [`MAX_SAFE_INTEGER`].
pub(crate) fn parse_numeric(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0'))
    {
        return None;
    }
    s.parse::<u64>().ok().filter(|n| *n <= MAX_SAFE_INTEGER)
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'-'
}

pub(crate) fn parse_prerelease(s: &str) -> Option<Vec<Identifier>> {
    s.split('.')
        .map(|id| {
            if id.is_empty() || !id.bytes().all(is_ident_char) {
                None
            } else if id.bytes().all(|b| b.is_ascii_digit()) {
                if id.len() > 1 && id.starts_with('0') {
                    None
                } else {
                    id.parse().ok().map(Identifier::Numeric)
                }
            } else {
                Some(Identifier::AlphaNumeric(id.to_string()))
            }
        })
        .collect()
}

fn parse_build(s: &str) -> Option<Vec<String>> {
    s.split('.')
        .map(|id| (!id.is_empty() && id.bytes().all(is_ident_char)).then(|| id.to_string()))
        .collect()
}

impl FromStr for Version {
    type Err = SemverError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let trimmed = input.trim();
        if trimmed.len() > MAX_LENGTH {
            return Err(SemverError::MalformedVersion {
                input: input.to_string(),
                reason: "longer than 256 characters",
            });
        }
        let text = trimmed.strip_prefix('v').unwrap_or(trimmed);
        Version::parse_core(input, text)
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)?;
        for (i, id) in self.prerelease.iter().enumerate() {
            f.write_str(if i == 0 { "-" } else { "." })?;
            write!(f, "{id}")?;
        }
        if !self.build.is_empty() {
            write!(f, "+{}", self.build.join("."))?;
        }
        Ok(())
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.major, self.minor, self.patch)
            .cmp(&(other.major, other.minor, other.patch))
            .then_with(
                || match (self.prerelease.is_empty(), other.prerelease.is_empty()) {
                    (true, true) => Ordering::Equal,
                    (true, false) => Ordering::Greater,
                    (false, true) => Ordering::Less,
                    (false, false) => self.prerelease.cmp(&other.prerelease),
                },
            )
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl Hash for Version {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.major, self.minor, self.patch, &self.prerelease).hash(state);
    }
}

impl Serialize for Version {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Version {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
