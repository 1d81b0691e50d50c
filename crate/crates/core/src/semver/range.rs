use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::version::{parse_numeric, parse_prerelease, Identifier};
use super::{SemverError, SpecifierKind, Version};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Op {
    fn symbol(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "",
        }
    }
}

/// A primitive `(operator, version)` constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparator {
    pub op: Op,
    pub version: Version,
}

impl Comparator {
    pub fn new(op: Op, version: Version) -> Self {
        Comparator {
            op,
            version: version.without_build(),
        }
    }

    pub fn matches(&self, v: &Version) -> bool {
        let ord = v.cmp(&self.version);
        match self.op {
            Op::Lt => ord.is_lt(),
            Op::Le => ord.is_le(),
            Op::Gt => ord.is_gt(),
            Op::Ge => ord.is_ge(),
            Op::Eq => ord.is_eq(),
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.op.symbol(), self.version)
    }
}

/// A disjunction of comparator sets. An empty set matches any release.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionRange {
    alternatives: Vec<Vec<Comparator>>,
}

impl VersionRange {
    /// `*`: every release version.
    pub fn any() -> Self {
        VersionRange {
            alternatives: vec![Vec::new()],
        }
    }

    /// Builds a range from already-primitive comparator sets.
    ///
    /// # Panics
    /// If `alternatives` is empty.
    pub fn from_sets(alternatives: Vec<Vec<Comparator>>) -> Self {
        assert!(
            !alternatives.is_empty(),
            "a range needs at least one comparator set"
        );
        VersionRange { alternatives }
    }

    pub fn alternatives(&self) -> &[Vec<Comparator>] {
        &self.alternatives
    }

    pub fn satisfies(&self, v: &Version) -> bool {
        self.alternatives.iter().any(|set| set_satisfies(set, v))
    }

    /// True when some comparator carries a prerelease on `v`'s exact triple,
    /// i.e. the range opts in to prereleases of that release line.
    pub fn admits_prerelease_of(&self, v: &Version) -> bool {
        self.alternatives
            .iter()
            .flatten()
            .any(|c| c.version.is_prerelease() && c.version.same_triple(v))
    }

    /// Whether some version interval admitted by `self` overlaps one admitted
    /// by `other`. Works on the comparator intervals only and ignores the
    /// prerelease exclusion rule, so it can report overlaps that no release
    /// version actually inhabits.
    pub fn intersects(&self, other: &VersionRange) -> bool {
        self.alternatives.iter().any(|a| {
            other
                .alternatives
                .iter()
                .any(|b| Interval::of(a.iter().chain(b.iter())).is_inhabited())
        })
    }
}

fn set_satisfies(set: &[Comparator], v: &Version) -> bool {
    if !set.iter().all(|c| c.matches(v)) {
        return false;
    }
    if v.is_prerelease() {
        return set
            .iter()
            .any(|c| c.version.is_prerelease() && c.version.same_triple(v));
    }
    true
}

struct Interval<'a> {
    lower: Option<(&'a Version, bool)>,
    upper: Option<(&'a Version, bool)>,
}

impl<'a> Interval<'a> {
    fn of(comparators: impl Iterator<Item = &'a Comparator>) -> Self {
        let mut iv = Interval {
            lower: None,
            upper: None,
        };
        for c in comparators {
            let v = &c.version;
            if matches!(c.op, Op::Gt | Op::Ge | Op::Eq) {
                let inclusive = c.op != Op::Gt;
                iv.lower = match iv.lower {
                    Some((cur, cur_inc)) if cur > v || (cur == v && !cur_inc) => {
                        Some((cur, cur_inc))
                    }
                    Some((cur, cur_inc)) if cur == v => Some((cur, cur_inc && inclusive)),
                    _ => Some((v, inclusive)),
                };
            }
            if matches!(c.op, Op::Lt | Op::Le | Op::Eq) {
                let inclusive = c.op != Op::Lt;
                iv.upper = match iv.upper {
                    Some((cur, cur_inc)) if cur < v || (cur == v && !cur_inc) => {
                        Some((cur, cur_inc))
                    }
                    Some((cur, cur_inc)) if cur == v => Some((cur, cur_inc && inclusive)),
                    _ => Some((v, inclusive)),
                };
            }
        }
        iv
    }

    fn is_inhabited(&self) -> bool {
        match (self.lower, self.upper) {
            (Some((lo, lo_inc)), Some((hi, hi_inc))) => lo < hi || (lo == hi && lo_inc && hi_inc),
            _ => true,
        }
    }
}

impl fmt::Display for VersionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, set) in self.alternatives.iter().enumerate() {
            if i > 0 {
                f.write_str(" || ")?;
            }
            if set.is_empty() {
                f.write_str("*")?;
            }
            for (j, c) in set.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for VersionRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for VersionRange {
    type Err = SemverError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        if let Some(kind) = classify_non_range(input) {
            return Err(SemverError::UnsupportedSpecifier {
                input: input.to_string(),
                kind,
            });
        }
        let normalized = input.split_whitespace().collect::<Vec<_>>().join(" ");
        let alternatives = normalized
            .split("||")
            .map(|part| parse_alternative(input, part.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VersionRange { alternatives })
    }
}

/// Recognizes the npm dependency specifiers that name something other than
/// a version range.
fn classify_non_range(input: &str) -> Option<SpecifierKind> {
    let s = input.trim();
    let lower = s.to_ascii_lowercase();
    if lower.starts_with("git+")
        || lower.starts_with("git://")
        || lower.starts_with("github:")
        || lower.starts_with("gitlab:")
        || lower.starts_with("bitbucket:")
        || lower.ends_with(".git")
    {
        return Some(SpecifierKind::Git);
    }
    if lower.starts_with("http://") || lower.starts_with("https://") {
        return Some(SpecifierKind::Url);
    }
    if lower.starts_with("file:")
        || lower.starts_with("link:")
        || s.starts_with("./")
        || s.starts_with("../")
        || s.starts_with('/')
        || s.starts_with("~/")
    {
        return Some(SpecifierKind::Path);
    }
    if s.contains(':') {
        return Some(SpecifierKind::Protocol);
    }
    if s.contains('/') {
        // `user/repo` shorthand for a GitHub dependency
        return Some(SpecifierKind::Git);
    }
    let mut chars = s.chars();
    let is_tag = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !matches!(s, "x" | "X")
        && !s.starts_with("x.")
        && !s.starts_with("X.")
        && !s.starts_with('v');
    is_tag.then_some(SpecifierKind::Tag)
}

fn malformed(input: &str, reason: impl Into<String>) -> SemverError {
    SemverError::MalformedRange {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn parse_alternative(input: &str, part: &str) -> Result<Vec<Comparator>, SemverError> {
    let tokens: Vec<&str> = part.split(' ').filter(|t| !t.is_empty()).collect();
    if tokens.len() == 3 && tokens[1] == "-" {
        if let (Some(from), Some(to)) = (XPlain::parse(tokens[0]), XPlain::parse(tokens[2])) {
            return hyphen(input, &from, &to);
        }
    }

    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut token = tokens[i].to_string();
        if is_lone_operator(tokens[i]) && i + 1 < tokens.len() {
            if tokens[i].starts_with('~') {
                token = "~".to_string();
            }
            token.push_str(tokens[i + 1]);
            i += 1;
        }
        out.extend(desugar_token(input, &token)?);
        i += 1;
    }
    Ok(out)
}

fn is_lone_operator(t: &str) -> bool {
    matches!(t, "<" | "<=" | ">" | ">=" | "=" | "~" | "~>" | "^")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Wild,
    Num(u64),
}

impl Part {
    fn num(self) -> u64 {
        match self {
            Part::Num(n) => n,
            Part::Wild => 0,
        }
    }
}

/// A possibly-partial version with wildcards (`1`, `1.x`, `1.2.*`, ...).
#[derive(Debug)]
struct XPlain<'a> {
    /// Characters consumed by the `[v=]*` prefix.
    prefix: &'a str,
    /// Everything after the prefix.
    body: &'a str,
    major: Part,
    minor: Part,
    patch: Part,
    prerelease: Vec<Identifier>,
}

impl<'a> XPlain<'a> {
    fn parse(s: &'a str) -> Option<Self> {
        let body = s.trim_start_matches(['v', '=']);
        let prefix = &s[..s.len() - body.len()];

        let (rest, build) = match body.split_once('+') {
            Some((rest, build)) => (rest, Some(build)),
            None => (body, None),
        };
        let (main, pre) = match rest.split_once('-') {
            Some((main, pre)) => (main, Some(pre)),
            None => (rest, None),
        };
        let ids: Vec<&str> = main.split('.').collect();
        if ids.len() > 3 || ((pre.is_some() || build.is_some()) && ids.len() != 3) {
            return None;
        }
        let part = |id: &str| -> Option<Part> {
            match id {
                "x" | "X" | "*" => Some(Part::Wild),
                _ => parse_numeric(id).map(Part::Num),
            }
        };
        let major = part(ids[0])?;
        let minor = ids.get(1).map_or(Some(Part::Wild), |id| part(id))?;
        let patch = ids.get(2).map_or(Some(Part::Wild), |id| part(id))?;
        let prerelease = match pre {
            Some(p) => parse_prerelease(p)?,
            None => Vec::new(),
        };
        if let Some(b) = build {
            if b.split('.').any(|id| {
                id.is_empty() || !id.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'-')
            }) {
                return None;
            }
        }
        Some(XPlain {
            prefix,
            body,
            major,
            minor,
            patch,
            prerelease,
        })
    }

    fn any_wild(&self) -> bool {
        [self.major, self.minor, self.patch].contains(&Part::Wild)
    }

    fn triple(&self, major: u64, minor: u64, patch: u64) -> Version {
        Version::new(major, minor, patch)
    }

    fn full(&self) -> Version {
        Version {
            prerelease: self.prerelease.clone(),
            ..Version::new(self.major.num(), self.minor.num(), self.patch.num())
        }
    }

    /// The exact version this plain form names when it carries no wildcard;
    /// only a single `v` prefix is accepted, as for a strict comparator.
    fn exact(&self, input: &str) -> Result<Version, SemverError> {
        if !(self.prefix.is_empty() || self.prefix == "v") {
            return Err(malformed(
                input,
                format!("unexpected prefix {:?}", self.prefix),
            ));
        }
        Version::parse_core(input, self.body).map(Version::without_build)
    }
}

fn bump(input: &str, n: u64) -> Result<u64, SemverError> {
    n.checked_add(1)
        .filter(|n| *n <= super::MAX_SAFE_INTEGER)
        .ok_or_else(|| malformed(input, "version component overflow"))
}

fn cmp(op: Op, v: Version) -> Comparator {
    Comparator::new(op, v)
}

fn desugar_token(input: &str, token: &str) -> Result<Vec<Comparator>, SemverError> {
    if let Some(rest) = token.strip_prefix('~') {
        let rest = rest.strip_prefix('>').unwrap_or(rest);
        let x = XPlain::parse(rest)
            .ok_or_else(|| malformed(input, format!("bad tilde range {token:?}")))?;
        return tilde(input, &x);
    }
    if let Some(rest) = token.strip_prefix('^') {
        let x = XPlain::parse(rest)
            .ok_or_else(|| malformed(input, format!("bad caret range {token:?}")))?;
        return caret(input, &x);
    }
    let (op_text, rest) = split_gtlt(token);
    let x =
        XPlain::parse(rest).ok_or_else(|| malformed(input, format!("bad comparator {token:?}")))?;
    xrange(input, op_text, &x)
}

fn split_gtlt(token: &str) -> (&str, &str) {
    let mut end = 0;
    let bytes = token.as_bytes();
    if matches!(bytes.first(), Some(b'<' | b'>')) {
        end = 1;
    }
    if bytes.get(end) == Some(&b'=') {
        end += 1;
    }
    token.split_at(end)
}

fn tilde(input: &str, x: &XPlain) -> Result<Vec<Comparator>, SemverError> {
    let (major, minor) = (x.major.num(), x.minor.num());
    Ok(match (x.major, x.minor, x.patch) {
        (Part::Wild, _, _) => Vec::new(),
        (_, Part::Wild, _) => vec![
            cmp(Op::Ge, x.triple(major, 0, 0)),
            cmp(Op::Lt, x.triple(bump(input, major)?, 0, 0)),
        ],
        (_, _, Part::Wild) => vec![
            cmp(Op::Ge, x.triple(major, minor, 0)),
            cmp(Op::Lt, x.triple(major, bump(input, minor)?, 0)),
        ],
        _ => vec![
            cmp(Op::Ge, x.full()),
            cmp(Op::Lt, x.triple(major, bump(input, minor)?, 0)),
        ],
    })
}

fn caret(input: &str, x: &XPlain) -> Result<Vec<Comparator>, SemverError> {
    let (major, minor, patch) = (x.major.num(), x.minor.num(), x.patch.num());
    Ok(match (x.major, x.minor, x.patch) {
        (Part::Wild, _, _) => Vec::new(),
        (_, Part::Wild, _) => vec![
            cmp(Op::Ge, x.triple(major, 0, 0)),
            cmp(Op::Lt, x.triple(bump(input, major)?, 0, 0)),
        ],
        (_, _, Part::Wild) => {
            let upper = if major == 0 {
                x.triple(0, bump(input, minor)?, 0)
            } else {
                x.triple(bump(input, major)?, 0, 0)
            };
            vec![cmp(Op::Ge, x.triple(major, minor, 0)), cmp(Op::Lt, upper)]
        }
        _ => {
            let upper = match (major, minor) {
                (0, 0) => x.triple(0, 0, bump(input, patch)?),
                (0, _) => x.triple(0, bump(input, minor)?, 0),
                _ => x.triple(bump(input, major)?, 0, 0),
            };
            vec![cmp(Op::Ge, x.full()), cmp(Op::Lt, upper)]
        }
    })
}

fn xrange(input: &str, op_text: &str, x: &XPlain) -> Result<Vec<Comparator>, SemverError> {
    if !x.any_wild() {
        let op = match op_text {
            "<" => Op::Lt,
            "<=" => Op::Le,
            ">" => Op::Gt,
            ">=" => Op::Ge,
            _ => Op::Eq,
        };
        return Ok(vec![cmp(op, x.exact(input)?)]);
    }

    let (major, minor) = (x.major.num(), x.minor.num());
    let minor_wild = x.minor == Part::Wild;
    if x.major == Part::Wild {
        return Ok(if matches!(op_text, "<" | ">") {
            // nothing is allowed
            let mut none = Version::new(0, 0, 0);
            none.prerelease.push(Identifier::Numeric(0));
            vec![cmp(Op::Lt, none)]
        } else {
            Vec::new()
        });
    }
    let floor_minor = if minor_wild { 0 } else { minor };
    Ok(match op_text {
        ">" => {
            let v = if minor_wild {
                x.triple(bump(input, major)?, 0, 0)
            } else {
                x.triple(major, bump(input, minor)?, 0)
            };
            vec![cmp(Op::Ge, v)]
        }
        "<=" => {
            let v = if minor_wild {
                x.triple(bump(input, major)?, 0, 0)
            } else {
                x.triple(major, bump(input, minor)?, 0)
            };
            vec![cmp(Op::Lt, v)]
        }
        ">=" => vec![cmp(Op::Ge, x.triple(major, floor_minor, 0))],
        "<" => vec![cmp(Op::Lt, x.triple(major, floor_minor, 0))],
        _ if minor_wild => vec![
            cmp(Op::Ge, x.triple(major, 0, 0)),
            cmp(Op::Lt, x.triple(bump(input, major)?, 0, 0)),
        ],
        _ => vec![
            cmp(Op::Ge, x.triple(major, minor, 0)),
            cmp(Op::Lt, x.triple(major, bump(input, minor)?, 0)),
        ],
    })
}

fn hyphen(input: &str, from: &XPlain, to: &XPlain) -> Result<Vec<Comparator>, SemverError> {
    let mut out = Vec::with_capacity(2);
    match (from.major, from.minor, from.patch) {
        (Part::Wild, _, _) => {}
        (m, Part::Wild, _) => out.push(cmp(Op::Ge, from.triple(m.num(), 0, 0))),
        (m, n, Part::Wild) => out.push(cmp(Op::Ge, from.triple(m.num(), n.num(), 0))),
        _ => out.push(cmp(Op::Ge, from.exact(input)?)),
    }
    match (to.major, to.minor, to.patch) {
        (Part::Wild, _, _) => {}
        (m, Part::Wild, _) => out.push(cmp(Op::Lt, to.triple(bump(input, m.num())?, 0, 0))),
        (m, n, Part::Wild) => out.push(cmp(Op::Lt, to.triple(m.num(), bump(input, n.num())?, 0))),
        _ if !to.prerelease.is_empty() => out.push(cmp(Op::Le, to.full())),
        _ => out.push(cmp(Op::Le, to.exact(input)?)),
    }
    Ok(out)
}
