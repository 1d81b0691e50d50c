//! UTC timestamps at second resolution.

use chrono::{DateTime, NaiveDate, SecondsFormat, SubsecRound, Utc};
use thiserror::Error;

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid timestamp {input:?}: expected RFC 3339")]
pub struct TimestampError {
    pub input: String,
}

/// Parses a strict RFC 3339 instant, normalized to UTC and truncated to whole seconds.
pub fn parse_rfc3339(text: &str) -> Result<Timestamp, TimestampError> {
    DateTime::parse_from_rfc3339(text.trim())
        .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
        .map_err(|_| TimestampError {
            input: text.to_string(),
        })
}

/// Like [`parse_rfc3339`], but a bare `YYYY-MM-DD` date expands to midnight UTC.
pub fn parse_instant(text: &str) -> Result<Timestamp, TimestampError> {
    let trimmed = text.trim();
    if let Ok(date) = NaiveDate::parse_from_str(trimmed, "%Y-%m-%d") {
        if trimmed.len() == 10 {
            return Ok(date.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
        }
    }
    parse_rfc3339(trimmed)
}

pub fn format_rfc3339(t: &Timestamp) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Serde adapter rendering timestamps as `YYYY-MM-DDTHH:MM:SSZ`.
pub mod rfc3339 {
    use super::{format_rfc3339, parse_rfc3339, Timestamp};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rfc3339(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rfc3339(&raw).map_err(D::Error::custom)
    }

    pub mod option {
        use super::super::{format_rfc3339, parse_rfc3339, Timestamp};
        use serde::{de::Error, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(t: &Option<Timestamp>, s: S) -> Result<S::Ok, S::Error> {
            match t {
                Some(t) => s.serialize_str(&format_rfc3339(t)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Timestamp>, D::Error> {
            let raw = Option::<String>::deserialize(d)?;
            raw.map(|r| parse_rfc3339(&r).map_err(D::Error::custom))
                .transpose()
        }
    }

    pub mod vec {
        use super::super::{format_rfc3339, Timestamp};
        use serde::{ser::SerializeSeq, Serializer};

        pub fn serialize<S: Serializer>(ts: &[Timestamp], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(ts.len()))?;
            for t in ts {
                seq.serialize_element(&format_rfc3339(t))?;
            }
            seq.end()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn offsets_normalize_to_utc() {
        let t = parse_rfc3339("2016-05-01T02:00:00+02:00").unwrap();
        assert_eq!(t, Utc.with_ymd_and_hms(2016, 5, 1, 0, 0, 0).unwrap());
        assert_eq!(format_rfc3339(&t), "2016-05-01T00:00:00Z");
    }

    #[test]
    fn subseconds_are_truncated() {
        let t = parse_rfc3339("2016-05-01T00:00:00.999Z").unwrap();
        assert_eq!(format_rfc3339(&t), "2016-05-01T00:00:00Z");
    }

    #[test]
    fn date_only_expands_to_midnight() {
        let t = parse_instant("2016-05-01").unwrap();
        assert_eq!(t, Utc.with_ymd_and_hms(2016, 5, 1, 0, 0, 0).unwrap());
        assert!(parse_rfc3339("2016-05-01").is_err());
        assert!(parse_instant("May 2016").is_err());
    }
}
