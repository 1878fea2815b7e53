//! Domain types shared by every part of the suite.
//!
//! Everything here is a plain value: no I/O, no interior mutability. The
//! store, parser, session engine, miner, exporter and statistics engine all
//! exchange these types.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("nick is empty")]
    EmptyNick,
    #[error("tag name is empty")]
    EmptyTagName,
    #[error("score {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("invalid timestamp {0:?}")]
    BadTimestamp(String),
}

/// Trims and lowercases a user handle.
pub fn normalize_nick(raw: &str) -> Result<String, ModelError> {
    let nick = raw.trim().to_lowercase();
    if nick.is_empty() {
        return Err(ModelError::EmptyNick);
    }
    Ok(nick)
}

/// UTC instant with second precision, stored as seconds since the epoch.
///
/// Serializes as an RFC 3339 string (`2013-05-02T14:30:11Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_secs(secs: i64) -> Self {
        Timestamp(secs)
    }

    pub const fn secs(self) -> i64 {
        self.0
    }

    pub fn now() -> Self {
        Timestamp(Utc::now().timestamp())
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_opt(self.0, 0)
            .single()
            .unwrap_or(DateTime::<Utc>::MIN_UTC)
    }

    pub fn to_rfc3339(self) -> String {
        self.to_datetime()
            .to_rfc3339_opts(SecondsFormat::Secs, true)
    }

    pub fn plus_secs(self, secs: i64) -> Self {
        Timestamp(self.0 + secs)
    }

    /// Parses RFC 3339 or a naive `YYYY-MM-DD[T ]HH:MM:SS`, the latter read as UTC.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let text = text.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
            return Ok(Timestamp(dt.timestamp()));
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
            if let Ok(naive) = NaiveDateTime::parse_from_str(text, fmt) {
                return Ok(Timestamp(naive.and_utc().timestamp()));
            }
        }
        Err(ModelError::BadTimestamp(text.to_string()))
    }
}

impl From<DateTime<Utc>> for Timestamp {
    fn from(dt: DateTime<Utc>) -> Self {
        Timestamp(dt.timestamp())
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl FromStr for Timestamp {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Timestamp::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Identifier assigned to a shout at ingest; independent of its content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShoutId(pub u64);

impl fmt::Display for ShoutId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub String);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A user is identified by the first nick it was seen under.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Http,
    Chat,
    Mined,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "topic")]
pub enum MessageKind {
    Start,
    Stop,
    Push,
    Shout,
    /// Machine-generated marker for a session slot without a shout.
    LostTimeslot,
    Query(String),
}

impl MessageKind {
    /// Stable lowercase label, `query:<topic>` for queries.
    pub fn label(&self) -> String {
        match self {
            MessageKind::Start => "start".into(),
            MessageKind::Stop => "stop".into(),
            MessageKind::Push => "push".into(),
            MessageKind::Shout => "shout".into(),
            MessageKind::LostTimeslot => "lost_timeslot".into(),
            MessageKind::Query(topic) => format!("query:{topic}"),
        }
    }

    pub fn is_machine(&self) -> bool {
        matches!(self, MessageKind::LostTimeslot)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "form", content = "name")]
pub enum TagForm {
    Hash(String),
    Plus(String),
    Word(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagScope {
    ShoutOnly,
    Session,
    UntilNextTag,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag {
    #[serde(flatten)]
    pub form: TagForm,
    pub scope: TagScope,
}

impl Tag {
    pub fn hash(name: &str) -> Result<Self, ModelError> {
        Ok(Tag {
            form: TagForm::Hash(clean_tag_name(name)?),
            scope: TagScope::ShoutOnly,
        })
    }

    pub fn plus(name: &str) -> Result<Self, ModelError> {
        Ok(Tag {
            form: TagForm::Plus(clean_tag_name(name)?),
            scope: TagScope::ShoutOnly,
        })
    }

    pub fn word(name: &str, scope: TagScope) -> Result<Self, ModelError> {
        Ok(Tag {
            form: TagForm::Word(clean_tag_name(name)?),
            scope,
        })
    }

    pub fn name(&self) -> &str {
        match &self.form {
            TagForm::Hash(n) | TagForm::Plus(n) | TagForm::Word(n) => n,
        }
    }

    pub fn is_word(&self) -> bool {
        matches!(self.form, TagForm::Word(_))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            TagForm::Hash(n) => write!(f, "#{n}"),
            TagForm::Plus(n) => write!(f, "+{n}"),
            TagForm::Word(n) => f.write_str(n),
        }
    }
}

fn clean_tag_name(name: &str) -> Result<String, ModelError> {
    let name = name.trim().trim_start_matches(['#', '+']).to_lowercase();
    if name.is_empty() {
        return Err(ModelError::EmptyTagName);
    }
    Ok(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    Advertising,
    ProductExhibitionism,
    IntroTest,
}

/// One timestamped message from a user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shout {
    pub id: ShoutId,
    pub nick: String,
    pub message: String,
    /// Arrival time at the server (or the mined log time); authoritative for ordering.
    pub created: Timestamp,
    /// Authorship time reported by an offline client, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_created: Option<Timestamp>,
    pub source: Source,
    pub kind: MessageKind,
    #[serde(default)]
    pub tags: Vec<Tag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_ref: Option<SessionId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<DeviationKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub nicks: BTreeSet<String>,
    #[serde(default)]
    pub emails: BTreeSet<String>,
}

impl User {
    pub fn from_nick(nick: &str) -> Result<Self, ModelError> {
        let nick = normalize_nick(nick)?;
        Ok(User {
            id: UserId(nick.clone()),
            nicks: BTreeSet::from([nick]),
            emails: BTreeSet::new(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionOrigin {
    Explicit,
    Inferred,
}

pub const DEFAULT_SLOT_SECS: i64 = 15 * 60;
pub const DEFAULT_TOLERANCE_SECS: i64 = 5 * 60;
pub const IDEAL_SHOUT_COUNT: usize = 8;
pub const IDEAL_SPAN_SECS: i64 = 2 * 60 * 60;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: SessionId,
    pub user: UserId,
    pub origin: SessionOrigin,
    pub start: Timestamp,
    pub end: Timestamp,
    pub slot_secs: i64,
    /// Member shouts ordered by `created`, ties in arrival order.
    pub shouts: Vec<ShoutId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screencast: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review: Option<ValidationReview>,
    /// Open sessions have not received a stop yet.
    #[serde(default)]
    pub open: bool,
}

/// A peer score in the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Score(f64);

impl Score {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Score(value))
        } else {
            Err(ModelError::ScoreOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Eq for Score {}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Score::new(f64::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReview {
    pub session: SessionId,
    pub reviewer: UserId,
    pub score: Score,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub created: Timestamp,
}
