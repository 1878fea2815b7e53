//! Harvesting shouts from historical chat logs and database dumps.
//!
//! Sources are parsed into [`Candidate`]s, filtered by a selection mode and
//! deduplicated against the texts already stored. Deduplication keys on the
//! message text alone by default, so identical texts from different users
//! collapse into one.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone};
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{normalize_nick, Shout, Timestamp};
use crate::parser::extract_tags;

pub const DEFAULT_CHAT_PATTERN: &str =
    r"^\[(?P<timestamp>\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2})\] <(?P<nick>[^>\s]+)> (?P<text>.*)$";
pub const CHAT_PREFIX: &str = ";aa ";

#[derive(Debug, Error)]
pub enum MineError {
    #[error("bad pattern: {0}")]
    BadPattern(String),
    #[error("bad field mapping: {0}")]
    BadMapping(String),
    #[error("bad timezone offset {0:?}")]
    BadTimezone(String),
    #[error("cannot read {path}: {source}")]
    UnreadableSource {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {message}")]
    BadDump { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    ChatLog,
    JsonDump,
    TabularDump,
}

/// Which dump fields hold the shout's nick, message and creation time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMapping {
    pub nick: String,
    pub message: String,
    pub created: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub path: PathBuf,
    /// Name used in the report; defaults to the path.
    #[serde(default)]
    pub name: Option<String>,
    /// Chat logs: regex with `timestamp`, `nick` and `text` named groups.
    #[serde(default)]
    pub pattern: Option<String>,
    /// Chat logs: chrono format of the `timestamp` capture.
    #[serde(default)]
    pub timestamp_format: Option<String>,
    #[serde(default)]
    pub mapping: Option<FieldMapping>,
    /// Offset applied to naive timestamps, e.g. `-03:00`. Defaults to UTC.
    #[serde(default)]
    pub timezone: Option<String>,
    /// Tabular dumps: field delimiter, default `,`.
    #[serde(default)]
    pub delimiter: Option<char>,
}

impl SourceSpec {
    pub fn chat_log(path: impl Into<PathBuf>) -> Self {
        SourceSpec {
            kind: SourceKind::ChatLog,
            path: path.into(),
            name: None,
            pattern: None,
            timestamp_format: None,
            mapping: None,
            timezone: None,
            delimiter: None,
        }
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.path.display().to_string())
    }

    fn offset(&self) -> Result<FixedOffset, MineError> {
        let Some(tz) = self.timezone.as_deref().map(str::trim) else {
            return Ok(FixedOffset::east_opt(0).expect("zero offset"));
        };
        if tz.eq_ignore_ascii_case("utc") || tz == "Z" {
            return Ok(FixedOffset::east_opt(0).expect("zero offset"));
        }
        let bad = || MineError::BadTimezone(tz.to_string());
        let (sign, rest) = match tz.as_bytes().first() {
            Some(b'+') => (1, &tz[1..]),
            Some(b'-') => (-1, &tz[1..]),
            _ => return Err(bad()),
        };
        let (h, m) = rest.split_once(':').unwrap_or((rest, "0"));
        let h: i32 = h.parse().map_err(|_| bad())?;
        let m: i32 = m.parse().map_err(|_| bad())?;
        FixedOffset::east_opt(sign * (h * 3600 + m * 60)).ok_or_else(bad)
    }
}

/// A file listing one or more sources.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    #[serde(default, rename = "source")]
    pub sources: Vec<SourceSpec>,
}

impl SourceFile {
    /// Reads a TOML source list; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, MineError> {
        let text = fs::read_to_string(path).map_err(|source| MineError::UnreadableSource {
            path: path.to_path_buf(),
            source,
        })?;
        let mut file: SourceFile = toml::from_str(&text).map_err(|e| MineError::BadDump {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut file.sources {
            if s.path.is_relative() {
                s.path = base.join(&s.path);
            }
        }
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub nick: String,
    pub message: String,
    pub created: Timestamp,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedSource {
    pub candidates: Vec<Candidate>,
    pub scanned: usize,
    pub malformed: usize,
}

fn naive_to_utc(naive: NaiveDateTime, offset: &FixedOffset) -> Timestamp {
    match offset.from_local_datetime(&naive).single() {
        Some(dt) => Timestamp::from_secs(dt.timestamp()),
        None => Timestamp::from_secs(naive.and_utc().timestamp()),
    }
}

fn parse_time_text(text: &str, format: Option<&str>, offset: &FixedOffset) -> Option<Timestamp> {
    let text = text.trim();
    if let Some(fmt) = format {
        if let Ok(dt) = DateTime::parse_from_str(text, fmt) {
            return Some(Timestamp::from_secs(dt.timestamp()));
        }
        return NaiveDateTime::parse_from_str(text, fmt)
            .ok()
            .map(|n| naive_to_utc(n, offset));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(Timestamp::from_secs(dt.timestamp()));
    }
    for fmt in [
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S%.f",
    ] {
        if let Ok(n) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(naive_to_utc(n, offset));
        }
    }
    // Bare epoch seconds.
    text.parse::<i64>().ok().map(Timestamp::from_secs)
}

/// Dump timestamps: strings, epoch numbers, or `{"$date": ...}` wrappers.
fn parse_time_value(value: &Value, offset: &FixedOffset) -> Option<Timestamp> {
    match value {
        Value::String(s) => parse_time_text(s, None, offset),
        Value::Number(n) => n.as_i64().map(Timestamp::from_secs),
        Value::Object(map) => {
            let inner = map.get("$date")?;
            match inner {
                Value::Number(ms) => ms
                    .as_i64()
                    .map(|ms| Timestamp::from_secs(ms.div_euclid(1000))),
                Value::Object(o) => o
                    .get("$numberLong")
                    .and_then(Value::as_str)
                    .and_then(|s| s.parse::<i64>().ok())
                    .map(|ms| Timestamp::from_secs(ms.div_euclid(1000))),
                other => parse_time_value(other, offset),
            }
        }
        _ => None,
    }
}

fn value_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

pub fn compile_pattern(pattern: &str) -> Result<Regex, MineError> {
    let re = Regex::new(pattern).map_err(|e| MineError::BadPattern(e.to_string()))?;
    let names: BTreeSet<&str> = re.capture_names().flatten().collect();
    for required in ["timestamp", "nick", "text"] {
        if !names.contains(required) {
            return Err(MineError::BadPattern(format!(
                "missing named group {required:?}"
            )));
        }
    }
    Ok(re)
}

/// Parses chat log text. Blank lines are ignored; lines that do not match or
/// carry a bad timestamp or nick are counted as malformed.
pub fn parse_chat_log(text: &str, spec: &SourceSpec) -> Result<ParsedSource, MineError> {
    let re = compile_pattern(spec.pattern.as_deref().unwrap_or(DEFAULT_CHAT_PATTERN))?;
    let offset = spec.offset()?;
    let label = spec.label();
    let mut out = ParsedSource::default();
    for line in text.lines() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        out.scanned += 1;
        let parsed = re.captures(line).and_then(|caps| {
            let created = parse_time_text(
                &caps["timestamp"],
                spec.timestamp_format.as_deref(),
                &offset,
            )?;
            let nick = normalize_nick(&caps["nick"]).ok()?;
            Some(Candidate {
                nick,
                message: caps["text"].to_string(),
                created,
                source: label.clone(),
            })
        });
        match parsed {
            Some(c) => out.candidates.push(c),
            None => out.malformed += 1,
        }
    }
    Ok(out)
}

fn mapping(spec: &SourceSpec) -> Result<&FieldMapping, MineError> {
    let m = spec
        .mapping
        .as_ref()
        .ok_or_else(|| MineError::BadMapping("dump sources need a field mapping".into()))?;
    if m.nick.is_empty() || m.message.is_empty() || m.created.is_empty() {
        return Err(MineError::BadMapping(
            "mapping must name nick, message and created".into(),
        ));
    }
    Ok(m)
}

/// Parses a JSON array of objects or JSON lines.
pub fn parse_json_dump(text: &str, spec: &SourceSpec) -> Result<ParsedSource, MineError> {
    let map = mapping(spec)?;
    let offset = spec.offset()?;
    let label = spec.label();
    let bad = |message: String| MineError::BadDump {
        path: spec.path.clone(),
        message,
    };
    let rows: Vec<Value> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?
    } else {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).unwrap_or(Value::Null))
            .collect()
    };
    let mut out = ParsedSource::default();
    for row in rows {
        out.scanned += 1;
        let candidate = (|| {
            let nick = normalize_nick(&value_text(row.get(&map.nick)?)?).ok()?;
            let message = value_text(row.get(&map.message)?)?;
            let created = parse_time_value(row.get(&map.created)?, &offset)?;
            Some(Candidate {
                nick,
                message,
                created,
                source: label.clone(),
            })
        })();
        match candidate {
            Some(c) => out.candidates.push(c),
            None => out.malformed += 1,
        }
    }
    Ok(out)
}

/// Parses delimited text with a header row.
pub fn parse_tabular_dump(text: &str, spec: &SourceSpec) -> Result<ParsedSource, MineError> {
    let map = mapping(spec)?;
    let offset = spec.offset()?;
    let label = spec.label();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter.unwrap_or(',') as u8)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| MineError::BadDump {
            path: spec.path.clone(),
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MineError::BadMapping(format!("no column {name:?}")))
    };
    let (nick_col, msg_col, created_col) = (
        column(&map.nick)?,
        column(&map.message)?,
        column(&map.created)?,
    );
    let mut out = ParsedSource::default();
    for row in reader.records() {
        out.scanned += 1;
        let candidate = row.ok().and_then(|row| {
            let nick = normalize_nick(row.get(nick_col)?).ok()?;
            let message = row.get(msg_col)?.to_string();
            let created = parse_time_text(row.get(created_col)?, None, &offset)?;
            Some(Candidate {
                nick,
                message,
                created,
                source: label.clone(),
            })
        });
        match candidate {
            Some(c) => out.candidates.push(c),
            None => out.malformed += 1,
        }
    }
    Ok(out)
}

pub fn parse_source(spec: &SourceSpec) -> Result<ParsedSource, MineError> {
    if spec.kind == SourceKind::ChatLog {
        compile_pattern(spec.pattern.as_deref().unwrap_or(DEFAULT_CHAT_PATTERN))?;
    }
    let bytes = fs::read(&spec.path).map_err(|source| MineError::UnreadableSource {
        path: spec.path.clone(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    match spec.kind {
        SourceKind::ChatLog => parse_chat_log(&text, spec),
        SourceKind::JsonDump => parse_json_dump(&text, spec),
        SourceKind::TabularDump => parse_tabular_dump(&text, spec),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectMode {
    /// Chat lines carrying the prefix, with the prefix removed.
    Prefix(String),
    /// Messages carrying any of these tag names; text is kept whole.
    Tags(BTreeSet<String>),
    /// Everything, for dumps that already are shout tables.
    All,
}

impl SelectMode {
    pub fn chat_prefix() -> Self {
        SelectMode::Prefix(CHAT_PREFIX.to_string())
    }

    pub fn ubiquitous_tags() -> Self {
        SelectMode::Tags(["aao0".to_string()].into())
    }
}

pub fn select_shouts(candidates: Vec<Candidate>, mode: &SelectMode) -> Vec<Candidate> {
    candidates
        .into_iter()
        .filter_map(|mut c| match mode {
            SelectMode::Prefix(prefix) => {
                let rest = c.message.strip_prefix(prefix.as_str())?;
                if rest.trim().is_empty() {
                    return None;
                }
                c.message = rest.to_string();
                Some(c)
            }
            SelectMode::Tags(set) => {
                let (tags, _) = extract_tags(&c.message);
                tags.iter().any(|t| set.contains(t.name())).then_some(c)
            }
            SelectMode::All => (!c.message.trim().is_empty()).then_some(c),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupKey {
    /// Message text only.
    #[default]
    Text,
    /// Nick and text together; keeps identical texts from different users.
    NickText,
}

/// Dedup comparison form: the text with trailing whitespace removed.
pub fn dedup_text(message: &str) -> &str {
    message.trim_end()
}

fn key_of(c: &Candidate, key: DedupKey) -> (Option<&str>, &str) {
    match key {
        DedupKey::Text => (None, dedup_text(&c.message)),
        DedupKey::NickText => (Some(c.nick.as_str()), dedup_text(&c.message)),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub scanned: usize,
    pub malformed: usize,
    pub candidates: usize,
    pub duplicates_discarded: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningReport {
    pub scanned: usize,
    pub malformed: usize,
    pub candidates: usize,
    pub duplicates_discarded: usize,
    pub kept: usize,
    pub per_source: BTreeMap<String, SourceCounts>,
}

/// Corpus of stored texts used as the dedup reference.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    texts: HashSet<String>,
    pairs: HashSet<(String, String)>,
}

impl Corpus {
    pub fn insert(&mut self, nick: &str, message: &str) {
        let text = dedup_text(message).to_string();
        self.pairs.insert((nick.to_string(), text.clone()));
        self.texts.insert(text);
    }

    pub fn from_texts<I: IntoIterator<Item = S>, S: AsRef<str>>(texts: I) -> Self {
        let mut corpus = Corpus::default();
        for t in texts {
            corpus.texts.insert(dedup_text(t.as_ref()).to_string());
        }
        corpus
    }

    /// Corpus of every stored shout.
    pub fn from_shouts<'a, I: IntoIterator<Item = &'a Shout>>(shouts: I) -> Self {
        let mut corpus = Corpus::default();
        for s in shouts {
            corpus.insert(&s.nick, &s.message);
        }
        corpus
    }

    fn contains(&self, key: (Option<&str>, &str)) -> bool {
        match key {
            (None, text) => self.texts.contains(text),
            (Some(nick), text) => self.pairs.contains(&(nick.to_string(), text.to_string())),
        }
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DedupOutcome {
    pub kept: Vec<Candidate>,
    pub discarded: Vec<Candidate>,
    pub report: MiningReport,
}

/// Drops candidates whose text is already stored or already seen earlier in
/// the batch. First occurrence wins; texts are never altered.
pub fn dedup(candidates: Vec<Candidate>, corpus: &Corpus, key: DedupKey) -> DedupOutcome {
    let mut out = DedupOutcome::default();
    let mut seen: HashSet<(Option<String>, String)> = HashSet::new();
    for c in candidates {
        let k = key_of(&c, key);
        let owned = (k.0.map(str::to_string), k.1.to_string());
        let entry = out.report.per_source.entry(c.source.clone()).or_default();
        entry.candidates += 1;
        if corpus.contains(k) || !seen.insert(owned) {
            entry.duplicates_discarded += 1;
            out.discarded.push(c);
        } else {
            entry.kept += 1;
            out.kept.push(c);
        }
    }
    out.report.candidates = out.kept.len() + out.discarded.len();
    out.report.duplicates_discarded = out.discarded.len();
    out.report.kept = out.kept.len();
    out
}

/// Parses, selects and deduplicates a set of sources into one batch.
pub fn mine(
    specs: &[SourceSpec],
    mode: &SelectMode,
    corpus: &Corpus,
    key: DedupKey,
) -> Result<DedupOutcome, MineError> {
    let mut all = Vec::new();
    let mut scanned = BTreeMap::new();
    for spec in specs {
        let parsed = parse_source(spec)?;
        scanned.insert(spec.label(), (parsed.scanned, parsed.malformed));
        all.extend(select_shouts(parsed.candidates, mode));
    }
    let mut outcome = dedup(all, corpus, key);
    for (label, (s, m)) in scanned {
        let entry = outcome.report.per_source.entry(label).or_default();
        entry.scanned = s;
        entry.malformed = m;
        outcome.report.scanned += s;
        outcome.report.malformed += m;
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(nick: &str, message: &str) -> Candidate {
        Candidate {
            nick: nick.into(),
            message: message.into(),
            created: Timestamp::from_secs(0),
            source: "t".into(),
        }
    }

    #[test]
    fn default_pattern_line() {
        let spec = SourceSpec::chat_log("x.log");
        let parsed =
            parse_chat_log("[2013-05-02 14:30:11] <bob> ;aa fixing timer\n", &spec).unwrap();
        assert_eq!(parsed.candidates.len(), 1);
        let c = &parsed.candidates[0];
        assert_eq!(c.nick, "bob");
        assert_eq!(c.message, ";aa fixing timer");
        assert_eq!(c.created, Timestamp::parse("2013-05-02T14:30:11Z").unwrap());
        assert_eq!(parse_chat_log("", &spec).unwrap(), ParsedSource::default());
    }

    #[test]
    fn timezone_offset_applies_to_naive_times() {
        let mut spec = SourceSpec::chat_log("x.log");
        spec.timezone = Some("-03:00".into());
        let parsed = parse_chat_log("[2013-05-02 14:30:11] <bob> hi", &spec).unwrap();
        assert_eq!(
            parsed.candidates[0].created,
            Timestamp::parse("2013-05-02T17:30:11Z").unwrap()
        );
        spec.timezone = Some("nowhere".into());
        assert!(matches!(
            parse_chat_log("x", &spec),
            Err(MineError::BadTimezone(_))
        ));
    }

    #[test]
    fn synthetic_log_with_malformed_lines() {
        let mut text = String::new();
        let mut expected_bad = 0;
        for i in 0..1000 {
            if i % 100 == 7 {
                text.push_str(&format!("garbage line {i}\n"));
                expected_bad += 1;
            } else {
                text.push_str(&format!(
                    "[2013-05-02 14:{:02}:{:02}] <user{}> message {i}\n",
                    (i / 60) % 60,
                    i % 60,
                    i % 7
                ));
            }
        }
        let parsed = parse_chat_log(&text, &SourceSpec::chat_log("s.log")).unwrap();
        assert_eq!(expected_bad, 10);
        assert_eq!(parsed.scanned, 1000);
        assert_eq!(parsed.candidates.len(), 990);
        assert_eq!(parsed.malformed, 10);
    }

    #[test]
    fn pattern_must_name_all_groups() {
        let mut spec = SourceSpec::chat_log("x.log");
        spec.pattern = Some(r"^(?P<nick>\w+): (?P<text>.*)$".into());
        assert!(matches!(
            parse_chat_log("a: b", &spec),
            Err(MineError::BadPattern(_))
        ));
        spec.pattern = Some("(".into());
        assert!(matches!(
            parse_chat_log("a: b", &spec),
            Err(MineError::BadPattern(_))
        ));
    }

    #[test]
    fn selection_modes() {
        let kept = select_shouts(vec![cand("bob", ";aa reading")], &SelectMode::chat_prefix());
        assert_eq!(kept[0].message, "reading");
        let none = select_shouts(
            vec![
                cand("bob", ";aa"),
                cand("bob", ";aa   "),
                cand("bob", "hello"),
                cand("bob", " ;aa x"),
            ],
            &SelectMode::chat_prefix(),
        );
        assert!(none.is_empty());
        let tagged = select_shouts(
            vec![
                cand("bob", "shipping release #aao0"),
                cand("bob", "no tags"),
            ],
            &SelectMode::ubiquitous_tags(),
        );
        assert_eq!(tagged.len(), 1);
        assert_eq!(tagged[0].message, "shipping release #aao0");
        assert_eq!(
            select_shouts(vec![cand("a", "x")], &SelectMode::All).len(),
            1
        );
    }

    #[test]
    fn dedup_examples() {
        let corpus = Corpus::from_texts(["already stored"]);
        let out = dedup(
            vec![
                cand("bob", "already stored"),
                cand("bob", "new"),
                cand("alice", "new  "),
            ],
            &corpus,
            DedupKey::Text,
        );
        assert_eq!(out.kept, vec![cand("bob", "new")]);
        assert_eq!(out.report.duplicates_discarded, 2);
        assert_eq!(
            out.report.kept,
            out.report.candidates - out.report.duplicates_discarded
        );

        let out = dedup(
            vec![cand("a", "x"), cand("b", "y")],
            &Corpus::default(),
            DedupKey::Text,
        );
        assert_eq!(out.kept.len(), 2);

        let out = dedup(
            vec![cand("a", "x"), cand("b", "x")],
            &Corpus::default(),
            DedupKey::NickText,
        );
        assert_eq!(out.kept.len(), 2);
    }

    #[test]
    fn ten_candidates_three_stored_two_internal() {
        let corpus = Corpus::from_texts(["s1", "s2", "s3"]);
        let texts = ["s1", "s2", "s3", "a", "b", "c", "d", "e", "a", "b"];
        let candidates: Vec<Candidate> = texts.iter().map(|t| cand("u", t)).collect();
        let out = dedup(candidates, &corpus, DedupKey::Text);
        assert_eq!(out.report.kept, 5);
        assert_eq!(out.report.duplicates_discarded, 5);
    }

    #[test]
    fn json_and_tabular_dumps() {
        let mut spec = SourceSpec::chat_log("dump.json");
        spec.kind = SourceKind::JsonDump;
        spec.mapping = Some(FieldMapping {
            nick: "nick".into(),
            message: "shout".into(),
            created: "time".into(),
        });
        let text = r#"[
            {"nick": "Bob", "shout": "one", "time": "2014-04-01T10:00:00Z"},
            {"nick": "bob", "shout": "two", "time": {"$date": 1396346400000}},
            {"nick": "bob", "shout": "three", "time": 1396346400},
            {"nick": "", "shout": "bad", "time": 1}
        ]"#;
        let parsed = parse_json_dump(text, &spec).unwrap();
        assert_eq!(parsed.candidates.len(), 3);
        assert_eq!(parsed.malformed, 1);
        assert_eq!(
            parsed.candidates[1].created,
            Timestamp::from_secs(1_396_346_400)
        );

        spec.kind = SourceKind::TabularDump;
        let csv =
            "nick,shout,time\nbob,\"one, with comma\",2011-07-01 12:00:00\nalice,two,not-a-time\n";
        let parsed = parse_tabular_dump(csv, &spec).unwrap();
        assert_eq!(parsed.candidates.len(), 1);
        assert_eq!(parsed.candidates[0].message, "one, with comma");
        assert_eq!(parsed.malformed, 1);

        spec.mapping = None;
        assert!(matches!(
            parse_tabular_dump(csv, &spec),
            Err(MineError::BadMapping(_))
        ));
    }

    #[test]
    fn unreadable_source() {
        let spec = SourceSpec::chat_log("/nonexistent/definitely/missing.log");
        assert!(matches!(
            parse_source(&spec),
            Err(MineError::UnreadableSource { .. })
        ));
    }
}
