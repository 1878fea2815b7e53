//! Message grammar: kind classification, `#`/`+` tags, positional word tags
//! and deviation flags.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DeviationKind, MessageKind, Tag, TagScope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("message is empty")]
    EmptyMessage,
}

const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?'];
const QUERY_KEYWORDS: &[&str] = &["tickets", "milestones"];
const MEDIA_EXTENSIONS: &[&str] = &[
    ".png", ".jpg", ".jpeg", ".gif", ".svg", ".webp", ".mp4", ".webm", ".ogv", ".ogg", ".mp3",
    ".pdf",
];

/// Lexicons and thresholds driving the parser. Loaded from the suite config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParserConfig {
    /// Tag names that mark a message from another platform as AA traffic.
    pub ubiquitous: BTreeSet<String>,
    /// Words that act as tags when they open or close a shout. Empty by default.
    pub word_lexicon: BTreeSet<String>,
    pub promo_keywords: BTreeSet<String>,
    pub greetings: BTreeSet<String>,
    /// Below this many plain words a shout made of a link is exhibitionism.
    pub min_words: usize,
}

impl Default for ParserConfig {
    fn default() -> Self {
        let set = |words: &[&str]| words.iter().map(|w| w.to_string()).collect();
        ParserConfig {
            ubiquitous: set(&["aao0"]),
            word_lexicon: BTreeSet::new(),
            promo_keywords: set(&[
                "meetup",
                "event",
                "workshop",
                "hackathon",
                "conference",
                "festival",
                "party",
                "register",
                "tickets",
                "evento",
                "encontro",
                "festa",
            ]),
            greetings: set(&["test", "teste", "hello", "oi"]),
            min_words: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseResult {
    pub kind: MessageKind,
    pub clean_text: String,
    pub tags: Vec<Tag>,
    pub ubiquitous: bool,
}

fn strip_trailing_punct(token: &str) -> &str {
    token.trim_end_matches(TRAILING_PUNCT)
}

fn is_tag_token(token: &str) -> bool {
    token.starts_with(['#', '+'])
}

/// The first word decides the kind; anything unrecognized is a plain shout.
pub fn classify_kind(raw: &str) -> Result<MessageKind, ParseError> {
    let first = raw
        .split_whitespace()
        .next()
        .ok_or(ParseError::EmptyMessage)?;
    let word = strip_trailing_punct(first).to_lowercase();
    Ok(match word.as_str() {
        "start" => MessageKind::Start,
        "stop" => MessageKind::Stop,
        "push" => MessageKind::Push,
        w if QUERY_KEYWORDS.contains(&w) => MessageKind::Query(w.to_string()),
        _ => MessageKind::Shout,
    })
}

/// Pulls `#name` and `+name` tokens out of the message.
///
/// Returns the tags in order of appearance and the remaining text with
/// whitespace collapsed to single spaces.
pub fn extract_tags(raw: &str) -> (Vec<Tag>, String) {
    let mut tags = Vec::new();
    let mut rest = Vec::new();
    for token in raw.split_whitespace() {
        if !is_tag_token(token) {
            rest.push(token);
            continue;
        }
        let name = strip_trailing_punct(token.trim_start_matches(['#', '+']));
        // A bare marker ("#", "+!") carries no tag but is still dropped from the text.
        let tag = if token.starts_with('#') {
            Tag::hash(name)
        } else {
            Tag::plus(name)
        };
        if let Ok(tag) = tag {
            tags.push(tag);
        }
    }
    (tags, rest.join(" "))
}

/// Lexicon words in first or last position become word tags.
pub fn detect_word_tags(raw: &str, lexicon: &BTreeSet<String>) -> Vec<Tag> {
    let tokens: Vec<&str> = raw
        .split_whitespace()
        .filter(|t| !is_tag_token(t))
        .collect();
    let (Some(first), Some(last)) = (tokens.first(), tokens.last()) else {
        return Vec::new();
    };
    let mut positions = vec![*first];
    if tokens.len() > 1 {
        positions.push(*last);
    }
    let mut out: Vec<Tag> = Vec::new();
    for token in positions {
        let word = strip_trailing_punct(token).to_lowercase();
        if !lexicon.contains(&word) {
            continue;
        }
        if let Ok(tag) = Tag::word(&word, TagScope::UntilNextTag) {
            if !out.contains(&tag) {
                out.push(tag);
            }
        }
    }
    out
}

pub fn parse(raw: &str, config: &ParserConfig) -> Result<ParseResult, ParseError> {
    let kind = classify_kind(raw)?;
    let (mut tags, clean_text) = extract_tags(raw);
    tags.extend(detect_word_tags(&clean_text, &config.word_lexicon));
    let ubiquitous = tags.iter().any(|t| config.ubiquitous.contains(t.name()));
    Ok(ParseResult {
        kind,
        clean_text,
        tags,
        ubiquitous,
    })
}

fn is_url(token: &str) -> bool {
    let t = token.to_lowercase();
    t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")
}

fn is_media(token: &str) -> bool {
    let t = strip_trailing_punct(token).to_lowercase();
    is_url(&t) || MEDIA_EXTENSIONS.iter().any(|ext| t.ends_with(ext))
}

/// Rule-based deviation flag for plain shouts.
pub fn flag_deviation(parsed: &ParseResult, config: &ParserConfig) -> Option<DeviationKind> {
    if parsed.kind != MessageKind::Shout {
        return None;
    }
    let tokens: Vec<&str> = parsed.clean_text.split_whitespace().collect();
    let has_url = tokens.iter().any(|t| is_url(t));
    let has_media = tokens.iter().any(|t| is_media(t));
    let words: Vec<String> = tokens
        .iter()
        .filter(|t| !is_media(t))
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect();

    if has_url && words.iter().any(|w| config.promo_keywords.contains(w)) {
        return Some(DeviationKind::Advertising);
    }
    if has_media && words.len() < config.min_words {
        return Some(DeviationKind::ProductExhibitionism);
    }
    if !words.is_empty() && !has_media && words.iter().all(|w| config.greetings.contains(w)) {
        return Some(DeviationKind::IntroTest);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TagForm;
    use proptest::prelude::*;

    fn names(tags: &[Tag]) -> Vec<TagForm> {
        tags.iter().map(|t| t.form.clone()).collect()
    }

    #[test]
    fn kinds_from_first_word() {
        assert_eq!(classify_kind("start").unwrap(), MessageKind::Start);
        assert_eq!(
            classify_kind("stop wrapping up refactor").unwrap(),
            MessageKind::Stop
        );
        assert_eq!(classify_kind("push").unwrap(), MessageKind::Push);
        assert_eq!(
            classify_kind("writing parser tests #aa").unwrap(),
            MessageKind::Shout
        );
        assert_eq!(classify_kind("START now").unwrap(), MessageKind::Start);
        assert_eq!(
            classify_kind("tickets").unwrap(),
            MessageKind::Query("tickets".into())
        );
        assert_eq!(
            classify_kind("Milestones?").unwrap(),
            MessageKind::Query("milestones".into())
        );
        assert_eq!(classify_kind("   "), Err(ParseError::EmptyMessage));
        assert_eq!(
            classify_kind("starting the day").unwrap(),
            MessageKind::Shout
        );
    }

    #[test]
    fn hash_and_plus_tags() {
        let (tags, clean) = extract_tags("fixing build #coding");
        assert_eq!(names(&tags), vec![TagForm::Hash("coding".into())]);
        assert_eq!(clean, "fixing build");

        let (tags, clean) = extract_tags("+django models for sessions +sna");
        assert_eq!(
            names(&tags),
            vec![TagForm::Plus("django".into()), TagForm::Plus("sna".into())]
        );
        assert_eq!(clean, "models for sessions");

        let (tags, clean) = extract_tags("no tags here");
        assert!(tags.is_empty());
        assert_eq!(clean, "no tags here");

        let (tags, _) = extract_tags("done #Coding, then +Reading.");
        assert_eq!(
            names(&tags),
            vec![
                TagForm::Hash("coding".into()),
                TagForm::Plus("reading".into())
            ]
        );
        assert!(tags.iter().all(|t| t.scope == TagScope::ShoutOnly));
    }

    #[test]
    fn bare_markers_are_dropped() {
        let (tags, clean) = extract_tags("# + #!! real");
        assert!(tags.is_empty());
        assert_eq!(clean, "real");
    }

    #[test]
    fn ubiquitous_flag() {
        let parsed = parse("shipping #aao0 from twitter", &ParserConfig::default()).unwrap();
        assert_eq!(names(&parsed.tags), vec![TagForm::Hash("aao0".into())]);
        assert!(parsed.ubiquitous);
        let parsed = parse("shipping #aa from irc", &ParserConfig::default()).unwrap();
        assert!(!parsed.ubiquitous);
    }

    #[test]
    fn start_keeps_its_tags() {
        let parsed = parse("start #aa", &ParserConfig::default()).unwrap();
        assert_eq!(parsed.kind, MessageKind::Start);
        assert_eq!(names(&parsed.tags), vec![TagForm::Hash("aa".into())]);
    }

    #[test]
    fn word_tags_only_at_edges() {
        let lex: BTreeSet<String> = ["coding".to_string()].into();
        assert_eq!(
            names(&detect_word_tags("coding refactor of timer", &lex)),
            vec![TagForm::Word("coding".into())]
        );
        assert!(detect_word_tags("refactor of timer", &lex).is_empty());
        assert_eq!(
            names(&detect_word_tags("timer refactor coding", &lex)),
            vec![TagForm::Word("coding".into())]
        );
        assert!(detect_word_tags("timer coding refactor", &lex).is_empty());
        assert_eq!(detect_word_tags("coding", &lex).len(), 1);
        let tags = detect_word_tags("Coding: timer", &lex);
        assert_eq!(tags[0].scope, TagScope::UntilNextTag);
    }

    #[test]
    fn deviations() {
        let cfg = ParserConfig::default();
        let flag = |s: &str| flag_deviation(&parse(s, &cfg).unwrap(), &cfg);
        assert_eq!(
            flag("come to our meetup! http://x.example"),
            Some(DeviationKind::Advertising)
        );
        assert_eq!(flag("test"), Some(DeviationKind::IntroTest));
        assert_eq!(flag("Oi!"), Some(DeviationKind::IntroTest));
        assert_eq!(flag("implemented slot grid, writing tests"), None);
        assert_eq!(
            flag("done! https://v.example/render.png"),
            Some(DeviationKind::ProductExhibitionism)
        );
        assert_eq!(
            flag("profiling the renderer, see https://v.example/trace"),
            None
        );
        assert_eq!(flag("start test"), None);
    }

    proptest! {
        #[test]
        fn parse_is_deterministic_and_sound(raw in "\\PC{0,60}") {
            let cfg = ParserConfig::default();
            let a = parse(&raw, &cfg);
            let b = parse(&raw, &cfg);
            prop_assert_eq!(&a, &b);
            if let Ok(parsed) = a {
                prop_assert!(extract_tags(&parsed.clean_text).0.is_empty());
                for tag in &parsed.tags {
                    prop_assert!(!tag.name().is_empty());
                    prop_assert!(!tag.name().starts_with(['#', '+']));
                }
            }
        }
    }
}
