//! Activity counts, calendar histograms, token tables and co-occurrence graphs.

mod graph;
mod histogram;
mod tokens;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::store::Snapshot;

pub use graph::{cooccurrence, CooccurrenceGraph, GraphMetrics};
pub use histogram::{histogram, Scale, TemporalHistogram};
pub use tokens::{
    default_stopwords, shout_tokens, token_table, tokenize, IdentityStemmer, Stemmer,
    SuffixStemmer, TextOptions, TokenTable,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActivityStats {
    pub total: u64,
    pub by_kind: BTreeMap<String, u64>,
    pub by_user: BTreeMap<String, u64>,
    pub users: u64,
    pub sessions: u64,
    pub sessions_reviewed: u64,
    pub screencasts: u64,
    pub reviews: u64,
    pub mean_score: Option<f64>,
}

pub fn summarize(snapshot: &Snapshot) -> ActivityStats {
    let mut stats = ActivityStats::default();
    for s in &snapshot.shouts {
        stats.total += 1;
        *stats.by_kind.entry(s.kind.label()).or_default() += 1;
        *stats.by_user.entry(s.nick.clone()).or_default() += 1;
    }
    stats.users = stats.by_user.len() as u64;
    stats.sessions = snapshot.sessions.len() as u64;
    stats.sessions_reviewed = snapshot
        .sessions
        .iter()
        .filter(|s| s.review.is_some())
        .count() as u64;
    stats.screencasts = snapshot
        .sessions
        .iter()
        .filter(|s| s.screencast.is_some())
        .count() as u64;
    stats.reviews = snapshot.reviews.len() as u64;
    if !snapshot.reviews.is_empty() {
        // Sum in a fixed order so the mean does not depend on input order.
        let mut scores: Vec<f64> = snapshot.reviews.iter().map(|r| r.score.value()).collect();
        scores.sort_by(f64::total_cmp);
        stats.mean_score = Some(scores.iter().sum::<f64>() / scores.len() as f64);
    }
    stats
}
