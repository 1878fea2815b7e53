//! Seeded fixtures for the benchmarks.

use std::sync::Arc;

use aa_core::miner::Candidate;
use aa_core::{ManualClock, MemoryJournal, Snapshot, Source, Store, StoreConfig, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "fixing", "timer", "journal", "replay", "reading", "paper", "writing", "tests", "parser",
    "slot", "grid", "review", "session", "export", "graph", "tokens", "refactor", "django",
    "models", "docs",
];
const NICKS: &[&str] = &["ana", "bob", "carol", "dave", "eve"];

pub fn message(rng: &mut impl Rng) -> String {
    let n = rng.random_range(2..8);
    let mut words: Vec<String> = (0..n)
        .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string())
        .collect();
    if rng.random_bool(0.4) {
        words.push(format!("#{}", WORDS[rng.random_range(0..5)]));
    }
    if rng.random_bool(0.2) {
        words.push(format!("+{}", WORDS[rng.random_range(15..WORDS.len())]));
    }
    words.join(" ")
}

pub fn messages(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| message(&mut rng)).collect()
}

pub fn candidates(n: usize, seed: u64) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| Candidate {
            nick: NICKS[rng.random_range(0..NICKS.len())].into(),
            message: message(&mut rng),
            created: Timestamp::from_secs(1_367_496_000 + i as i64 * 60),
            source: "bench".into(),
        })
        .collect()
}

/// A store driven through `n` messages with sessions, reviews and screencasts.
pub fn snapshot(n: usize, seed: u64) -> Snapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clock = ManualClock::new(Timestamp::from_secs(1_367_496_000));
    let mut store = Store::open(
        MemoryJournal::default(),
        Arc::new(clock.clone()),
        StoreConfig::default(),
    )
    .expect("memory store");
    let mut sessions = Vec::new();
    for _ in 0..n {
        clock.advance(rng.random_range(60..1200));
        let nick = NICKS[rng.random_range(0..NICKS.len())];
        let text = match rng.random_range(0..20) {
            0 => "start".to_string(),
            1 => "stop".to_string(),
            _ => message(&mut rng),
        };
        if let Ok(aa_core::Action::Started { session, .. }) =
            store.receive_message(nick, &text, None, Source::Http)
        {
            sessions.push(session);
        }
        if !sessions.is_empty() && rng.random_bool(0.05) {
            let s = &sessions[rng.random_range(0..sessions.len())];
            let reviewer = NICKS[rng.random_range(0..NICKS.len())];
            let _ = store.record_review(s, reviewer, rng.random_range(0..=10) as f64 / 10.0, None);
            let _ = store.attach_screencast(s, "https://v.example/bench");
        }
    }
    store.state().snapshot()
}
