//! Logic behind the batch binaries: export, stats and mining.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use aa_core::journal::read_records;
use aa_core::miner::{mine, Corpus, DedupKey, MiningReport, SelectMode, SourceSpec};
use aa_core::rdf::vocab::Vocabulary;
use aa_core::rdf::{export_data, export_ontology, serialize, validate_graph, RdfFormat, Violation};
use aa_core::stats::{
    cooccurrence, histogram, shout_tokens, summarize, token_table, Scale, SuffixStemmer,
    TextOptions,
};
use aa_core::{FileJournal, Snapshot, Store, StoreConfig, SystemClock};
use anyhow::{bail, Context, Result};
use serde_json::json;

/// Replays a journal without opening it for writing.
pub fn load_snapshot(journal: &Path, slot_secs: i64) -> Result<Snapshot> {
    let (records, torn) =
        read_records(journal).with_context(|| format!("reading {}", journal.display()))?;
    if let Some(offset) = torn {
        log::warn!("{}: ignoring torn tail at byte {offset}", journal.display());
    }
    Ok(Snapshot::from_records(&records, slot_secs))
}

#[derive(Debug, Clone)]
pub struct Export {
    pub document: String,
    pub triples: usize,
    pub violations: Vec<Violation>,
}

/// Ontology plus instance data, with the data checked against the constraints.
pub fn export(
    snapshot: &Snapshot,
    vocab: &Vocabulary,
    format: RdfFormat,
    with_ontology: bool,
) -> Export {
    let data = export_data(snapshot, vocab);
    let violations = validate_graph(&data, vocab);
    let mut triples = if with_ontology {
        export_ontology(vocab)
    } else {
        Vec::new()
    };
    triples.extend(data);
    Export {
        document: serialize(&triples, format, vocab),
        triples: triples.len(),
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsReport {
    Summary,
    Histogram(Scale),
    Tokens,
    Graph,
}

impl FromStr for StatsReport {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("histogram", scale)) => scale.parse().map(StatsReport::Histogram),
            None if s == "histogram" => Ok(StatsReport::Histogram(Scale::HourOfDay)),
            None if s == "summary" => Ok(StatsReport::Summary),
            None if s == "tokens" => Ok(StatsReport::Tokens),
            None if s == "graph" => Ok(StatsReport::Graph),
            _ => Err(format!("unknown report {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tabular {
    Json,
    Tsv,
}

/// Reads a stopword file: one word per line, `#` comments.
pub fn read_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect())
}

pub fn stats(
    snapshot: &Snapshot,
    report: StatsReport,
    options: &TextOptions,
    out: Tabular,
) -> String {
    let mut s = String::new();
    match report {
        StatsReport::Summary => {
            let st = summarize(snapshot);
            match out {
                Tabular::Json => s = serde_json::to_string_pretty(&st).expect("json"),
                Tabular::Tsv => {
                    for (k, v) in [
                        ("total", st.total),
                        ("users", st.users),
                        ("sessions", st.sessions),
                        ("sessions_reviewed", st.sessions_reviewed),
                        ("screencasts", st.screencasts),
                        ("reviews", st.reviews),
                    ] {
                        let _ = writeln!(s, "{k}\t{v}");
                    }
                    if let Some(m) = st.mean_score {
                        let _ = writeln!(s, "mean_score\t{m}");
                    }
                    for (k, v) in &st.by_kind {
                        let _ = writeln!(s, "kind:{k}\t{v}");
                    }
                    for (k, v) in &st.by_user {
                        let _ = writeln!(s, "user:{k}\t{v}");
                    }
                }
            }
        }
        StatsReport::Histogram(scale) => {
            let h = histogram(snapshot.shouts.iter().map(|x| x.created), scale);
            match out {
                Tabular::Json => s = serde_json::to_string_pretty(&h).expect("json"),
                Tabular::Tsv => {
                    for (label, count) in &h.bins {
                        let _ = writeln!(s, "{label}\t{count}");
                    }
                }
            }
        }
        StatsReport::Tokens => {
            let table = token_table(&shout_tokens(&snapshot.shouts, options), &SuffixStemmer);
            match out {
                Tabular::Json => s = serde_json::to_string_pretty(&table).expect("json"),
                Tabular::Tsv => {
                    let mut rows: Vec<(&String, &u64)> = table.radicals.iter().collect();
                    rows.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
                    for (radical, count) in rows {
                        let _ = writeln!(s, "{radical}\t{count}");
                    }
                }
            }
        }
        StatsReport::Graph => {
            let (graph, metrics) = cooccurrence(&shout_tokens(&snapshot.shouts, options));
            match out {
                Tabular::Json => {
                    let edges: Vec<_> = graph
                        .edges
                        .iter()
                        .map(|((a, b), w)| json!({ "a": a, "b": b, "weight": w }))
                        .collect();
                    let doc = json!({
                        "nodes": graph.nodes,
                        "edges": edges,
                        "isolated": graph.isolated,
                        "degree": metrics.degree,
                        "strength": metrics.strength,
                        "components": metrics.components,
                    });
                    s = serde_json::to_string_pretty(&doc).expect("json")
                }
                Tabular::Tsv => s = graph.edge_list(),
            }
        }
    }
    if !s.ends_with('\n') && !s.is_empty() {
        s.push('\n');
    }
    s
}

pub fn parse_mode(mode: &str, tags: &[String]) -> Result<SelectMode> {
    Ok(match mode {
        "prefix" => SelectMode::chat_prefix(),
        "tags" if tags.is_empty() => SelectMode::ubiquitous_tags(),
        "tags" => SelectMode::Tags(
            tags.iter()
                .map(|t| t.trim_start_matches('#').to_lowercase())
                .collect(),
        ),
        "all" => SelectMode::All,
        other => bail!("unknown mode {other:?}; expected prefix, tags or all"),
    })
}

/// Mines `specs` against the shouts already in `corpus`, then imports the
/// kept candidates into `journal` unless `dry_run`.
pub fn mine_into(
    specs: &[SourceSpec],
    mode: &SelectMode,
    key: DedupKey,
    corpus_journals: &[&Path],
    journal: &Path,
    config: StoreConfig,
    dry_run: bool,
) -> Result<MiningReport> {
    let mut corpus = Corpus::default();
    for path in corpus_journals {
        let snapshot = load_snapshot(path, config.slot_secs)?;
        for s in &snapshot.shouts {
            corpus.insert(&s.nick, &s.message);
        }
    }
    let outcome = mine(specs, mode, &corpus, key)?;
    if !dry_run && !outcome.kept.is_empty() {
        let mut store = Store::open(FileJournal::new(journal), Arc::new(SystemClock), config)
            .with_context(|| format!("opening {}", journal.display()))?;
        store.import(
            outcome
                .kept
                .iter()
                .map(|c| (c.nick.clone(), c.message.clone(), c.created))
                .collect(),
        )?;
    }
    Ok(outcome.report)
}
