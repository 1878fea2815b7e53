use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

/// Undirected weighted graph of tokens sharing a shout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceGraph {
    pub nodes: BTreeSet<String>,
    /// Keys are ordered pairs `(a, b)` with `a < b`.
    pub edges: BTreeMap<(String, String), u64>,
    /// Nodes that never shared a shout with another token.
    pub isolated: BTreeSet<String>,
}

impl CooccurrenceGraph {
    pub fn weight(&self, a: &str, b: &str) -> u64 {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.edges
            .get(&(key.0.to_string(), key.1.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// `a<TAB>b<TAB>weight` lines.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for ((a, b), w) in &self.edges {
            out.push_str(&format!("{a}\t{b}\t{w}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub degree: BTreeMap<String, u64>,
    pub strength: BTreeMap<String, u64>,
    pub components: usize,
}

/// Edge weight counts the shouts in which both tokens appear; repeated
/// tokens inside one shout count once.
pub fn cooccurrence(token_lists: &[Vec<String>]) -> (CooccurrenceGraph, GraphMetrics) {
    let mut graph = CooccurrenceGraph::default();
    for list in token_lists {
        let distinct: BTreeSet<&String> = list.iter().collect();
        let distinct: Vec<&String> = distinct.into_iter().collect();
        for (i, a) in distinct.iter().enumerate() {
            graph.nodes.insert((*a).clone());
            for b in &distinct[i + 1..] {
                *graph.edges.entry(((*a).clone(), (*b).clone())).or_default() += 1;
            }
        }
    }

    let index: BTreeMap<&str, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut uf = UnionFind::<usize>::new(graph.nodes.len());
    let mut metrics = GraphMetrics::default();
    for n in &graph.nodes {
        metrics.degree.insert(n.clone(), 0);
        metrics.strength.insert(n.clone(), 0);
    }
    for ((a, b), w) in &graph.edges {
        uf.union(index[a.as_str()], index[b.as_str()]);
        for n in [a, b] {
            *metrics.degree.get_mut(n).expect("node") += 1;
            *metrics.strength.get_mut(n).expect("node") += w;
        }
    }
    graph.isolated = metrics
        .degree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| n.clone())
        .collect();
    let roots: BTreeSet<usize> = (0..graph.nodes.len()).map(|i| uf.find(i)).collect();
    metrics.components = roots.len();
    (graph, metrics)
}
