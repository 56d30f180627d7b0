//! IPC co-occurrence networks.
//!
//! Nodes are IPC codes truncated to one analysis level; an edge records that
//! two distinct codes appeared on the same patent, weighted by the number of
//! such patents. Codes are deduplicated within each patent before pairing,
//! so several raw codes collapsing onto one node contribute a single
//! assignment and never a self-loop. Codes too shallow for the analysis
//! level are dropped; a patent with no usable code is skipped and counted.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::corpus::PatentCorpus;
use crate::ipc::{IpcCode, IpcLevel};

#[derive(Debug, Error)]
pub enum CooccurError {
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Weighted undirected co-occurrence graph at a fixed IPC level.
///
/// Isolated nodes (codes that never co-occur) are retained: they carry
/// degree 0 in rankings and still count as technology areas elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceGraph {
    level: IpcLevel,
    patent_count: usize,
    skipped_patents: usize,
    nodes: BTreeSet<IpcCode>,
    edges: BTreeMap<(IpcCode, IpcCode), u32>,
}

impl CooccurrenceGraph {
    pub fn level(&self) -> IpcLevel {
        self.level
    }

    /// Number of patents that contributed at least one node.
    pub fn patent_count(&self) -> usize {
        self.patent_count
    }

    /// Patents skipped because none of their codes reach the analysis level.
    pub fn skipped_patents(&self) -> usize {
        self.skipped_patents
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &IpcCode> {
        self.nodes.iter()
    }

    pub fn contains_node(&self, node: &IpcCode) -> bool {
        self.nodes.contains(node)
    }

    /// Edges as `((a, b), weight)` with `a < b` in component order.
    pub fn edges(&self) -> impl Iterator<Item = (&(IpcCode, IpcCode), u32)> {
        self.edges.iter().map(|(k, w)| (k, *w))
    }

    /// Co-occurrence count for an unordered pair; `None` when the codes never
    /// co-occur (or are equal — the graph has no self-loops).
    pub fn weight(&self, a: &IpcCode, b: &IpcCode) -> Option<u32> {
        let key = if a < b { (*a, *b) } else { (*b, *a) };
        self.edges.get(&key).copied()
    }

    /// The binary 0/1 view of the graph used by all centrality measures.
    pub fn binary_adjacency(&self) -> BinaryAdjacency {
        let nodes: Vec<IpcCode> = self.nodes.iter().copied().collect();
        let index: BTreeMap<IpcCode, u32> =
            nodes.iter().enumerate().map(|(i, c)| (*c, i as u32)).collect();
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
        for (a, b) in self.edges.keys() {
            let (ia, ib) = (index[a], index[b]);
            neighbors[ia as usize].push(ib);
            neighbors[ib as usize].push(ia);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        BinaryAdjacency { nodes, neighbors }
    }

    /// Deterministic TSV edge list: `node_a<TAB>node_b<TAB>weight`, the pair
    /// ordered and the lines sorted lexicographically by formatted symbol.
    pub fn export_edges(&self) -> String {
        let mut lines: Vec<(String, String, u32)> = self
            .edges
            .iter()
            .map(|((a, b), w)| {
                let (a, b) = (a.to_string(), b.to_string());
                if a < b {
                    (a, b, *w)
                } else {
                    (b, a, *w)
                }
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        for (a, b, w) in lines {
            out.push_str(&a);
            out.push('\t');
            out.push_str(&b);
            out.push('\t');
            out.push_str(&w.to_string());
            out.push('\n');
        }
        out
    }
}

/// Index-based binary adjacency: `nodes` sorted ascending, neighbor lists
/// sorted, no self-loops. `G_ij` is 1 exactly when `j` appears in
/// `neighbors(i)`.
#[derive(Debug, Clone)]
pub struct BinaryAdjacency {
    nodes: Vec<IpcCode>,
    neighbors: Vec<Vec<u32>>,
}

impl BinaryAdjacency {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[IpcCode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> IpcCode {
        self.nodes[i]
    }

    pub fn index_of(&self, code: &IpcCode) -> Option<usize> {
        self.nodes.binary_search(code).ok()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Builds the co-occurrence graph for `corpus` at `level`. Every unordered
/// pair of distinct truncated codes within one patent adds exactly 1 to its
/// edge weight; a lone code still becomes a node.
pub fn build_cooccurrence(
    corpus: &PatentCorpus,
    level: IpcLevel,
) -> Result<CooccurrenceGraph, CooccurError> {
    if corpus.is_empty() {
        return Err(CooccurError::EmptyCorpus);
    }
    let mut graph = CooccurrenceGraph {
        level,
        patent_count: 0,
        skipped_patents: 0,
        nodes: BTreeSet::new(),
        edges: BTreeMap::new(),
    };
    for record in corpus.records() {
        let truncated: BTreeSet<IpcCode> =
            record.codes().iter().filter_map(|c| c.truncate(level).ok()).collect();
        if truncated.is_empty() {
            graph.skipped_patents += 1;
            continue;
        }
        graph.patent_count += 1;
        graph.nodes.extend(truncated.iter().copied());
        let list: Vec<IpcCode> = truncated.into_iter().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                *graph.edges.entry((*a, *b)).or_insert(0) += 1;
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PatentRecord, RecordDate};
    use crate::ipc::parse_ipc;
    use proptest::prelude::*;

    fn corpus_of(patents: &[&[&str]]) -> PatentCorpus {
        let records = patents
            .iter()
            .enumerate()
            .map(|(i, codes)| {
                PatentRecord::new(
                    format!("P{i}"),
                    RecordDate::Year(2015),
                    codes.iter().map(|c| parse_ipc(c).unwrap()).collect(),
                )
                .unwrap()
            })
            .collect();
        PatentCorpus::new(records).unwrap()
    }

    fn code(s: &str) -> IpcCode {
        parse_ipc(s).unwrap()
    }

    #[test]
    fn within_patent_dedup_kills_self_loops() {
        let corpus = corpus_of(&[&["G06F17", "G06F9"]]);
        let graph = build_cooccurrence(&corpus, IpcLevel::Subclass).unwrap();
        assert_eq!(graph.node_count(), 1);
        assert_eq!(graph.edge_count(), 0);
        assert!(graph.contains_node(&code("G06F")));
    }

    #[test]
    fn counts_patents_per_pair() {
        let corpus = corpus_of(&[&["G06F", "H04L"], &["G06F", "H04L"], &["G06F", "G06N"]]);
        let graph = build_cooccurrence(&corpus, IpcLevel::Subclass).unwrap();
        assert_eq!(graph.node_count(), 3);
        assert_eq!(graph.weight(&code("G06F"), &code("H04L")), Some(2));
        assert_eq!(graph.weight(&code("H04L"), &code("G06F")), Some(2));
        assert_eq!(graph.weight(&code("G06F"), &code("G06N")), Some(1));
        assert_eq!(graph.weight(&code("H04L"), &code("G06N")), None);
        assert_eq!(graph.patent_count(), 3);
    }

    #[test]
    fn one_patent_makes_a_complete_graph() {
        let corpus = corpus_of(&[&["A", "B", "C"]]);
        let graph = build_cooccurrence(&corpus, IpcLevel::Section).unwrap();
        assert_eq!(graph.node_count(), 3);
        assert_eq!(graph.edge_count(), 3);
        assert!(graph.edges().all(|(_, w)| w == 1));
    }

    #[test]
    fn shallow_codes_are_dropped_and_counted() {
        let corpus = corpus_of(&[&["A", "G06F"], &["B"]]);
        let graph = build_cooccurrence(&corpus, IpcLevel::Subclass).unwrap();
        assert_eq!(graph.node_count(), 1);
        assert_eq!(graph.patent_count(), 1);
        assert_eq!(graph.skipped_patents(), 1);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let corpus = PatentCorpus::default();
        assert!(matches!(
            build_cooccurrence(&corpus, IpcLevel::Subclass),
            Err(CooccurError::EmptyCorpus)
        ));
    }

    #[test]
    fn binary_adjacency_is_symmetric_with_zero_diagonal() {
        let corpus = corpus_of(&[&["G06F", "H04L"], &["G06F", "H04L"], &["G06F", "G06N"]]);
        let adj = build_cooccurrence(&corpus, IpcLevel::Subclass).unwrap().binary_adjacency();
        for i in 0..adj.node_count() {
            assert!(!adj.is_edge(i, i));
            for j in 0..adj.node_count() {
                assert_eq!(adj.is_edge(i, j), adj.is_edge(j, i));
            }
        }
        // weight 2 still shows as a single binary edge
        let (f, h) = (adj.index_of(&code("G06F")).unwrap(), adj.index_of(&code("H04L")).unwrap());
        assert!(adj.is_edge(f, h));
    }

    #[test]
    fn export_is_sorted_and_round_trips() {
        let corpus = corpus_of(&[&["G06F", "H04L"], &["G06F", "H04L"], &["G06F", "G06N"]]);
        let graph = build_cooccurrence(&corpus, IpcLevel::Subclass).unwrap();
        let tsv = graph.export_edges();
        assert_eq!(tsv, "G06F\tG06N\t1\nG06F\tH04L\t2\n");

        let mut reparsed: Vec<(IpcCode, IpcCode, u32)> = tsv
            .lines()
            .map(|line| {
                let mut parts = line.split('\t');
                (
                    parse_ipc(parts.next().unwrap()).unwrap(),
                    parse_ipc(parts.next().unwrap()).unwrap(),
                    parts.next().unwrap().parse().unwrap(),
                )
            })
            .collect();
        reparsed.sort();
        let mut original: Vec<(IpcCode, IpcCode, u32)> =
            graph.edges().map(|((a, b), w)| (*a, *b, w)).collect();
        original.sort();
        assert_eq!(reparsed, original);
    }

    #[test]
    fn export_orders_main_groups_lexicographically() {
        // Numeric component order would put G06K9 before G06K17; the TSV
        // contract is text order.
        let corpus = corpus_of(&[&["G06K9", "G06K17"]]);
        let graph = build_cooccurrence(&corpus, IpcLevel::MainGroup).unwrap();
        assert_eq!(graph.export_edges(), "G06K17\tG06K9\t1\n");
    }

    #[test]
    fn empty_graph_exports_empty_string() {
        let corpus = corpus_of(&[&["G06F"]]);
        let graph = build_cooccurrence(&corpus, IpcLevel::Subclass).unwrap();
        assert_eq!(graph.export_edges(), "");
    }

    prop_compose! {
        fn arb_patent_codes()(codes in prop::collection::vec(
            (prop::sample::select(vec!['A', 'B', 'G', 'H']),
             0u8..4,
             prop::sample::select(vec!['F', 'K', 'L', 'N']),
             1u16..4),
            1..6,
        )) -> Vec<IpcCode> {
            codes
                .into_iter()
                .map(|(s, c, sc, g)| IpcCode::new(s, Some(c), Some(sc), Some(g), None).unwrap())
                .collect()
        }
    }

    proptest! {
        #[test]
        fn weights_bounded_by_patent_count(patents in prop::collection::vec(arb_patent_codes(), 1..25)) {
            let records: Vec<PatentRecord> = patents
                .into_iter()
                .enumerate()
                .map(|(i, codes)| PatentRecord::new(format!("P{i}"), RecordDate::Year(2015), codes).unwrap())
                .collect();
            let corpus = PatentCorpus::new(records).unwrap();
            for level in [IpcLevel::Section, IpcLevel::Subclass, IpcLevel::MainGroup] {
                let graph = build_cooccurrence(&corpus, level).unwrap();
                for (_, w) in graph.edges() {
                    prop_assert!(w >= 1 && w as usize <= graph.patent_count());
                }
            }
        }

        #[test]
        fn union_never_decreases_weights(first in prop::collection::vec(arb_patent_codes(), 1..15),
                                         extra in prop::collection::vec(arb_patent_codes(), 1..15)) {
            let make = |patents: &[Vec<IpcCode>], offset: usize| {
                patents
                    .iter()
                    .enumerate()
                    .map(|(i, codes)| {
                        PatentRecord::new(format!("P{}", offset + i), RecordDate::Year(2015), codes.clone()).unwrap()
                    })
                    .collect::<Vec<_>>()
            };
            let base = PatentCorpus::new(make(&first, 0)).unwrap();
            let mut all = make(&first, 0);
            all.extend(make(&extra, first.len()));
            let merged = PatentCorpus::new(all).unwrap();

            let g1 = build_cooccurrence(&base, IpcLevel::Subclass).unwrap();
            let g2 = build_cooccurrence(&merged, IpcLevel::Subclass).unwrap();
            for ((a, b), w) in g1.edges() {
                prop_assert!(g2.weight(a, b).unwrap_or(0) >= w);
            }
        }

        #[test]
        fn coarsening_never_adds_nodes(patents in prop::collection::vec(arb_patent_codes(), 1..15)) {
            let records: Vec<PatentRecord> = patents
                .into_iter()
                .enumerate()
                .map(|(i, codes)| PatentRecord::new(format!("P{i}"), RecordDate::Year(2015), codes).unwrap())
                .collect();
            let corpus = PatentCorpus::new(records).unwrap();
            let coarse = build_cooccurrence(&corpus, IpcLevel::Section).unwrap();
            let fine = build_cooccurrence(&corpus, IpcLevel::Subclass).unwrap();
            prop_assert!(coarse.node_count() <= fine.node_count());
        }
    }
}
