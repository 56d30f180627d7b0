//! Centrality and clustering metrics over a co-occurrence graph.
//!
//! All measures run on the binary adjacency view: an edge either exists or
//! it does not, whatever its co-occurrence weight. Weighted degree is the
//! one reporting extra that looks at weights; rankings default to the
//! binary measures.
//!
//! Betweenness uses Brandes' dependency accumulation over unordered pairs
//! with endpoints excluded; closeness is the component-corrected normalized
//! form, so scores stay comparable when the network is disconnected.
//! Per-source work runs in parallel but is reduced in a fixed order, so
//! results are bit-identical regardless of thread count.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::cooccur::{BinaryAdjacency, CooccurrenceGraph};
use crate::ipc::IpcCode;

/// The metric a table or ranking carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Degree,
    WeightedDegree,
    Betweenness,
    Closeness,
    Clustering,
}

impl Measure {
    /// The four ranking measures; weighted degree is a reporting extra.
    pub const TABLE_MEASURES: [Measure; 4] =
        [Measure::Degree, Measure::Betweenness, Measure::Closeness, Measure::Clustering];

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::WeightedDegree => "weighted_degree",
            Measure::Betweenness => "betweenness",
            Measure::Closeness => "closeness",
            Measure::Clustering => "clustering",
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "degree" => Ok(Measure::Degree),
            "weighted-degree" => Ok(Measure::WeightedDegree),
            "betweenness" => Ok(Measure::Betweenness),
            "closeness" => Ok(Measure::Closeness),
            "clustering" => Ok(Measure::Clustering),
            other => Err(format!("unknown measure {other:?}")),
        }
    }
}

/// One metric evaluated for every node of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityTable {
    pub measure: Measure,
    pub normalized: bool,
    values: BTreeMap<IpcCode, f64>,
}

impl CentralityTable {
    fn from_adjacency(measure: Measure, normalized: bool, adj: &BinaryAdjacency, scores: Vec<f64>) -> Self {
        let values = adj.nodes().iter().copied().zip(scores).collect();
        CentralityTable { measure, normalized, values }
    }

    pub fn get(&self, node: &IpcCode) -> Option<f64> {
        self.values.get(node).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IpcCode, f64)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    /// Rows ordered by descending value, ties broken by the formatted symbol.
    /// This is the order every emitted table uses.
    fn ordered_rows(&self) -> Vec<(String, f64)> {
        let mut rows: Vec<(String, f64)> =
            self.values.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows
    }

    /// CSV table `node,value` in ranked order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,value\n");
        for (node, value) in self.ordered_rows() {
            out.push_str(&node);
            out.push(',');
            out.push_str(&value.to_string());
            out.push('\n');
        }
        out
    }

    /// Pretty JSON document with the measure, normalization flag, and ranked rows.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            node: &'a str,
            value: f64,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            measure: Measure,
            normalized: bool,
            rows: Vec<Row<'a>>,
        }
        let rows = self.ordered_rows();
        let doc = Doc {
            measure: self.measure,
            normalized: self.normalized,
            rows: rows.iter().map(|(node, value)| Row { node, value: *value }).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
    }
}

/// A top-k slice of a table: `(rank, node, value)` with rank starting at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub measure: Measure,
    pub rows: Vec<(usize, IpcCode, f64)>,
}

/// Number of direct neighbors in the binary graph; the normalized form
/// divides by `n - 1`.
pub fn degree_centrality(graph: &CooccurrenceGraph, normalized: bool) -> CentralityTable {
    let adj = graph.binary_adjacency();
    let n = adj.node_count();
    let scores = (0..n)
        .map(|i| {
            let d = adj.degree(i) as f64;
            if normalized && n >= 2 {
                d / (n - 1) as f64
            } else {
                d
            }
        })
        .collect();
    CentralityTable::from_adjacency(Measure::Degree, normalized, &adj, scores)
}

/// Sum of incident co-occurrence weights. A reporting aid only; rankings in
/// the standard tables stay on the binary measures.
pub fn weighted_degree(graph: &CooccurrenceGraph) -> CentralityTable {
    let mut values: BTreeMap<IpcCode, f64> = graph.nodes().map(|c| (*c, 0.0)).collect();
    for ((a, b), w) in graph.edges() {
        *values.get_mut(a).expect("endpoint in nodes") += w as f64;
        *values.get_mut(b).expect("endpoint in nodes") += w as f64;
    }
    CentralityTable { measure: Measure::WeightedDegree, normalized: false, values }
}

struct BrandesPass {
    dist: Vec<i32>,
    sigma: Vec<f64>,
    order: Vec<u32>,
    preds: Vec<Vec<u32>>,
}

fn bfs_shortest_paths(adj: &BinaryAdjacency, source: usize) -> BrandesPass {
    let n = adj.node_count();
    let mut dist = vec![-1i32; n];
    let mut sigma = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut queue = VecDeque::new();

    dist[source] = 0;
    sigma[source] = 1.0;
    queue.push_back(source as u32);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in adj.neighbors(v as usize) {
            if dist[w as usize] < 0 {
                dist[w as usize] = dist[v as usize] + 1;
                queue.push_back(w);
            }
            if dist[w as usize] == dist[v as usize] + 1 {
                sigma[w as usize] += sigma[v as usize];
                preds[w as usize].push(v);
            }
        }
    }
    BrandesPass { dist, sigma, order, preds }
}

fn brandes_source_deltas(adj: &BinaryAdjacency, source: usize) -> Vec<f64> {
    let pass = bfs_shortest_paths(adj, source);
    let mut delta = vec![0.0f64; adj.node_count()];
    for &w in pass.order.iter().rev() {
        let coeff = (1.0 + delta[w as usize]) / pass.sigma[w as usize];
        for &v in &pass.preds[w as usize] {
            delta[v as usize] += pass.sigma[v as usize] * coeff;
        }
    }
    delta[source] = 0.0;
    delta
}

/// Fraction of all-pairs shortest paths passing through each node, over
/// unordered pairs with endpoints excluded; disconnected pairs contribute 0.
/// The normalized form divides by `(n-1)(n-2)/2`.
pub fn betweenness_centrality(graph: &CooccurrenceGraph, normalized: bool) -> CentralityTable {
    let adj = graph.binary_adjacency();
    let n = adj.node_count();
    let mut scores = vec![0.0f64; n];
    // Sources run in parallel; the reduction below walks them in index order
    // so accumulation is bit-identical however the work was scheduled.
    let per_source: Vec<Vec<f64>> =
        (0..n).into_par_iter().map(|s| brandes_source_deltas(&adj, s)).collect();
    for deltas in &per_source {
        for (acc, d) in scores.iter_mut().zip(deltas) {
            *acc += d;
        }
    }
    // Each unordered pair was visited from both endpoints.
    for s in &mut scores {
        *s /= 2.0;
    }
    if normalized && n >= 3 {
        let norm = (n - 1) as f64 * (n - 2) as f64 / 2.0;
        for s in &mut scores {
            *s /= norm;
        }
    }
    CentralityTable::from_adjacency(Measure::Betweenness, normalized, &adj, scores)
}

/// Component-corrected normalized closeness: `(n_c - 1)/sum(d)` scaled by
/// `(n_c - 1)/(n - 1)` for a component of size `n_c`, so scores from
/// different components stay comparable. Isolated nodes score 0.
pub fn closeness_centrality(graph: &CooccurrenceGraph) -> CentralityTable {
    let adj = graph.binary_adjacency();
    let n = adj.node_count();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pass = bfs_shortest_paths(&adj, i);
            let reached = pass.order.len();
            if reached < 2 || n < 2 {
                return 0.0;
            }
            let total: i64 = pass.dist.iter().filter(|&&d| d > 0).map(|&d| d as i64).sum();
            let nc_minus_1 = (reached - 1) as f64;
            (nc_minus_1 / total as f64) * (nc_minus_1 / (n - 1) as f64)
        })
        .collect();
    CentralityTable::from_adjacency(Measure::Closeness, true, &adj, scores)
}

/// Local clustering coefficient `2T / (d(d-1))` where `T` counts edges among
/// a node's neighbors; nodes of degree < 2 score 0.
pub fn clustering_coefficient(graph: &CooccurrenceGraph) -> CentralityTable {
    let adj = graph.binary_adjacency();
    let n = adj.node_count();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nbrs = adj.neighbors(i);
            let d = nbrs.len();
            if d < 2 {
                return 0.0;
            }
            let mut triangles = 0u64;
            for (k, &u) in nbrs.iter().enumerate() {
                for &v in &nbrs[k + 1..] {
                    if adj.is_edge(u as usize, v as usize) {
                        triangles += 1;
                    }
                }
            }
            2.0 * triangles as f64 / (d as f64 * (d - 1) as f64)
        })
        .collect();
    CentralityTable::from_adjacency(Measure::Clustering, true, &adj, scores)
}

/// Top-`k` rows by descending value; ties resolve by the formatted symbol so
/// rankings are reproducible. Returns everything when `k` exceeds the table.
pub fn rank_top(table: &CentralityTable, k: usize) -> RankedList {
    let mut rows: Vec<(IpcCode, String, f64)> =
        table.iter().map(|(c, v)| (*c, c.to_string(), v)).collect();
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.1.cmp(&b.1)));
    RankedList {
        measure: table.measure,
        rows: rows
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, (code, _, v))| (i + 1, code, v))
            .collect(),
    }
}

/// Options shared by the measure dispatch below.
#[derive(Debug, Clone, Copy)]
pub struct MetricOptions {
    pub degree_normalized: bool,
    pub betweenness_normalized: bool,
}

impl Default for MetricOptions {
    fn default() -> Self {
        // Raw degrees match how co-occurrence tables are usually read
        // (integer counts); betweenness is conventionally reported in [0,1].
        MetricOptions { degree_normalized: false, betweenness_normalized: true }
    }
}

/// Computes one measure with the given options.
pub fn compute(graph: &CooccurrenceGraph, measure: Measure, options: MetricOptions) -> CentralityTable {
    match measure {
        Measure::Degree => degree_centrality(graph, options.degree_normalized),
        Measure::WeightedDegree => weighted_degree(graph),
        Measure::Betweenness => betweenness_centrality(graph, options.betweenness_normalized),
        Measure::Closeness => closeness_centrality(graph),
        Measure::Clustering => clustering_coefficient(graph),
    }
}
