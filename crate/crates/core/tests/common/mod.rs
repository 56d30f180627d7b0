//! Shared test fixtures and independent oracles.
//!
//! The graph oracles deliberately avoid the library's algorithms: distances
//! come from Floyd-Warshall, shortest-path counts from explicit enumeration
//! of simple paths, clustering from the raw adjacency matrix. They are only
//! viable for tiny graphs, which is the point — they cross-check the real
//! implementations from a different direction.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)] // index math mirrors the adjacency-matrix formulas

use ipc_fusion_core::{
    CooccurrenceGraph, GrowthModel, IpcCode, IpcLevel, PatentCorpus, PatentRecord, RecordDate,
    TimeSeries,
};
use rand::Rng;

/// Distinct subclass-level code for index `i` (supports a few thousand).
pub fn node_code(i: usize) -> IpcCode {
    let section = IpcCode::SECTIONS[i % 8];
    let class = ((i / 8) % 100) as u8;
    let subclass = (b'A' + ((i / 800) % 26) as u8) as char;
    IpcCode::new(section, Some(class), Some(subclass), None, None).unwrap()
}

/// Section-level code for index `i < 8`.
pub fn section_code(i: usize) -> IpcCode {
    IpcCode::new(IpcCode::SECTIONS[i], None, None, None, None).unwrap()
}

/// Builds a corpus whose co-occurrence graph at `level` is exactly the given
/// binary graph: one two-code patent per edge, one single-code patent per
/// node (so isolated nodes exist too).
pub fn corpus_for_graph(
    nodes: &[IpcCode],
    edges: &[(usize, usize)],
    year: i32,
) -> PatentCorpus {
    let mut records = Vec::with_capacity(nodes.len() + edges.len());
    for (i, node) in nodes.iter().enumerate() {
        records.push(PatentRecord::new(format!("N{i}"), RecordDate::Year(year), vec![*node]).unwrap());
    }
    for (i, (a, b)) in edges.iter().enumerate() {
        records.push(
            PatentRecord::new(format!("E{i}"), RecordDate::Year(year), vec![nodes[*a], nodes[*b]])
                .unwrap(),
        );
    }
    PatentCorpus::new(records).unwrap()
}

/// Random binary graph as an adjacency matrix: `n` nodes, each edge present
/// with probability `density`.
pub fn random_adjacency(rng: &mut impl Rng, n: usize, density: f64) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    adj
}

pub fn adjacency_edges(adj: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = adj.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if adj[i][j] {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Graph built through the real pipeline from an adjacency matrix, nodes at
/// section level (so n must be at most 8).
pub fn graph_from_adjacency(adj: &[Vec<bool>]) -> CooccurrenceGraph {
    let n = adj.len();
    assert!(n <= 8, "section-level node pool holds 8 codes");
    let nodes: Vec<IpcCode> = (0..n).map(section_code).collect();
    let corpus = corpus_for_graph(&nodes, &adjacency_edges(adj), 2015);
    ipc_fusion_core::build_cooccurrence(&corpus, IpcLevel::Section).unwrap()
}

// ---------------------------------------------------------------------------
// Graph oracles (exhaustive, tiny-n only)
// ---------------------------------------------------------------------------

/// All-pairs hop distances by Floyd-Warshall; `None` marks unreachable.
pub fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<Option<u32>>> {
    let n = adj.len();
    let mut dist: Vec<Vec<Option<u32>>> = vec![vec![None; n]; n];
    for i in 0..n {
        dist[i][i] = Some(0);
        for j in 0..n {
            if adj[i][j] {
                dist[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (dist[i][k], dist[k][j]) {
                    if dist[i][j].is_none_or(|d| a + b < d) {
                        dist[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    dist
}

fn all_simple_paths(adj: &[Vec<bool>], from: usize, to: usize) -> Vec<Vec<usize>> {
    fn dfs(
        adj: &[Vec<bool>],
        current: usize,
        to: usize,
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current == to {
            out.push(path.clone());
            return;
        }
        for next in 0..adj.len() {
            if adj[current][next] && !visited[next] {
                visited[next] = true;
                path.push(next);
                dfs(adj, next, to, visited, path, out);
                path.pop();
                visited[next] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut visited = vec![false; adj.len()];
    visited[from] = true;
    dfs(adj, from, to, &mut visited, &mut vec![from], &mut out);
    out
}

/// Raw betweenness over unordered pairs, endpoints excluded, by enumerating
/// every simple path and keeping the shortest ones.
pub fn betweenness_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let mut scores = vec![0.0; n];
    for j in 0..n {
        for k in (j + 1)..n {
            let paths = all_simple_paths(adj, j, k);
            let Some(min_len) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let shortest: Vec<&Vec<usize>> =
                paths.iter().filter(|p| p.len() == min_len).collect();
            let sigma = shortest.len() as f64;
            for path in shortest {
                for &node in &path[1..path.len() - 1] {
                    scores[node] += 1.0 / sigma;
                }
            }
        }
    }
    scores
}

/// Component-corrected normalized closeness from Floyd-Warshall distances.
pub fn closeness_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let dist = floyd_warshall(adj);
    (0..n)
        .map(|i| {
            let reachable: Vec<u32> =
                (0..n).filter(|&j| j != i).filter_map(|j| dist[i][j]).collect();
            if reachable.is_empty() || n < 2 {
                return 0.0;
            }
            let nc_minus_1 = reachable.len() as f64;
            let total: u32 = reachable.iter().sum();
            (nc_minus_1 / total as f64) * (nc_minus_1 / (n - 1) as f64)
        })
        .collect()
}

pub fn degree_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    adj.iter().map(|row| row.iter().filter(|&&e| e).count() as f64).collect()
}

pub fn clustering_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    (0..n)
        .map(|i| {
            let neighbors: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
            let d = neighbors.len();
            if d < 2 {
                return 0.0;
            }
            let mut t = 0u64;
            for (a, &u) in neighbors.iter().enumerate() {
                for &v in &neighbors[a + 1..] {
                    if adj[u][v] {
                        t += 1;
                    }
                }
            }
            2.0 * t as f64 / (d as f64 * (d - 1) as f64)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Growth-series generators
// ---------------------------------------------------------------------------

/// Noiseless series from a growth model on an integer year grid that spans
/// the inflection: `n` points spread over about 2.2x the inflection time.
pub fn model_series(model: GrowthModel, l: f64, a: f64, b: f64, t0: i32, n: usize) -> TimeSeries {
    let t_star = a.ln() / b;
    let t_max = (2.2 * t_star).max((n - 1) as f64);
    let points = (0..n)
        .map(|i| {
            let t = (i as f64 * t_max / (n - 1) as f64).round();
            (t0 + t as i32, model.predict(l, a, b, t))
        })
        .collect();
    TimeSeries::new(points).unwrap()
}

/// Applies multiplicative Gaussian noise `value * (1 + sigma * eps)`.
pub fn with_multiplicative_noise(
    series: &TimeSeries,
    sigma: f64,
    rng: &mut impl Rng,
) -> TimeSeries {
    use rand_distr::{Distribution, StandardNormal};
    let points = series
        .points()
        .iter()
        .map(|(year, value)| {
            let eps: f64 = StandardNormal.sample(rng);
            (*year, (value * (1.0 + sigma * eps)).max(0.0))
        })
        .collect();
    TimeSeries::new(points).unwrap()
}

// ---------------------------------------------------------------------------
// Minimal XML well-formedness check (enough for SVG output)
// ---------------------------------------------------------------------------

/// Panics unless `text` is a single-rooted, properly nested XML document
/// with quoted attributes. A scanner, not a full parser, but independent of
/// how the SVG writer builds its markup.
pub fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0usize;
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        let before = &rest[..start];
        assert!(
            !stack.is_empty() || before.trim().is_empty(),
            "text outside the root element: {before:?}"
        );
        let end = rest[start..].find('>').expect("unclosed tag") + start;
        let tag = &rest[start + 1..end];
        assert!(!tag.is_empty(), "empty tag");
        assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in <{tag}>");
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack.pop().unwrap_or_else(|| panic!("stray closing tag </{name}>"));
            assert_eq!(open, name.trim(), "mismatched closing tag");
        } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
            let name = tag.split_whitespace().next().unwrap().to_string();
            if stack.is_empty() {
                roots += 1;
            }
            stack.push(name);
        } else if tag.ends_with('/') && stack.is_empty() {
            roots += 1;
        }
        rest = &rest[end + 1..];
    }
    assert!(stack.is_empty(), "unclosed elements: {stack:?}");
    assert!(rest.trim().is_empty() || !rest.contains('<'), "trailing markup");
    assert_eq!(roots, 1, "expected exactly one root element");
}

// ---------------------------------------------------------------------------
// Fixture corpus
// ---------------------------------------------------------------------------

/// Deterministic 40-patent corpus over 2012-2021 exercising every pipeline
/// stage: multi-section codes, main groups and subgroups, duplicate codes
/// collapsing at subclass level, a section-only code, and year-over-year
/// growth so the cumulative series is fittable.
pub fn fixture_corpus() -> PatentCorpus {
    let (corpus, report) = ipc_fusion_core::load_corpus(
        fixture_csv().as_bytes(),
        ipc_fusion_core::IngestFormat::Csv,
    )
    .expect("fixture parses");
    assert_eq!(report.rows_skipped(), 0, "fixture rows are all valid");
    corpus
}

/// The fixture as CSV text, usable to exercise ingestion itself.
pub fn fixture_csv() -> String {
    let pool = [
        "G06F17/30", "H04L29/06", "G06N3/08", "G06K9/62", "G06T7/00", "A61B5/00", "G06Q10/04",
        "G10L15/22", "B25J9/16", "G05B13/02",
    ];
    let mut out = String::from("patent_id,date,ipc_codes\n");
    let mut id = 0;
    for (yi, year) in (2012..=2021).enumerate() {
        let patents = 2 + yi / 2;
        for p in 0..patents {
            let a = pool[(yi + p) % pool.len()];
            let b = pool[(yi + p * 3 + 1) % pool.len()];
            let codes = if p == 0 && yi % 4 == 0 {
                // Same subclass twice: collapses to one node at subclass level.
                format!("{a};G06F9/00")
            } else if p == 1 && yi % 5 == 0 {
                // A bare section code rides along; too shallow for subclass analyses.
                format!("{a};{b};A")
            } else {
                format!("{a};{b}")
            };
            out.push_str(&format!("P{id:03},{year}-06-15,{codes}\n"));
            id += 1;
        }
    }
    out
}
