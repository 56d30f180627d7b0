//! Deterministic input generators shared by the benchmarks.

use ipc_fusion_core::{
    GrowthModel, IpcCode, IpcLevel, PatentCorpus, PatentRecord, RecordDate, TimeSeries,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Distinct subclass-level code for index `i`.
pub fn node_code(i: usize) -> IpcCode {
    let section = IpcCode::SECTIONS[i % 8];
    let class = ((i / 8) % 100) as u8;
    let subclass = (b'A' + ((i / 800) % 26) as u8) as char;
    IpcCode::new(section, Some(class), Some(subclass), None, None).unwrap()
}

/// Corpus whose subclass-level co-occurrence graph is a random
/// `n_nodes`/`n_edges` graph: one two-code patent per edge.
pub fn random_graph_corpus(n_nodes: usize, n_edges: usize, seed: u64) -> PatentCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: HashSet<(usize, usize)> = HashSet::with_capacity(n_edges);
    while edges.len() < n_edges {
        let a = rng.gen_range(0..n_nodes);
        let b = rng.gen_range(0..n_nodes);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut records: Vec<PatentRecord> = (0..n_nodes)
        .map(|i| {
            PatentRecord::new(format!("N{i}"), RecordDate::Year(2015), vec![node_code(i)]).unwrap()
        })
        .collect();
    records.extend(edges.into_iter().enumerate().map(|(i, (a, b))| {
        PatentRecord::new(
            format!("E{i}"),
            RecordDate::Year(2015),
            vec![node_code(a), node_code(b)],
        )
        .unwrap()
    }));
    PatentCorpus::new(records).unwrap()
}

/// The subclass level every benchmark graph is built at.
pub const BENCH_LEVEL: IpcLevel = IpcLevel::Subclass;

/// Noiseless Gompertz series of `n` yearly points.
pub fn gompertz_series(l: f64, a: f64, b: f64, n: usize) -> TimeSeries {
    let points = (0..n)
        .map(|i| (2000 + i as i32, GrowthModel::Gompertz.predict(l, a, b, i as f64)))
        .collect();
    TimeSeries::new(points).unwrap()
}
