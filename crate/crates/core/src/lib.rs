//! Patent analytics over IPC classification codes.
//!
//! The pipeline runs in five stages, each usable on its own:
//!
//! 1. [`ipc`] — parse, truncate, and format IPC symbols across the
//!    section/class/subclass/main-group/subgroup hierarchy.
//! 2. [`corpus`] — load and validate patent records (CSV or JSONL), slice
//!    them into time windows, and derive annual or cumulative count series.
//! 3. [`cooccur`] — build the weighted co-occurrence network of IPC codes
//!    at a chosen level.
//! 4. [`metrics`] / [`fusion`] — rank technologies by degree, betweenness,
//!    closeness, and clustering, and measure cross-technology integration
//!    as unique-to-total code ratios.
//! 5. [`lifecycle`] / [`report`] — fit Gompertz/logistic growth curves to
//!    cumulative counts, classify maturity, forecast to saturation, and
//!    assemble the whole study into a deterministic output tree.
//!
//! Everything is deterministic: identical inputs produce byte-identical
//! tables, charts, and manifests regardless of thread count.

#![forbid(unsafe_code)]

pub mod cooccur;
pub mod corpus;
pub mod fusion;
pub mod ipc;
pub mod lifecycle;
pub mod metrics;
pub mod report;

pub use cooccur::{build_cooccurrence, BinaryAdjacency, CooccurrenceGraph};
pub use corpus::{
    annual_counts, load_corpus, slice_windows, CountMode, IngestFormat, IngestReport,
    PatentCorpus, PatentRecord, RecordDate, TimeSeries, WindowSpec,
};
pub use fusion::{degree_of_fusion, CountingMode, FusionTable};
pub use ipc::{format_ipc, parse_ipc, IpcCode, IpcError, IpcLevel};
pub use lifecycle::{
    fit_auto, fit_gompertz, fit_logistic, forecast, goodness_of_fit, maturity_phase, select_model,
    FitMetrics, FitReport, GrowthFit, GrowthModel, MaturityAssessment, MaturityPhase,
    PhaseThresholds,
};
pub use metrics::{
    betweenness_centrality, closeness_centrality, clustering_coefficient, degree_centrality,
    rank_top, weighted_degree, CentralityTable, Measure, MetricOptions, RankedList,
};
pub use report::{
    render_scurve_svg, run_study, window_evolution, EvolutionReport, Manifest, ModelChoice,
    StudyBundle, StudyConfig, StudyError,
};
