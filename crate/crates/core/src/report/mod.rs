//! Report assembly: windowed evolution tables, the end-to-end study driver,
//! and the S-curve chart.
//!
//! A study run writes a fixed output tree under the configured directory:
//!
//! ```text
//! centrality/<measure>.csv|json   degree, betweenness, closeness, clustering
//! fusion/<level>.csv|json         section, class, subclass
//! lifecycle/fit.json              fitted parameters + life-cycle readout
//! lifecycle/forecast.csv          yearly predictions through the horizon
//! lifecycle/scurve.svg            observed points vs fitted curve
//! evolution/evolution.json        per-window rankings and tracked nodes
//! manifest.json                   every artifact with its SHA-256
//! ```
//!
//! Identical inputs produce a byte-identical tree, whatever the thread
//! count, so the manifest doubles as a reproducibility receipt.

mod svg;

pub use svg::render_scurve_svg;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cooccur::build_cooccurrence;
use crate::corpus::{annual_counts, slice_windows, CountMode, PatentCorpus, WindowSpec};
use crate::fusion::{degree_of_fusion, CountingMode};
use crate::ipc::{IpcCode, IpcLevel};
use crate::lifecycle::{
    fit_auto, fit_gompertz, fit_logistic, forecast, forecast_to_csv, maturity_phase, FitReport,
    GrowthFit, PhaseThresholds,
};
use crate::metrics::{compute, rank_top, CentralityTable, Measure, MetricOptions, RankedList};

/// A study failure, tagged with the pipeline stage that raised it.
#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct StudyError {
    pub stage: &'static str,
    pub message: String,
}

impl StudyError {
    pub fn new(stage: &'static str, message: impl fmt::Display) -> Self {
        StudyError { stage, message: message.to_string() }
    }
}

/// Which growth model the lifecycle stage fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Auto,
    Gompertz,
    Logistic,
}

impl FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(ModelChoice::Auto),
            "gompertz" => Ok(ModelChoice::Gompertz),
            "logistic" => Ok(ModelChoice::Logistic),
            other => Err(format!("unknown model {other:?} (expected auto|gompertz|logistic)")),
        }
    }
}

/// Everything a study run needs. Field-by-field this mirrors the config-file
/// keys the CLI accepts; command-line flags override file values.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    /// IPC level for the co-occurrence graph and evolution report.
    pub analysis_level: IpcLevel,
    /// IPC level at which fusion counts distinct codes.
    pub counting_level: IpcLevel,
    /// Window boundaries for the evolution report.
    pub window_boundaries: Vec<i32>,
    /// Rows per ranking.
    pub top_k: usize,
    pub degree_normalized: bool,
    pub betweenness_normalized: bool,
    /// Whether fusion deduplicates codes within a patent or counts raw occurrences.
    pub fusion_mode: CountingMode,
    pub model: ModelChoice,
    /// Forecast length in years past the fit origin.
    pub horizon_years: u32,
    /// Measure driving the evolution report.
    pub evolution_measure: Measure,
    pub output_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            analysis_level: IpcLevel::Subclass,
            counting_level: IpcLevel::Subclass,
            window_boundaries: WindowSpec::default_frames().boundaries().to_vec(),
            top_k: 10,
            degree_normalized: false,
            betweenness_normalized: true,
            fusion_mode: CountingMode::Deduplicated,
            model: ModelChoice::Auto,
            horizon_years: 40,
            evolution_measure: Measure::Degree,
            output_dir: PathBuf::from("study-out"),
        }
    }
}

impl StudyConfig {
    pub fn metric_options(&self) -> MetricOptions {
        MetricOptions {
            degree_normalized: self.degree_normalized,
            betweenness_normalized: self.betweenness_normalized,
        }
    }

    fn validate(&self) -> Result<WindowSpec, StudyError> {
        if self.top_k == 0 {
            return Err(StudyError::new("config", "top_k must be at least 1"));
        }
        if self.counting_level < IpcLevel::Subclass {
            return Err(StudyError::new(
                "config",
                "counting_level must be subclass or deeper (the fusion tables go down to subclass)",
            ));
        }
        WindowSpec::new(self.window_boundaries.clone()).map_err(|e| StudyError::new("config", e))
    }
}

/// One window of the evolution report. `table` is absent when the window
/// held no usable patents.
#[derive(Debug, Clone)]
pub struct EvolutionWindow {
    pub label: String,
    pub patent_count: usize,
    pub ranked: RankedList,
    table: Option<CentralityTable>,
}

/// A node that reached some window's top-k, with its value in every window
/// (`None` where the node does not exist in that window's graph).
#[derive(Debug, Clone)]
pub struct TrackedNode {
    pub node: IpcCode,
    pub values: Vec<Option<f64>>,
}

/// Per-window rankings plus cross-window trajectories of the union of
/// top-k nodes.
#[derive(Debug, Clone)]
pub struct EvolutionReport {
    pub measure: Measure,
    pub level: IpcLevel,
    pub windows: Vec<EvolutionWindow>,
    pub tracked: Vec<TrackedNode>,
}

impl EvolutionReport {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct RowDoc {
            rank: usize,
            node: String,
            value: f64,
        }
        #[derive(Serialize)]
        struct WindowDoc {
            label: String,
            patent_count: usize,
            rows: Vec<RowDoc>,
        }
        #[derive(Serialize)]
        struct TrackedDoc {
            node: String,
            values: Vec<Option<f64>>,
        }
        #[derive(Serialize)]
        struct Doc {
            measure: Measure,
            level: IpcLevel,
            windows: Vec<WindowDoc>,
            tracked: Vec<TrackedDoc>,
        }
        let doc = Doc {
            measure: self.measure,
            level: self.level,
            windows: self
                .windows
                .iter()
                .map(|w| WindowDoc {
                    label: w.label.clone(),
                    patent_count: w.patent_count,
                    rows: w
                        .ranked
                        .rows
                        .iter()
                        .map(|(rank, node, value)| RowDoc {
                            rank: *rank,
                            node: node.to_string(),
                            value: *value,
                        })
                        .collect(),
                })
                .collect(),
            tracked: self
                .tracked
                .iter()
                .map(|t| TrackedDoc { node: t.node.to_string(), values: t.values.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }
}

/// Builds the per-window ranking report: slices the corpus, builds one graph
/// per window, ranks the measure, and traces every node that made any
/// window's top-k across all windows. Empty windows are reported as empty
/// and the run continues.
pub fn window_evolution(
    corpus: &PatentCorpus,
    spec: &WindowSpec,
    level: IpcLevel,
    k: usize,
    measure: Measure,
    options: MetricOptions,
) -> EvolutionReport {
    let slices = slice_windows(corpus, spec);
    let mut windows: Vec<EvolutionWindow> = Vec::with_capacity(slices.windows.len());
    for (label, window_corpus) in slices.windows {
        match build_cooccurrence(&window_corpus, level) {
            Ok(graph) => {
                let table = compute(&graph, measure, options);
                windows.push(EvolutionWindow {
                    label,
                    patent_count: graph.patent_count(),
                    ranked: rank_top(&table, k),
                    table: Some(table),
                });
            }
            Err(_) => windows.push(EvolutionWindow {
                label,
                patent_count: 0,
                ranked: RankedList { measure, rows: Vec::new() },
                table: None,
            }),
        }
    }

    let mut tracked_set: BTreeSet<(String, IpcCode)> = BTreeSet::new();
    for window in &windows {
        for (_, node, _) in &window.ranked.rows {
            tracked_set.insert((node.to_string(), *node));
        }
    }
    let tracked = tracked_set
        .into_iter()
        .map(|(_, node)| TrackedNode {
            node,
            values: windows
                .iter()
                .map(|w| w.table.as_ref().and_then(|t| t.get(&node)))
                .collect(),
        })
        .collect();

    EvolutionReport { measure, level, windows, tracked }
}

/// One artifact in the study manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Content listing of a study's output tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub artifacts: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// Handle to a finished study: where it went and what it wrote.
#[derive(Debug, Clone)]
pub struct StudyBundle {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

struct Emitter {
    out_dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Emitter {
    fn write(&mut self, rel_path: &str, bytes: &[u8]) -> Result<(), StudyError> {
        let path = self.out_dir.join(rel_path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| StudyError::new("write", format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, bytes)
            .map_err(|e| StudyError::new("write", format!("{}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        self.entries.push(ManifestEntry {
            path: rel_path.to_owned(),
            sha256,
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

fn fit_for(choice: ModelChoice, series: &crate::corpus::TimeSeries) -> Result<GrowthFit, StudyError> {
    let result = match choice {
        ModelChoice::Auto => fit_auto(series),
        ModelChoice::Gompertz => fit_gompertz(series),
        ModelChoice::Logistic => fit_logistic(series),
    };
    result.map_err(|e| StudyError::new("lifecycle", e))
}

/// Runs the whole pipeline over `corpus` and writes the output tree
/// described in the module docs. Fails with the first stage that cannot
/// proceed; reruns over identical inputs produce byte-identical artifacts.
pub fn run_study(corpus: &PatentCorpus, config: &StudyConfig) -> Result<StudyBundle, StudyError> {
    let spec = config.validate()?;
    if corpus.is_empty() {
        return Err(StudyError::new("ingest", "corpus is empty"));
    }
    let mut emitter = Emitter { out_dir: config.output_dir.clone(), entries: Vec::new() };

    // Centrality tables on the full-corpus graph.
    let graph = build_cooccurrence(corpus, config.analysis_level)
        .map_err(|e| StudyError::new("graph", e))?;
    for measure in Measure::TABLE_MEASURES {
        let table = compute(&graph, measure, config.metric_options());
        emitter.write(&format!("centrality/{}.csv", measure.name()), table.to_csv().as_bytes())?;
        emitter.write(&format!("centrality/{}.json", measure.name()), table.to_json().as_bytes())?;
    }

    // Fusion at the three segment granularities.
    for segment_level in [IpcLevel::Section, IpcLevel::Class, IpcLevel::Subclass] {
        let table = degree_of_fusion(corpus, segment_level, config.counting_level, config.fusion_mode)
            .map_err(|e| StudyError::new("fusion", e))?;
        let include_missing = segment_level == IpcLevel::Section;
        emitter.write(
            &format!("fusion/{}.csv", segment_level.name()),
            table.to_csv(include_missing).as_bytes(),
        )?;
        emitter.write(&format!("fusion/{}.json", segment_level.name()), table.to_json().as_bytes())?;
    }

    // Life cycle on the cumulative series.
    let cumulative = annual_counts(corpus, CountMode::Cumulative)
        .map_err(|e| StudyError::new("lifecycle", e))?;
    let fit = fit_for(config.model, &cumulative)?;
    let last_year = cumulative.last_year().expect("non-empty series");
    let assessment = maturity_phase(&fit, last_year, &PhaseThresholds::default());
    emitter.write("lifecycle/fit.json", FitReport::new(&fit, &assessment).to_json().as_bytes())?;
    let fc = forecast(&fit, config.horizon_years);
    emitter.write("lifecycle/forecast.csv", forecast_to_csv(&fc).as_bytes())?;
    let mut svg_bytes = Vec::new();
    render_scurve_svg(&cumulative, &fit, &mut svg_bytes)
        .map_err(|e| StudyError::new("write", format!("scurve.svg: {e}")))?;
    emitter.write("lifecycle/scurve.svg", &svg_bytes)?;

    // Evolution across the configured windows.
    let evolution = window_evolution(
        corpus,
        &spec,
        config.analysis_level,
        config.top_k,
        config.evolution_measure,
        config.metric_options(),
    );
    emitter.write("evolution/evolution.json", evolution.to_json().as_bytes())?;

    let mut entries = emitter.entries;
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { artifacts: entries };
    let manifest_path = config.output_dir.join("manifest.json");
    fs::write(&manifest_path, manifest.to_json().as_bytes())
        .map_err(|e| StudyError::new("write", format!("{}: {e}", manifest_path.display())))?;

    Ok(StudyBundle { out_dir: config.output_dir.clone(), manifest })
}
