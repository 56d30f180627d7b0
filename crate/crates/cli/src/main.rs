//! `ipc-fusion`: command-line front end for the patent analytics pipeline.
//!
//! Every subcommand is a thin composition of library calls: load a corpus,
//! run one stage (or the whole study), print data on stdout. Diagnostics go
//! to stderr only. Exit codes: 0 on success, 1 on domain errors (reported as
//! a single `error: <stage>: <reason>` line), 2 on usage errors.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ipc_fusion_core::{
    annual_counts, build_cooccurrence, degree_of_fusion, fit_auto, fit_gompertz, fit_logistic,
    forecast, load_corpus, maturity_phase, rank_top, render_scurve_svg, run_study,
    window_evolution, CountMode, CountingMode, FitReport, GrowthFit, IngestFormat, IngestReport,
    IpcLevel, Measure, MetricOptions, ModelChoice, PatentCorpus, PhaseThresholds, StudyConfig,
    WindowSpec,
};

#[derive(Parser)]
#[command(
    name = "ipc-fusion",
    version,
    about = "IPC co-occurrence networks, technology fusion, and growth-curve forecasting from patent data"
)]
struct Cli {
    /// Cap worker threads (default: IPC_FUSION_THREADS, then all cores).
    /// Results never depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Corpus file (CSV header `patent_id,date,ipc_codes` or JSONL).
    #[arg(long)]
    input: PathBuf,

    /// Container format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Emit machine-readable JSON on stdout instead of aligned tables.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus file and report what was loaded and skipped.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Build the co-occurrence graph and export its edge list as TSV.
    Graph {
        #[command(flatten)]
        input: InputArgs,
        /// IPC level the graph is built at.
        #[arg(long, value_enum, default_value_t = LevelArg::Subclass)]
        level: LevelArg,
        /// Write the TSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank technologies by a centrality measure.
    Centrality {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = LevelArg::Subclass)]
        level: LevelArg,
        #[arg(long, value_enum, default_value_t = MeasureArg::Degree)]
        measure: MeasureArg,
        /// Rows to keep.
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Force the normalized or raw variant where the measure has both
        /// (degree defaults to raw, betweenness to normalized).
        #[arg(long)]
        normalized: Option<bool>,
    },
    /// Degree-of-fusion table: unique-to-total IPC ratios per segment.
    Fusion {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = LevelArg::Section)]
        segment_level: LevelArg,
        #[arg(long, value_enum, default_value_t = LevelArg::Subclass)]
        counting_level: LevelArg,
        /// Count raw code occurrences instead of per-patent deduplicated
        /// assignments.
        #[arg(long)]
        raw: bool,
    },
    /// Fit the technology life cycle: growth curve, maturity phase, forecast.
    Tlc {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = ModelArg::Auto)]
        model: ModelArg,
        /// Forecast length in years past the first observation.
        #[arg(long, default_value_t = 40)]
        horizon: u32,
        /// Fit cumulative totals (the S-curve) or raw annual counts.
        #[arg(long, value_enum, default_value_t = CountsArg::Cumulative)]
        counts: CountsArg,
        /// Also write fit.json, forecast.csv, and scurve.svg into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-window top-k rankings and cross-window trajectories.
    Evolution {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = LevelArg::Subclass)]
        level: LevelArg,
        /// Window boundaries, e.g. 2012,2015,2018,2020,2022.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<i32>>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long, value_enum, default_value_t = MeasureArg::Degree)]
        measure: MeasureArg,
    },
    /// Run the whole pipeline and write the artifact tree + manifest.
    Study {
        #[command(flatten)]
        input: InputArgs,
        /// TOML key=value file mirroring the study configuration; flags
        /// override file values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for the artifact tree.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        level: Option<LevelArg>,
        #[arg(long, value_enum)]
        counting_level: Option<LevelArg>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<i32>>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long)]
        horizon: Option<u32>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Section,
    Class,
    Subclass,
    MainGroup,
    Subgroup,
}

impl From<LevelArg> for IpcLevel {
    fn from(level: LevelArg) -> Self {
        match level {
            LevelArg::Section => IpcLevel::Section,
            LevelArg::Class => IpcLevel::Class,
            LevelArg::Subclass => IpcLevel::Subclass,
            LevelArg::MainGroup => IpcLevel::MainGroup,
            LevelArg::Subgroup => IpcLevel::Subgroup,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    Degree,
    WeightedDegree,
    Betweenness,
    Closeness,
    Clustering,
}

impl From<MeasureArg> for Measure {
    fn from(measure: MeasureArg) -> Self {
        match measure {
            MeasureArg::Degree => Measure::Degree,
            MeasureArg::WeightedDegree => Measure::WeightedDegree,
            MeasureArg::Betweenness => Measure::Betweenness,
            MeasureArg::Closeness => Measure::Closeness,
            MeasureArg::Clustering => Measure::Clustering,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountsArg {
    Cumulative,
    Incremental,
}

impl From<CountsArg> for CountMode {
    fn from(counts: CountsArg) -> Self {
        match counts {
            CountsArg::Cumulative => CountMode::Cumulative,
            CountsArg::Incremental => CountMode::Incremental,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Auto,
    Gompertz,
    Logistic,
}

impl From<ModelArg> for ModelChoice {
    fn from(model: ModelArg) -> Self {
        match model {
            ModelArg::Auto => ModelChoice::Auto,
            ModelArg::Gompertz => ModelChoice::Gompertz,
            ModelArg::Logistic => ModelChoice::Logistic,
        }
    }
}

struct CliError {
    stage: &'static str,
    message: String,
}

impl CliError {
    fn new(stage: &'static str, message: impl std::fmt::Display) -> Self {
        CliError { stage, message: message.to_string() }
    }
}

impl From<ipc_fusion_core::StudyError> for CliError {
    fn from(err: ipc_fusion_core::StudyError) -> Self {
        CliError { stage: err.stage, message: err.message }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let threads = cli
        .threads
        .or_else(|| std::env::var("IPC_FUSION_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        // Ignore failure: the pool can only be initialized once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {}", err.stage, err.message);
            ExitCode::from(1)
        }
    }
}

fn infer_format(path: &Path) -> IngestFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") => {
            IngestFormat::Jsonl
        }
        _ => IngestFormat::Csv,
    }
}

fn load(input: &InputArgs) -> Result<(PatentCorpus, IngestReport), CliError> {
    let format = match input.format {
        Some(FormatArg::Csv) => IngestFormat::Csv,
        Some(FormatArg::Jsonl) => IngestFormat::Jsonl,
        None => infer_format(&input.input),
    };
    let file = File::open(&input.input)
        .map_err(|e| CliError::new("ingest", format!("{}: {e}", input.input.display())))?;
    load_corpus(BufReader::new(file), format).map_err(|e| CliError::new("ingest", e))
}

fn print_stdout(text: &str) {
    print!("{text}");
    let _ = std::io::stdout().flush();
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest { input } => {
            let (_corpus, report) = load(&input)?;
            if input.json {
                print_stdout(&(serde_json::to_string_pretty(&report).expect("serializes") + "\n"));
            } else {
                print_stdout(&format!("{report}\n"));
            }
            Ok(())
        }
        Command::Graph { input, level, out } => {
            let (corpus, _) = load(&input)?;
            let graph =
                build_cooccurrence(&corpus, level.into()).map_err(|e| CliError::new("graph", e))?;
            let tsv = graph.export_edges();
            match out {
                Some(path) => std::fs::write(&path, tsv.as_bytes())
                    .map_err(|e| CliError::new("graph", format!("{}: {e}", path.display())))?,
                None => print_stdout(&tsv),
            }
            Ok(())
        }
        Command::Centrality { input, level, measure, top, normalized } => {
            let (corpus, _) = load(&input)?;
            let graph =
                build_cooccurrence(&corpus, level.into()).map_err(|e| CliError::new("metrics", e))?;
            let defaults = MetricOptions::default();
            let options = MetricOptions {
                degree_normalized: normalized.unwrap_or(defaults.degree_normalized),
                betweenness_normalized: normalized.unwrap_or(defaults.betweenness_normalized),
            };
            let table = ipc_fusion_core::metrics::compute(&graph, measure.into(), options);
            let ranked = rank_top(&table, top);
            if input.json {
                #[derive(Serialize)]
                struct Row {
                    rank: usize,
                    node: String,
                    value: f64,
                }
                #[derive(Serialize)]
                struct Doc {
                    measure: Measure,
                    normalized: bool,
                    rows: Vec<Row>,
                }
                let doc = Doc {
                    measure: table.measure,
                    normalized: table.normalized,
                    rows: ranked
                        .rows
                        .iter()
                        .map(|(rank, node, value)| Row {
                            rank: *rank,
                            node: node.to_string(),
                            value: *value,
                        })
                        .collect(),
                };
                print_stdout(&(serde_json::to_string_pretty(&doc).expect("serializes") + "\n"));
            } else {
                let width = ranked
                    .rows
                    .iter()
                    .map(|(_, node, _)| node.to_string().len())
                    .max()
                    .unwrap_or(4)
                    .max(4);
                let mut text = format!("{:>4}  {:<width$}  {}\n", "rank", "node", table.measure);
                for (rank, node, value) in &ranked.rows {
                    text.push_str(&format!("{rank:>4}  {:<width$}  {value}\n", node.to_string()));
                }
                print_stdout(&text);
            }
            Ok(())
        }
        Command::Fusion { input, segment_level, counting_level, raw } => {
            let (corpus, _) = load(&input)?;
            let mode = if raw { CountingMode::Raw } else { CountingMode::Deduplicated };
            let table = degree_of_fusion(&corpus, segment_level.into(), counting_level.into(), mode)
                .map_err(|e| CliError::new("fusion", e))?;
            if input.json {
                print_stdout(&table.to_json());
            } else {
                let mut text = format!(
                    "{:<8}  {:>6}  {:>6}  {}\n",
                    "segment", "unique", "total", "degree_of_fusion"
                );
                for row in table.rows_sorted(false) {
                    text.push_str(&format!(
                        "{:<8}  {:>6}  {:>6}  {}\n",
                        row.segment,
                        row.unique,
                        table.total_assignments(),
                        row.degree_of_fusion
                    ));
                }
                for section in table.missing_sections() {
                    text.push_str(&format!("{:<8}  Not found\n", section.to_string()));
                }
                print_stdout(&text);
            }
            Ok(())
        }
        Command::Tlc { input, model, horizon, counts, out } => {
            let (corpus, _) = load(&input)?;
            let series = annual_counts(&corpus, counts.into())
                .map_err(|e| CliError::new("lifecycle", e))?;
            let fit: GrowthFit = match model {
                ModelArg::Auto => fit_auto(&series),
                ModelArg::Gompertz => fit_gompertz(&series),
                ModelArg::Logistic => fit_logistic(&series),
            }
            .map_err(|e| CliError::new("lifecycle", e))?;
            let assessment = maturity_phase(
                &fit,
                series.last_year().expect("non-empty series"),
                &PhaseThresholds::default(),
            );
            let report = FitReport::new(&fit, &assessment);

            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| CliError::new("write", format!("{}: {e}", dir.display())))?;
                let write = |name: &str, bytes: &[u8]| {
                    std::fs::write(dir.join(name), bytes)
                        .map_err(|e| CliError::new("write", format!("{name}: {e}")))
                };
                write("fit.json", report.to_json().as_bytes())?;
                let fc = forecast(&fit, horizon);
                write("forecast.csv", ipc_fusion_core::lifecycle::forecast_to_csv(&fc).as_bytes())?;
                let mut svg = Vec::new();
                render_scurve_svg(&series, &fit, &mut svg)
                    .map_err(|e| CliError::new("write", format!("scurve.svg: {e}")))?;
                write("scurve.svg", &svg)?;
            }

            if input.json {
                print_stdout(&report.to_json());
            } else {
                let mut text = String::new();
                text.push_str(&format!("model            {}\n", report.model));
                text.push_str(&format!("L                {}\n", report.l));
                text.push_str(&format!("a                {}\n", report.a));
                text.push_str(&format!("b                {}\n", report.b));
                text.push_str(&format!("t0_year          {}\n", report.t0_year));
                text.push_str(&format!("r2               {}\n", report.r2));
                text.push_str(&format!("rmse             {}\n", report.rmse));
                match report.mape {
                    Some(m) => text.push_str(&format!("mape             {m}\n")),
                    None => text.push_str("mape             n/a (all actuals zero)\n"),
                }
                text.push_str(&format!("phase            {}\n", report.phase));
                text.push_str(&format!("inflection_year  {:.2}\n", report.inflection_year));
                text.push_str(&format!("saturation_year  {:.2}\n", report.saturation_year));
                text.push_str(&format!("converged        {}\n", report.converged));
                print_stdout(&text);
            }
            Ok(())
        }
        Command::Evolution { input, level, windows, top, measure } => {
            let (corpus, _) = load(&input)?;
            let spec = match windows {
                Some(boundaries) => {
                    WindowSpec::new(boundaries).map_err(|e| CliError::new("evolution", e))?
                }
                None => WindowSpec::default_frames(),
            };
            let report = window_evolution(
                &corpus,
                &spec,
                level.into(),
                top,
                measure.into(),
                MetricOptions::default(),
            );
            if input.json {
                print_stdout(&report.to_json());
            } else {
                let mut text = String::new();
                for window in &report.windows {
                    text.push_str(&format!("[{}] {} patents\n", window.label, window.patent_count));
                    for (rank, node, value) in &window.ranked.rows {
                        text.push_str(&format!("  {rank:>3}  {:<10}  {value}\n", node.to_string()));
                    }
                }
                text.push_str("tracked nodes across windows:\n");
                for tracked in &report.tracked {
                    let values: Vec<String> = tracked
                        .values
                        .iter()
                        .map(|v| v.map_or_else(|| "-".to_string(), |x| x.to_string()))
                        .collect();
                    text.push_str(&format!(
                        "  {:<10}  {}\n",
                        tracked.node.to_string(),
                        values.join("  ")
                    ));
                }
                print_stdout(&text);
            }
            Ok(())
        }
        Command::Study {
            input,
            config,
            out,
            level,
            counting_level,
            top,
            windows,
            model,
            horizon,
        } => {
            let mut study = StudyConfig::default();
            if let Some(path) = &config {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
                apply_config_file(&mut study, &text)?;
            }
            if let Some(level) = level {
                study.analysis_level = level.into();
            }
            if let Some(level) = counting_level {
                study.counting_level = level.into();
            }
            if let Some(top) = top {
                study.top_k = top;
            }
            if let Some(boundaries) = windows {
                study.window_boundaries = boundaries;
            }
            if let Some(model) = model {
                study.model = model.into();
            }
            if let Some(horizon) = horizon {
                study.horizon_years = horizon;
            }
            if let Some(out) = out {
                study.output_dir = out;
            }

            let (corpus, _) = load(&input)?;
            let bundle = run_study(&corpus, &study)?;
            eprintln!(
                "wrote {} artifacts to {}",
                bundle.manifest.artifacts.len(),
                bundle.out_dir.display()
            );
            if input.json {
                print_stdout(&bundle.manifest.to_json());
            }
            Ok(())
        }
    }
}

/// The study config file: TOML key=value pairs mirroring [`StudyConfig`].
/// Unknown keys are rejected so typos fail loudly.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    analysis_level: Option<String>,
    counting_level: Option<String>,
    window_boundaries: Option<Vec<i32>>,
    top_k: Option<usize>,
    degree_normalized: Option<bool>,
    betweenness_normalized: Option<bool>,
    fusion_raw_counts: Option<bool>,
    model: Option<String>,
    horizon_years: Option<u32>,
    evolution_measure: Option<String>,
    output_dir: Option<PathBuf>,
}

fn apply_config_file(study: &mut StudyConfig, text: &str) -> Result<(), CliError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| CliError::new("config", e.to_string()))?;
    if let Some(s) = file.analysis_level {
        study.analysis_level = IpcLevel::from_str(&s).map_err(|e| CliError::new("config", e))?;
    }
    if let Some(s) = file.counting_level {
        study.counting_level = IpcLevel::from_str(&s).map_err(|e| CliError::new("config", e))?;
    }
    if let Some(boundaries) = file.window_boundaries {
        study.window_boundaries = boundaries;
    }
    if let Some(k) = file.top_k {
        study.top_k = k;
    }
    if let Some(flag) = file.degree_normalized {
        study.degree_normalized = flag;
    }
    if let Some(flag) = file.betweenness_normalized {
        study.betweenness_normalized = flag;
    }
    if let Some(flag) = file.fusion_raw_counts {
        study.fusion_mode = if flag { CountingMode::Raw } else { CountingMode::Deduplicated };
    }
    if let Some(s) = file.model {
        study.model = ModelChoice::from_str(&s).map_err(|e| CliError::new("config", e))?;
    }
    if let Some(h) = file.horizon_years {
        study.horizon_years = h;
    }
    if let Some(s) = file.evolution_measure {
        study.evolution_measure = Measure::from_str(&s).map_err(|e| CliError::new("config", e))?;
    }
    if let Some(dir) = file.output_dir {
        study.output_dir = dir;
    }
    Ok(())
}
