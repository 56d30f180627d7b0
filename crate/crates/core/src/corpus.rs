//! Patent corpus loading, validation, and time slicing.
//!
//! Two wire formats are supported and validated bit-exactly:
//!
//! - CSV with the header `patent_id,date,ipc_codes`, where `ipc_codes` is a
//!   semicolon-separated list;
//! - JSONL with one object per line carrying `patent_id` (string), `date`
//!   (string), and `ipc_codes` (array of strings).
//!
//! Dates are ISO-8601 (`YYYY-MM-DD`) or a bare year (`YYYY`); only the year
//! feeds the analyses, so the date column's semantics (filing, publication,
//! grant) are whatever the upstream export chose. Structural failures of the
//! container (bad UTF-8, wrong header, unparseable row) abort the load;
//! semantic failures (bad date, missing id, no valid codes) skip the row and
//! are tallied per reason in the [`IngestReport`].

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipc::{parse_ipc, IpcCode};

/// Errors raised by corpus loading and slicing.
#[derive(Debug, Error)]
pub enum CorpusError {
    /// The container itself could not be decoded or parsed; nothing was loaded.
    #[error("unreadable source: {0}")]
    UnreadableSource(String),
    /// An operation that needs at least one record got none.
    #[error("corpus is empty")]
    EmptyCorpus,
    /// Window boundaries do not define at least one half-open interval.
    #[error("invalid window spec: {0}")]
    EmptySpec(String),
    /// A time series violated its ordering or range invariants.
    #[error("invalid time series: {0}")]
    InvalidSeries(String),
}

/// The date column as it appeared in the source: a full calendar date or a
/// bare year. All analyses consume only [`RecordDate::year`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordDate {
    Year(i32),
    Day(NaiveDate),
}

impl RecordDate {
    pub fn year(&self) -> i32 {
        match self {
            RecordDate::Year(y) => *y,
            RecordDate::Day(d) => d.year(),
        }
    }

    fn parse(s: &str) -> Option<RecordDate> {
        let s = s.trim();
        if s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit()) {
            return Some(RecordDate::Year(s.parse().ok()?));
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(RecordDate::Day)
    }
}

/// One patent: an opaque id, a date, and the IPC codes assigned to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatentRecord {
    patent_id: String,
    date: RecordDate,
    codes: Vec<IpcCode>,
}

impl PatentRecord {
    /// `codes` must be non-empty; order and duplicates are preserved as they
    /// appeared in the source (deduplication happens per analysis).
    pub fn new(
        patent_id: impl Into<String>,
        date: RecordDate,
        codes: Vec<IpcCode>,
    ) -> Result<Self, CorpusError> {
        let patent_id = patent_id.into();
        if patent_id.trim().is_empty() {
            return Err(CorpusError::UnreadableSource("empty patent id".into()));
        }
        if codes.is_empty() {
            return Err(CorpusError::UnreadableSource(format!(
                "record {patent_id} has no IPC codes"
            )));
        }
        Ok(PatentRecord { patent_id, date, codes })
    }

    pub fn patent_id(&self) -> &str {
        &self.patent_id
    }

    pub fn date(&self) -> RecordDate {
        self.date
    }

    pub fn year(&self) -> i32 {
        self.date.year()
    }

    pub fn codes(&self) -> &[IpcCode] {
        &self.codes
    }
}

/// A validated, deduplicated set of patent records. Immutable once built;
/// share it freely across threads.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatentCorpus {
    records: Vec<PatentRecord>,
}

impl PatentCorpus {
    /// Wraps records, rejecting duplicate patent ids.
    pub fn new(records: Vec<PatentRecord>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.patent_id.as_str()) {
                return Err(CorpusError::UnreadableSource(format!(
                    "duplicate patent id {:?}",
                    r.patent_id
                )));
            }
        }
        Ok(PatentCorpus { records })
    }

    pub fn records(&self) -> &[PatentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(min_year, max_year)` over all records, or `None` for an empty corpus.
    pub fn span(&self) -> Option<(i32, i32)> {
        let mut years = self.records.iter().map(PatentRecord::year);
        let first = years.next()?;
        Some(years.fold((first, first), |(lo, hi), y| (lo.min(y), hi.max(y))))
    }
}

/// Input container format for [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestFormat {
    Csv,
    Jsonl,
}

/// Per-reason tallies from one [`load_corpus`] run.
///
/// `bad_code` counts individual malformed codes that were dropped from
/// otherwise-valid rows; the row itself is skipped (and counted under
/// `no_valid_codes`) only when no valid code remains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub records_loaded: u64,
    pub missing_id: u64,
    pub bad_date: u64,
    pub bad_code: u64,
    pub no_valid_codes: u64,
    pub duplicate_id: u64,
}

impl IngestReport {
    pub fn rows_skipped(&self) -> u64 {
        self.missing_id + self.bad_date + self.no_valid_codes + self.duplicate_id
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows_read       {}", self.rows_read)?;
        writeln!(f, "records_loaded  {}", self.records_loaded)?;
        writeln!(f, "missing_id      {}", self.missing_id)?;
        writeln!(f, "bad_date        {}", self.bad_date)?;
        writeln!(f, "bad_code        {}", self.bad_code)?;
        writeln!(f, "no_valid_codes  {}", self.no_valid_codes)?;
        write!(f, "duplicate_id    {}", self.duplicate_id)
    }
}

#[derive(Deserialize)]
struct JsonRow {
    patent_id: Option<String>,
    date: Option<String>,
    ipc_codes: Option<Vec<String>>,
}

/// Reads a corpus from `source`; every well-formed row becomes a record,
/// malformed rows are skipped and tallied, duplicate ids keep the first
/// occurrence. Identical byte streams always yield identical corpora and
/// reports.
pub fn load_corpus(
    mut source: impl Read,
    format: IngestFormat,
) -> Result<(PatentCorpus, IngestReport), CorpusError> {
    let mut bytes = Vec::new();
    source
        .read_to_end(&mut bytes)
        .map_err(|e| CorpusError::UnreadableSource(format!("read failed: {e}")))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CorpusError::UnreadableSource(format!("not valid UTF-8: {e}")))?;

    let mut report = IngestReport::default();
    let mut records = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    let mut absorb = |id: Option<&str>, date: Option<&str>, codes: &[&str]| {
        report.rows_read += 1;
        let id = match id.map(str::trim) {
            Some(id) if !id.is_empty() => id,
            _ => {
                report.missing_id += 1;
                return;
            }
        };
        let date = match date.and_then(RecordDate::parse) {
            Some(d) => d,
            None => {
                report.bad_date += 1;
                return;
            }
        };
        let mut parsed = Vec::with_capacity(codes.len());
        for raw in codes {
            // Empty segments between separators are export artifacts, not errors.
            if raw.trim().is_empty() {
                continue;
            }
            match parse_ipc(raw) {
                Ok(c) => parsed.push(c),
                Err(_) => report.bad_code += 1,
            }
        }
        if parsed.is_empty() {
            report.no_valid_codes += 1;
            return;
        }
        if !seen.insert(id.to_owned()) {
            report.duplicate_id += 1;
            return;
        }
        report.records_loaded += 1;
        records.push(PatentRecord { patent_id: id.to_owned(), date, codes: parsed });
    };

    match format {
        IngestFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
            let headers = reader
                .headers()
                .map_err(|e| CorpusError::UnreadableSource(format!("bad CSV header: {e}")))?;
            let expected = ["patent_id", "date", "ipc_codes"];
            if headers.iter().map(str::trim).collect::<Vec<_>>() != expected {
                return Err(CorpusError::UnreadableSource(format!(
                    "CSV header must be {:?}, got {:?}",
                    expected.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                )));
            }
            for row in reader.records() {
                let row =
                    row.map_err(|e| CorpusError::UnreadableSource(format!("bad CSV row: {e}")))?;
                let codes: Vec<&str> = row.get(2).map(|c| c.split(';').collect()).unwrap_or_default();
                absorb(row.get(0), row.get(1), &codes);
            }
        }
        IngestFormat::Jsonl => {
            for (lineno, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let row: JsonRow = serde_json::from_str(line).map_err(|e| {
                    CorpusError::UnreadableSource(format!("bad JSON on line {}: {e}", lineno + 1))
                })?;
                let codes: Vec<&str> =
                    row.ipc_codes.as_deref().map(|c| c.iter().map(String::as_str).collect()).unwrap_or_default();
                absorb(row.patent_id.as_deref(), row.date.as_deref(), &codes);
            }
        }
    }

    Ok((PatentCorpus { records }, report))
}

/// Strictly increasing year boundaries defining half-open windows
/// `[y_i, y_{i+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    boundaries: Vec<i32>,
}

impl WindowSpec {
    pub fn new(boundaries: Vec<i32>) -> Result<Self, CorpusError> {
        if boundaries.len() < 2 {
            return Err(CorpusError::EmptySpec(
                "need at least two boundaries to form a window".into(),
            ));
        }
        if !boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(CorpusError::EmptySpec("boundaries must be strictly increasing".into()));
        }
        Ok(WindowSpec { boundaries })
    }

    /// The conventional four frames used throughout the reports
    /// (2012-2014, 2015-2017, 2018-2019, 2020-2021). A convention, not a
    /// property of the data; override freely.
    pub fn default_frames() -> Self {
        WindowSpec { boundaries: vec![2012, 2015, 2018, 2020, 2022] }
    }

    pub fn boundaries(&self) -> &[i32] {
        &self.boundaries
    }

    pub fn window_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Human label for window `i`: inclusive year range, collapsed when the
    /// window covers a single year.
    pub fn label(&self, i: usize) -> String {
        let (start, end) = (self.boundaries[i], self.boundaries[i + 1] - 1);
        if start == end {
            format!("{start}")
        } else {
            format!("{start}-{end}")
        }
    }

    fn window_of(&self, year: i32) -> Option<usize> {
        if year < self.boundaries[0] || year >= *self.boundaries.last().unwrap() {
            return None;
        }
        Some(self.boundaries.partition_point(|&b| b <= year) - 1)
    }
}

/// Result of slicing a corpus into windows: every record lands in exactly one
/// window or in the out-of-range tally, so window sizes plus `excluded`
/// always add back up to the input size.
#[derive(Debug, Clone)]
pub struct WindowSlices {
    pub windows: Vec<(String, PatentCorpus)>,
    pub excluded: usize,
}

pub fn slice_windows(corpus: &PatentCorpus, spec: &WindowSpec) -> WindowSlices {
    let mut buckets: Vec<Vec<PatentRecord>> = vec![Vec::new(); spec.window_count()];
    let mut excluded = 0usize;
    for record in corpus.records() {
        match spec.window_of(record.year()) {
            Some(i) => buckets[i].push(record.clone()),
            None => excluded += 1,
        }
    }
    let windows = buckets
        .into_iter()
        .enumerate()
        .map(|(i, records)| (spec.label(i), PatentCorpus { records }))
        .collect();
    WindowSlices { windows, excluded }
}

/// Yearly values with strictly increasing years; gap years inside the span
/// are present (zero-filled) when produced by [`annual_counts`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    points: Vec<(i32, f64)>,
}

impl TimeSeries {
    pub fn new(points: Vec<(i32, f64)>) -> Result<Self, CorpusError> {
        if !points.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(CorpusError::InvalidSeries("years must be strictly increasing".into()));
        }
        if let Some((y, v)) = points.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(CorpusError::InvalidSeries(format!(
                "value at year {y} must be finite and non-negative, got {v}"
            )));
        }
        Ok(TimeSeries { points })
    }

    pub fn points(&self) -> &[(i32, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_year(&self) -> Option<i32> {
        self.points.first().map(|p| p.0)
    }

    pub fn last_year(&self) -> Option<i32> {
        self.points.last().map(|p| p.0)
    }

    pub fn max_value(&self) -> Option<f64> {
        self.points.iter().map(|p| p.1).reduce(f64::max)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

/// Whether [`annual_counts`] returns per-year counts or their running sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Incremental,
    Cumulative,
}

/// Patent counts per year across the corpus span, with gap years zero-filled
/// so downstream curve fitting sees an evenly spaced series.
pub fn annual_counts(corpus: &PatentCorpus, mode: CountMode) -> Result<TimeSeries, CorpusError> {
    let (min_year, max_year) = corpus.span().ok_or(CorpusError::EmptyCorpus)?;
    let mut counts: BTreeMap<i32, u64> = (min_year..=max_year).map(|y| (y, 0)).collect();
    for record in corpus.records() {
        *counts.get_mut(&record.year()).expect("year inside span") += 1;
    }
    let mut running = 0u64;
    let points = counts
        .into_iter()
        .map(|(year, n)| {
            running += n;
            match mode {
                CountMode::Incremental => (year, n as f64),
                CountMode::Cumulative => (year, running as f64),
            }
        })
        .collect();
    Ok(TimeSeries { points })
}
