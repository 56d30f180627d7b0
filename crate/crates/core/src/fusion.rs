//! Degree of fusion: how much of the corpus-wide code variety each IPC
//! segment contributes.
//!
//! Codes are truncated to a counting level and, by default, deduplicated
//! within each patent; `IPC_t` is the total number of (patent, code)
//! assignments that survive, and `IPC_u(s)` is the number of distinct codes
//! that fall under segment `s`. The degree of fusion is the ratio
//! `IPC_u(s) / IPC_t`, so the values always sit in [0, 1] and summing them
//! over segments gives total-distinct-codes over total-assignments.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::PatentCorpus;
use crate::ipc::{IpcCode, IpcLevel};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("segment level {segment} is deeper than counting level {counting}")]
    LevelOrderViolation { segment: IpcLevel, counting: IpcLevel },
}

/// How `IPC_t` counts code assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingMode {
    /// Each (patent, truncated code) pair counts once. Default, and the
    /// convention the co-occurrence graph uses.
    Deduplicated,
    /// Every raw code occurrence counts, repetitions included.
    Raw,
}

/// Per-segment unique-code counts and the corpus-wide assignment total.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionTable {
    segment_level: IpcLevel,
    counting_level: IpcLevel,
    mode: CountingMode,
    total_assignments: usize,
    unique_counts: BTreeMap<IpcCode, usize>,
    skipped_patents: usize,
}

/// One emitted row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionRow {
    pub segment: String,
    pub unique: usize,
    pub degree_of_fusion: f64,
}

impl FusionTable {
    pub fn segment_level(&self) -> IpcLevel {
        self.segment_level
    }

    pub fn counting_level(&self) -> IpcLevel {
        self.counting_level
    }

    pub fn mode(&self) -> CountingMode {
        self.mode
    }

    /// `IPC_t`: total assignments across the corpus at the counting level.
    pub fn total_assignments(&self) -> usize {
        self.total_assignments
    }

    /// Patents with no code reaching the counting level.
    pub fn skipped_patents(&self) -> usize {
        self.skipped_patents
    }

    /// `IPC_u` per segment, ascending by segment.
    pub fn unique_counts(&self) -> &BTreeMap<IpcCode, usize> {
        &self.unique_counts
    }

    /// `D_F` for one segment; 0 for segments absent from the corpus.
    pub fn degree_of_fusion(&self, segment: &IpcCode) -> f64 {
        let unique = self.unique_counts.get(segment).copied().unwrap_or(0);
        unique as f64 / self.total_assignments as f64
    }

    /// Sections A-H with no presence in the corpus. Only meaningful for
    /// section-level tables, where the segment universe is closed; deeper
    /// levels return an empty list.
    pub fn missing_sections(&self) -> Vec<IpcCode> {
        if self.segment_level != IpcLevel::Section {
            return Vec::new();
        }
        IpcCode::SECTIONS
            .iter()
            .map(|&s| IpcCode::new(s, None, None, None, None).expect("sections are valid"))
            .filter(|s| !self.unique_counts.contains_key(s))
            .collect()
    }

    /// Rows sorted by descending `D_F`, ties broken by segment text. With
    /// `include_missing`, absent sections are appended as zero rows (the
    /// table shape that prints them as "Not found").
    pub fn rows_sorted(&self, include_missing: bool) -> Vec<FusionRow> {
        let mut rows: Vec<FusionRow> = self
            .unique_counts
            .iter()
            .map(|(segment, &unique)| FusionRow {
                segment: segment.to_string(),
                unique,
                degree_of_fusion: unique as f64 / self.total_assignments as f64,
            })
            .collect();
        if include_missing {
            rows.extend(self.missing_sections().into_iter().map(|s| FusionRow {
                segment: s.to_string(),
                unique: 0,
                degree_of_fusion: 0.0,
            }));
        }
        rows.sort_by(|a, b| {
            b.degree_of_fusion.total_cmp(&a.degree_of_fusion).then_with(|| a.segment.cmp(&b.segment))
        });
        rows
    }

    /// CSV table `segment,unique,total,degree_of_fusion` in sorted order.
    pub fn to_csv(&self, include_missing: bool) -> String {
        let mut out = String::from("segment,unique,total,degree_of_fusion\n");
        for row in self.rows_sorted(include_missing) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.segment, row.unique, self.total_assignments, row.degree_of_fusion
            ));
        }
        out
    }

    /// Pretty JSON document; absent sections are listed under `not_found`
    /// rather than as zero rows.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            segment_level: IpcLevel,
            counting_level: IpcLevel,
            counting: CountingMode,
            total_assignments: usize,
            rows: Vec<&'a FusionRow>,
            not_found: Vec<String>,
        }
        let rows = self.rows_sorted(false);
        let doc = Doc {
            segment_level: self.segment_level,
            counting_level: self.counting_level,
            counting: self.mode,
            total_assignments: self.total_assignments,
            rows: rows.iter().collect(),
            not_found: self.missing_sections().iter().map(IpcCode::to_string).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
    }
}

/// Computes the fusion table for `corpus`, counting distinct codes at
/// `counting_level` and grouping them into segments at `segment_level`.
pub fn degree_of_fusion(
    corpus: &PatentCorpus,
    segment_level: IpcLevel,
    counting_level: IpcLevel,
    mode: CountingMode,
) -> Result<FusionTable, FusionError> {
    if segment_level > counting_level {
        return Err(FusionError::LevelOrderViolation {
            segment: segment_level,
            counting: counting_level,
        });
    }
    if corpus.is_empty() {
        return Err(FusionError::EmptyCorpus);
    }

    let mut total_assignments = 0usize;
    let mut skipped_patents = 0usize;
    let mut distinct: BTreeSet<IpcCode> = BTreeSet::new();
    for record in corpus.records() {
        let truncated: Vec<IpcCode> =
            record.codes().iter().filter_map(|c| c.truncate(counting_level).ok()).collect();
        if truncated.is_empty() {
            skipped_patents += 1;
            continue;
        }
        match mode {
            CountingMode::Deduplicated => {
                let unique: BTreeSet<IpcCode> = truncated.into_iter().collect();
                total_assignments += unique.len();
                distinct.extend(unique);
            }
            CountingMode::Raw => {
                total_assignments += truncated.len();
                distinct.extend(truncated);
            }
        }
    }
    if total_assignments == 0 {
        return Err(FusionError::EmptyCorpus);
    }

    let mut unique_counts: BTreeMap<IpcCode, usize> = BTreeMap::new();
    for code in &distinct {
        let segment = code.truncate(segment_level).expect("segment_level <= counting_level");
        *unique_counts.entry(segment).or_insert(0) += 1;
    }

    Ok(FusionTable {
        segment_level,
        counting_level,
        mode,
        total_assignments,
        unique_counts,
        skipped_patents,
    })
}
