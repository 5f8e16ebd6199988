//! Report assembly and emission: the JSON analysis report, the ranking run
//! summary, and the flat plot-data CSVs (adjacent-scenario curves and
//! per-researcher class trajectories with fitted trends).
//!
//! Reports carry the resolved run configuration and a digest of the inputs so
//! a run can be reproduced; nothing time- or host-dependent is written, which
//! keeps reruns byte-identical.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{trend_fit, DeltaReport, ScenarioComparison, TransitionReport};
use crate::corpus::{Corpus, ResearcherId, SdsId};
use crate::error::DataError;
use crate::io::write_json_report;
use crate::pipeline::{AnalysisOutputs, ScenarioRankings};
use crate::windows::Window;

/// Run metadata stamped into every report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    /// The resolved run configuration, echoed verbatim.
    pub run_config: serde_json::Value,
    /// Hex digest over the input files, in a fixed role order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub observation_date_label: String,
    /// Where the citation baselines came from: `corpus`, `reference-file`, or
    /// `imported`.
    pub baseline_mode: String,
    pub percentile_convention: String,
}

/// The percentile convention implemented by the ranking module.
pub const PERCENTILE_CONVENTION: &str = "mid-rank: 100 * (lower + 0.5 * ties) / n";

#[derive(Debug, Clone, Serialize)]
pub struct SectorSummary {
    pub sds_id: SdsId,
    pub population: usize,
}

/// Summary written next to the ranking CSVs.
#[derive(Debug, Clone, Serialize)]
pub struct RankSummary {
    pub provenance: Provenance,
    pub full_window: Window,
    pub scenarios: Vec<Window>,
    pub eligible_sds: Vec<SectorSummary>,
    pub undefined_baseline_pubs: u64,
    pub files: Vec<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonSection {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub excluded_always_inactive: usize,
    pub pairs: Vec<ScenarioComparison<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionSection {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<TransitionReport<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaSection {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped_lengths: Vec<usize>,
    pub report: DeltaReport<f64>,
}

/// The full analysis report.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub provenance: Provenance,
    pub full_window: Window,
    pub scenarios: Vec<Window>,
    pub comparison_chain: ComparisonSection,
    pub transitions: TransitionSection,
    pub deltas: DeltaSection,
    pub diagnostics: Vec<String>,
}

/// Assemble the analysis report from pipeline outputs.
pub fn build_analysis_report(
    provenance: Provenance,
    rankings: &ScenarioRankings,
    outputs: &AnalysisOutputs,
) -> AnalysisReport {
    let no_population = rankings.populations.is_empty();
    let comparison_chain = if outputs.comparisons.is_empty() {
        let reason = if no_population {
            "not applicable: no eligible sector"
        } else {
            "not applicable: a single scenario has no adjacent pair"
        };
        ComparisonSection {
            applicable: false,
            reason: Some(reason.into()),
            excluded_always_inactive: 0,
            pairs: Vec::new(),
        }
    } else {
        ComparisonSection {
            applicable: true,
            reason: None,
            excluded_always_inactive: outputs.excluded_always_inactive,
            pairs: outputs.comparisons.clone(),
        }
    };
    let transitions = match &outputs.transitions {
        Some(report) => TransitionSection { applicable: true, reason: None, report: Some(report.clone()) },
        None => {
            let reason = if no_population {
                "not applicable: no eligible sector".to_string()
            } else {
                format!(
                    "not applicable: a {}-year window has no two equal halves",
                    rankings.full_window.length()
                )
            };
            TransitionSection { applicable: false, reason: Some(reason), report: None }
        }
    };
    let deltas = DeltaSection {
        applicable: !outputs.deltas.lengths.is_empty(),
        skipped_lengths: outputs.skipped_delta_lengths.clone(),
        report: outputs.deltas.clone(),
    };
    AnalysisReport {
        provenance,
        full_window: rankings.full_window,
        scenarios: rankings.scenarios.clone(),
        comparison_chain,
        transitions,
        deltas,
        diagnostics: rankings.diagnostics.clone(),
    }
}

/// Write the report as pretty JSON.
pub fn write_analysis_report(report: &AnalysisReport, path: &Path) -> Result<(), DataError> {
    write_json_report(report, path)
}

pub fn write_rank_summary(summary: &RankSummary, path: &Path) -> Result<(), DataError> {
    write_json_report(summary, path)
}

fn fmt_opt(value: Option<f64>) -> String {
    match value {
        Some(v) => v.to_string(),
        None => "NA".into(),
    }
}

/// File name for one ranking table. Sector keys may contain separators
/// (e.g. `ING-IND/05`), so anything outside `[A-Za-z0-9._-]` is mapped to
/// `-`.
pub fn ranking_file_name(sds: &SdsId, window: Window) -> String {
    let safe: String = sds
        .as_str()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' })
        .collect();
    format!("ranking_{safe}_{}_{}.csv", window.start(), window.end())
}

/// Flat plot data for the adjacent-scenario curves: one row per (group,
/// scenario pair), with the pooled group labelled `ALL`.
pub fn write_comparisons_csv(
    comparisons: &[ScenarioComparison<f64>],
    path: &Path,
) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })?;
    w.write_record([
        "uda_id",
        "pair_index",
        "window_a_start",
        "window_a_end",
        "window_b_start",
        "window_b_end",
        "n_compared",
        "mean_abs_class_diff",
        "spearman_rho",
    ])
    .map_err(|e| DataError::Io { path: path.display().to_string(), source: std::io::Error::other(e.to_string()) })?;
    for (index, cmp) in comparisons.iter().enumerate() {
        let mut rows: Vec<(&str, &crate::analysis::PairStats<f64>)> =
            cmp.per_uda.iter().map(|(uda, stats)| (uda.as_str(), stats)).collect();
        rows.push(("ALL", &cmp.overall));
        for (uda, stats) in rows {
            w.write_record([
                uda,
                &(index + 1).to_string(),
                &cmp.window_a.start().to_string(),
                &cmp.window_a.end().to_string(),
                &cmp.window_b.start().to_string(),
                &cmp.window_b.end().to_string(),
                &stats.n_compared.to_string(),
                &fmt_opt(stats.mean_abs_class_diff),
                &fmt_opt(stats.spearman_rho),
            ])
            .map_err(|e| DataError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            })?;
        }
    }
    w.flush().map_err(|e| DataError::Io { path: path.display().to_string(), source: e })
}

/// Which researchers the trajectory export covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrajectorySelection {
    /// Every ranked researcher that is active in at least one sub-window.
    All,
    /// Exactly these researchers, active or not.
    Researchers(BTreeSet<ResearcherId>),
    None,
}

/// Per-researcher class series over every partition, one row per
/// (researcher, partition length, period), with the fitted trend repeated on
/// each row. Fits need at least two periods; shorter series carry `NA`.
pub fn write_trajectories_csv(
    corpus: &Corpus,
    rankings: &ScenarioRankings,
    outputs: &AnalysisOutputs,
    selection: &TrajectorySelection,
    path: &Path,
) -> Result<(), DataError> {
    let as_io = |e: csv::Error| DataError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })?;
    w.write_record([
        "researcher_id",
        "sds_id",
        "uda_id",
        "length",
        "period_index",
        "window_start",
        "window_end",
        "class",
        "trend_slope",
        "trend_intercept",
    ])
    .map_err(as_io)?;

    if *selection == TrajectorySelection::None {
        return w.flush().map_err(|e| DataError::Io { path: path.display().to_string(), source: e });
    }

    for (length, tables) in &outputs.partition_tables {
        let windows: Vec<Window> = tables
            .iter()
            .filter_map(|t| t.values().next().map(|table| table.window))
            .collect();
        for (sds, population) in &rankings.populations {
            let uda = corpus
                .taxonomy()
                .uda_of(sds)
                .map(|u| u.as_str().to_owned())
                .unwrap_or_default();
            for rid in population {
                if let TrajectorySelection::Researchers(wanted) = selection {
                    if !wanted.contains(rid) {
                        continue;
                    }
                }
                let series: Vec<u8> = tables
                    .iter()
                    .map(|t| t[sds].class_of(rid).expect("population is ranked everywhere"))
                    .collect();
                if *selection == TrajectorySelection::All && series.iter().all(|&c| c == 0) {
                    continue;
                }
                let fit = trend_fit::<f64>(&series).ok();
                let (slope, intercept) = match fit {
                    Some(f) => (f.slope.to_string(), f.intercept.to_string()),
                    None => ("NA".into(), "NA".into()),
                };
                for (period, (&class, window)) in series.iter().zip(&windows).enumerate() {
                    w.write_record([
                        rid.as_str(),
                        sds.as_str(),
                        &uda,
                        &length.to_string(),
                        &period.to_string(),
                        &window.start().to_string(),
                        &window.end().to_string(),
                        &class.to_string(),
                        &slope,
                        &intercept,
                    ])
                    .map_err(as_io)?;
                }
            }
        }
    }
    w.flush().map_err(|e| DataError::Io { path: path.display().to_string(), source: e })
}
