//! End-to-end orchestration: population and eligibility filtering, scoring of
//! every (sector, window) pair, ranking, and the window-sensitivity analyses.
//!
//! Scoring fans out across researchers with rayon; every aggregation step
//! runs in a fixed order over index-aligned results, so output is identical
//! for any thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::analysis::{
    compare_chain, contiguous_deltas, transitions, DeltaReport, ScenarioComparison, ScenarioTables,
    TransitionReport,
};
use crate::corpus::{filter_eligible_sds, stable_staff, Corpus, ResearcherId, SdsId, Year};
use crate::error::AnalysisError;
use crate::normalize::{BaselineTable, CategoryWeighting};
use crate::rank::rank_sds;
use crate::score::fss_score;
use crate::windows::{build_scenarios, partition_windows, Window};

/// Resolved knobs for a ranking run.
#[derive(Debug, Clone)]
pub struct RankOptions {
    /// Last year of every scenario.
    pub anchor_end: Year,
    /// Longest scenario, in years; the longest window is the reference
    /// window for staff stability and sector eligibility.
    pub max_length: usize,
    pub min_members: usize,
    pub min_active_share: f64,
    pub category_weighting: CategoryWeighting<f64>,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            anchor_end: 2008,
            max_length: 6,
            min_members: 10,
            min_active_share: 0.5,
            category_weighting: CategoryWeighting::Equal,
        }
    }
}

/// Rankings of every eligible sector across the whole scenario chain.
#[derive(Debug, Clone)]
pub struct ScenarioRankings {
    pub full_window: Window,
    pub scenarios: Vec<Window>,
    pub eligible_sds: Vec<SdsId>,
    /// Stable-staff population per eligible sector, id-sorted.
    pub populations: BTreeMap<SdsId, Vec<ResearcherId>>,
    /// One table set per scenario, aligned with `scenarios`.
    pub tables: Vec<ScenarioTables<f64>>,
    /// Publications skipped for an undefined baseline, summed over all
    /// scoring calls.
    pub undefined_baseline_pubs: u64,
    pub diagnostics: Vec<String>,
}

/// Score and rank one window for the given populations. Returns the tables
/// plus the number of undefined-baseline publications encountered.
pub fn rank_window(
    corpus: &Corpus,
    baselines: &BaselineTable<f64>,
    populations: &BTreeMap<SdsId, Vec<ResearcherId>>,
    window: Window,
    weighting: &CategoryWeighting<f64>,
) -> Result<(ScenarioTables<f64>, u64), AnalysisError> {
    let mut tables = BTreeMap::new();
    let mut undefined_total = 0u64;
    for (sds, population) in populations {
        let outcomes: Vec<(f64, u32)> = population
            .par_iter()
            .map(|rid| {
                let outcome = fss_score(corpus, baselines, rid, window, weighting)
                    .expect("population members exist in the corpus");
                (outcome.value, outcome.undefined_baseline_pubs)
            })
            .collect();
        let mut scores: BTreeMap<ResearcherId, f64> = BTreeMap::new();
        for (rid, (value, undefined)) in population.iter().zip(&outcomes) {
            scores.insert(rid.clone(), *value);
            undefined_total += *undefined as u64;
        }
        tables.insert(sds.clone(), rank_sds(sds.clone(), window, &scores)?);
    }
    Ok((tables, undefined_total))
}

/// Build the scenario chain and rank every eligible sector in each scenario.
/// Staff stability and eligibility are judged once, against the full
/// (longest) window, and the same population is ranked in every scenario.
pub fn rank_scenarios(
    corpus: &Corpus,
    baselines: &BaselineTable<f64>,
    opts: &RankOptions,
) -> Result<ScenarioRankings, AnalysisError> {
    let scenarios = build_scenarios(opts.anchor_end, opts.max_length);
    let full_window = *scenarios.last().expect("at least one scenario");

    let stable = stable_staff(corpus, full_window);
    let eligible = filter_eligible_sds(corpus, full_window, opts.min_active_share, opts.min_members);

    let mut populations: BTreeMap<SdsId, Vec<ResearcherId>> = BTreeMap::new();
    for sds in &eligible {
        let members: Vec<ResearcherId> = corpus
            .researchers_in_sds(sds)
            .map(|r| r.researcher_id.clone())
            .filter(|rid| stable.contains(rid))
            .collect();
        populations.insert(sds.clone(), members);
    }

    let mut diagnostics = Vec::new();
    if populations.is_empty() {
        diagnostics.push(format!(
            "no sector is eligible over {} (minimum {} stable members, {}% of them active)",
            full_window,
            opts.min_members,
            opts.min_active_share * 100.0
        ));
    }

    let mut tables = Vec::with_capacity(scenarios.len());
    let mut undefined_baseline_pubs = 0u64;
    for window in &scenarios {
        let (t, undefined) = rank_window(corpus, baselines, &populations, *window, &opts.category_weighting)?;
        for table in t.values() {
            diagnostics.extend(table.diagnostics.iter().cloned());
        }
        undefined_baseline_pubs += undefined;
        tables.push(t);
    }

    Ok(ScenarioRankings {
        full_window,
        scenarios,
        eligible_sds: eligible.into_iter().collect(),
        populations,
        tables,
        undefined_baseline_pubs,
        diagnostics,
    })
}

/// Knobs for the sensitivity analyses on top of a ranking run.
#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Sub-window lengths for the contiguous-delta statistics; lengths that
    /// do not divide the full window are reported as skipped.
    pub delta_lengths: Vec<usize>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { delta_lengths: vec![1, 2, 3] }
    }
}

/// Everything the analyses produce for one run.
#[derive(Debug, Clone)]
pub struct AnalysisOutputs {
    /// Adjacent-scenario comparisons; empty when the chain has one scenario.
    pub comparisons: Vec<ScenarioComparison<f64>>,
    /// Researchers classed 0 in every scenario, excluded from comparisons.
    pub excluded_always_inactive: usize,
    /// Half-versus-half transition report; absent when the full window
    /// cannot be split into two equal halves.
    pub transitions: Option<TransitionReport<f64>>,
    pub deltas: DeltaReport<f64>,
    pub skipped_delta_lengths: Vec<usize>,
    /// Ranking tables of every sub-window partition, keyed by length; kept
    /// for trajectory exports.
    pub partition_tables: BTreeMap<usize, Vec<ScenarioTables<f64>>>,
}

/// Run all three analyses over an existing ranking run.
pub fn analyze(
    corpus: &Corpus,
    baselines: &BaselineTable<f64>,
    rankings: &ScenarioRankings,
    opts: &AnalyzeOptions,
    weighting: &CategoryWeighting<f64>,
) -> Result<AnalysisOutputs, AnalysisError> {
    let taxonomy = corpus.taxonomy();
    let full = rankings.full_window;

    let comparisons = compare_chain(&rankings.tables, taxonomy)?;
    let excluded = if comparisons.is_empty() {
        0
    } else {
        crate::analysis::always_inactive(&rankings.tables, taxonomy)?.len()
    };

    // Ranking tables for every requested partition length that fits.
    let mut partition_tables: BTreeMap<usize, Vec<ScenarioTables<f64>>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for &length in &opts.delta_lengths {
        match partition_windows(full, length) {
            Ok(windows) => {
                let mut per_window = Vec::with_capacity(windows.len());
                for window in windows {
                    // reuse the scenario table when the partition window is one
                    if let Some(pos) = rankings.scenarios.iter().position(|w| *w == window) {
                        per_window.push(rankings.tables[pos].clone());
                    } else {
                        let (t, _) =
                            rank_window(corpus, baselines, &rankings.populations, window, weighting)?;
                        per_window.push(t);
                    }
                }
                partition_tables.insert(length, per_window);
            }
            Err(_) => skipped.push(length),
        }
    }

    let partitions: Vec<(usize, Vec<ScenarioTables<f64>>)> =
        partition_tables.iter().map(|(l, t)| (*l, t.clone())).collect();
    let deltas = contiguous_deltas(full, &partitions, taxonomy)?;

    // Transitions compare the two halves of the full window with the full
    // ranking itself.
    let has_population = !rankings.populations.is_empty();
    let transitions_report = if has_population && full.length() >= 2 && full.length().is_multiple_of(2) {
        let half = full.length() / 2;
        let halves = partition_windows(full, half)?;
        let mut half_tables = Vec::with_capacity(2);
        for window in halves {
            if let Some(existing) = partition_tables.get(&half) {
                let pos = existing.iter().position(|tables| {
                    tables.values().next().map(|t| t.window) == Some(window)
                });
                if let Some(pos) = pos {
                    half_tables.push(existing[pos].clone());
                    continue;
                }
            }
            let (t, _) = rank_window(corpus, baselines, &rankings.populations, window, weighting)?;
            half_tables.push(t);
        }
        let full_tables = rankings.tables.last().expect("chain is non-empty");
        Some(transitions(&half_tables[0], &half_tables[1], full_tables, taxonomy)?)
    } else {
        None
    };

    Ok(AnalysisOutputs {
        comparisons,
        excluded_always_inactive: excluded,
        transitions: transitions_report,
        deltas,
        skipped_delta_lengths: skipped,
        partition_tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syngen::{generate, GeneratorConfig};

    fn small_corpus() -> Corpus {
        let config = GeneratorConfig {
            seed: 7,
            n_sds: 3,
            n_udas: 2,
            staff_per_sds: (12, 15),
            ..GeneratorConfig::default()
        };
        generate(&config).unwrap().corpus
    }

    #[test]
    fn scenario_chain_ranks_the_same_population_everywhere() {
        let corpus = small_corpus();
        let baselines = BaselineTable::from_corpus(&corpus);
        let rankings = rank_scenarios(&corpus, &baselines, &RankOptions::default()).unwrap();
        assert_eq!(rankings.scenarios.len(), 6);
        assert_eq!(rankings.tables.len(), 6);
        for tables in &rankings.tables {
            for (sds, table) in tables {
                assert_eq!(table.entries.len(), rankings.populations[sds].len());
            }
        }
    }

    #[test]
    fn analysis_covers_all_sections_for_a_six_year_window() {
        let corpus = small_corpus();
        let baselines = BaselineTable::from_corpus(&corpus);
        let rankings = rank_scenarios(&corpus, &baselines, &RankOptions::default()).unwrap();
        let outputs = analyze(
            &corpus,
            &baselines,
            &rankings,
            &AnalyzeOptions::default(),
            &CategoryWeighting::Equal,
        )
        .unwrap();
        assert_eq!(outputs.comparisons.len(), 5);
        assert!(outputs.transitions.is_some());
        assert_eq!(outputs.deltas.lengths, vec![1, 2, 3]);
        assert!(outputs.skipped_delta_lengths.is_empty());
    }

    #[test]
    fn single_scenario_has_no_comparisons() {
        let corpus = small_corpus();
        let baselines = BaselineTable::from_corpus(&corpus);
        let opts = RankOptions { max_length: 1, ..RankOptions::default() };
        let rankings = rank_scenarios(&corpus, &baselines, &opts).unwrap();
        let outputs = analyze(
            &corpus,
            &baselines,
            &rankings,
            &AnalyzeOptions { delta_lengths: vec![1, 2, 3] },
            &CategoryWeighting::Equal,
        )
        .unwrap();
        assert!(outputs.comparisons.is_empty());
        assert!(outputs.transitions.is_none());
        assert_eq!(outputs.skipped_delta_lengths, vec![2, 3]);
    }

    #[test]
    fn no_eligible_sector_yields_empty_tables_and_a_diagnostic() {
        let corpus = small_corpus();
        let baselines = BaselineTable::from_corpus(&corpus);
        let opts = RankOptions { min_members: 10_000, ..RankOptions::default() };
        let rankings = rank_scenarios(&corpus, &baselines, &opts).unwrap();
        assert!(rankings.eligible_sds.is_empty());
        assert!(rankings.tables.iter().all(|t| t.is_empty()));
        assert!(!rankings.diagnostics.is_empty());
    }

    #[test]
    fn identical_runs_are_identical_across_thread_counts() {
        let corpus = small_corpus();
        let baselines = BaselineTable::from_corpus(&corpus);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let rankings = rank_scenarios(&corpus, &baselines, &RankOptions::default()).unwrap();
                let outputs = analyze(
                    &corpus,
                    &baselines,
                    &rankings,
                    &AnalyzeOptions::default(),
                    &CategoryWeighting::Equal,
                )
                .unwrap();
                (rankings.tables, outputs.deltas)
            })
        };
        let (tables_1, deltas_1) = run(1);
        let (tables_4, deltas_4) = run(4);
        assert_eq!(tables_1, tables_4);
        assert_eq!(deltas_1, deltas_4);
    }
}
