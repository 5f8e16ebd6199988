//! Sensitivity analyses over ranking tables: adjacent-scenario class
//! differences and rank correlations, top-class transitions between the two
//! halves of a window, mean class changes across contiguous equal-length
//! sub-windows, and per-researcher trend lines.
//!
//! Researchers classed 0 in every scenario under consideration carry no
//! ranking signal (their class cannot move) and are excluded from all
//! aggregate statistics; every result records how many researchers were
//! actually compared.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::corpus::{FieldTaxonomy, ResearcherId, SdsId, UdaId};
use crate::error::AnalysisError;
use crate::rank::{Class, RankingTable};
use crate::real::{from_u32, from_usize, Real};
use crate::stats::{ols_fit, spearman as spearman_kernel, OlsLine};
use crate::windows::Window;

/// All per-SDS ranking tables of one scenario.
pub type ScenarioTables<F> = BTreeMap<SdsId, RankingTable<F>>;

/// Least-squares trend of a class series.
pub type TrendFit<F> = OlsLine<F>;

/// Tie-corrected Spearman correlation of two class vectors; `None` when one
/// vector is constant and therefore unrankable.
pub fn spearman_classes<F: Real>(a: &[Class], b: &[Class]) -> Result<Option<F>, AnalysisError> {
    let x: Vec<F> = a.iter().map(|&c| from_u32(c as u32)).collect();
    let y: Vec<F> = b.iter().map(|&c| from_u32(c as u32)).collect();
    match spearman_kernel(&x, &y) {
        Ok(rho) => Ok(Some(rho)),
        Err(AnalysisError::DegenerateInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Least-squares line through a researcher's class series (index 0-based).
pub fn trend_fit<F: Real>(series: &[Class]) -> Result<TrendFit<F>, AnalysisError> {
    let values: Vec<F> = series.iter().map(|&c| from_u32(c as u32)).collect();
    ols_fit(&values)
}

/// Aggregate statistics for one researcher group in one scenario pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats<F> {
    /// Researchers entering the statistics after exclusions.
    pub n_compared: usize,
    /// Mean absolute class difference; `None` when nobody was compared.
    pub mean_abs_class_diff: Option<F>,
    /// Spearman correlation of the paired class vectors; `None` when nobody
    /// was compared or one vector is constant (explicitly undefined, never a
    /// silent zero).
    pub spearman_rho: Option<F>,
}

/// Comparison of two scenarios' rankings, per disciplinary area and pooled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioComparison<F> {
    pub window_a: Window,
    pub window_b: Window,
    pub per_uda: BTreeMap<UdaId, PairStats<F>>,
    pub overall: PairStats<F>,
}

/// Top-class transition shares between the two halves of a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionStats<F> {
    pub n_compared: usize,
    pub decreasing: usize,
    pub increasing: usize,
    pub decreasing_pct: F,
    pub increasing_pct: F,
    pub total_pct: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport<F> {
    pub window_first: Window,
    pub window_second: Window,
    pub window_full: Window,
    pub per_uda: BTreeMap<UdaId, TransitionStats<F>>,
    pub overall: TransitionStats<F>,
}

/// Mean absolute class change across consecutive sub-windows of one length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaStat<F> {
    /// Sub-window length in years.
    pub length: usize,
    /// Number of (researcher, consecutive pair) terms in the mean.
    pub n_terms: usize,
    pub mean_abs_class_change: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport<F> {
    pub window_full: Window,
    pub lengths: Vec<usize>,
    pub per_uda: BTreeMap<UdaId, Vec<DeltaStat<F>>>,
    pub overall: Vec<DeltaStat<F>>,
}

/// One researcher's class trajectory across a list of scenarios, grouped for
/// deterministic iteration.
struct ClassMatrix {
    /// Rows sorted by (uda, sds, researcher).
    rows: Vec<(UdaId, SdsId, ResearcherId)>,
    /// Per row: class in each scenario.
    classes: Vec<Vec<Class>>,
}

impl ClassMatrix {
    /// Row indices whose class is zero in every scenario.
    fn always_inactive(&self) -> BTreeSet<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, cs)| cs.iter().all(|&c| c == 0))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Collect the class of every researcher in every scenario, verifying that
/// all scenarios rank exactly the same populations.
fn class_matrix<F: Real>(
    scenarios: &[&ScenarioTables<F>],
    taxonomy: &FieldTaxonomy,
) -> Result<ClassMatrix, AnalysisError> {
    let first = scenarios.first().ok_or_else(|| {
        AnalysisError::DegenerateInput("need at least one scenario".into())
    })?;
    for other in &scenarios[1..] {
        let a: Vec<&SdsId> = first.keys().collect();
        let b: Vec<&SdsId> = other.keys().collect();
        if a != b {
            return Err(AnalysisError::PopulationMismatch(
                "scenarios rank different sector sets".into(),
            ));
        }
    }

    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for (sds, table) in first.iter() {
        let uda = taxonomy
            .uda_of(sds)
            .ok_or_else(|| {
                AnalysisError::PopulationMismatch(format!("sds \"{sds}\" missing from the taxonomy"))
            })?
            .clone();
        let mut lookups: Vec<HashMap<&ResearcherId, Class>> = Vec::with_capacity(scenarios.len());
        for tables in scenarios {
            let t = &tables[sds];
            if t.entries.len() != table.entries.len() {
                return Err(AnalysisError::PopulationMismatch(format!(
                    "sds \"{sds}\" has {} researchers in one scenario and {} in another",
                    table.entries.len(),
                    t.entries.len()
                )));
            }
            lookups.push(t.entries.iter().map(|e| (&e.researcher_id, e.class)).collect());
        }
        let mut ids: Vec<&ResearcherId> = table.entries.iter().map(|e| &e.researcher_id).collect();
        ids.sort();
        for id in ids {
            let mut series = Vec::with_capacity(scenarios.len());
            for lookup in &lookups {
                match lookup.get(id) {
                    Some(&c) => series.push(c),
                    None => {
                        return Err(AnalysisError::PopulationMismatch(format!(
                            "researcher \"{id}\" missing from sds \"{sds}\" in one scenario"
                        )))
                    }
                }
            }
            rows.push((uda.clone(), sds.clone(), id.clone()));
            classes.push(series);
        }
    }
    Ok(ClassMatrix { rows, classes })
}

fn pair_stats<F: Real>(pairs: &[(Class, Class)]) -> PairStats<F> {
    if pairs.is_empty() {
        return PairStats { n_compared: 0, mean_abs_class_diff: None, spearman_rho: None };
    }
    let mut sum = 0u64;
    for &(a, b) in pairs {
        sum += (a as i32 - b as i32).unsigned_abs() as u64;
    }
    let mean = F::from_u64(sum).expect("sum fits scalar") / from_usize(pairs.len());
    let xs: Vec<Class> = pairs.iter().map(|&(a, _)| a).collect();
    let ys: Vec<Class> = pairs.iter().map(|&(_, b)| b).collect();
    let rho = if pairs.len() >= 2 {
        spearman_classes::<F>(&xs, &ys).unwrap_or(None)
    } else {
        None
    };
    PairStats { n_compared: pairs.len(), mean_abs_class_diff: Some(mean), spearman_rho: rho }
}

/// Compare two scenarios' rankings. `excluded` names researchers left out of
/// the statistics (normally those classed 0 across the whole scenario chain;
/// see [`compare_chain`]).
pub fn compare_adjacent<F: Real>(
    tables_a: &ScenarioTables<F>,
    tables_b: &ScenarioTables<F>,
    taxonomy: &FieldTaxonomy,
    excluded: &BTreeSet<ResearcherId>,
) -> Result<ScenarioComparison<F>, AnalysisError> {
    let matrix = class_matrix(&[tables_a, tables_b], taxonomy)?;
    let window_a = tables_a.values().next().map(|t| t.window);
    let window_b = tables_b.values().next().map(|t| t.window);
    let (window_a, window_b) = match (window_a, window_b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(AnalysisError::DegenerateInput("no ranked sectors to compare".into())),
    };

    let mut by_uda: BTreeMap<UdaId, Vec<(Class, Class)>> = BTreeMap::new();
    let mut pooled = Vec::new();
    for (i, (uda, _, rid)) in matrix.rows.iter().enumerate() {
        if excluded.contains(rid) {
            continue;
        }
        let pair = (matrix.classes[i][0], matrix.classes[i][1]);
        by_uda.entry(uda.clone()).or_default().push(pair);
        pooled.push(pair);
    }
    let per_uda = by_uda.into_iter().map(|(uda, pairs)| (uda, pair_stats(&pairs))).collect();
    Ok(ScenarioComparison { window_a, window_b, per_uda, overall: pair_stats(&pooled) })
}

/// Researchers classed 0 in every scenario of a chain.
pub fn always_inactive<F: Real>(
    scenarios: &[ScenarioTables<F>],
    taxonomy: &FieldTaxonomy,
) -> Result<BTreeSet<ResearcherId>, AnalysisError> {
    let refs: Vec<&ScenarioTables<F>> = scenarios.iter().collect();
    let matrix = class_matrix(&refs, taxonomy)?;
    Ok(matrix
        .always_inactive()
        .into_iter()
        .map(|i| matrix.rows[i].2.clone())
        .collect())
}

/// All adjacent comparisons of a scenario chain, excluding researchers
/// classed 0 in every scenario of the whole chain. Empty when the chain has
/// fewer than two scenarios or ranks no sector at all.
pub fn compare_chain<F: Real>(
    scenarios: &[ScenarioTables<F>],
    taxonomy: &FieldTaxonomy,
) -> Result<Vec<ScenarioComparison<F>>, AnalysisError> {
    if scenarios.len() < 2 || scenarios.iter().any(|tables| tables.is_empty()) {
        return Ok(Vec::new());
    }
    let excluded = always_inactive(scenarios, taxonomy)?;
    scenarios
        .windows(2)
        .map(|pair| compare_adjacent(&pair[0], &pair[1], taxonomy, &excluded))
        .collect()
}

fn transition_stats<F: Real>(triples: &[(Class, Class, Class)]) -> TransitionStats<F> {
    let n = triples.len();
    let decreasing = triples.iter().filter(|&&(f, s, full)| f == 4 && s < 4 && full == 4).count();
    let increasing = triples.iter().filter(|&&(f, s, full)| f < 4 && s == 4 && full == 4).count();
    let pct = |count: usize| {
        if n == 0 {
            F::zero()
        } else {
            from_usize::<F>(count) * from_usize::<F>(100) / from_usize::<F>(n)
        }
    };
    TransitionStats {
        n_compared: n,
        decreasing,
        increasing,
        decreasing_pct: pct(decreasing),
        increasing_pct: pct(increasing),
        total_pct: pct(decreasing + increasing),
    }
}

/// Top-class transitions between the two halves of a full window: researchers
/// classed top (4) over the full window who were top in one half but not the
/// other. Percentages are relative to all compared researchers of the group.
pub fn transitions<F: Real>(
    first: &ScenarioTables<F>,
    second: &ScenarioTables<F>,
    full: &ScenarioTables<F>,
    taxonomy: &FieldTaxonomy,
) -> Result<TransitionReport<F>, AnalysisError> {
    let matrix = class_matrix(&[first, second, full], taxonomy)?;
    let inactive = matrix.always_inactive();
    let windows: Vec<Window> = [first, second, full]
        .iter()
        .filter_map(|t| t.values().next().map(|t| t.window))
        .collect();
    if windows.len() != 3 {
        return Err(AnalysisError::DegenerateInput("no ranked sectors to compare".into()));
    }

    let mut by_uda: BTreeMap<UdaId, Vec<(Class, Class, Class)>> = BTreeMap::new();
    let mut pooled = Vec::new();
    for (i, (uda, _, _)) in matrix.rows.iter().enumerate() {
        if inactive.contains(&i) {
            continue;
        }
        let triple = (matrix.classes[i][0], matrix.classes[i][1], matrix.classes[i][2]);
        by_uda.entry(uda.clone()).or_default().push(triple);
        pooled.push(triple);
    }
    Ok(TransitionReport {
        window_first: windows[0],
        window_second: windows[1],
        window_full: windows[2],
        per_uda: by_uda.into_iter().map(|(u, t)| (u, transition_stats(&t))).collect(),
        overall: transition_stats(&pooled),
    })
}

/// Mean absolute class change across consecutive sub-windows, one statistic
/// per requested length. `partitions` pairs each length with the ranking
/// tables of its sub-windows, in window order.
pub fn contiguous_deltas<F: Real>(
    window_full: Window,
    partitions: &[(usize, Vec<ScenarioTables<F>>)],
    taxonomy: &FieldTaxonomy,
) -> Result<DeltaReport<F>, AnalysisError> {
    let mut lengths = Vec::new();
    let mut per_uda: BTreeMap<UdaId, Vec<DeltaStat<F>>> = BTreeMap::new();
    let mut overall = Vec::new();

    for (length, tables) in partitions {
        lengths.push(*length);
        let refs: Vec<&ScenarioTables<F>> = tables.iter().collect();
        let matrix = class_matrix(&refs, taxonomy)?;
        let inactive = matrix.always_inactive();

        let mut sums: BTreeMap<UdaId, (u64, usize)> = BTreeMap::new();
        let mut pooled = (0u64, 0usize);
        for (i, (uda, _, _)) in matrix.rows.iter().enumerate() {
            if inactive.contains(&i) {
                continue;
            }
            let series = &matrix.classes[i];
            let entry = sums.entry(uda.clone()).or_default();
            for pair in series.windows(2) {
                let step = (pair[0] as i32 - pair[1] as i32).unsigned_abs() as u64;
                entry.0 += step;
                entry.1 += 1;
                pooled.0 += step;
                pooled.1 += 1;
            }
        }
        for (uda, (sum, terms)) in sums {
            per_uda.entry(uda).or_default().push(delta_stat(*length, sum, terms));
        }
        overall.push(delta_stat(*length, pooled.0, pooled.1));
    }
    Ok(DeltaReport { window_full, lengths, per_uda, overall })
}

fn delta_stat<F: Real>(length: usize, sum: u64, terms: usize) -> DeltaStat<F> {
    let mean = if terms == 0 {
        None
    } else {
        Some(F::from_u64(sum).expect("sum fits scalar") / from_usize(terms))
    };
    DeltaStat { length, n_terms: terms, mean_abs_class_change: mean }
}
