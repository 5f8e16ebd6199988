//! Within-sector ranking: percentile placement of each researcher's score and
//! the quartile class 4 (top) through 1, with class 0 reserved for researchers
//! whose score is zero.
//!
//! Percentiles use the mid-rank convention over the full evaluated
//! population: `100 * (L + 0.5 * T) / N`, where `L` researchers score
//! strictly lower and `T` other researchers score exactly the same. Tied
//! scores therefore always share a percentile and a class.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{ResearcherId, SdsId};
use crate::error::AnalysisError;
use crate::real::{from_f64, from_usize, Real};
use crate::windows::Window;

/// Quartile class: 4 = top quartile, 1 = bottom, 0 = unproductive.
pub type Class = u8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingEntry<F> {
    pub researcher_id: ResearcherId,
    pub fss: F,
    /// Mid-rank percentile in `[0, 100]`.
    pub percentile: F,
    pub class: Class,
}

/// Ranking of one sector's population for one window, descending by score
/// (ties broken by researcher id purely for deterministic output).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingTable<F> {
    pub sds_id: SdsId,
    pub window: Window,
    pub entries: Vec<RankingEntry<F>>,
    /// Human-readable notes about degenerate situations (e.g. a one-member
    /// population).
    pub diagnostics: Vec<String>,
}

impl<F: Real> RankingTable<F> {
    /// Class of a researcher, if present.
    pub fn class_of(&self, id: &ResearcherId) -> Option<Class> {
        self.entries.iter().find(|e| &e.researcher_id == id).map(|e| e.class)
    }
}

fn classify<F: Real>(percentile: F, productive: bool) -> Class {
    if !productive {
        return 0;
    }
    if percentile >= from_f64(75.0) {
        4
    } else if percentile >= from_f64(50.0) {
        3
    } else if percentile >= from_f64(25.0) {
        2
    } else {
        1
    }
}

/// Rank one sector's population by score.
///
/// `scores` must hold every researcher of the population; an empty map is an
/// error. Researchers with score exactly zero keep their computed percentile
/// but are classed 0.
pub fn rank_sds<F: Real>(
    sds_id: SdsId,
    window: Window,
    scores: &BTreeMap<ResearcherId, F>,
) -> Result<RankingTable<F>, AnalysisError> {
    if scores.is_empty() {
        return Err(AnalysisError::EmptyPopulation(format!("sds \"{sds_id}\"")));
    }
    let n = scores.len();
    let mut ordered: Vec<(&ResearcherId, F)> = scores.iter().map(|(id, &v)| (id, v)).collect();
    // Ascending by score so strictly-lower counts fall out of tie-group scans.
    ordered.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite scores").then_with(|| a.0.cmp(b.0)));

    let nf = from_usize::<F>(n);
    let hundred = from_f64::<F>(100.0);
    let half = from_f64::<F>(0.5);
    let mut entries: Vec<RankingEntry<F>> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ordered[j].1 == ordered[i].1 {
            j += 1;
        }
        let lower = from_usize::<F>(i);
        let other_ties = from_usize::<F>(j - i - 1);
        let percentile = hundred * (lower + half * other_ties) / nf;
        let productive = ordered[i].1 > F::zero();
        let class = classify(percentile, productive);
        for &(id, fss) in &ordered[i..j] {
            entries.push(RankingEntry { researcher_id: id.clone(), fss, percentile, class });
        }
        i = j;
    }
    entries.sort_by(|a, b| {
        b.fss
            .partial_cmp(&a.fss)
            .expect("finite scores")
            .then_with(|| a.researcher_id.cmp(&b.researcher_id))
    });

    let mut diagnostics = Vec::new();
    if n == 1 {
        diagnostics.push(format!(
            "sds \"{sds_id}\": single-member population; the mid-rank percentile places it at 0"
        ));
    }
    Ok(RankingTable { sds_id, window, entries, diagnostics })
}
