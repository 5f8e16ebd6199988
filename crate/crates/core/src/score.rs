//! Authorship credit weights and the per-researcher productivity score (FSS):
//! the sum, over a researcher's publications in a window, of the publication's
//! field-normalized citation score times the researcher's fractional weight
//! in the byline.

use crate::corpus::{AuthorshipEntry, Corpus, ResearcherId};
use crate::error::AnalysisError;
use crate::normalize::{standardized_score, BaselineTable, CategoryWeighting};
use crate::real::{from_f64, from_usize, Real};
use crate::windows::Window;

/// How byline credit is split among co-authors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// Equal share `1/s` for every author.
    Uniform,
    /// Position-sensitive shares for the life-science convention; bylines the
    /// rules do not cover fall back to uniform.
    Positional,
}

/// Fractional weights for a whole byline under `scheme`, ordered by position.
/// Weights always sum to 1.
///
/// The positional scheme, for bylines of at least four authors:
/// * first and last author at the same institution: 40% each to first and
///   last, the remaining 20% split equally among the other authors;
/// * the institutions of the first two authors disjoint from those of the
///   last two: 30% to first and last, 15% to second and second-to-last, the
///   remaining 10% split equally among the others (needs at least five
///   authors for the remainder to have a recipient);
/// * anything else: uniform `1/s`.
pub fn byline_weights<F: Real>(byline: &[AuthorshipEntry], scheme: WeightScheme) -> Vec<F> {
    let s = byline.len();
    assert!(s >= 1, "byline must have at least one author");
    let uniform = || vec![F::one() / from_usize::<F>(s); s];
    if scheme == WeightScheme::Uniform || s < 4 {
        return uniform();
    }
    let inst = |i: usize| &byline[i].institution_id;
    if inst(0) == inst(s - 1) {
        let mut weights = vec![from_f64::<F>(0.20) / from_usize::<F>(s - 2); s];
        weights[0] = from_f64(0.40);
        weights[s - 1] = from_f64(0.40);
        return weights;
    }
    let head_tail_disjoint = inst(0) != inst(s - 2)
        && inst(0) != inst(s - 1)
        && inst(1) != inst(s - 2)
        && inst(1) != inst(s - 1);
    if head_tail_disjoint && s >= 5 {
        let mut weights = vec![from_f64::<F>(0.10) / from_usize::<F>(s - 4); s];
        weights[0] = from_f64(0.30);
        weights[s - 1] = from_f64(0.30);
        weights[1] = from_f64(0.15);
        weights[s - 2] = from_f64(0.15);
        return weights;
    }
    uniform()
}

/// Weight of the author at `position` (1-based) in `byline`.
pub fn author_weight<F: Real>(byline: &[AuthorshipEntry], position: u32, scheme: WeightScheme) -> F {
    assert!(
        position >= 1 && (position as usize) <= byline.len(),
        "position {position} outside byline of length {}",
        byline.len()
    );
    byline_weights(byline, scheme)[position as usize - 1]
}

/// An FSS value together with the diagnostics accumulated while computing it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FssOutcome<F> {
    /// The productivity score; non-negative, zero iff every term is zero.
    pub value: F,
    /// Publications inside the window whose baseline was undefined in every
    /// listed category; they contribute 0 to the score.
    pub undefined_baseline_pubs: u32,
}

/// Productivity score of one researcher over a window.
///
/// Each in-window publication contributes its standardized citation score
/// times the researcher's byline weight. The weight scheme is positional
/// exactly when the taxonomy flags the researcher's sector; publications with
/// an undefined baseline contribute nothing and are tallied.
pub fn fss_score<F: Real>(
    corpus: &Corpus,
    baselines: &BaselineTable<F>,
    researcher: &ResearcherId,
    window: Window,
    weighting: &CategoryWeighting<F>,
) -> Result<FssOutcome<F>, AnalysisError> {
    let record = corpus
        .researcher(researcher)
        .ok_or_else(|| AnalysisError::PopulationMismatch(format!("unknown researcher \"{researcher}\"")))?;
    let scheme = if corpus.taxonomy().positional_weighting(&record.sds_id) {
        WeightScheme::Positional
    } else {
        WeightScheme::Uniform
    };
    let mut value = F::zero();
    let mut undefined = 0u32;
    for (publication, entry) in corpus.works_of(researcher) {
        if !window.contains(publication.year) {
            continue;
        }
        match standardized_score(publication, baselines, weighting) {
            Some(score) => {
                let weight = author_weight::<F>(corpus.byline(&publication.pub_id), entry.position, scheme);
                value += score * weight;
            }
            None => undefined += 1,
        }
    }
    Ok(FssOutcome { value, undefined_baseline_pubs: undefined })
}
