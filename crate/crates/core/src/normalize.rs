//! Citation normalization: per-(subject category, year) citation medians and
//! the field-normalized score of a publication.
//!
//! Baselines are computed once from a fixed reference set (the corpus itself,
//! or an externally supplied publication list) and never vary with the
//! assessment window, so a publication's normalized value is stable across
//! scenarios. Publications with zero citations do not enter the medians; a
//! (category, year) cell whose publications are all uncited is simply absent.

use std::collections::HashMap;

use crate::corpus::{CategoryId, Corpus, Publication, Year};
use crate::real::{from_u32, Real};
use crate::stats::median_of_counts;

/// One baseline cell: the median of positive citation counts and how many
/// publications contributed to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineCell<F> {
    /// Median of the positive citation counts; always > 0.
    pub median: F,
    /// Number of cited publications behind the median.
    pub count: u32,
}

/// Citation medians keyed by (subject category, publication year).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BaselineTable<F> {
    cells: HashMap<(CategoryId, Year), BaselineCell<F>>,
}

impl<F: Real> BaselineTable<F> {
    /// Compute baselines from a reference publication set. Cells exist only
    /// where at least one publication has a positive citation count.
    pub fn build<'a>(reference: impl IntoIterator<Item = &'a Publication>) -> Self {
        let mut grouped: HashMap<(CategoryId, Year), Vec<u32>> = HashMap::new();
        for publication in reference {
            if publication.citation_count == 0 {
                continue;
            }
            for category in &publication.subject_categories {
                grouped
                    .entry((category.clone(), publication.year))
                    .or_default()
                    .push(publication.citation_count);
            }
        }
        let cells = grouped
            .into_iter()
            .map(|(key, counts)| {
                let median = median_of_counts(&counts).expect("group is non-empty");
                (key, BaselineCell { median, count: counts.len() as u32 })
            })
            .collect();
        BaselineTable { cells }
    }

    /// Build straight from a corpus (the corpus is its own reference set).
    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::build(corpus.publications())
    }

    pub fn from_cells(cells: impl IntoIterator<Item = ((CategoryId, Year), BaselineCell<F>)>) -> Self {
        BaselineTable { cells: cells.into_iter().collect() }
    }

    pub fn get(&self, category: &CategoryId, year: Year) -> Option<&BaselineCell<F>> {
        self.cells.get(&(category.clone(), year))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells in (category, year) order, for export and deterministic output.
    pub fn sorted_cells(&self) -> Vec<(&CategoryId, Year, &BaselineCell<F>)> {
        let mut out: Vec<_> = self.cells.iter().map(|((c, y), cell)| (c, *y, cell)).collect();
        out.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)));
        out
    }
}

/// How the normalized values of a multi-category publication are averaged.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CategoryWeighting<F> {
    /// Equal weight to every listed category (the default).
    #[default]
    Equal,
    /// Weight by category list position; positions beyond the vector reuse
    /// its last weight. Weights are renormalized over the categories that
    /// actually have a baseline cell.
    ByPosition(Vec<F>),
}

impl<F: Real> CategoryWeighting<F> {
    fn weight_at(&self, position: usize) -> F {
        match self {
            CategoryWeighting::Equal => F::one(),
            CategoryWeighting::ByPosition(ws) => {
                let idx = position.min(ws.len().saturating_sub(1));
                ws.get(idx).copied().unwrap_or_else(F::one)
            }
        }
    }
}

/// Field-normalized citation score of one publication: its citation count
/// divided by the baseline median, averaged over the publication's subject
/// categories with the configured weights. Categories without a baseline
/// cell carry no information and are dropped from the average; when no
/// category has a cell the baseline is undefined and `None` is returned.
pub fn standardized_score<F: Real>(
    publication: &Publication,
    baselines: &BaselineTable<F>,
    weighting: &CategoryWeighting<F>,
) -> Option<F> {
    let citations = from_u32::<F>(publication.citation_count);
    let mut weighted_sum = F::zero();
    let mut weight_total = F::zero();
    let mut defined = 0usize;
    for (position, category) in publication.subject_categories.iter().enumerate() {
        if let Some(cell) = baselines.get(category, publication.year) {
            let weight = weighting.weight_at(position);
            weighted_sum += weight * (citations / cell.median);
            weight_total += weight;
            defined += 1;
        }
    }
    if defined == 0 || weight_total.is_zero() {
        return None;
    }
    Some(weighted_sum / weight_total)
}
