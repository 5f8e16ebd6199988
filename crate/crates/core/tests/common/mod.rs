//! Independent reference implementations used to check the library from the
//! outside. Nothing here shares code with the paths under test: the FSS
//! oracle is a flat loop over the raw authorship rows, and the Spearman
//! oracle works in exact integer arithmetic.

use std::collections::{BTreeMap, HashMap};

use fss_core::corpus::{AuthorshipEntry, Corpus, PubId, ResearcherId};
use fss_core::normalize::BaselineTable;
use fss_core::windows::Window;

/// Flat-loop FSS oracle. Groups bylines once (a plain scan of the authorship
/// rows), then walks every publication for every query.
pub struct FssOracle {
    bylines: HashMap<PubId, Vec<AuthorshipEntry>>,
}

#[allow(dead_code)]
impl FssOracle {
    pub fn new(corpus: &Corpus) -> Self {
        let mut bylines: HashMap<PubId, Vec<AuthorshipEntry>> = HashMap::new();
        for entry in corpus.authorship() {
            bylines.entry(entry.pub_id.clone()).or_default().push(entry.clone());
        }
        for byline in bylines.values_mut() {
            byline.sort_by_key(|e| e.position);
        }
        FssOracle { bylines }
    }

    /// Positional weight vector written straight from the stated rules,
    /// structured differently from the implementation.
    fn weights(byline: &[AuthorshipEntry], positional: bool) -> Vec<f64> {
        let s = byline.len();
        let mut w = vec![1.0 / s as f64; s];
        if !positional || s < 4 {
            return w;
        }
        let first = byline[0].institution_id.as_str();
        let second = byline[1].institution_id.as_str();
        let last = byline[s - 1].institution_id.as_str();
        let second_last = byline[s - 2].institution_id.as_str();
        if first == last {
            for item in w.iter_mut().take(s - 1).skip(1) {
                *item = 0.20 / (s as f64 - 2.0);
            }
            w[0] = 0.40;
            w[s - 1] = 0.40;
        } else if s >= 5
            && first != second_last
            && second != last
            && second != second_last
            && first != last
        {
            for item in w.iter_mut().take(s - 2).skip(2) {
                *item = 0.10 / (s as f64 - 4.0);
            }
            w[0] = 0.30;
            w[1] = 0.15;
            w[s - 2] = 0.15;
            w[s - 1] = 0.30;
        }
        w
    }

    /// Equal-weight standardized score, recomputed from the baseline cells.
    fn standardized(publication: &fss_core::corpus::Publication, baselines: &BaselineTable<f64>) -> Option<f64> {
        let mut ratios = Vec::new();
        for category in &publication.subject_categories {
            if let Some(cell) = baselines.get(category, publication.year) {
                ratios.push(publication.citation_count as f64 / cell.median);
            }
        }
        if ratios.is_empty() {
            None
        } else {
            Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    }

    /// FSS by brute force: a flat loop over all publications of the corpus.
    pub fn fss(
        &self,
        corpus: &Corpus,
        baselines: &BaselineTable<f64>,
        researcher: &ResearcherId,
        window: Window,
    ) -> f64 {
        let positional = corpus
            .researcher(researcher)
            .map(|r| corpus.taxonomy().positional_weighting(&r.sds_id))
            .unwrap_or(false);
        let mut total = 0.0;
        for publication in corpus.publications() {
            if !window.contains(publication.year) {
                continue;
            }
            let byline = match self.bylines.get(&publication.pub_id) {
                Some(b) => b,
                None => continue,
            };
            let position = byline.iter().position(|e| e.researcher_id.as_ref() == Some(researcher));
            if let Some(position) = position {
                if let Some(score) = Self::standardized(publication, baselines) {
                    total += score * Self::weights(byline, positional)[position];
                }
            }
        }
        total
    }
}

/// Doubled mid-ranks via cumulative counting: the 1-based mid-rank of a value
/// with `l` strictly-lower entries and `t` equal entries is `l + (t + 1) / 2`,
/// so twice that is the integer `2l + t + 1`.
#[allow(dead_code)]
fn doubled_mid_ranks(values: &[i64]) -> Vec<i64> {
    let mut counts: BTreeMap<i64, i64> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let mut lower: BTreeMap<i64, i64> = BTreeMap::new();
    let mut cumulative = 0;
    for (&v, &c) in &counts {
        lower.insert(v, cumulative);
        cumulative += c;
    }
    values.iter().map(|v| 2 * lower[v] + counts[v] + 1).collect()
}

/// Exact-arithmetic Spearman oracle: Pearson over doubled mid-ranks with
/// i128 sums; the only rounding happens in the final division and square
/// roots. `None` when a vector is constant.
#[allow(dead_code)]
pub fn spearman_oracle(x: &[i64], y: &[i64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let rx = doubled_mid_ranks(x);
    let ry = doubled_mid_ranks(y);
    let n = x.len() as i128;
    let sx: i128 = rx.iter().map(|&v| v as i128).sum();
    let sy: i128 = ry.iter().map(|&v| v as i128).sum();
    let sxx: i128 = rx.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let syy: i128 = ry.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let sxy: i128 = rx.iter().zip(&ry).map(|(&a, &b)| (a as i128) * (b as i128)).sum();
    let num = n * sxy - sx * sy;
    let dx = n * sxx - sx * sx;
    let dy = n * syy - sy * sy;
    if dx == 0 || dy == 0 {
        return None;
    }
    Some(num as f64 / ((dx as f64).sqrt() * (dy as f64).sqrt()))
}
