//! Small numeric kernels shared by the normalization and analysis modules:
//! medians, mid-rank transforms, tie-corrected Spearman correlation and
//! ordinary least squares. All generic over the [`Real`] scalar.

use crate::error::AnalysisError;
use crate::real::{from_usize, Real};

/// Median of already-sorted values; even cardinality takes the arithmetic
/// mean of the two central order statistics.
pub fn median_of_sorted<F: Real>(sorted: &[F]) -> Option<F> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let mid = n / 2;
    if n % 2 == 1 {
        Some(sorted[mid])
    } else {
        Some((sorted[mid - 1] + sorted[mid]) / from_usize(2))
    }
}

/// Median of unsorted non-negative counts.
pub fn median_of_counts<F: Real>(counts: &[u32]) -> Option<F> {
    if counts.is_empty() {
        return None;
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mid = n / 2;
    if n % 2 == 1 {
        Some(crate::real::from_u32(sorted[mid]))
    } else {
        Some((crate::real::from_u32::<F>(sorted[mid - 1]) + crate::real::from_u32::<F>(sorted[mid])) / from_usize(2))
    }
}

/// 1-based mid-ranks (average ranks): tied values all receive the mean of the
/// ranks the tie group spans.
pub fn mid_ranks<F: Real>(values: &[F]) -> Vec<F> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("rankable values"));
    let mut ranks = vec![F::zero(); n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share the average of ranks i+1 ..= j
        let avg = (from_usize::<F>(i + 1) + from_usize::<F>(j)) / from_usize(2);
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Tie-corrected Spearman rank correlation: Pearson correlation of the
/// mid-rank transforms. A vector with all values equal has no ranking and
/// yields [`AnalysisError::DegenerateInput`].
pub fn spearman<F: Real>(x: &[F], y: &[F]) -> Result<F, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::PopulationMismatch(format!(
            "vector lengths {} and {} differ",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(AnalysisError::DegenerateInput("need at least two observations".into()));
    }
    let rx = mid_ranks(x);
    let ry = mid_ranks(y);
    // The mean rank is (n+1)/2 exactly for any tie pattern.
    let n = x.len();
    let mean = (from_usize::<F>(n) + F::one()) / from_usize(2);
    let mut sxy = F::zero();
    let mut sxx = F::zero();
    let mut syy = F::zero();
    for i in 0..n {
        let dx = rx[i] - mean;
        let dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx.is_zero() || syy.is_zero() {
        return Err(AnalysisError::DegenerateInput("constant vector has no ranking".into()));
    }
    // rounding in the denominator can push a perfectly correlated pair one
    // ulp past the mathematical bound
    let rho = sxy / (sxx * syy).sqrt();
    Ok(rho.min(F::one()).max(-F::one()))
}

/// Ordinary least-squares line over `(index, value)` pairs, index 0-based.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OlsLine<F> {
    pub slope: F,
    pub intercept: F,
}

/// Closed-form OLS fit of `values` against their 0-based indices.
pub fn ols_fit<F: Real>(values: &[F]) -> Result<OlsLine<F>, AnalysisError> {
    let n = values.len();
    if n < 2 {
        return Err(AnalysisError::DegenerateInput("need at least two points to fit a line".into()));
    }
    let nf = from_usize::<F>(n);
    let mean_x = (nf - F::one()) / from_usize(2);
    let mean_y = values.iter().copied().sum::<F>() / nf;
    let mut sxy = F::zero();
    let mut sxx = F::zero();
    for (i, &v) in values.iter().enumerate() {
        let dx = from_usize::<F>(i) - mean_x;
        sxy += dx * (v - mean_y);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    Ok(OlsLine { slope, intercept: mean_y - slope * mean_x })
}

/// Arithmetic mean; `None` on an empty slice.
pub fn mean<F: Real>(values: &[F]) -> Option<F> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().copied().sum::<F>() / from_usize(values.len()))
    }
}
