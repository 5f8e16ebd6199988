//! Publication windows: the inclusive year intervals that define assessment
//! scenarios, plus the two ways the analyses slice them (growing scenario
//! chains and exact partitions into equal sub-windows).

use serde::{Deserialize, Serialize};

use crate::corpus::Year;
use crate::error::AnalysisError;

/// Inclusive interval of publication years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Window {
    start: Year,
    end: Year,
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            start: Year,
            end: Year,
        }
        let raw = Raw::deserialize(deserializer)?;
        Window::new(raw.start, raw.end).map_err(serde::de::Error::custom)
    }
}

impl Window {
    pub fn new(start: Year, end: Year) -> Result<Window, AnalysisError> {
        if start > end {
            return Err(AnalysisError::InvalidWindow { start, end });
        }
        Ok(Window { start, end })
    }

    pub fn start(&self) -> Year {
        self.start
    }

    pub fn end(&self) -> Year {
        self.end
    }

    /// Number of years covered, counting both endpoints.
    pub fn length(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn contains(&self, year: Year) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn encloses(&self, other: Window) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn years(&self) -> impl Iterator<Item = Year> {
        self.start..=self.end
    }

    /// Compact `start-end` label used in file names and reports.
    pub fn label(&self) -> String {
        if self.start == self.end {
            format!("{}", self.start)
        } else {
            format!("{}-{}", self.start, self.end)
        }
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// The growing scenario chain: windows of length 1, 2, ... `max_length`, all
/// ending at `anchor_end`, shortest first.
pub fn build_scenarios(anchor_end: Year, max_length: usize) -> Vec<Window> {
    assert!(max_length >= 1, "scenario chain needs at least one window");
    (1..=max_length)
        .map(|len| Window {
            start: anchor_end - (len as Year - 1),
            end: anchor_end,
        })
        .collect()
}

/// Consecutive non-overlapping sub-windows of `length` years covering `full`
/// exactly, left to right. Fails when `length` does not divide the full span.
pub fn partition_windows(full: Window, length: usize) -> Result<Vec<Window>, AnalysisError> {
    if length == 0 || !full.length().is_multiple_of(length) {
        return Err(AnalysisError::NonDivisibleLength { full_len: full.length(), part: length });
    }
    let mut out = Vec::with_capacity(full.length() / length);
    let mut start = full.start;
    while start <= full.end {
        let end = start + length as Year - 1;
        out.push(Window { start, end });
        start = end + 1;
    }
    Ok(out)
}
