//! Field-normalized, fractionally counted research productivity scoring with
//! publication-window sensitivity analysis.
//!
//! The crate ingests a corpus of researchers, publications and bylines,
//! normalizes citation counts against per-(category, year) medians, computes
//! each researcher's fractional productivity score (FSS) over configurable
//! publication windows, ranks researchers into within-sector percentiles and
//! quartile classes, and measures how those rankings move as the window
//! grows or slides: adjacent-scenario class differences and Spearman
//! correlations, top-class transitions between half-windows, and mean class
//! changes across contiguous equal-length periods.
//!
//! The numeric kernels are generic over the scalar type (`f32`/`f64`) via
//! [`real::Real`]; the aliases below fix `f64`, which the pipeline, file
//! formats and CLI use throughout.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod io;
pub mod normalize;
pub mod pipeline;
pub mod rank;
pub mod real;
pub mod report;
pub mod score;
pub mod stats;
pub mod syngen;
pub mod windows;

pub use corpus::{Corpus, Researcher, ResearcherId, SdsId, UdaId};
pub use error::{AnalysisError, DataError, GeneratorError, Issue, IssueKind};
pub use windows::Window;

/// Default scalar of the pipeline and all file formats.
pub type Scalar = f64;

/// Baseline table over the default scalar.
pub type Baselines = normalize::BaselineTable<Scalar>;
/// Ranking table over the default scalar.
pub type Ranking = rank::RankingTable<Scalar>;
/// One ranking row over the default scalar.
pub type RankingRow = rank::RankingEntry<Scalar>;
/// Adjacent-scenario comparison over the default scalar.
pub type Comparison = analysis::ScenarioComparison<Scalar>;
/// Transition report over the default scalar.
pub type Transitions = analysis::TransitionReport<Scalar>;
/// Contiguous-delta report over the default scalar.
pub type Deltas = analysis::DeltaReport<Scalar>;
/// Fitted class trend over the default scalar.
pub type Trend = analysis::TrendFit<Scalar>;
