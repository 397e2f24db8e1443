//! Linguistic diversity of multilingual data sets.
//!
//! Languages are described by text-derived features (mean word length in
//! grapheme clusters) and database-derived features (binary syntactic
//! features, WALS morphology). A data set is compared with a reference
//! language sample by binning per-language measurements and taking the
//! minmax Jaccard of the two histograms; entropy-based typology indices
//! measure the spread within one sample.

pub mod analysis;
pub mod cli;
pub mod diversity;
pub mod error;
pub mod grammar;
pub mod ingest;
pub mod model;
pub mod textstats;

pub use error::{Error, Failures, Result};
pub use model::{
    BinRow, BinnedDistribution, DiversityReport, FeatureMatrix, GapReport, Iso, LanguageRecord,
    LanguageSet, MatrixKind, MorphFeatureSpec, ScoreName, TextProfile,
};
