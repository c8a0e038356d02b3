//! Audit pipeline for detecting demographic bias in resume-scoring language models.
//!
//! The crate builds counterfactual variants of anonymized resumes (e.g.
//! "Gender: Female" / "Gender: Male" / neutral), collects 0-10 scores for each
//! variant from a chat-completion endpoint or a deterministic synthetic scorer,
//! and runs a statistical battery over the results:
//!
//! - descending fractional ranking of each resume's variants ([`ras`]),
//! - four-fifths impact ratios ([`stats::impact`]),
//! - paired permutation tests for level (mean) and spread (variance)
//!   differences ([`stats::permutation`]),
//! - a within-estimator fixed-effects fit separating information-invariant
//!   bias from bias that scales with resume length ([`stats::fixed_effects`]),
//! - an industry-effect regression and moving-average gap curves.
//!
//! [`pipeline`] wires the stages together; the `screenaudit` binary is a thin
//! driver over it.

pub mod chunker;
pub mod config;
pub mod corpus;
pub mod counterfactual;
pub mod pipeline;
pub mod prompt;
pub mod ras;
pub mod report;
pub mod scorer;
pub mod stats;

pub use config::RunConfig;
pub use corpus::{Corpus, Industry, Resume};
pub use counterfactual::{AttributeSpec, Treatment, Variant};
