//! Heterogeneous document representations for fake-news classification.
//!
//! Documents are turned into several dense blocks (stylometric statistics,
//! LSA, knowledge-graph concept averages, metadata entity averages, or
//! externally computed contextual embeddings), the blocks are concatenated
//! into scenarios, and linear or neural classifiers are trained on the result.
//! The [`analysis`] module ranks features by mutual information and runs the
//! exhaustive block-subset ablation.

pub mod analysis;
mod binio;
pub mod corpus;
pub mod error;
pub mod kgrep;
pub mod learners;
pub mod lexicon;
pub mod linalg;
pub mod seed;
pub mod stacking;
pub mod textrep;

pub use error::{Error, Result};
