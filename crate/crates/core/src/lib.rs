//! Paper-level subject classification by propagating fractional category
//! weights from citing papers onto their references and back.
//!
//! The pipeline is: load a [`CategoryScheme`], build a [`Corpus`] whose papers
//! inherit their journal's fractional vector, [`engine::run`] the propagation
//! to obtain the journal-limited and unlimited classifications, [`assign::prune`]
//! them to bounded multi-assignments, and evaluate them with [`metrics`].

pub mod assign;
pub mod classification;
pub mod corpus;
pub mod engine;
mod error;
pub mod metrics;
pub mod report;
pub mod scheme;
mod sparse;
pub mod synth;
mod table;
pub mod vector;

pub use classification::{Classification, Method, RunInfo, Variant};
pub use corpus::{eligible_papers, Corpus, CorpusBuilder, Paper};
pub use engine::{Convergence, EngineConfig, EngineOutput};
pub use error::{Error, Result};
pub use scheme::{fractionalize_journal, CategoryScheme, JournalAssignment};
pub use vector::{CategoryIndex, WeightVector};
