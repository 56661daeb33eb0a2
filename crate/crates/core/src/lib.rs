//! Gender-bias auditing for word embeddings.
//!
//! The crate measures bias-by-projection (a word's signed dot product with a
//! gender direction), applies hard-debias (neutralize + equalize), and runs a
//! battery of diagnostics that look for gender information surviving in the
//! neighborhood structure of debiased vectors: clustering of previously biased
//! words, neighbor-based bias scores, profession neighborhoods, WEAT
//! association tests and an RBF-SVM gender classifier.
//!
//! Diagnostics implement [`diagnostics::Experiment`] and are looked up by name
//! in a [`diagnostics::Registry`], which is how both the library entry point
//! [`report::run_audit`] and the `embias` binary select them.

pub mod diagnostics;
pub mod embedding;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod plot;
pub mod report;
pub mod synthetic;
pub mod wordlists;

pub use embedding::{EmbeddingFormat, EmbeddingSet, NeighborList};
pub use error::{Error, Result};
pub use geometry::{BiasScore, DirectionMethod, GenderDirection};
pub use wordlists::WordList;
