//! Word-level language identification for Hindi-English code-mixed text.
//!
//! The crate covers the whole pipeline: tweet normalization and corpus
//! assembly ([`corpus`]), character n-gram featurization ([`ngram`]),
//! three feature selectors ([`select`]), three classifiers ([`classify`])
//! and the accuracy-versus-feature-count experiment grid ([`eval`]).

pub mod classify;
pub mod corpus;
pub mod eval;
pub mod ngram;
pub mod select;
pub mod synth;

pub use classify::{ClassifierKind, ClassifierSpec, TrainedModel};
pub use corpus::{LabeledWord, Tag};
pub use ngram::{FeatureMatrix, NGramSpec, Vocabulary};

pub use select::{SelectionResult, SelectorConfig, SelectorMethod};
