//! Topic-sensitive word embeddings.
//!
//! A Hierarchical Dirichlet Process topic model labels every token of a corpus
//! with a topic and estimates per-document topic distributions. Those labels
//! drive three skip-gram variants that learn one representation per
//! (word, topic) pair:
//!
//! * `Htle`: one input row per (word, topic) pair.
//! * `HtleAdd`: a pair row added to a generic per-word row.
//! * `Stle`: a document-topic weighted mixture of pair rows.
//!
//! A plain skip-gram baseline (`Sge`) is trained by the same code path. The
//! [`inference`] and [`eval`] modules score context-aware word similarity and
//! lexical substitution.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod hdp;
pub mod inference;
pub mod synthetic;

mod binio;

pub use error::{Error, Result};

/// Index of a word in a [`corpus::Vocabulary`].
pub type WordId = u32;

/// Index of a topic in a trained [`hdp::TopicModel`].
pub type TopicId = u32;
