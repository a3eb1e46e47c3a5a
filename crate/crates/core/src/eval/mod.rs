//! Benchmarks and metrics: Spearman correlation for context-aware word
//! similarity, generalized average precision for lexical substitution, and a
//! rank-sum significance test for comparing runs.

pub mod bench;
pub mod data;
pub mod metrics;
pub mod significance;

pub use bench::{eval_lexsub, eval_scws, InstanceGap, LexsubReport, LexsubScorer, PosGap, ScwsReport};
pub use data::{LexsubDataset, LexsubInstance, Pos, ScwsInstance};
pub use metrics::{gap, spearman};
pub use significance::{mann_whitney, MannWhitney, Significance};
