//! reviq — scientific review tables as typed, queryable comparison
//! graphs.
//!
//! The crate stores review tables as comparisons (contributions linked to
//! source papers under a typed property schema), answers declarative
//! queries over them deterministically, scores model-predicted answer
//! tables against symbolic gold answers with the RMS/RNSS table-similarity
//! metrics, runs retrieval-augmented and table-grounded document QA
//! pipelines against pluggable providers, and computes inter-annotator
//! agreement statistics for rating studies.
//!
//! Start with the runnable examples: `cargo run --example run_query`,
//! `score_tables`, `run_benchmark`, and friends each demonstrate one
//! capability end to end over the shipped fixture corpus.

pub mod agreement;
pub mod bench;
pub mod model;
pub mod query;
pub mod rag;
pub mod rms;
pub mod tableio;
pub mod value;

pub use model::{Comparison, Contribution, PropertyDef, PropertyKind};
pub use tableio::{CsvProfile, ResultTable};
pub use value::CellValue;
