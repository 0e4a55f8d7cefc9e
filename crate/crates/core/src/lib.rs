//! Causal graph elicitation from LLM-generated narratives.
//!
//! The pipeline generates a corpus of forecasting documents for a topic,
//! extracts event mentions from each, canonicalizes the mentions into a
//! shared vocabulary, builds a binary document-by-event incidence matrix and
//! runs causal discovery (PC, GES, LiNGAM) over it.

pub mod canonicalize;
pub mod corpus;
pub mod discovery;
mod error;
pub mod extraction;
pub mod incidence;
mod jsonl;
pub mod llm;
pub mod pipeline;
pub mod prompts;
pub mod report;

pub use error::{Error, Result};
pub use pipeline::{run_pipeline, Pipeline, RunConfig, RunOptions, Stage};
pub use report::{to_dot, GraphBundle, ToDot};
