//! Scoring of model completions in the channelled response format, plus the
//! small calculators used to reason about specialised models: expected harm,
//! allocation concentration and transformer parameter counts.
//!
//! Model inference is not part of this crate. Completions and optional
//! per-token log-probabilities come in as JSONL ([`output`]).

pub mod corruption;
pub mod degenerate;
pub mod grounding;
pub mod harm;
pub mod monotropy;
pub mod ood;
pub mod output;
pub mod params;
pub mod perplexity;
pub mod report;
pub mod structural;

use thiserror::Error;

pub use corruption::{corrupt, corruption_suite, diagnose, CorruptionClass, Diagnosis, Expectation};
pub use degenerate::{detect_degenerate, LoopSpan};
pub use grounding::{eval_grounding_with, eval_numerical_grounding, DEFAULT_REL_TOL};
pub use harm::{expected_harm, HarmDomain, HarmProfile};
pub use monotropy::{monotropy_index, AllocationProfile, MonotropyIndex};
pub use ood::{ood_probe_set, OodProbe, ProbeCategory};
pub use output::{parse_outputs, LogBase, ModelOutputRecord, TokenLogprob};
pub use params::{param_breakdown, param_count, ArchConfig, ParamBreakdown};
pub use perplexity::perplexity;
pub use report::{evaluate, EvalOptions, MetricsReport};
pub use structural::{eval_stop_token, eval_structural_validity, Diagnostic, Rate};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("record {id}: {message}")]
    Record { id: String, message: String },
    #[error("invalid input: {0}")]
    Input(String),
}
