//! The dataset factory: sampling, gating, rendering, sharding and the
//! curriculum scheduler.

pub mod config;
pub mod curriculum;
pub mod difficulty;
pub mod generate;
pub mod record;
pub mod rng;
pub mod sampler;
pub mod stats;

use shaftlab_core::Level;
use thiserror::Error;

use crate::harmony::RenderError;
use crate::tokenizer::TokenizerError;

pub use config::{steel_table, GenerationConfig, LevelCounts};
pub use curriculum::{apportion, curriculum_stream, CurriculumSchedule, Phase, StreamEntry};
pub use difficulty::difficulty_scores;
pub use generate::{
    generate, generate_dataset, read_jsonl, read_shards, write_dataset, Generated, Manifest, ManifestRecord,
    Rejection, MANIFEST_FILE, REJECTIONS_FILE, VOCAB_DIR,
};
pub use record::{build_record, record_id, DatasetRecord};
pub use sampler::sample_parameters;
pub use stats::{dataset_stats, DatasetStats};

#[derive(Debug, Error)]
pub enum FactoriumError {
    #[error("config: {0}")]
    Config(String),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Io(String),
    #[error("record slot {id} still rejected after {attempts} attempts ({reasons})")]
    Unreachable { id: String, attempts: u32, reasons: String },
    #[error("phase {phase}: {requested} {level} records requested but only {eligible} eligible")]
    PoolTooSmall {
        phase: String,
        level: Level,
        requested: usize,
        eligible: usize,
    },
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("internal: {0}")]
    Internal(String),
}
