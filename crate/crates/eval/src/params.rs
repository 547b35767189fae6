//! Parameter count of a decoder-only transformer, term by term.
//!
//! ```text
//! token embedding      vocab * d
//! positions            max_seq * d                  (learned positions only)
//! per layer
//!   attention          4 * d^2 + 4 * d              (Q, K, V, O with biases)
//!   feed-forward       2 * d * d_ff + d_ff + d      (two projections with biases)
//!   norms              2 * 2 * d                    (two LayerNorms, gain and bias)
//! final norm           2 * d                        (only when layers > 0)
//! output head          vocab * d                    (untied only, no bias)
//! ```

use serde::{Deserialize, Serialize};

use crate::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub layers: u64,
    pub heads: u64,
    pub d_model: u64,
    pub d_ff: u64,
    pub vocab: u64,
    pub max_seq: u64,
    pub tied_output: bool,
    pub learned_positions: bool,
}

impl ArchConfig {
    /// The 7-layer, 512-wide model trained on the shaft corpus.
    pub fn reference() -> Self {
        ArchConfig {
            layers: 7,
            heads: 8,
            d_model: 512,
            d_ff: 2048,
            vocab: 8012,
            max_seq: 14336,
            tied_output: false,
            learned_positions: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        let a: ArchConfig = serde_json::from_str(text).map_err(|e| EvalError::Input(e.to_string()))?;
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.heads == 0 || self.d_model == 0 || self.d_model % self.heads != 0 {
            return Err(EvalError::Input(format!(
                "d_model {} is not divisible by {} heads",
                self.d_model, self.heads
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamBreakdown {
    pub token_embedding: u64,
    pub positions: u64,
    pub attention_per_layer: u64,
    pub feed_forward_per_layer: u64,
    pub norms_per_layer: u64,
    pub per_layer: u64,
    pub layers_total: u64,
    pub final_norm: u64,
    pub output_head: u64,
    pub total: u64,
}

pub fn param_breakdown(arch: &ArchConfig) -> ParamBreakdown {
    let d = arch.d_model;
    let token_embedding = arch.vocab * d;
    let positions = if arch.learned_positions { arch.max_seq * d } else { 0 };
    let attention_per_layer = 4 * d * d + 4 * d;
    let feed_forward_per_layer = 2 * d * arch.d_ff + arch.d_ff + d;
    let norms_per_layer = 2 * 2 * d;
    let per_layer = attention_per_layer + feed_forward_per_layer + norms_per_layer;
    let layers_total = per_layer * arch.layers;
    let final_norm = if arch.layers > 0 { 2 * d } else { 0 };
    let output_head = if arch.tied_output { 0 } else { arch.vocab * d };
    ParamBreakdown {
        token_embedding,
        positions,
        attention_per_layer,
        feed_forward_per_layer,
        norms_per_layer,
        per_layer,
        layers_total,
        final_norm,
        output_head,
        total: token_embedding + positions + layers_total + final_norm + output_head,
    }
}

pub fn param_count(arch: &ArchConfig) -> u64 {
    param_breakdown(arch).total
}
