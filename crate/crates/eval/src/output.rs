//! The JSONL exchange format for model completions.

use serde::{Deserialize, Serialize};
use shaftlab_core::Level;
use shaftlab_data::factorium::DatasetRecord;
use shaftlab_data::harmony::Special;

use crate::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token_id: u32,
    pub logprob: f64,
}

/// Base of the logarithm the dump's log-probabilities are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    /// Multiplier taking a log in this base to nats.
    pub fn to_nats(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Ten => std::f64::consts::LN_10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutputRecord {
    pub id: String,
    pub prompt_text: String,
    pub completion_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logprobs: Option<Vec<TokenLogprob>>,
    #[serde(default)]
    pub logprob_base: LogBase,
    /// Optional; inferred from the code channel when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<Level>,
}

impl ModelOutputRecord {
    /// Prompt followed by completion: the text the format rules apply to.
    pub fn document(&self) -> String {
        let mut s = String::with_capacity(self.prompt_text.len() + self.completion_text.len());
        s.push_str(&self.prompt_text);
        s.push_str(&self.completion_text);
        s
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if let Some(lp) = &self.logprobs {
            if let Some((i, t)) = lp.iter().enumerate().find(|(_, t)| !(t.logprob.is_finite() && t.logprob <= 0.0)) {
                return Err(EvalError::Record {
                    id: self.id.clone(),
                    message: format!("logprob {} at position {i} is not finite and <= 0", t.logprob),
                });
            }
        }
        Ok(())
    }

    /// Level from the record, else from a `level = ...` line in the text.
    pub fn level(&self) -> Option<Level> {
        self.level.or_else(|| {
            let text = &self.completion_text;
            let start = text.find("\nlevel = ")? + "\nlevel = ".len();
            let word = text[start..].split(|c: char| c.is_whitespace()).next()?;
            Level::parse(word)
        })
    }

    /// Splits a rendered dataset sample after the prompt block, the way a
    /// model would be prompted with it.
    pub fn from_dataset(record: &DatasetRecord) -> Self {
        let text = &record.harmony_text;
        let end = Special::PromptEnd.text();
        let cut = text.find(end).map_or(0, |i| i + end.len());
        ModelOutputRecord {
            id: record.id.clone(),
            prompt_text: text[..cut].to_string(),
            completion_text: text[cut..].to_string(),
            logprobs: None,
            logprob_base: LogBase::E,
            level: Some(record.level),
        }
    }
}

/// One record per non-blank line; every record is validated.
pub fn parse_outputs(jsonl: &str) -> Result<Vec<ModelOutputRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in jsonl.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: ModelOutputRecord = serde_json::from_str(line).map_err(|e| EvalError::Record {
            id: format!("line {}", i + 1),
            message: e.to_string(),
        })?;
        r.validate()?;
        out.push(r);
    }
    Ok(out)
}
