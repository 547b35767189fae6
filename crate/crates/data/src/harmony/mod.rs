//! The structured response format.
//!
//! A document is a flat sequence of special tokens and text regions:
//!
//! ```text
//! document := BOS PROMPT_START text PROMPT_END
//!             ANALYSIS text END  REASONING text END  CODE text END
//!             VERIFICATION text END  RESULT text END
//!             STOP EOS PAD*
//! ```
//!
//! Text regions are non-blank and never contain a special-token string;
//! nothing may appear between two adjacent delimiters. Token surface forms
//! use the `<|name|>` convention.

mod code;
mod compose;
mod parse;
mod quantities;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use code::{read_code, write_code, CodeError, SOLVER_NAME};
pub use compose::{compose, render, template_fingerprint, ComposeInput, Locale, TEMPLATE_VERSION};
pub use parse::{parse, ParseError};
pub use quantities::{extract_quantities, format_quantity, ExtractError, ExtractedQuantity, LineProblem};

/// Number of special tokens.
pub const SPECIAL_COUNT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Special {
    Bos,
    Eos,
    Pad,
    PromptStart,
    PromptEnd,
    ChAnalysis,
    ChReasoning,
    ChCode,
    ChVerification,
    ChResult,
    ChEnd,
    Stop,
}

impl Special {
    /// Ordered by pinned vocabulary offset.
    pub const ALL: [Special; SPECIAL_COUNT] = [
        Special::Bos,
        Special::Eos,
        Special::Pad,
        Special::PromptStart,
        Special::PromptEnd,
        Special::ChAnalysis,
        Special::ChReasoning,
        Special::ChCode,
        Special::ChVerification,
        Special::ChResult,
        Special::ChEnd,
        Special::Stop,
    ];

    pub fn text(self) -> &'static str {
        match self {
            Special::Bos => "<|bos|>",
            Special::Eos => "<|eos|>",
            Special::Pad => "<|pad|>",
            Special::PromptStart => "<|prompt|>",
            Special::PromptEnd => "<|/prompt|>",
            Special::ChAnalysis => "<|analysis|>",
            Special::ChReasoning => "<|reasoning|>",
            Special::ChCode => "<|code|>",
            Special::ChVerification => "<|verification|>",
            Special::ChResult => "<|result|>",
            Special::ChEnd => "<|end|>",
            Special::Stop => "<|stop|>",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Special::Bos => "BOS",
            Special::Eos => "EOS",
            Special::Pad => "PAD",
            Special::PromptStart => "PROMPT_START",
            Special::PromptEnd => "PROMPT_END",
            Special::ChAnalysis => "CH_ANALYSIS",
            Special::ChReasoning => "CH_REASONING",
            Special::ChCode => "CH_CODE",
            Special::ChVerification => "CH_VERIFICATION",
            Special::ChResult => "CH_RESULT",
            Special::ChEnd => "CH_END",
            Special::Stop => "STOP",
        }
    }

    /// Position in [`Special::ALL`], i.e. offset above the BPE id range.
    pub fn offset(self) -> usize {
        self as usize
    }

    /// The special token whose surface form starts at the beginning of `s`.
    pub fn at_start(s: &str) -> Option<Special> {
        if !s.starts_with("<|") {
            return None;
        }
        Self::ALL.into_iter().find(|t| s.starts_with(t.text()))
    }

    pub fn channel(self) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.token() == self)
    }
}

/// Byte offset and kind of the first special-token string inside `s`.
pub fn find_special(s: &str) -> Option<(usize, Special)> {
    s.match_indices("<|")
        .find_map(|(i, _)| Special::at_start(&s[i..]).map(|t| (i, t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Analysis,
    Reasoning,
    Code,
    Verification,
    Result,
}

impl Channel {
    /// Canonical order.
    pub const ALL: [Channel; 5] = [
        Channel::Analysis,
        Channel::Reasoning,
        Channel::Code,
        Channel::Verification,
        Channel::Result,
    ];

    pub fn token(self) -> Special {
        match self {
            Channel::Analysis => Special::ChAnalysis,
            Channel::Reasoning => Special::ChReasoning,
            Channel::Code => Special::ChCode,
            Channel::Verification => Special::ChVerification,
            Channel::Result => Special::ChResult,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonyDoc {
    pub prompt: String,
    pub channels: Vec<(Channel, String)>,
    pub stopped: bool,
}

impl HarmonyDoc {
    pub fn channel(&self, channel: Channel) -> Option<&str> {
        self.channels
            .iter()
            .find(|(c, _)| *c == channel)
            .map(|(_, body)| body.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("record did not pass verification (first failure: {0})")]
    Unverified(String),
    #[error("{region} contains the special token {token} at byte {offset}")]
    TokenInBody {
        region: String,
        token: &'static str,
        offset: usize,
    },
    #[error("{0} is empty")]
    EmptyRegion(String),
    #[error("channels are not exactly analysis, reasoning, code, verification, result")]
    ChannelLayout,
    #[error("document is not marked as stopped")]
    NotStopped,
}

/// Serializes a document, refusing anything [`parse`] would reject.
pub fn render_doc(doc: &HarmonyDoc) -> Result<String, RenderError> {
    let layout: Vec<Channel> = doc.channels.iter().map(|(c, _)| *c).collect();
    if layout != Channel::ALL {
        return Err(RenderError::ChannelLayout);
    }
    if !doc.stopped {
        return Err(RenderError::NotStopped);
    }
    let check = |region: String, body: &str| -> Result<(), RenderError> {
        if body.trim().is_empty() {
            return Err(RenderError::EmptyRegion(region));
        }
        if let Some((offset, t)) = find_special(body) {
            return Err(RenderError::TokenInBody {
                region,
                token: t.text(),
                offset,
            });
        }
        Ok(())
    };
    check("prompt".into(), &doc.prompt)?;
    for (c, body) in &doc.channels {
        check(format!("{c:?} channel").to_lowercase(), body)?;
    }

    let mut out = String::with_capacity(doc.prompt.len() + doc.channels.iter().map(|c| c.1.len() + 32).sum::<usize>());
    out.push_str(Special::Bos.text());
    out.push_str(Special::PromptStart.text());
    out.push_str(&doc.prompt);
    out.push_str(Special::PromptEnd.text());
    for (c, body) in &doc.channels {
        out.push_str(c.token().text());
        out.push_str(body);
        out.push_str(Special::ChEnd.text());
    }
    out.push_str(Special::Stop.text());
    out.push_str(Special::Eos.text());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_tokens_are_distinct_and_not_nested() {
        let texts: Vec<&str> = Special::ALL.iter().map(|s| s.text()).collect();
        assert_eq!(texts.len(), SPECIAL_COUNT);
        for (i, a) in texts.iter().enumerate() {
            for (j, b) in texts.iter().enumerate() {
                if i != j {
                    assert!(!a.contains(b), "{a} contains {b}");
                }
            }
        }
    }

    #[test]
    fn offsets_follow_declaration_order() {
        assert_eq!(Special::Bos.offset(), 0);
        assert_eq!(Special::Stop.offset(), 11);
    }

    #[test]
    fn find_special_skips_lookalikes() {
        assert_eq!(find_special("a <|foo|> b <|code|>"), Some((12, Special::ChCode)));
        assert_eq!(find_special("no tokens | < here"), None);
    }

    fn doc() -> HarmonyDoc {
        HarmonyDoc {
            prompt: "p".into(),
            channels: Channel::ALL.iter().map(|c| (*c, format!("\n{c:?}\n"))).collect(),
            stopped: true,
        }
    }

    #[test]
    fn render_refuses_bad_documents() {
        assert!(render_doc(&doc()).is_ok());
        let mut d = doc();
        d.channels[1].1 = "x <|stop|> y".into();
        assert!(matches!(render_doc(&d), Err(RenderError::TokenInBody { offset: 2, .. })));
        let mut d = doc();
        d.channels.swap(0, 1);
        assert_eq!(render_doc(&d), Err(RenderError::ChannelLayout));
        let mut d = doc();
        d.prompt = "  ".into();
        assert!(matches!(render_doc(&d), Err(RenderError::EmptyRegion(_))));
    }
}
