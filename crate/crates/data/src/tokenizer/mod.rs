//! Byte-level BPE with the format's special tokens pinned above the BPE
//! range: with the default size of 8,000 BPE ids they take 8000..=8011.

mod io;
mod pretok;
mod train;

use std::collections::HashMap;

use thiserror::Error;

use crate::harmony::{find_special, Special, SPECIAL_COUNT};

pub use io::{load, save, MERGES_FILE, SPECIALS_FILE, VOCAB_FORMAT_VERSION};
pub use pretok::pretokenize;
pub use train::{train_bpe, train_bpe_lenient};

pub const BYTE_ALPHABET: usize = 256;
/// BPE ids below the specials.
pub const DEFAULT_BPE_SIZE: usize = 8000;
/// Longest sample, in tokens, that the model context admits.
pub const MAX_SEQUENCE_TOKENS: usize = 14_336;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenizerError {
    #[error("corpus contains no text outside special tokens")]
    EmptyCorpus,
    #[error("corpus too small: {achievable} of {target} BPE tokens reachable")]
    CorpusTooSmall { target: usize, achievable: usize },
    #[error("target {target} is below the {BYTE_ALPHABET}-byte base alphabet")]
    TargetTooSmall { target: usize },
    #[error("unknown token id {id} at position {position}")]
    UnknownId { id: u32, position: usize },
    #[error("decoded bytes are not valid UTF-8 (at byte {0})")]
    InvalidUtf8(usize),
    #[error("vocabulary file {file}: {message}")]
    Format { file: String, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Segment<'a> {
    Special(Special),
    Text(&'a str),
}

/// Splits `text` into special tokens and the plain text between them.
pub(crate) fn split_specials(text: &str) -> Vec<Segment<'_>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some((i, t)) = find_special(rest) {
        if i > 0 {
            out.push(Segment::Text(&rest[..i]));
        }
        out.push(Segment::Special(t));
        rest = &rest[i + t.text().len()..];
    }
    if !rest.is_empty() {
        out.push(Segment::Text(rest));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    /// First special id; BPE ids are `0..bpe_size`.
    bpe_size: usize,
    merges: Vec<(u32, u32)>,
    /// Bytes of every BPE token actually defined, by id.
    tokens: Vec<Vec<u8>>,
    ranks: HashMap<(u32, u32), (usize, u32)>,
    token_to_id: HashMap<Vec<u8>, u32>,
}

impl Vocabulary {
    /// Replays `merges` over the byte alphabet. Errors on a merge that refers
    /// to an id not yet defined.
    pub fn from_merges(bpe_size: usize, merges: Vec<(u32, u32)>) -> Result<Self, TokenizerError> {
        let mut tokens: Vec<Vec<u8>> = (0..BYTE_ALPHABET).map(|b| vec![b as u8]).collect();
        let mut token_to_id: HashMap<Vec<u8>, u32> =
            tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, &(a, b)) in merges.iter().enumerate() {
            let (Some(ta), Some(tb)) = (tokens.get(a as usize), tokens.get(b as usize)) else {
                return Err(TokenizerError::Format {
                    file: MERGES_FILE.into(),
                    message: format!("merge {rank} uses an undefined id"),
                });
            };
            let mut bytes = ta.clone();
            bytes.extend_from_slice(tb);
            let id = match token_to_id.get(&bytes) {
                Some(&id) => id,
                None => {
                    let id = tokens.len() as u32;
                    token_to_id.insert(bytes.clone(), id);
                    tokens.push(bytes);
                    id
                }
            };
            if ranks.insert((a, b), (rank, id)).is_some() {
                return Err(TokenizerError::Format {
                    file: MERGES_FILE.into(),
                    message: format!("merge {rank} repeats an earlier pair"),
                });
            }
        }
        if tokens.len() > bpe_size {
            return Err(TokenizerError::Format {
                file: MERGES_FILE.into(),
                message: format!("{} BPE tokens exceed the declared size {bpe_size}", tokens.len()),
            });
        }
        Ok(Vocabulary {
            bpe_size,
            merges,
            tokens,
            ranks,
            token_to_id,
        })
    }

    pub fn bpe_size(&self) -> usize {
        self.bpe_size
    }

    /// Number of BPE tokens actually defined (at most [`Self::bpe_size`]).
    pub fn bpe_len(&self) -> usize {
        self.tokens.len()
    }

    /// Defined ids, BPE plus specials.
    pub fn len(&self) -> usize {
        self.tokens.len() + SPECIAL_COUNT
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether every BPE id below the specials is defined.
    pub fn is_complete(&self) -> bool {
        self.tokens.len() == self.bpe_size
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn token_bytes(&self, id: u32) -> Option<&[u8]> {
        self.tokens.get(id as usize).map(Vec::as_slice)
    }

    pub fn token_id(&self, bytes: &[u8]) -> Option<u32> {
        self.token_to_id.get(bytes).copied()
    }

    pub fn special_id(&self, t: Special) -> u32 {
        (self.bpe_size + t.offset()) as u32
    }

    pub fn special_of(&self, id: u32) -> Option<Special> {
        (id as usize)
            .checked_sub(self.bpe_size)
            .and_then(|k| Special::ALL.get(k).copied())
    }

    fn encode_chunk(&self, chunk: &str, out: &mut Vec<u32>) {
        let mut symbols: Vec<u32> = chunk.bytes().map(u32::from).collect();
        while symbols.len() > 1 {
            let best = symbols
                .windows(2)
                .enumerate()
                .filter_map(|(i, w)| self.ranks.get(&(w[0], w[1])).map(|&(rank, id)| (rank, i, id)))
                .min();
            let Some((rank, _, id)) = best else { break };
            let pair = self.merges[rank];
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && (symbols[i], symbols[i + 1]) == pair {
                    merged.push(id);
                    i += 2;
                } else {
                    merged.push(symbols[i]);
                    i += 1;
                }
            }
            symbols = merged;
        }
        out.extend(symbols);
    }

    /// Special-token strings become their pinned ids; everything else is
    /// byte-level BPE.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::with_capacity(text.len() / 3);
        for seg in split_specials(text) {
            match seg {
                Segment::Special(t) => out.push(self.special_id(t)),
                Segment::Text(s) => {
                    for chunk in pretokenize(s) {
                        self.encode_chunk(chunk, &mut out);
                    }
                }
            }
        }
        out
    }

    pub fn count_tokens(&self, text: &str) -> usize {
        self.encode(text).len()
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String, TokenizerError> {
        let mut bytes = Vec::with_capacity(ids.len() * 3);
        for (position, &id) in ids.iter().enumerate() {
            if let Some(b) = self.token_bytes(id) {
                bytes.extend_from_slice(b);
            } else if let Some(t) = self.special_of(id) {
                bytes.extend_from_slice(t.text().as_bytes());
            } else {
                return Err(TokenizerError::UnknownId { id, position });
            }
        }
        String::from_utf8(bytes).map_err(|e| TokenizerError::InvalidUtf8(e.utf8_error().valid_up_to()))
    }
}
