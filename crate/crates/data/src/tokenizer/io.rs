//! Two-file vocabulary format.
//!
//! `merges.txt`: a header line `#shaftlab-bpe v1 bpe_size=<n>` and then one
//! merge per line, the two parts as lowercase hex of their bytes separated by
//! a space. `specials.json`: version, BPE size and the pinned special tokens.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TokenizerError, Vocabulary};
use crate::harmony::Special;

pub const MERGES_FILE: &str = "merges.txt";
pub const SPECIALS_FILE: &str = "specials.json";
pub const VOCAB_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct SpecialEntry {
    name: String,
    text: String,
    id: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpecialsManifest {
    version: u32,
    bpe_size: usize,
    bpe_defined: usize,
    specials: Vec<SpecialEntry>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn unhex(s: &str) -> Option<Vec<u8>> {
    if s.is_empty() || s.len() % 2 != 0 {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok())
        .collect()
}

fn entries(v: &Vocabulary) -> Vec<SpecialEntry> {
    Special::ALL
        .iter()
        .map(|t| SpecialEntry {
            name: t.name().into(),
            text: t.text().into(),
            id: v.special_id(*t),
        })
        .collect()
}

pub fn merges_text(v: &Vocabulary) -> String {
    let mut out = format!("#shaftlab-bpe v{VOCAB_FORMAT_VERSION} bpe_size={}\n", v.bpe_size());
    for &(a, b) in v.merges() {
        let ta = v.token_bytes(a).expect("merge ids are defined");
        let tb = v.token_bytes(b).expect("merge ids are defined");
        out.push_str(&hex(ta));
        out.push(' ');
        out.push_str(&hex(tb));
        out.push('\n');
    }
    out
}

pub fn save(v: &Vocabulary, dir: &Path) -> Result<(), TokenizerError> {
    let io = |e: std::io::Error| TokenizerError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(MERGES_FILE), merges_text(v)).map_err(io)?;
    let manifest = SpecialsManifest {
        version: VOCAB_FORMAT_VERSION,
        bpe_size: v.bpe_size(),
        bpe_defined: v.bpe_len(),
        specials: entries(v),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(dir.join(SPECIALS_FILE), json).map_err(io)?;
    Ok(())
}

pub fn load(dir: &Path) -> Result<Vocabulary, TokenizerError> {
    let read = |name: &str| {
        fs::read_to_string(dir.join(name)).map_err(|e| TokenizerError::Io(format!("{}: {e}", dir.join(name).display())))
    };
    let bad = |file: &str, message: String| TokenizerError::Format {
        file: file.into(),
        message,
    };
    let merges_src = read(MERGES_FILE)?;
    let mut lines = merges_src.lines();
    let header = lines.next().unwrap_or("");
    let bpe_size: usize = header
        .strip_prefix(&format!("#shaftlab-bpe v{VOCAB_FORMAT_VERSION} bpe_size="))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| bad(MERGES_FILE, format!("unsupported header {header:?}")))?;

    let specials_src = read(SPECIALS_FILE)?;
    let manifest: SpecialsManifest =
        serde_json::from_str(&specials_src).map_err(|e| bad(SPECIALS_FILE, e.to_string()))?;
    if manifest.version != VOCAB_FORMAT_VERSION {
        return Err(bad(SPECIALS_FILE, format!("unsupported version {}", manifest.version)));
    }
    if manifest.bpe_size != bpe_size {
        return Err(bad(SPECIALS_FILE, "bpe_size disagrees with merges header".into()));
    }

    // Ids are only known once earlier merges are replayed, so resolve the
    // byte strings incrementally.
    let mut partial = Vocabulary::from_merges(bpe_size, Vec::new())?;
    let mut merges = Vec::new();
    for (n, line) in lines.enumerate() {
        let lineno = n + 2;
        let parsed = line
            .split_once(' ')
            .and_then(|(a, b)| Some((unhex(a)?, unhex(b)?)))
            .ok_or_else(|| bad(MERGES_FILE, format!("line {lineno}: expected two hex strings")))?;
        let (Some(a), Some(b)) = (partial.token_id(&parsed.0), partial.token_id(&parsed.1)) else {
            return Err(bad(MERGES_FILE, format!("line {lineno}: merge of unknown tokens")));
        };
        merges.push((a, b));
        partial = extend(partial, (a, b))?;
    }
    let v = Vocabulary::from_merges(bpe_size, merges)?;
    if manifest.specials != entries(&v) {
        return Err(bad(SPECIALS_FILE, "special tokens differ from the pinned set".into()));
    }
    if manifest.bpe_defined != v.bpe_len() {
        return Err(bad(SPECIALS_FILE, "bpe_defined disagrees with the merges".into()));
    }
    Ok(v)
}

fn extend(v: Vocabulary, pair: (u32, u32)) -> Result<Vocabulary, TokenizerError> {
    let mut merges = v.merges;
    merges.push(pair);
    let mut tokens = v.tokens;
    let mut token_to_id = v.token_to_id;
    let mut ranks = v.ranks;
    let mut bytes = tokens[pair.0 as usize].clone();
    bytes.extend_from_slice(&tokens[pair.1 as usize]);
    let id = match token_to_id.get(&bytes) {
        Some(&id) => id,
        None => {
            let id = tokens.len() as u32;
            token_to_id.insert(bytes.clone(), id);
            tokens.push(bytes);
            id
        }
    };
    ranks.insert(pair, (merges.len() - 1, id));
    Ok(Vocabulary {
        bpe_size: v.bpe_size,
        merges,
        tokens,
        ranks,
        token_to_id,
    })
}
