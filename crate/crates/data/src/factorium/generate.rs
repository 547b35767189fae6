//! End-to-end dataset generation.
//!
//! Records are produced slot by slot, each from its own random stream, so the
//! work parallelizes without changing a byte of output. The tokenizer is then
//! trained on the accepted corpus; records over the token limit are rejected
//! and their slots drawn again until every record fits.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shaftlab_core::{Level, ShaftSpec, VerificationReport};

use super::config::{GenerationConfig, LevelCounts};
use super::difficulty::{difficulty_scores, token_quantiles, TokenQuantiles};
use super::record::{build_record, record_id, Built, DatasetRecord};
use super::rng::{substream, tag};
use super::sampler::sample_parameters;
use super::FactoriumError;
use crate::harmony::{template_fingerprint, Locale, SPECIAL_COUNT, TEMPLATE_VERSION};
use crate::tokenizer::{self, train_bpe, train_bpe_lenient, Vocabulary};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REJECTIONS_FILE: &str = "rejections.jsonl";
pub const VOCAB_DIR: &str = "vocab";
/// Retraining rounds allowed for the token-limit pass.
const TOKEN_ROUNDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub level: Level,
    pub attempt: u32,
    /// A verification level name, `token_limit`, `analysis` or `render`.
    pub reason: String,
    pub detail: String,
    pub spec: ShaftSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTotals {
    pub bachelor: u64,
    pub master: u64,
    pub doctor: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyInfo {
    pub dir: String,
    pub bpe_size: usize,
    pub bpe_defined: usize,
    pub special_count: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardInfo {
    pub file: String,
    pub level: Level,
    pub records: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub total: usize,
    /// Draws made in total, accepted or not.
    pub attempts: usize,
    pub by_reason: BTreeMap<String, usize>,
    pub by_level: BTreeMap<Level, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub level: Level,
    pub token_count: usize,
    pub difficulty: f64,
    pub shard: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator: String,
    pub seed: u64,
    pub locale: Locale,
    pub config_hash: String,
    pub template_version: u32,
    pub template_hash: String,
    pub config: GenerationConfig,
    pub counts: LevelCounts,
    pub tokens: TokenTotals,
    pub token_quantiles: BTreeMap<Level, TokenQuantiles>,
    pub vocabulary: Option<VocabularyInfo>,
    pub shards: Vec<ShardInfo>,
    pub rejections: RejectionSummary,
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, FactoriumError> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| FactoriumError::Format(format!("manifest: {e}")))?;
        if m.schema_version != MANIFEST_VERSION {
            return Err(FactoriumError::Format(format!(
                "manifest schema_version {} (expected {MANIFEST_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Generated {
    pub records: Vec<DatasetRecord>,
    pub rejections: Vec<Rejection>,
    pub vocabulary: Option<Vocabulary>,
    pub attempts: usize,
}

struct Slot {
    level: Level,
    index: usize,
    next_attempt: u32,
    record: Option<DatasetRecord>,
    rejections: Vec<Rejection>,
}

fn run_slot(config: &GenerationConfig, slot: &mut Slot) -> Result<(), FactoriumError> {
    let id = record_id(slot.level, slot.index);
    while slot.next_attempt < config.max_attempts {
        let attempt = slot.next_attempt;
        slot.next_attempt += 1;
        let mut rng = substream(
            config.seed,
            &[tag::RECORD, slot.level.index() as u64, slot.index as u64, u64::from(attempt)],
        );
        let (spec, options) = sample_parameters(slot.level, &mut rng, config, &id)?;
        match build_record(&id, &spec, &options, &config.tolerances, config.locale)? {
            Built::Accepted(r) => {
                slot.record = Some(*r);
                return Ok(());
            }
            Built::Rejected {
                reason,
                verification,
                detail,
            } => slot.rejections.push(Rejection {
                id: id.clone(),
                level: slot.level,
                attempt,
                reason,
                detail,
                spec,
                verification,
            }),
        }
    }
    let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &slot.rejections {
        *reasons.entry(r.reason.as_str()).or_default() += 1;
    }
    Err(FactoriumError::Unreachable {
        id,
        attempts: config.max_attempts,
        reasons: reasons.into_iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join(", "),
    })
}

fn train(config: &GenerationConfig, records: &[&DatasetRecord]) -> Result<Vocabulary, FactoriumError> {
    let docs = records.par_iter().map(|r| r.harmony_text.as_str());
    let v = if config.tokenizer.require_full_vocabulary {
        train_bpe(docs, config.tokenizer.bpe_size)
    } else {
        train_bpe_lenient(docs, config.tokenizer.bpe_size)
    };
    v.map_err(FactoriumError::Tokenizer)
}

/// Runs the whole pipeline in memory.
pub fn generate(config: &GenerationConfig) -> Result<Generated, FactoriumError> {
    config.validate()?;
    let mut slots: Vec<Slot> = Level::ALL
        .iter()
        .flat_map(|&level| {
            (0..config.counts.get(level)).map(move |index| Slot {
                level,
                index,
                next_attempt: 0,
                record: None,
                rejections: Vec::new(),
            })
        })
        .collect();
    slots.par_iter_mut().try_for_each(|s| run_slot(config, s))?;

    let mut vocabulary = None;
    if !slots.is_empty() {
        let mut rounds = 0;
        loop {
            let records: Vec<&DatasetRecord> = slots.iter().filter_map(|s| s.record.as_ref()).collect();
            let vocab = train(config, &records)?;
            slots.par_iter_mut().for_each(|s| {
                if let Some(r) = s.record.as_mut() {
                    r.token_count = vocab.count_tokens(&r.harmony_text);
                }
            });
            let over: Vec<usize> = slots
                .iter()
                .enumerate()
                .filter(|(_, s)| s.record.as_ref().is_some_and(|r| r.token_count > config.max_tokens))
                .map(|(i, _)| i)
                .collect();
            if over.is_empty() {
                vocabulary = Some(vocab);
                break;
            }
            rounds += 1;
            if rounds > TOKEN_ROUNDS {
                return Err(FactoriumError::Unreachable {
                    id: record_id(slots[over[0]].level, slots[over[0]].index),
                    attempts: config.max_attempts,
                    reasons: format!("token_limit after {TOKEN_ROUNDS} retraining rounds"),
                });
            }
            for &i in &over {
                let s = &mut slots[i];
                let r = s.record.take().expect("over-limit slot has a record");
                s.rejections.push(Rejection {
                    id: r.id.clone(),
                    level: r.level,
                    attempt: s.next_attempt - 1,
                    reason: "token_limit".into(),
                    detail: format!("{} tokens exceed the limit of {}", r.token_count, config.max_tokens),
                    spec: r.spec,
                    verification: Some(r.verification),
                });
            }
            slots
                .par_iter_mut()
                .filter(|s| s.record.is_none())
                .try_for_each(|s| run_slot(config, s))?;
        }
    }

    let attempts = slots.iter().map(|s| s.next_attempt as usize).sum();
    let mut records = Vec::with_capacity(slots.len());
    let mut rejections = Vec::new();
    for s in slots {
        rejections.extend(s.rejections);
        records.push(s.record.expect("every slot filled"));
    }
    let scores = difficulty_scores(records.iter().map(|r| (r.id.as_str(), r.level, r.token_count)));
    for r in &mut records {
        r.difficulty = scores[&r.id];
    }
    Ok(Generated {
        records,
        rejections,
        vocabulary,
        attempts,
    })
}

pub fn shard_name(level: Level, index: usize) -> String {
    format!("shard-{}-{index:05}.jsonl", level.as_str())
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> FactoriumError + '_ {
    move |e| FactoriumError::Io(format!("{}: {e}", path.display()))
}

/// Lays out shards, manifest, rejection log and vocabulary in `out_dir`.
/// Shard files left from an earlier run in the same directory are removed.
pub fn write_dataset(config: &GenerationConfig, generated: &Generated, out_dir: &Path) -> Result<Manifest, FactoriumError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    for entry in fs::read_dir(out_dir).map_err(io_err(out_dir))? {
        let path = entry.map_err(io_err(out_dir))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("shard-") && name.ends_with(".jsonl") {
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
    }

    let mut shards = Vec::new();
    let mut index = Vec::with_capacity(generated.records.len());
    for level in Level::ALL {
        let records: Vec<&DatasetRecord> = generated.records.iter().filter(|r| r.level == level).collect();
        for (k, chunk) in records.chunks(config.shard_size).enumerate() {
            let file = shard_name(level, k);
            let mut body = String::new();
            for r in chunk {
                body.push_str(&serde_json::to_string(r).expect("record serializes"));
                body.push('\n');
                index.push(ManifestRecord {
                    id: r.id.clone(),
                    level,
                    token_count: r.token_count,
                    difficulty: r.difficulty,
                    shard: file.clone(),
                });
            }
            let path = out_dir.join(&file);
            fs::write(&path, &body).map_err(io_err(&path))?;
            shards.push(ShardInfo {
                file,
                level,
                records: chunk.len(),
                sha256: sha256_hex(body.as_bytes()),
            });
        }
    }

    let mut log = String::new();
    for r in &generated.rejections {
        log.push_str(&serde_json::to_string(r).expect("rejection serializes"));
        log.push('\n');
    }
    let path = out_dir.join(REJECTIONS_FILE);
    fs::write(&path, log).map_err(io_err(&path))?;

    let vocab_dir = out_dir.join(VOCAB_DIR);
    let vocabulary = match &generated.vocabulary {
        Some(v) => {
            tokenizer::save(v, &vocab_dir).map_err(FactoriumError::Tokenizer)?;
            Some(VocabularyInfo {
                dir: VOCAB_DIR.into(),
                bpe_size: v.bpe_size(),
                bpe_defined: v.bpe_len(),
                special_count: SPECIAL_COUNT,
                complete: v.is_complete(),
            })
        }
        None => {
            if vocab_dir.exists() {
                fs::remove_dir_all(&vocab_dir).map_err(io_err(&vocab_dir))?;
            }
            None
        }
    };

    let manifest = build_manifest(config, generated, shards, index, vocabulary);
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(io_err(&path))?;
    Ok(manifest)
}

fn build_manifest(
    config: &GenerationConfig,
    generated: &Generated,
    shards: Vec<ShardInfo>,
    records: Vec<ManifestRecord>,
    vocabulary: Option<VocabularyInfo>,
) -> Manifest {
    let mut counts = LevelCounts {
        bachelor: 0,
        master: 0,
        doctor: 0,
    };
    let mut totals = [0u64; 3];
    let mut quantiles = BTreeMap::new();
    for level in Level::ALL {
        let tokens: Vec<usize> = generated
            .records
            .iter()
            .filter(|r| r.level == level)
            .map(|r| r.token_count)
            .collect();
        counts.set(level, tokens.len());
        totals[level.index()] = tokens.iter().map(|&t| t as u64).sum();
        if let Some(q) = token_quantiles(&tokens) {
            quantiles.insert(level, q);
        }
    }
    let mut rejections = RejectionSummary {
        total: generated.rejections.len(),
        attempts: generated.attempts,
        ..Default::default()
    };
    for r in &generated.rejections {
        *rejections.by_reason.entry(r.reason.clone()).or_default() += 1;
        *rejections.by_level.entry(r.level).or_default() += 1;
    }
    Manifest {
        schema_version: MANIFEST_VERSION,
        generator: format!("shaftlab-data {}", env!("CARGO_PKG_VERSION")),
        seed: config.seed,
        locale: config.locale,
        config_hash: config.hash(),
        template_version: TEMPLATE_VERSION,
        template_hash: template_fingerprint(),
        config: config.clone(),
        counts,
        tokens: TokenTotals {
            bachelor: totals[0],
            master: totals[1],
            doctor: totals[2],
            total: totals.iter().sum(),
        },
        token_quantiles: quantiles,
        vocabulary,
        shards,
        rejections,
        records,
    }
}

/// [`generate`] then [`write_dataset`], optionally on a pool of `jobs`
/// threads. The output does not depend on `jobs`.
pub fn generate_dataset(
    config: &GenerationConfig,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<(Manifest, Generated), FactoriumError> {
    let run = || -> Result<(Manifest, Generated), FactoriumError> {
        let generated = generate(config)?;
        let manifest = write_dataset(config, &generated, out_dir)?;
        Ok((manifest, generated))
    };
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| FactoriumError::Internal(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Reads every record of every shard listed in the manifest, in order.
pub fn read_shards(dir: &Path, manifest: &Manifest) -> Result<Vec<DatasetRecord>, FactoriumError> {
    let mut out = Vec::new();
    for shard in &manifest.shards {
        out.extend(read_jsonl::<DatasetRecord>(&dir.join(&shard.file))?);
    }
    Ok(out)
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, FactoriumError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| FactoriumError::Format(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}
