//! Greedy byte-pair merging over word counts.
//!
//! Each round merges the most frequent adjacent pair; ties go to the pair
//! whose (left bytes, right bytes) is lexicographically smallest. A merge
//! whose result already exists as a token reuses that token, so the merge
//! list can be longer than the number of tokens it creates.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;

use super::pretok::pretokenize;
use super::{split_specials, Segment, TokenizerError, Vocabulary, BYTE_ALPHABET};

type Pair = (u32, u32);

/// Chunk counts over the corpus, special-token regions excluded.
fn count_words<'a, I>(docs: I) -> HashMap<Vec<u8>, u64>
where
    I: IntoParallelIterator<Item = &'a str>,
{
    docs.into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<Vec<u8>, u64>, doc| {
            for seg in split_specials(doc) {
                if let Segment::Text(t) = seg {
                    for chunk in pretokenize(t) {
                        *acc.entry(chunk.as_bytes().to_vec()).or_default() += 1;
                    }
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

struct Word {
    symbols: Vec<u32>,
    count: u64,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    count: u64,
    key: Reverse<(Vec<u8>, Vec<u8>)>,
    pair: Pair,
}

struct Trainer {
    tokens: Vec<Vec<u8>>,
    ids: HashMap<Vec<u8>, u32>,
    merges: Vec<Pair>,
    words: Vec<Word>,
    counts: HashMap<Pair, u64>,
    where_: HashMap<Pair, HashSet<usize>>,
    heap: BinaryHeap<Candidate>,
}

impl Trainer {
    fn new(word_counts: HashMap<Vec<u8>, u64>) -> Self {
        let mut sorted: Vec<(Vec<u8>, u64)> = word_counts.into_iter().collect();
        sorted.sort_unstable();
        let words: Vec<Word> = sorted
            .into_iter()
            .map(|(bytes, count)| Word {
                symbols: bytes.into_iter().map(u32::from).collect(),
                count,
            })
            .collect();
        let tokens: Vec<Vec<u8>> = (0..BYTE_ALPHABET).map(|b| vec![b as u8]).collect();
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let mut t = Trainer {
            tokens,
            ids,
            merges: Vec::new(),
            words,
            counts: HashMap::new(),
            where_: HashMap::new(),
            heap: BinaryHeap::new(),
        };
        for (wi, w) in t.words.iter().enumerate() {
            for p in w.symbols.windows(2) {
                let pair = (p[0], p[1]);
                *t.counts.entry(pair).or_default() += w.count;
                t.where_.entry(pair).or_default().insert(wi);
            }
        }
        let pairs: Vec<Pair> = t.counts.keys().copied().collect();
        for p in pairs {
            t.push(p);
        }
        t
    }

    fn push(&mut self, pair: Pair) {
        let count = self.counts.get(&pair).copied().unwrap_or(0);
        if count > 0 {
            let key = Reverse((self.tokens[pair.0 as usize].clone(), self.tokens[pair.1 as usize].clone()));
            self.heap.push(Candidate { count, key, pair });
        }
    }

    fn best(&mut self) -> Option<Pair> {
        while let Some(c) = self.heap.pop() {
            if self.counts.get(&c.pair).copied() == Some(c.count) {
                return Some(c.pair);
            }
        }
        None
    }

    fn merge(&mut self, pair: Pair) {
        let mut bytes = self.tokens[pair.0 as usize].clone();
        bytes.extend_from_slice(&self.tokens[pair.1 as usize]);
        let new_id = match self.ids.get(&bytes) {
            Some(&id) => id,
            None => {
                let id = self.tokens.len() as u32;
                self.ids.insert(bytes.clone(), id);
                self.tokens.push(bytes);
                id
            }
        };
        self.merges.push(pair);

        let mut affected: Vec<usize> = self.where_.remove(&pair).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        let mut touched: HashSet<Pair> = HashSet::new();
        for wi in affected {
            let w = &mut self.words[wi];
            let count = w.count;
            for p in w.symbols.windows(2) {
                let p = (p[0], p[1]);
                if let Some(c) = self.counts.get_mut(&p) {
                    *c -= count;
                }
                touched.insert(p);
            }
            let mut merged = Vec::with_capacity(w.symbols.len());
            let mut i = 0;
            while i < w.symbols.len() {
                if i + 1 < w.symbols.len() && (w.symbols[i], w.symbols[i + 1]) == pair {
                    merged.push(new_id);
                    i += 2;
                } else {
                    merged.push(w.symbols[i]);
                    i += 1;
                }
            }
            w.symbols = merged;
            for p in w.symbols.windows(2) {
                let p = (p[0], p[1]);
                *self.counts.entry(p).or_default() += count;
                self.where_.entry(p).or_default().insert(wi);
                touched.insert(p);
            }
        }
        self.counts.remove(&pair);
        let mut touched: Vec<Pair> = touched.into_iter().collect();
        touched.sort_unstable();
        for p in touched {
            if self.counts.get(&p) == Some(&0) {
                self.counts.remove(&p);
            } else if p != pair {
                self.push(p);
            }
        }
    }
}

/// Trains until `target` BPE tokens exist (bytes included) or no pair is
/// left. Returns the vocabulary reached, which may be smaller than `target`.
pub fn train_bpe_lenient<'a, I>(docs: I, target: usize) -> Result<Vocabulary, TokenizerError>
where
    I: IntoParallelIterator<Item = &'a str>,
{
    if target < BYTE_ALPHABET {
        return Err(TokenizerError::TargetTooSmall { target });
    }
    let words = count_words(docs);
    if words.is_empty() {
        return Err(TokenizerError::EmptyCorpus);
    }
    let mut t = Trainer::new(words);
    while t.tokens.len() < target {
        let Some(pair) = t.best() else { break };
        t.merge(pair);
    }
    Ok(Vocabulary::from_merges(target, t.merges).expect("trainer merges replay"))
}

/// Trains exactly `target` BPE tokens; fails when the corpus cannot supply
/// enough distinct pairs, reporting how far it got.
pub fn train_bpe<'a, I>(docs: I, target: usize) -> Result<Vocabulary, TokenizerError>
where
    I: IntoParallelIterator<Item = &'a str>,
{
    let vocab = train_bpe_lenient(docs, target)?;
    if vocab.bpe_len() < target {
        return Err(TokenizerError::CorpusTooSmall {
            target,
            achievable: vocab.bpe_len(),
        });
    }
    Ok(vocab)
}
