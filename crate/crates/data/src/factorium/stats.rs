//! Per-level dataset statistics, recomputed from shards.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use shaftlab_core::Level;

use super::generate::Rejection;
use super::record::DatasetRecord;

pub const HISTOGRAM_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Inclusive lower edge of the first bin.
    pub min: usize,
    /// Inclusive upper edge of the last bin.
    pub max: usize,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: Level,
    pub samples: usize,
    pub tokens: u64,
    pub mean_tokens: f64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub rows: Vec<LevelStats>,
    pub total_samples: usize,
    pub total_tokens: u64,
    /// Rejections by reason (verification level or other gate).
    pub rejections: BTreeMap<String, usize>,
}

fn histogram(counts: &[usize]) -> Histogram {
    let min = *counts.iter().min().expect("non-empty");
    let max = *counts.iter().max().expect("non-empty");
    let width = (max - min) as f64 / HISTOGRAM_BINS as f64;
    let mut bins = vec![0; HISTOGRAM_BINS];
    for &c in counts {
        let k = if width == 0.0 {
            0
        } else {
            (((c - min) as f64 / width) as usize).min(HISTOGRAM_BINS - 1)
        };
        bins[k] += 1;
    }
    Histogram { min, max, counts: bins }
}

/// Levels without records get no row.
pub fn dataset_stats(records: &[DatasetRecord], rejections: &[Rejection]) -> DatasetStats {
    let mut rows = Vec::new();
    for level in Level::ALL {
        let counts: Vec<usize> = records.iter().filter(|r| r.level == level).map(|r| r.token_count).collect();
        if counts.is_empty() {
            continue;
        }
        let tokens: u64 = counts.iter().map(|&c| c as u64).sum();
        rows.push(LevelStats {
            level,
            samples: counts.len(),
            tokens,
            mean_tokens: tokens as f64 / counts.len() as f64,
            histogram: histogram(&counts),
        });
    }
    let mut by_reason = BTreeMap::new();
    for r in rejections {
        *by_reason.entry(r.reason.clone()).or_default() += 1;
    }
    DatasetStats {
        total_samples: rows.iter().map(|r| r.samples).sum(),
        total_tokens: rows.iter().map(|r| r.tokens).sum(),
        rows,
        rejections: by_reason,
    }
}

impl DatasetStats {
    /// Plain-text table with Level / Samples / Tokens columns.
    pub fn table(&self) -> String {
        let mut out = format!("{:<10} {:>9} {:>12} {:>10}\n", "Level", "Samples", "Tokens", "Mean");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>9} {:>12} {:>10.1}\n",
                r.level.as_str(),
                r.samples,
                r.tokens,
                r.mean_tokens
            ));
        }
        out.push_str(&format!("{:<10} {:>9} {:>12}\n", "total", self.total_samples, self.total_tokens));
        if !self.rejections.is_empty() {
            out.push_str("rejections:");
            for (k, v) in &self.rejections {
                out.push_str(&format!(" {k}={v}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dataset_has_no_rows() {
        let s = dataset_stats(&[], &[]);
        assert!(s.rows.is_empty());
        assert_eq!(s.total_samples, 0);
        assert!(s.table().starts_with("Level"));
    }

    #[test]
    fn histogram_bins_cover_the_range() {
        let h = histogram(&[10, 20, 30, 110]);
        assert_eq!(h.counts.iter().sum::<usize>(), 4);
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[9], 1);
        assert_eq!(histogram(&[5, 5]).counts[0], 2);
    }
}
