//! Difficulty is the within-level rank of a record's token count, scaled to
//! [0, 1]. Equal counts are ordered by id so every record gets its own rank.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use shaftlab_core::Level;

/// `(id, level, token_count)` in, `id -> difficulty` out.
pub fn difficulty_scores<'a, I>(records: I) -> BTreeMap<String, f64>
where
    I: IntoIterator<Item = (&'a str, Level, usize)>,
{
    let mut by_level: BTreeMap<Level, Vec<(usize, &str)>> = BTreeMap::new();
    for (id, level, tokens) in records {
        by_level.entry(level).or_default().push((tokens, id));
    }
    let mut out = BTreeMap::new();
    for (_, mut group) in by_level {
        group.sort_unstable();
        let n = group.len();
        for (rank, (_, id)) in group.into_iter().enumerate() {
            let score = if n == 1 { 0.0 } else { rank as f64 / (n - 1) as f64 };
            out.insert(id.to_string(), score);
        }
    }
    out
}

/// Nearest-rank quantiles of token counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenQuantiles {
    pub p0: usize,
    pub p10: usize,
    pub p25: usize,
    pub p50: usize,
    pub p75: usize,
    pub p90: usize,
    pub p100: usize,
}

pub fn token_quantiles(counts: &[usize]) -> Option<TokenQuantiles> {
    if counts.is_empty() {
        return None;
    }
    let mut v = counts.to_vec();
    v.sort_unstable();
    let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
    Some(TokenQuantiles {
        p0: at(0.0),
        p10: at(0.1),
        p25: at(0.25),
        p50: at(0.5),
        p75: at(0.75),
        p90: at(0.9),
        p100: at(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_and_median() {
        let ids: Vec<String> = (0..11).map(|i| format!("B-{i:06}")).collect();
        let recs: Vec<(&str, Level, usize)> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), Level::Bachelor, 100 + (i * 7) % 11))
            .collect();
        let d = difficulty_scores(recs.iter().copied());
        let shortest = recs.iter().min_by_key(|r| r.2).unwrap().0;
        let longest = recs.iter().max_by_key(|r| r.2).unwrap().0;
        assert_eq!(d[shortest], 0.0);
        assert_eq!(d[longest], 1.0);
        let median = recs.iter().find(|r| r.2 == 105).unwrap().0;
        assert!((d[median] - 0.5).abs() <= 0.1 + 1e-12);
    }

    #[test]
    fn levels_are_ranked_separately_and_ties_by_id() {
        let recs = [
            ("M-000001", Level::Master, 10),
            ("M-000000", Level::Master, 10),
            ("B-000000", Level::Bachelor, 999),
        ];
        let d = difficulty_scores(recs);
        assert_eq!(d["M-000000"], 0.0);
        assert_eq!(d["M-000001"], 1.0);
        assert_eq!(d["B-000000"], 0.0);
    }

    #[test]
    fn quantiles() {
        assert_eq!(token_quantiles(&[]), None);
        let q = token_quantiles(&[5, 1, 3, 2, 4]).unwrap();
        assert_eq!((q.p0, q.p50, q.p100), (1, 3, 5));
    }
}
