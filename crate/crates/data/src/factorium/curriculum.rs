//! Phase-wise mixing of the three levels under rising difficulty ceilings.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};
use shaftlab_core::Level;

use super::generate::{Manifest, ManifestRecord};
use super::rng::{substream, tag};
use super::FactoriumError;

/// Per-level values in level order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerLevel {
    pub bachelor: f64,
    pub master: f64,
    pub doctor: f64,
}

impl PerLevel {
    pub const fn uniform(v: f64) -> Self {
        PerLevel {
            bachelor: v,
            master: v,
            doctor: v,
        }
    }

    pub fn get(&self, level: Level) -> f64 {
        match level {
            Level::Bachelor => self.bachelor,
            Level::Master => self.master,
            Level::Doctor => self.doctor,
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.bachelor, self.master, self.doctor]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub name: String,
    pub mix: PerLevel,
    /// Highest difficulty admitted, per level.
    pub ceiling: PerLevel,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumSchedule {
    pub phases: Vec<Phase>,
}

impl Default for CurriculumSchedule {
    /// Four phases from 70/20/10 to an even mix. Totals are sized for the
    /// 200-per-level desk dataset.
    fn default() -> Self {
        let phase = |name: &str, b: f64, m: f64, d: f64, ceiling: f64, total| Phase {
            name: name.into(),
            mix: PerLevel {
                bachelor: b,
                master: m,
                doctor: d,
            },
            ceiling: PerLevel::uniform(ceiling),
            total,
        };
        CurriculumSchedule {
            phases: vec![
                phase("foundation", 0.70, 0.20, 0.10, 0.5, 140),
                phase("consolidation", 0.50, 0.30, 0.20, 0.7, 200),
                phase("deepening", 0.40, 0.30, 0.30, 0.9, 300),
                phase("mastery", 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0, 600),
            ],
        }
    }
}

const FRACTION_SUM_TOL: f64 = 1e-9;

impl CurriculumSchedule {
    pub fn from_json(text: &str) -> Result<Self, FactoriumError> {
        let s: CurriculumSchedule =
            serde_json::from_str(text).map_err(|e| FactoriumError::Format(format!("schedule: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), FactoriumError> {
        let bad = |m: String| Err(FactoriumError::Schedule(m));
        if self.phases.is_empty() {
            return bad("schedule has no phases".into());
        }
        let mut previous = PerLevel::uniform(0.0);
        for p in &self.phases {
            let mix = p.mix.as_array();
            if mix.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                return bad(format!("phase {}: every level needs a positive fraction", p.name));
            }
            if (mix.iter().sum::<f64>() - 1.0).abs() > FRACTION_SUM_TOL {
                return bad(format!("phase {}: fractions do not sum to 1", p.name));
            }
            for level in Level::ALL {
                let c = p.ceiling.get(level);
                if !(0.0..=1.0).contains(&c) {
                    return bad(format!("phase {}: {level} ceiling outside [0, 1]", p.name));
                }
                if c < previous.get(level) {
                    return bad(format!("phase {}: {level} ceiling decreases", p.name));
                }
            }
            previous = p.ceiling;
        }
        Ok(())
    }
}

/// Largest-remainder split of `total` by `fractions` (which sum to 1). Ties
/// in the remainder go to the earlier entry.
pub fn apportion(total: usize, fractions: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = fractions.iter().map(|f| f * total as f64).collect();
    // The epsilon keeps 0.7 * 1000 = 699.999... from flooring to 699.
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - counts[a] as f64;
        let rb = quotas[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamEntry {
    pub phase: String,
    pub id: String,
    pub level: Level,
}

/// Records eligible for a phase at `level`, in manifest order.
pub fn eligible<'a>(records: &'a [ManifestRecord], level: Level, ceiling: f64) -> Vec<&'a ManifestRecord> {
    records
        .iter()
        .filter(|r| r.level == level && r.difficulty <= ceiling)
        .collect()
}

pub fn curriculum_stream(
    manifest: &Manifest,
    schedule: &CurriculumSchedule,
    seed: u64,
) -> Result<Vec<StreamEntry>, FactoriumError> {
    schedule.validate()?;
    let mut out = Vec::new();
    for (k, phase) in schedule.phases.iter().enumerate() {
        let counts = apportion(phase.total, &phase.mix.as_array());
        let mut rng = substream(seed, &[tag::CURRICULUM, k as u64]);
        let mut picked: Vec<&ManifestRecord> = Vec::with_capacity(phase.total);
        for level in Level::ALL {
            let want = counts[level.index()];
            let pool = eligible(&manifest.records, level, phase.ceiling.get(level));
            if pool.len() < want {
                return Err(FactoriumError::PoolTooSmall {
                    phase: phase.name.clone(),
                    level,
                    requested: want,
                    eligible: pool.len(),
                });
            }
            let mut chosen = index::sample(&mut rng, pool.len(), want).into_vec();
            chosen.sort_unstable();
            picked.extend(chosen.into_iter().map(|i| pool[i]));
        }
        picked.shuffle(&mut rng);
        out.extend(picked.into_iter().map(|r| StreamEntry {
            phase: phase.name.clone(),
            id: r.id.clone(),
            level: r.level,
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn foundation_split_of_a_thousand() {
        assert_eq!(apportion(1000, &[0.7, 0.2, 0.1]), vec![700, 200, 100]);
        assert_eq!(apportion(999, &[1.0 / 3.0; 3]), vec![333, 333, 333]);
        assert_eq!(apportion(1000, &[1.0 / 3.0; 3]), vec![334, 333, 333]);
        assert_eq!(apportion(0, &[0.5, 0.5]), vec![0, 0]);
    }

    #[test]
    fn default_schedule_is_valid_and_mixes_all_levels() {
        let s = CurriculumSchedule::default();
        s.validate().unwrap();
        assert_eq!(s.phases.len(), 4);
        for p in &s.phases {
            assert!(apportion(p.total, &p.mix.as_array()).iter().all(|&n| n > 0));
        }
    }

    #[test]
    fn invalid_schedules() {
        let mut s = CurriculumSchedule::default();
        s.phases[1].ceiling.master = 0.1;
        assert!(s.validate().is_err());
        let mut s = CurriculumSchedule::default();
        s.phases[0].mix.doctor = 0.0;
        s.phases[0].mix.bachelor = 0.8;
        assert!(s.validate().is_err());
        let mut s = CurriculumSchedule::default();
        s.phases[2].mix.doctor = 0.5;
        assert!(s.validate().is_err());
        assert!(CurriculumSchedule { phases: vec![] }.validate().is_err());
    }

    proptest! {
        #[test]
        fn apportionment_is_exact(total in 0usize..5000, a in 0.01f64..1.0, b in 0.01f64..1.0, c in 0.01f64..1.0) {
            let s = a + b + c;
            let f = [a / s, b / s, c / s];
            let counts = apportion(total, &f);
            prop_assert_eq!(counts.iter().sum::<usize>(), total);
            for (n, fr) in counts.iter().zip(f) {
                prop_assert!((*n as f64 - fr * total as f64).abs() < 1.0);
            }
        }

        #[test]
        fn raising_a_ceiling_never_shrinks_the_pool(lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            let recs: Vec<ManifestRecord> = (0..50).map(|i| ManifestRecord {
                id: format!("B-{i:06}"),
                level: Level::Bachelor,
                token_count: i,
                difficulty: i as f64 / 49.0,
                shard: String::new(),
            }).collect();
            prop_assert!(eligible(&recs, Level::Bachelor, lo).len() <= eligible(&recs, Level::Bachelor, hi).len());
        }
    }
}
