//! Generation settings, read from TOML. Every field has a default, so an
//! empty file is a valid config.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shaftlab_core::fatigue::{SIZE_FACTOR_MAX_D, SIZE_FACTOR_MIN_D};
use shaftlab_core::{Level, Material, Reliability, SurfaceFinish, VerificationConfig, DEFAULT_GRID};

use super::FactoriumError;
use crate::harmony::Locale;
use crate::tokenizer::{DEFAULT_BPE_SIZE, MAX_SEQUENCE_TOKENS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelCounts {
    pub bachelor: usize,
    pub master: usize,
    pub doctor: usize,
}

impl LevelCounts {
    pub fn get(&self, level: Level) -> usize {
        match level {
            Level::Bachelor => self.bachelor,
            Level::Master => self.master,
            Level::Doctor => self.doctor,
        }
    }

    pub fn set(&mut self, level: Level, n: usize) {
        match level {
            Level::Bachelor => self.bachelor = n,
            Level::Master => self.master = n,
            Level::Doctor => self.doctor = n,
        }
    }

    pub fn total(&self) -> usize {
        self.bachelor + self.master + self.doctor
    }
}

impl Default for LevelCounts {
    fn default() -> Self {
        LevelCounts {
            bachelor: 200,
            master: 200,
            doctor: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ranges {
    /// Log-uniform.
    pub diameter_m: [f64; 2],
    pub length_m: [f64; 2],
    /// Shafts must satisfy `d < L / min_length_to_diameter`.
    pub min_length_to_diameter: f64,
    pub load_count: [usize; 2],
    /// Chance that a single-load shaft is loaded exactly at midspan.
    pub midspan_probability: f64,
    /// Loads sit in `[edge, 1 - edge]·L`.
    pub load_edge_fraction: f64,
    /// Peak bending stress as a fraction of the yield strength.
    pub bending_stress_fraction: [f64; 2],
    /// Loads are also capped so that `w_max <= L / deflection_ratio`.
    pub deflection_ratio: f64,
    /// Shear stress from torsion as a fraction of `S_y / sqrt(3)`.
    pub torsion_stress_fraction: [f64; 2],
    /// Whole degrees.
    pub temperature_c: [i32; 2],
    pub reliabilities: Vec<Reliability>,
}

impl Default for Ranges {
    fn default() -> Self {
        Ranges {
            diameter_m: [0.02, 0.10],
            length_m: [0.3, 2.0],
            min_length_to_diameter: 5.0,
            load_count: [1, 3],
            midspan_probability: 0.15,
            load_edge_fraction: 0.05,
            bending_stress_fraction: [0.15, 0.5],
            deflection_ratio: 150.0,
            torsion_stress_fraction: [0.1, 0.35],
            temperature_c: [20, 350],
            reliabilities: Reliability::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerSettings {
    pub bpe_size: usize,
    /// Fail instead of shipping a smaller vocabulary when the corpus cannot
    /// supply `bpe_size` tokens.
    pub require_full_vocabulary: bool,
}

impl Default for TokenizerSettings {
    fn default() -> Self {
        TokenizerSettings {
            bpe_size: DEFAULT_BPE_SIZE,
            require_full_vocabulary: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub seed: u64,
    pub locale: Locale,
    pub counts: LevelCounts,
    pub shard_size: usize,
    pub n_grid: usize,
    pub max_tokens: usize,
    /// Attempts per record slot before the run is aborted.
    pub max_attempts: u32,
    pub ranges: Ranges,
    pub tolerances: VerificationConfig,
    pub tokenizer: TokenizerSettings,
    pub materials: Vec<Material>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            seed: 42,
            locale: Locale::PtBr,
            counts: LevelCounts::default(),
            shard_size: 100,
            n_grid: DEFAULT_GRID,
            max_tokens: MAX_SEQUENCE_TOKENS,
            max_attempts: 25,
            ranges: Ranges::default(),
            tolerances: VerificationConfig::default(),
            tokenizer: TokenizerSettings::default(),
            materials: steel_table(),
        }
    }
}

fn steel(name: &str, sut_mpa: f64, sy_mpa: f64, surface_finish: SurfaceFinish) -> Material {
    Material {
        name: name.into(),
        youngs_modulus: 207e9,
        poisson_ratio: 0.29,
        yield_strength: sy_mpa * 1e6,
        ultimate_strength: sut_mpa * 1e6,
        surface_finish,
    }
}

/// Carbon and alloy shaft steels with typical minimum strengths.
pub fn steel_table() -> Vec<Material> {
    use SurfaceFinish::*;
    vec![
        steel("AISI 1018 CD", 440.0, 370.0, Machined),
        steel("AISI 1020 HR", 380.0, 210.0, HotRolled),
        steel("AISI 1035 CD", 550.0, 460.0, Machined),
        steel("AISI 1040 CD", 590.0, 490.0, Machined),
        steel("AISI 1045 CD", 630.0, 530.0, Ground),
        steel("AISI 1050 CD", 690.0, 580.0, Ground),
        steel("AISI 1095 HR", 830.0, 460.0, HotRolled),
        steel("AISI 1045 forged", 570.0, 310.0, AsForged),
        steel("AISI 4140 Q&T 425C", 1250.0, 1140.0, Ground),
        steel("AISI 4340 Q&T 425C", 1720.0, 1590.0, Ground),
    ]
}

fn bad(what: &str) -> FactoriumError {
    FactoriumError::Config(what.to_string())
}

fn ordered(r: [f64; 2]) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] < r[1]
}

impl GenerationConfig {
    pub fn from_toml(text: &str) -> Result<Self, FactoriumError> {
        let cfg: GenerationConfig = toml::from_str(text).map_err(|e| FactoriumError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), FactoriumError> {
        let r = &self.ranges;
        if !ordered(r.diameter_m) || r.diameter_m[0] <= 0.0 {
            return Err(bad("ranges.diameter_m must be increasing and positive"));
        }
        if r.diameter_m[0] < SIZE_FACTOR_MIN_D || r.diameter_m[1] > SIZE_FACTOR_MAX_D {
            return Err(bad("ranges.diameter_m leaves the size-factor range 2.79..254 mm"));
        }
        if !ordered(r.length_m) || r.length_m[0] <= 0.0 {
            return Err(bad("ranges.length_m must be increasing and positive"));
        }
        if !(r.min_length_to_diameter >= 1.0) {
            return Err(bad("ranges.min_length_to_diameter must be at least 1"));
        }
        if r.diameter_m[0] * r.min_length_to_diameter >= r.length_m[1] {
            return Err(bad("no shaft satisfies both the diameter and length ranges"));
        }
        if r.load_count[0] == 0 || r.load_count[0] > r.load_count[1] || r.load_count[1] > 16 {
            return Err(bad("ranges.load_count must satisfy 1 <= min <= max <= 16"));
        }
        if !(0.0..=1.0).contains(&r.midspan_probability) {
            return Err(bad("ranges.midspan_probability must lie in [0, 1]"));
        }
        if !(r.load_edge_fraction > 0.0 && r.load_edge_fraction < 0.5) {
            return Err(bad("ranges.load_edge_fraction must lie in (0, 0.5)"));
        }
        if !ordered(r.bending_stress_fraction) || r.bending_stress_fraction[0] <= 0.0 {
            return Err(bad("ranges.bending_stress_fraction must be increasing and positive"));
        }
        if !ordered(r.torsion_stress_fraction) || r.torsion_stress_fraction[0] <= 0.0 {
            return Err(bad("ranges.torsion_stress_fraction must be increasing and positive"));
        }
        if !(r.deflection_ratio > 0.0) {
            return Err(bad("ranges.deflection_ratio must be positive"));
        }
        if r.temperature_c[0] > r.temperature_c[1] || r.temperature_c[0] < -50 || r.temperature_c[1] > 600 {
            return Err(bad("ranges.temperature_c must be ordered within -50..600"));
        }
        if r.reliabilities.is_empty() {
            return Err(bad("ranges.reliabilities is empty"));
        }
        if self.shard_size == 0 {
            return Err(bad("shard_size must be positive"));
        }
        if self.n_grid < shaftlab_core::solver::MIN_GRID {
            return Err(bad("n_grid is below the solver minimum of 16"));
        }
        if self.max_attempts == 0 {
            return Err(bad("max_attempts must be positive"));
        }
        if self.materials.is_empty() {
            return Err(bad("material table is empty"));
        }
        for m in &self.materials {
            m.validate().map_err(|e| bad(&format!("material {:?}: {e}", m.name)))?;
        }
        if self.tokenizer.bpe_size < crate::tokenizer::BYTE_ALPHABET {
            return Err(bad("tokenizer.bpe_size is below the 256-byte alphabet"));
        }
        Ok(())
    }

    /// SHA-256 (hex) of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}
