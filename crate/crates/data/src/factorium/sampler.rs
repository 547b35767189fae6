//! Draws problem instances.
//!
//! Inputs are quantized so that their six-significant-digit restatement in
//! the rendered text reads back to the identical `f64`: diameters to 0.1 mm,
//! lengths and positions to 1 mm, forces and torques to three significant
//! digits, temperatures to whole degrees.

use rand::seq::IndexedRandom;
use rand::Rng as _;
use shaftlab_core::solver::ClosedForm;
use shaftlab_core::{AnalysisOptions, Level, PointLoad, ShaftSpec, TorquePair, SPEC_SCHEMA_VERSION};

use super::config::GenerationConfig;
use super::rng::Rng;
use super::FactoriumError;

const GEOMETRY_RETRIES: usize = 1000;

/// `k / 10^digits` with `k` the nearest integer; the division is correctly
/// rounded, so the result equals the parse of the decimal string.
fn quantize_decimals(v: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (v * scale).round() / scale
}

/// Rounds to three significant digits.
pub fn quantize_sig3(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let e = v.abs().log10().floor() as i32 - 2;
    if e >= 0 {
        (v / 10f64.powi(e)).round() * 10f64.powi(e)
    } else {
        (v * 10f64.powi(-e)).round() / 10f64.powi(-e)
    }
}

fn log_uniform(rng: &mut Rng, [lo, hi]: [f64; 2]) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Distinct millimetre positions in `[lo, hi]`, sorted.
fn positions_mm(rng: &mut Rng, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = ((lo * 1000.0).ceil() as i64, (hi * 1000.0).floor() as i64);
    let mut picked: Vec<i64> = Vec::with_capacity(n);
    while picked.len() < n {
        let k = rng.random_range(a..=b);
        if !picked.contains(&k) {
            picked.push(k);
        }
    }
    picked.sort_unstable();
    picked.into_iter().map(|k| k as f64 / 1000.0).collect()
}

/// Draws one instance for `level`. `id` becomes the spec id.
pub fn sample_parameters(
    level: Level,
    rng: &mut Rng,
    config: &GenerationConfig,
    id: &str,
) -> Result<(ShaftSpec, AnalysisOptions), FactoriumError> {
    let r = &config.ranges;
    let material = config.materials.choose(rng).expect("non-empty material table").clone();

    let mut geometry = None;
    for _ in 0..GEOMETRY_RETRIES {
        let d = quantize_decimals(log_uniform(rng, r.diameter_m), 4);
        let l = quantize_decimals(rng.random_range(r.length_m[0]..=r.length_m[1]), 3);
        if d >= r.diameter_m[0] && d <= r.diameter_m[1] && d * r.min_length_to_diameter < l {
            geometry = Some((l, d));
            break;
        }
    }
    let (length, diameter) = geometry.ok_or_else(|| {
        FactoriumError::Config("diameter and length ranges almost never admit a valid shaft".into())
    })?;

    let n_loads = rng.random_range(r.load_count[0]..=r.load_count[1]);
    let positions = if n_loads == 1 && rng.random_bool(r.midspan_probability) {
        vec![0.5 * length]
    } else {
        let edge = r.load_edge_fraction * length;
        positions_mm(rng, edge, length - edge, n_loads)
    };
    let weights: Vec<f64> = (0..n_loads).map(|_| rng.random_range(0.2..=1.0)).collect();

    let torque = if level == Level::Bachelor {
        None
    } else {
        let frac = rng.random_range(r.torsion_stress_fraction[0]..=r.torsion_stress_fraction[1]);
        let tau = frac * material.yield_strength / 3f64.sqrt();
        let t = quantize_sig3(tau * std::f64::consts::PI * diameter.powi(3) / 16.0);
        let edge = 0.02 * length;
        let mut ends = positions_mm(rng, edge, length - edge, 2);
        if rng.random_bool(0.5) {
            ends.reverse();
        }
        Some(TorquePair::new(ends[0], ends[1], t))
    };
    let options = match level {
        Level::Doctor => {
            let rel = *r.reliabilities.choose(rng).expect("non-empty reliability list");
            let temp = rng.random_range(r.temperature_c[0]..=r.temperature_c[1]);
            AnalysisOptions {
                n_grid: config.n_grid,
                ..AnalysisOptions::doctor(rel, f64::from(temp))
            }
        }
        _ => AnalysisOptions {
            n_grid: config.n_grid,
            ..AnalysisOptions::new(level)
        },
    };
    let stress_frac = rng.random_range(r.bending_stress_fraction[0]..=r.bending_stress_fraction[1]);

    // Unit-scale loads give the peak moment and deflection per unit factor;
    // both are linear in the factor.
    let mut spec = ShaftSpec {
        schema_version: SPEC_SCHEMA_VERSION,
        id: id.to_string(),
        length,
        diameter,
        loads: positions
            .iter()
            .zip(&weights)
            .map(|(&position, &magnitude)| PointLoad { position, magnitude })
            .collect(),
        torque,
        material,
    };
    let (m_unit, w_unit) = {
        let cf = ClosedForm::new(&spec).map_err(|e| FactoriumError::Internal(e.to_string()))?;
        let mut stations: Vec<f64> = (0..=64).map(|i| length * i as f64 / 64.0).collect();
        stations.extend(&positions);
        stations.iter().fold((0f64, 0f64), |(m, w), &x| {
            (m.max(cf.moment(x).abs()), w.max(cf.deflection(x).abs()))
        })
    };
    let sigma_unit = shaftlab_core::bending_stress(m_unit, diameter);
    let by_stress = stress_frac * spec.material.yield_strength / sigma_unit;
    let by_deflection = length / r.deflection_ratio / w_unit;
    let factor = by_stress.min(by_deflection);
    for load in &mut spec.loads {
        load.magnitude = quantize_sig3(load.magnitude * factor);
    }
    Ok((spec, options))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorium::rng::substream;
    use crate::numfmt::{fmt6, parse_num};

    #[test]
    fn quantized_values_survive_formatting() {
        for v in [1234.5678, 0.0123456, 98765.4, 3.14159e-3, 7.0, 1.0e7 / 3.0] {
            let q = quantize_sig3(v);
            assert_eq!(parse_num(&fmt6(q)), Some(q), "{v}");
        }
        assert_eq!(quantize_sig3(1234.5678), 1230.0);
        assert_eq!(quantize_sig3(0.0123456), 0.0123);
        let d = quantize_decimals(0.045_237, 4);
        assert_eq!(fmt6(d), "0.0452000");
        assert_eq!(parse_num(&fmt6(d)), Some(d));
    }

    #[test]
    fn deterministic_per_stream() {
        let cfg = GenerationConfig::default();
        let a = sample_parameters(Level::Doctor, &mut substream(1, &[1, 2]), &cfg, "x").unwrap();
        let b = sample_parameters(Level::Doctor, &mut substream(1, &[1, 2]), &cfg, "x").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn draws_respect_the_ranges() {
        let cfg = GenerationConfig::default();
        let mut midspan = 0;
        for i in 0..1000 {
            let level = Level::ALL[i % 3];
            let (s, o) = sample_parameters(level, &mut substream(9, &[i as u64]), &cfg, "x").unwrap();
            s.validate().unwrap();
            assert!(s.diameter >= 0.02 && s.diameter <= 0.10);
            assert!(s.length >= 0.3 && s.length <= 2.0);
            assert!(s.diameter < s.length / 5.0);
            assert!((1..=3).contains(&s.loads.len()));
            assert_eq!(s.torque.is_some(), level != Level::Bachelor);
            assert_eq!(o.reliability.is_some(), level == Level::Doctor);
            if s.loads.len() == 1 && s.loads[0].position == 0.5 * s.length {
                midspan += 1;
            }
            if level == Level::Bachelor {
                assert!(s.torque.is_none());
            }
        }
        assert!(midspan > 10, "{midspan}");
    }
}
