//! The code channel: a declarative `key = value` restatement of the problem
//! and the solver invocation, precise enough to re-solve it.
//!
//! Numbers use the six-significant-digit format, so a spec survives the
//! round trip exactly only if its inputs have at most six significant digits.
//! The dataset sampler quantizes its draws accordingly.

use std::collections::BTreeMap;

use shaftlab_core::{
    AnalysisOptions, Level, Material, PointLoad, Reliability, ShaftSpec, SurfaceFinish, TorquePair,
    DEFAULT_GRID, SPEC_SCHEMA_VERSION,
};
use thiserror::Error;

use crate::numfmt::{fmt6, parse_num};

pub const SOLVER_NAME: &str = "timoshenko_closed_form";

#[derive(Debug, Clone, PartialEq, Error)]
#[error("code channel line {line}: {message}")]
pub struct CodeError {
    /// 1-based, 0 when the problem is not tied to one line.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> CodeError {
    CodeError {
        line,
        message: message.into(),
    }
}

pub fn write_code(spec: &ShaftSpec, options: &AnalysisOptions) -> String {
    let mut lines: Vec<(String, String)> = vec![
        ("solver".into(), SOLVER_NAME.into()),
        ("level".into(), options.level.as_str().into()),
        ("grid_points".into(), options.n_grid.to_string()),
        ("spec_id".into(), spec.id.clone()),
        ("length_m".into(), fmt6(spec.length)),
        ("diameter_m".into(), fmt6(spec.diameter)),
        ("load_count".into(), spec.loads.len().to_string()),
    ];
    for (i, p) in spec.loads.iter().enumerate() {
        lines.push((format!("load_{}_position_m", i + 1), fmt6(p.position)));
        lines.push((format!("load_{}_magnitude_n", i + 1), fmt6(p.magnitude)));
    }
    if let Some(t) = &spec.torque {
        lines.push(("torque_input_position_m".into(), fmt6(t.input.position)));
        lines.push(("torque_output_position_m".into(), fmt6(t.output.position)));
        lines.push(("torque_nm".into(), fmt6(t.input.torque)));
    }
    let m = &spec.material;
    lines.extend([
        ("material".into(), m.name.clone()),
        ("youngs_modulus_pa".into(), fmt6(m.youngs_modulus)),
        ("poisson_ratio".into(), fmt6(m.poisson_ratio)),
        ("yield_strength_pa".into(), fmt6(m.yield_strength)),
        ("ultimate_strength_pa".into(), fmt6(m.ultimate_strength)),
        ("surface_finish".into(), m.surface_finish.as_str().into()),
    ]);
    if let Some(r) = options.reliability {
        lines.push(("reliability".into(), r.as_str().into()));
    }
    if let Some(t) = options.temperature_c {
        lines.push(("temperature_c".into(), fmt6(t)));
    }
    let mut out = String::from("\n");
    for (k, v) in lines {
        out.push_str(&k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    }
    out
}

struct Fields {
    map: BTreeMap<String, (usize, String)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Result<(usize, String), CodeError> {
        self.map
            .remove(key)
            .ok_or_else(|| err(0, format!("missing key {key}")))
    }

    fn take_opt(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn num(&mut self, key: &str) -> Result<f64, CodeError> {
        let (line, v) = self.take(key)?;
        parse_num(&v).filter(|x| x.is_finite()).ok_or_else(|| err(line, format!("{key}: {v:?} is not a finite number")))
    }

    fn count(&mut self, key: &str) -> Result<usize, CodeError> {
        let (line, v) = self.take(key)?;
        v.parse()
            .map_err(|_| err(line, format!("{key}: {v:?} is not a count")))
    }
}

/// Reconstructs the spec and analysis options, validating both.
pub fn read_code(body: &str) -> Result<(ShaftSpec, AnalysisOptions), CodeError> {
    let mut map = BTreeMap::new();
    for (i, raw) in body.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once(" = ") else {
            return Err(err(i + 1, format!("expected `key = value`, found {line:?}")));
        };
        if map.insert(k.trim().to_string(), (i + 1, v.trim().to_string())).is_some() {
            return Err(err(i + 1, format!("duplicate key {}", k.trim())));
        }
    }
    let mut f = Fields { map };

    let (line, solver) = f.take("solver")?;
    if solver != SOLVER_NAME {
        return Err(err(line, format!("unknown solver {solver:?}")));
    }
    let (line, level) = f.take("level")?;
    let level = Level::parse(&level).ok_or_else(|| err(line, format!("unknown level {level:?}")))?;
    let n_grid = match f.take_opt("grid_points") {
        Some((line, v)) => v
            .parse()
            .map_err(|_| err(line, format!("grid_points: {v:?} is not a count")))?,
        None => DEFAULT_GRID,
    };
    let (_, id) = f.take("spec_id")?;
    let length = f.num("length_m")?;
    let diameter = f.num("diameter_m")?;
    let n_loads = f.count("load_count")?;
    let mut loads = Vec::with_capacity(n_loads);
    for i in 1..=n_loads {
        loads.push(PointLoad {
            position: f.num(&format!("load_{i}_position_m"))?,
            magnitude: f.num(&format!("load_{i}_magnitude_n"))?,
        });
    }
    let torque = match f.take_opt("torque_nm") {
        Some((line, v)) => {
            let t = parse_num(&v).filter(|x| x.is_finite()).ok_or_else(|| err(line, format!("torque_nm: {v:?} is not a finite number")))?;
            Some(TorquePair::new(
                f.num("torque_input_position_m")?,
                f.num("torque_output_position_m")?,
                t,
            ))
        }
        None => None,
    };
    let (_, name) = f.take("material")?;
    let youngs_modulus = f.num("youngs_modulus_pa")?;
    let poisson_ratio = f.num("poisson_ratio")?;
    let yield_strength = f.num("yield_strength_pa")?;
    let ultimate_strength = f.num("ultimate_strength_pa")?;
    let (line, finish) = f.take("surface_finish")?;
    let surface_finish =
        SurfaceFinish::parse(&finish).ok_or_else(|| err(line, format!("unknown surface finish {finish:?}")))?;
    let reliability = match f.take_opt("reliability") {
        Some((line, v)) => Some(Reliability::parse(&v).ok_or_else(|| err(line, format!("unknown reliability {v:?}")))?),
        None => None,
    };
    let temperature_c = match f.take_opt("temperature_c") {
        Some((line, v)) => Some(parse_num(&v).filter(|x| x.is_finite()).ok_or_else(|| err(line, format!("temperature_c: {v:?} is not a finite number")))?),
        None => None,
    };
    if let Some((k, (line, _))) = f.map.into_iter().min_by_key(|(_, (l, _))| *l) {
        return Err(err(line, format!("unexpected key {k}")));
    }

    let spec = ShaftSpec {
        schema_version: SPEC_SCHEMA_VERSION,
        id,
        length,
        diameter,
        loads,
        torque,
        material: Material {
            name,
            youngs_modulus,
            poisson_ratio,
            yield_strength,
            ultimate_strength,
            surface_finish,
        },
    };
    spec.validate().map_err(|e| err(0, e.to_string()))?;
    let options = AnalysisOptions {
        level,
        n_grid,
        reliability,
        temperature_c,
    };
    if level == Level::Doctor && (reliability.is_none() || temperature_c.is_none()) {
        return Err(err(0, "doctor level needs reliability and temperature_c"));
    }
    Ok((spec, options))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ShaftSpec {
        ShaftSpec {
            schema_version: SPEC_SCHEMA_VERSION,
            id: "D-000007".into(),
            length: 1.2,
            diameter: 0.0452,
            loads: vec![
                PointLoad { position: 0.3, magnitude: 1230.0 },
                PointLoad { position: 0.85, magnitude: 45.6 },
            ],
            torque: Some(TorquePair::new(0.2, 1.1, 151.0)),
            material: Material {
                name: "AISI 1045 CD".into(),
                youngs_modulus: 2.07e11,
                poisson_ratio: 0.29,
                yield_strength: 5.3e8,
                ultimate_strength: 6.3e8,
                surface_finish: SurfaceFinish::Machined,
            },
        }
    }

    #[test]
    fn round_trip_is_exact_for_quantized_inputs() {
        let s = spec();
        let o = AnalysisOptions::doctor(Reliability::R99, 120.0);
        let text = write_code(&s, &o);
        assert!(text.contains("diameter_m = 0.0452000\n"));
        let (s2, o2) = read_code(&text).unwrap();
        assert_eq!(s2, s);
        assert_eq!(o2, o);
    }

    #[test]
    fn bachelor_without_torque() {
        let mut s = spec();
        s.torque = None;
        let o = AnalysisOptions::new(Level::Bachelor);
        let text = write_code(&s, &o);
        assert!(!text.contains("torque"));
        assert_eq!(read_code(&text).unwrap(), (s, o));
    }

    #[test]
    fn problems_are_reported_with_lines() {
        let o = AnalysisOptions::new(Level::Master);
        let text = write_code(&spec(), &o);
        let bad = text.replace("length_m = 1.20000", "length_m = abc");
        let e = read_code(&bad).unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.message.contains("length_m"));
        assert!(read_code(&format!("{text}extra = 1\n")).unwrap_err().message.contains("extra"));
        assert!(read_code(&text.replace("load_2_magnitude_n", "load_9_magnitude_n")).is_err());
        let invalid = text.replace("diameter_m = 0.0452000", "diameter_m = 2.00000");
        assert_eq!(read_code(&invalid).unwrap_err().line, 0);
    }
}
