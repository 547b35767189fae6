//! Physical quantities shared by every analysis level.
//!
//! Everything is stored in SI base units. Sign convention, used throughout the
//! crate: transverse loads and deflections are positive downward, and a sagging
//! bending moment is positive. The shaft sits on two simple supports (bearings)
//! at `x = 0` and `x = L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Current version of the JSON layout of [`ShaftSpec`].
pub const SPEC_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceFinish {
    Ground,
    /// Machined or cold-drawn.
    Machined,
    HotRolled,
    AsForged,
}

impl SurfaceFinish {
    pub const ALL: [SurfaceFinish; 4] = [
        SurfaceFinish::Ground,
        SurfaceFinish::Machined,
        SurfaceFinish::HotRolled,
        SurfaceFinish::AsForged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceFinish::Ground => "ground",
            SurfaceFinish::Machined => "machined",
            SurfaceFinish::HotRolled => "hot_rolled",
            SurfaceFinish::AsForged => "as_forged",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

/// Linear elastic isotropic material. The shear modulus is always derived from
/// `E` and `nu`, never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material<T> {
    pub name: String,
    #[serde(rename = "youngs_modulus_pa")]
    pub youngs_modulus: T,
    pub poisson_ratio: T,
    #[serde(rename = "yield_strength_pa")]
    pub yield_strength: T,
    #[serde(rename = "ultimate_strength_pa")]
    pub ultimate_strength: T,
    pub surface_finish: SurfaceFinish,
}

impl<T: Scalar> Material<T> {
    /// `G = E / (2 (1 + nu))`.
    pub fn shear_modulus(&self) -> T {
        self.youngs_modulus / (T::of(2.0) * (T::one() + self.poisson_ratio))
    }

    pub fn validate(&self) -> Result<()> {
        let (e, nu, sy, sut) = (
            self.youngs_modulus,
            self.poisson_ratio,
            self.yield_strength,
            self.ultimate_strength,
        );
        if !(e.is_finite() && e > T::zero()) {
            return Err(Error::domain("material", format!("E must be positive, got {e}")));
        }
        if !(nu > T::zero() && nu < T::of(0.5)) {
            return Err(Error::domain("material", format!("nu must lie in (0, 0.5), got {nu}")));
        }
        if !(sy > T::zero() && sy < sut && sut.is_finite()) {
            return Err(Error::domain(
                "material",
                format!("need 0 < S_y < S_ut, got S_y = {sy}, S_ut = {sut}"),
            ));
        }
        Ok(())
    }
}

/// Transverse point load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLoad<T> {
    #[serde(rename = "position_m")]
    pub position: T,
    #[serde(rename = "magnitude_n")]
    pub magnitude: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTorque<T> {
    #[serde(rename = "position_m")]
    pub position: T,
    #[serde(rename = "torque_nm")]
    pub torque: T,
}

/// Torque fed in at one section and taken out at another. The two torques
/// must cancel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorquePair<T> {
    pub input: PointTorque<T>,
    pub output: PointTorque<T>,
}

impl<T: Scalar> TorquePair<T> {
    pub fn new(input_position: T, output_position: T, torque: T) -> Self {
        TorquePair {
            input: PointTorque {
                position: input_position,
                torque,
            },
            output: PointTorque {
                position: output_position,
                torque: -torque,
            },
        }
    }

    /// Internal torque at `x`: the input magnitude strictly after the first
    /// application point up to and including the second, zero elsewhere.
    /// Reported as a left limit, like the shear force.
    pub fn internal_torque(&self, x: T) -> T {
        let lo = self.input.position.min(self.output.position);
        let hi = self.input.position.max(self.output.position);
        if x > lo && x <= hi {
            self.input.torque
        } else {
            T::zero()
        }
    }

    pub fn magnitude(&self) -> T {
        self.input.torque.abs()
    }
}

/// A complete problem instance: a round shaft between two bearings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShaftSpec<T> {
    pub schema_version: u32,
    pub id: String,
    #[serde(rename = "length_m")]
    pub length: T,
    #[serde(rename = "diameter_m")]
    pub diameter: T,
    pub loads: Vec<PointLoad<T>>,
    #[serde(default)]
    pub torque: Option<TorquePair<T>>,
    pub material: Material<T>,
}

impl<T: Scalar> ShaftSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SPEC_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: SPEC_SCHEMA_VERSION,
            });
        }
        let (l, d) = (self.length, self.diameter);
        if !(d > T::zero() && d < l && l.is_finite()) {
            return Err(Error::domain(
                "geometry",
                format!("need 0 < d < L, got d = {d}, L = {l}"),
            ));
        }
        if self.loads.is_empty() {
            return Err(Error::domain("loads", "at least one transverse load is required"));
        }
        let inside = |x: T| x > T::zero() && x < l;
        for (i, load) in self.loads.iter().enumerate() {
            if !inside(load.position) {
                return Err(Error::domain(
                    "loads",
                    format!("load {} at x = {} is not strictly inside (0, L)", i + 1, load.position),
                ));
            }
            if !load.magnitude.is_finite() {
                return Err(Error::domain("loads", format!("load {} magnitude is not finite", i + 1)));
            }
        }
        if let Some(pair) = &self.torque {
            for (what, pt) in [("input", pair.input), ("output", pair.output)] {
                if !inside(pt.position) {
                    return Err(Error::domain(
                        "torque",
                        format!("{what} torque at x = {} is not strictly inside (0, L)", pt.position),
                    ));
                }
                if !pt.torque.is_finite() {
                    return Err(Error::domain("torque", format!("{what} torque is not finite")));
                }
            }
            let balance = pair.input.torque + pair.output.torque;
            let scale = pair.input.torque.abs().max(T::one());
            if balance.abs() > T::epsilon() * T::of(16.0) * scale {
                return Err(Error::domain(
                    "torque",
                    format!(
                        "input and output torques must cancel, got {} and {}",
                        pair.input.torque, pair.output.torque
                    ),
                ));
            }
        }
        self.material.validate()
    }

    pub fn section(&self) -> Result<SectionProperties<T>> {
        section_properties(self.diameter, self.material.poisson_ratio)
    }

    pub fn total_load(&self) -> T {
        self.loads.iter().map(|p| p.magnitude).sum()
    }

    pub fn internal_torque(&self, x: T) -> T {
        self.torque.map_or(T::zero(), |t| t.internal_torque(x))
    }

    /// Load and torque positions, the points where some field has a kink or jump.
    pub fn discontinuities(&self) -> Vec<T> {
        let mut pts: Vec<T> = self.loads.iter().map(|p| p.position).collect();
        if let Some(t) = &self.torque {
            pts.push(t.input.position);
            pts.push(t.output.position);
        }
        pts
    }

    /// Copy with every transverse load multiplied by `factor`.
    pub fn scaled_loads(&self, factor: T) -> Self {
        let mut out = self.clone();
        for p in &mut out.loads {
            p.magnitude = p.magnitude * factor;
        }
        out
    }
}

impl ShaftSpec<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Geometric constants of a solid circular section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionProperties<T> {
    #[serde(rename = "area_m2")]
    pub area: T,
    #[serde(rename = "second_moment_m4")]
    pub second_moment: T,
    #[serde(rename = "polar_moment_m4")]
    pub polar_moment: T,
    #[serde(rename = "shear_coefficient")]
    pub shear_coefficient: T,
}

/// Area, second and polar moments of a solid circle, plus Cowper's shear
/// correction factor `kappa = 6 (1 + nu) / (7 + 6 nu)`.
pub fn section_properties<T: Scalar>(diameter: T, poisson_ratio: T) -> Result<SectionProperties<T>> {
    if !(diameter > T::zero() && diameter.is_finite()) {
        return Err(Error::domain("section", format!("diameter must be positive, got {diameter}")));
    }
    if !(poisson_ratio > T::zero() && poisson_ratio < T::of(0.5)) {
        return Err(Error::domain("section", format!("nu must lie in (0, 0.5), got {poisson_ratio}")));
    }
    let d2 = diameter * diameter;
    let second_moment = T::PI() * d2 * d2 / T::of(64.0);
    Ok(SectionProperties {
        area: T::PI() * d2 / T::of(4.0),
        second_moment,
        polar_moment: second_moment + second_moment,
        shear_coefficient: T::of(6.0) * (T::one() + poisson_ratio)
            / (T::of(7.0) + T::of(6.0) * poisson_ratio),
    })
}

/// Solved fields on a grid. All arrays have the grid's length; `shear` and
/// `torque` report left limits at discontinuities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamFields<T> {
    #[serde(rename = "x_m")]
    pub x: Vec<T>,
    #[serde(rename = "shear_n")]
    pub shear: Vec<T>,
    #[serde(rename = "moment_nm")]
    pub moment: Vec<T>,
    #[serde(rename = "torque_nm")]
    pub torque: Vec<T>,
    #[serde(rename = "rotation_rad")]
    pub rotation: Vec<T>,
    #[serde(rename = "deflection_m")]
    pub deflection: Vec<T>,
}

impl<T: Scalar> BeamFields<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Checks equal lengths and a strictly increasing grid.
    pub fn check_shape(&self) -> std::result::Result<(), String> {
        let n = self.x.len();
        let named = [
            ("shear", self.shear.len()),
            ("moment", self.moment.len()),
            ("torque", self.torque.len()),
            ("rotation", self.rotation.len()),
            ("deflection", self.deflection.len()),
        ];
        for (name, len) in named {
            if len != n {
                return Err(format!("{name} has {len} entries, grid has {n}"));
            }
        }
        if n < 2 {
            return Err(format!("grid has {n} points"));
        }
        if let Some(i) = self.x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(format!("grid not strictly increasing at index {}", i + 1));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        [&self.x, &self.shear, &self.moment, &self.torque, &self.rotation, &self.deflection]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn steel() -> Material<f64> {
        Material {
            name: "test steel".into(),
            youngs_modulus: 200e9,
            poisson_ratio: 0.3,
            yield_strength: 350e6,
            ultimate_strength: 600e6,
            surface_finish: SurfaceFinish::Machined,
        }
    }

    fn spec() -> ShaftSpec<f64> {
        ShaftSpec {
            schema_version: SPEC_SCHEMA_VERSION,
            id: "t".into(),
            length: 1.0,
            diameter: 0.05,
            loads: vec![PointLoad { position: 0.5, magnitude: 1000.0 }],
            torque: Some(TorquePair::new(0.2, 0.8, 150.0)),
            material: steel(),
        }
    }

    #[test]
    fn unit_diameter_second_moment() {
        let s = section_properties(1.0_f64, 0.3).unwrap();
        assert!((s.second_moment - std::f64::consts::PI / 64.0).abs() < 1e-15);
        assert!((s.second_moment - 4.9087e-2).abs() < 1e-6);
    }

    #[test]
    fn fifty_millimetre_section() {
        // I = pi * 0.05^4 / 64, A = pi * 0.05^2 / 4, kappa = 7.8 / 8.8
        let s = section_properties(0.05_f64, 0.3).unwrap();
        assert!((s.second_moment - 3.0679616e-7).abs() < 1e-13);
        assert!((s.area - 1.9634954e-3).abs() < 1e-9);
        assert!((s.shear_coefficient - 0.886_363_636).abs() < 1e-8);
        assert_eq!(s.polar_moment, 2.0 * s.second_moment);
        assert!((s.polar_moment - 6.1359e-7).abs() < 1e-11);
    }

    #[test]
    fn non_positive_diameter_is_rejected() {
        assert!(section_properties(0.0_f64, 0.3).is_err());
        assert!(section_properties(-0.1_f64, 0.3).is_err());
        assert!(section_properties(0.1_f64, 0.5).is_err());
    }

    #[test]
    fn shear_modulus_is_derived() {
        assert!((steel().shear_modulus() - 200e9 / 2.6).abs() < 1.0);
    }

    #[test]
    fn spec_validation() {
        assert!(spec().validate().is_ok());

        let mut s = spec();
        s.diameter = 1.5;
        assert!(s.validate().is_err());

        let mut s = spec();
        s.loads[0].position = 1.0;
        assert!(s.validate().is_err());

        let mut s = spec();
        s.loads.clear();
        assert!(s.validate().is_err());

        let mut s = spec();
        s.torque.as_mut().unwrap().output.torque = -100.0;
        assert!(s.validate().is_err());

        let mut s = spec();
        s.torque.as_mut().unwrap().input.position = 0.0;
        assert!(s.validate().is_err());

        let mut s = spec();
        s.material.yield_strength = 700e6;
        assert!(s.validate().is_err());

        let mut s = spec();
        s.schema_version = 2;
        assert!(matches!(s.validate(), Err(Error::SchemaVersion { .. })));
    }

    #[test]
    fn internal_torque_between_application_points() {
        let s = spec();
        assert_eq!(s.internal_torque(0.1), 0.0);
        assert_eq!(s.internal_torque(0.2), 0.0);
        assert_eq!(s.internal_torque(0.5), 150.0);
        assert_eq!(s.internal_torque(0.8), 150.0);
        assert_eq!(s.internal_torque(0.9), 0.0);
        // Reversed application order gives the same span.
        let pair = TorquePair::new(0.8, 0.2, 150.0);
        assert_eq!(pair.internal_torque(0.5), 150.0);
    }

    #[test]
    fn json_uses_unit_suffixed_names() {
        let json = spec().to_json_pretty();
        for key in [
            "\"schema_version\"",
            "\"length_m\"",
            "\"diameter_m\"",
            "\"position_m\"",
            "\"magnitude_n\"",
            "\"torque_nm\"",
            "\"youngs_modulus_pa\"",
            "\"surface_finish\": \"machined\"",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        assert_eq!(ShaftSpec::from_json(&json).unwrap(), spec());
    }

    #[test]
    fn invalid_json_spec_is_rejected() {
        let mut s = spec();
        s.diameter = 2.0;
        let json = serde_json::to_string(&s).unwrap();
        assert!(ShaftSpec::from_json(&json).is_err());
        assert!(matches!(ShaftSpec::from_json("{"), Err(Error::Json(_))));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn polar_moment_is_twice_second_moment(d in 1e-4f64..2.0, nu in 0.01f64..0.49) {
            let s = section_properties(d, nu).unwrap();
            prop_assert_eq!(s.polar_moment, 2.0 * s.second_moment);
        }

        #[test]
        fn kappa_is_bounded_and_increasing(nu in 0.0001f64..0.4998, dnu in 1e-6f64..1e-3) {
            let a = section_properties(0.05, nu).unwrap().shear_coefficient;
            let nu2 = (nu + dnu).min(0.49999);
            let b = section_properties(0.05, nu2).unwrap().shear_coefficient;
            prop_assert!(a > 6.0 / 7.0 && a < 12.0 / 13.0);
            prop_assert!(b >= a);
        }
    }
}
