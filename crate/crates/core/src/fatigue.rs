//! Endurance-limit fatigue analysis of a rotating shaft.
//!
//! Bending is treated as fully reversed and torsion as steady. The Marin
//! tables below are the standard handbook rows; stresses in the surface
//! factor law are in MPa.

use serde::{Deserialize, Serialize};

use crate::domain::{BeamFields, Material, ShaftSpec, SurfaceFinish};
use crate::error::{Error, Result};
use crate::scalar::{argmax_abs, max_abs, Scalar};
use crate::stress::{bending_stress, torsional_stress};

/// Validity window of the size factor, metres.
pub const SIZE_FACTOR_MIN_D: f64 = 0.00279;
pub const SIZE_FACTOR_MAX_D: f64 = 0.254;

/// Temperature factor rows (degrees C, S_T / S_RT). Up to 50 C the factor is
/// exactly 1; between rows it is interpolated linearly.
pub const TEMPERATURE_TABLE: [(f64, f64); 12] = [
    (50.0, 1.000),
    (100.0, 1.020),
    (150.0, 1.025),
    (200.0, 1.020),
    (250.0, 1.000),
    (300.0, 0.975),
    (350.0, 0.943),
    (400.0, 0.900),
    (450.0, 0.843),
    (500.0, 0.768),
    (550.0, 0.672),
    (600.0, 0.549),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reliability {
    R50,
    R90,
    R99,
}

impl Reliability {
    pub const ALL: [Reliability; 3] = [Reliability::R50, Reliability::R90, Reliability::R99];

    pub fn factor(self) -> f64 {
        match self {
            Reliability::R50 => 1.0,
            Reliability::R90 => 0.897,
            Reliability::R99 => 0.814,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Reliability::R50 => "r50",
            Reliability::R90 => "r90",
            Reliability::R99 => "r99",
        }
    }

    pub fn percent(self) -> u32 {
        match self {
            Reliability::R50 => 50,
            Reliability::R90 => 90,
            Reliability::R99 => 99,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// Surface factor coefficients `(a, b)` of `k_a = a * S_ut^b`, S_ut in MPa.
pub fn surface_coefficients(finish: SurfaceFinish) -> (f64, f64) {
    match finish {
        SurfaceFinish::Ground => (1.58, -0.085),
        SurfaceFinish::Machined => (4.51, -0.265),
        SurfaceFinish::HotRolled => (57.7, -0.718),
        SurfaceFinish::AsForged => (272.0, -0.995),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarinFactors<T> {
    pub k_a: T,
    pub k_b: T,
    pub k_c: T,
    pub k_d: T,
    pub k_e: T,
    pub k_f: T,
}

impl<T: Scalar> MarinFactors<T> {
    pub fn product(&self) -> T {
        self.k_a * self.k_b * self.k_c * self.k_d * self.k_e * self.k_f
    }

    pub fn as_array(&self) -> [T; 6] {
        [self.k_a, self.k_b, self.k_c, self.k_d, self.k_e, self.k_f]
    }
}

pub fn temperature_factor<T: Scalar>(temperature_c: T) -> Result<T> {
    let t = temperature_c.to_f64_lossy();
    if !t.is_finite() {
        return Err(Error::domain("temperature", "temperature is not finite"));
    }
    if t <= 50.0 {
        return Ok(T::one());
    }
    for w in TEMPERATURE_TABLE.windows(2) {
        let ((t0, k0), (t1, k1)) = (w[0], w[1]);
        if t <= t1 {
            return Ok(T::of(k0 + (k1 - k0) * (t - t0) / (t1 - t0)));
        }
    }
    Err(Error::domain(
        "temperature",
        format!("{t} C is above the 600 C limit of the temperature table"),
    ))
}

/// Size factor for rotating round bars, `d` in metres.
pub fn size_factor<T: Scalar>(diameter: T) -> Result<T> {
    let lo = T::of(SIZE_FACTOR_MIN_D);
    let hi = T::of(SIZE_FACTOR_MAX_D);
    if !(diameter >= lo && diameter <= hi) {
        return Err(Error::domain(
            "size factor",
            format!("diameter {diameter} m outside [{SIZE_FACTOR_MIN_D}, {SIZE_FACTOR_MAX_D}] m"),
        ));
    }
    if diameter <= T::of(0.051) {
        Ok((diameter / T::of(0.00762)).powf(T::of(-0.107)))
    } else {
        Ok(T::of(1.51) * (diameter * T::of(1000.0)).powf(T::of(-0.157)))
    }
}

pub fn marin_factors<T: Scalar>(
    material: &Material<T>,
    diameter: T,
    reliability: Reliability,
    temperature_c: T,
) -> Result<MarinFactors<T>> {
    let (a, b) = surface_coefficients(material.surface_finish);
    let sut_mpa = material.ultimate_strength / T::of(1e6);
    Ok(MarinFactors {
        k_a: T::of(a) * sut_mpa.powf(T::of(b)),
        k_b: size_factor(diameter)?,
        // Combined loading goes through the von Mises transformation, so no
        // separate torsion load factor.
        k_c: T::one(),
        k_d: temperature_factor(temperature_c)?,
        k_e: T::of(reliability.factor()),
        // No notches are modelled.
        k_f: T::one(),
    })
}

/// Returns `(S_e', S_e)`: the rotating-beam endurance limit `0.5 S_ut`, capped
/// at 700 MPa above 1400 MPa, and its Marin-corrected value.
pub fn endurance_limit<T: Scalar>(material: &Material<T>, factors: &MarinFactors<T>) -> (T, T) {
    let sut = material.ultimate_strength;
    let se_prime = if sut <= T::of(1400e6) {
        T::of(0.5) * sut
    } else {
        T::of(700e6)
    };
    (se_prime, factors.product() * se_prime)
}

/// Goodman safety factor, `1/n = sigma_a / S_e + sigma_m / S_ut`. Returns
/// `+inf` when both stresses are zero.
pub fn goodman_safety<T: Scalar>(sigma_a: T, sigma_m: T, se: T, sut: T) -> Result<T> {
    if !(se > T::zero() && sut > T::zero()) {
        return Err(Error::domain("goodman", format!("need S_e > 0 and S_ut > 0, got {se}, {sut}")));
    }
    if !(sigma_a >= T::zero() && sigma_m >= T::zero()) {
        return Err(Error::domain(
            "goodman",
            format!("equivalent stresses must be non-negative, got {sigma_a}, {sigma_m}"),
        ));
    }
    let inv = sigma_a / se + sigma_m / sut;
    Ok(if inv == T::zero() { T::infinity() } else { T::one() / inv })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct FatigueReport<T> {
    pub reliability: Reliability,
    pub temperature_c: T,
    #[serde(flatten)]
    pub factors: MarinFactors<T>,
    #[serde(rename = "se_prime_pa")]
    pub se_prime: T,
    #[serde(rename = "se_pa")]
    pub se: T,
    #[serde(rename = "sigma_a_eq_pa")]
    pub sigma_a_eq: T,
    #[serde(rename = "sigma_m_eq_pa")]
    pub sigma_m_eq: T,
    /// Section of peak bending moment, where the alternating stress is taken.
    #[serde(rename = "location_m")]
    pub location: T,
    #[serde(with = "crate::serde_ext::inf_as_null")]
    pub n_fatigue: T,
}

/// Fatigue check at the section of peak `|M|` (first one on ties). The steady
/// torsion uses the largest internal torque anywhere on the shaft.
pub fn fatigue_analysis<T: Scalar>(
    spec: &ShaftSpec<T>,
    fields: &BeamFields<T>,
    reliability: Reliability,
    temperature_c: T,
) -> Result<FatigueReport<T>> {
    fields.check_shape().map_err(|e| Error::domain("fields", e))?;
    let material = &spec.material;
    let d = spec.diameter;
    let factors = marin_factors(material, d, reliability, temperature_c)?;
    let (se_prime, se) = endurance_limit(material, &factors);
    let (i, m_peak) = argmax_abs(&fields.moment).expect("non-empty grid");
    let t_peak = max_abs(&fields.torque);
    let sigma_a_eq = bending_stress(m_peak.abs(), d);
    let sigma_m_eq = T::of(3.0).sqrt() * torsional_stress(t_peak, d);
    let n_fatigue = goodman_safety(sigma_a_eq, sigma_m_eq, se, material.ultimate_strength)?;
    Ok(FatigueReport {
        reliability,
        temperature_c,
        factors,
        se_prime,
        se,
        sigma_a_eq,
        sigma_m_eq,
        location: fields.x[i],
        n_fatigue,
    })
}
