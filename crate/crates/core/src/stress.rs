//! Static stress analysis of the shaft surface.

use serde::{Deserialize, Serialize};

use crate::domain::{BeamFields, ShaftSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Outer-fibre bending stress `32 M / (pi d^3)`.
pub fn bending_stress<T: Scalar>(moment: T, diameter: T) -> T {
    T::of(32.0) * moment / (T::PI() * diameter * diameter * diameter)
}

/// Surface shear stress from torsion `16 T / (pi d^3)`.
pub fn torsional_stress<T: Scalar>(torque: T, diameter: T) -> T {
    T::of(16.0) * torque / (T::PI() * diameter * diameter * diameter)
}

/// `sqrt(sigma^2 + 3 tau^2)`.
pub fn von_mises<T: Scalar>(sigma: T, tau: T) -> T {
    (sigma * sigma + T::of(3.0) * tau * tau).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct StressReport<T> {
    #[serde(rename = "sigma_vm_max_pa")]
    pub sigma_vm_max: T,
    #[serde(rename = "location_m")]
    pub location: T,
    #[serde(with = "crate::serde_ext::inf_as_null")]
    pub n_yield: T,
    /// Set when every grid point is unstressed; `n_yield` is then `+inf`.
    pub unstressed: bool,
}

/// Scans the grid for the largest von Mises stress and reports the yield
/// safety factor `S_y / sigma_vm_max`. Ties resolve to the first grid point.
pub fn yield_analysis<T: Scalar>(spec: &ShaftSpec<T>, fields: &BeamFields<T>) -> Result<StressReport<T>> {
    fields
        .check_shape()
        .map_err(|e| Error::domain("fields", e))?;
    let d = spec.diameter;
    let mut best = (T::zero(), fields.x[0]);
    for i in 0..fields.len() {
        let s = von_mises(
            bending_stress(fields.moment[i], d),
            torsional_stress(fields.torque[i], d),
        );
        if s > best.0 {
            best = (s, fields.x[i]);
        }
    }
    let (sigma_vm_max, location) = best;
    let unstressed = sigma_vm_max == T::zero();
    Ok(StressReport {
        sigma_vm_max,
        location,
        n_yield: if unstressed {
            T::infinity()
        } else {
            spec.material.yield_strength / sigma_vm_max
        },
        unstressed,
    })
}
