//! Independent numerical route to the deflection.
//!
//! Integrates the first-order Timoshenko system with composite trapezoidal
//! quadrature, starting from the analytic shear and moment:
//!
//! ```text
//! dtheta/dx = M / (E I)
//! dw/dx     = -theta + V / (kappa G A)
//! ```
//!
//! The unknown initial rotation is fixed afterwards by subtracting the linear
//! function that restores `w(L) = 0`. Nothing here touches the closed-form
//! deflection formulas.

use crate::domain::{BeamFields, ShaftSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::{build_grid, internal_forces};

pub const MIN_ORACLE_GRID: usize = 256;

pub fn numerical_oracle<T: Scalar>(spec: &ShaftSpec<T>, n_grid: usize) -> Result<BeamFields<T>> {
    if n_grid < MIN_ORACLE_GRID {
        return Err(Error::domain(
            "grid",
            format!("oracle needs at least {MIN_ORACLE_GRID} points, got {n_grid}"),
        ));
    }
    spec.validate()?;
    let section = spec.section()?;
    let ei = spec.material.youngs_modulus * section.second_moment;
    let kga = section.shear_coefficient * spec.material.shear_modulus() * section.area;

    let x = build_grid(spec, n_grid)?;
    let (shear, moment, torque) = internal_forces(spec, &x)?;
    let n = x.len();
    let half = T::of(0.5);

    let mut rotation = vec![T::zero(); n];
    let mut deflection = vec![T::zero(); n];
    for i in 0..n - 1 {
        let h = x[i + 1] - x[i];
        rotation[i + 1] = rotation[i] + h * half * (moment[i] + moment[i + 1]) / ei;
        // The grid holds every load point, so V is constant on the open
        // interval and equals the left limit stored at its right end.
        let slope_bending = -half * (rotation[i] + rotation[i + 1]);
        deflection[i + 1] = deflection[i] + h * (slope_bending + shear[i + 1] / kga);
    }

    let correction = deflection[n - 1] / spec.length;
    for i in 0..n {
        deflection[i] = deflection[i] - correction * x[i];
        rotation[i] = rotation[i] + correction;
    }
    deflection[n - 1] = T::zero();

    Ok(BeamFields {
        x,
        shear,
        moment,
        torque,
        rotation,
        deflection,
    })
}

/// Largest pointwise deflection gap between two solutions on the same grid,
/// relative to the peak deflection magnitude of `reference`.
pub fn max_relative_deflection_gap<T: Scalar>(reference: &BeamFields<T>, other: &BeamFields<T>) -> T {
    let scale = crate::scalar::max_abs(&reference.deflection);
    let gap = reference
        .deflection
        .iter()
        .zip(&other.deflection)
        .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
    if scale == T::zero() {
        gap
    } else {
        gap / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve;
    use crate::solver::tests::{midspan, spec_with};

    #[test]
    fn agrees_with_closed_form_at_fine_grid() {
        let s = midspan();
        let a = solve(&s, 2048).unwrap();
        let b = numerical_oracle(&s, 2048).unwrap();
        assert_eq!(a.x, b.x);
        assert!(max_relative_deflection_gap(&a, &b) < 1e-4);
    }

    #[test]
    fn refinement_reduces_error() {
        let s = spec_with(&[(0.31, 700.0), (0.62, 300.0)]);
        let coarse = max_relative_deflection_gap(&solve(&s, 256).unwrap(), &numerical_oracle(&s, 256).unwrap());
        let fine = max_relative_deflection_gap(&solve(&s, 511).unwrap(), &numerical_oracle(&s, 511).unwrap());
        assert!(fine < coarse, "{fine} !< {coarse}");
        // Second-order scheme: halving h cuts the error about fourfold.
        assert!(fine < coarse / 3.0);
    }

    #[test]
    fn zero_loads_give_zero_fields() {
        let f = numerical_oracle(&spec_with(&[(0.5, 0.0)]), 256).unwrap();
        assert!(f.deflection.iter().all(|&w| w == 0.0));
        assert!(f.rotation.iter().all(|&r| r == 0.0));
        assert!(f.moment.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(numerical_oracle(&midspan(), 255).is_err());
    }

    #[test]
    fn endpoints_are_pinned() {
        let f = numerical_oracle(&spec_with(&[(0.2, 100.0)]), 300).unwrap();
        assert_eq!(f.deflection[0], 0.0);
        assert_eq!(*f.deflection.last().unwrap(), 0.0);
    }
}
