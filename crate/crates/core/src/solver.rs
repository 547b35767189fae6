//! Closed-form Timoshenko analysis of a simply supported shaft.
//!
//! Fields are assembled by superposing the textbook solution of one point
//! load at a time. With `a` the load position and `b = L - a`:
//!
//! ```text
//! w_b(x) = P b x (L^2 - b^2 - x^2) / (6 E I L)              x <= a
//! w_b(x) = P a (L - x) (2 L x - x^2 - a^2) / (6 E I L)      x >  a
//! w_s(x) = M(x) / (kappa G A)
//! w      = w_b + w_s
//! ```
//!
//! `theta` is the bending rotation with `M = E I dtheta/dx`; under the
//! downward-positive convention `dw_b/dx = -theta`.

use serde::{Deserialize, Serialize};

use crate::domain::{BeamFields, SectionProperties, ShaftSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest grid accepted by [`solve`].
pub const MIN_GRID: usize = 16;
pub const DEFAULT_GRID: usize = 257;

/// Support reactions, positive upward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reactions<T> {
    #[serde(rename = "left_n")]
    pub left: T,
    #[serde(rename = "right_n")]
    pub right: T,
}

pub fn reactions<T: Scalar>(spec: &ShaftSpec<T>) -> Result<Reactions<T>> {
    spec.validate()?;
    Ok(reactions_unchecked(spec))
}

fn reactions_unchecked<T: Scalar>(spec: &ShaftSpec<T>) -> Reactions<T> {
    let l = spec.length;
    let (left, right) = spec.loads.iter().fold((T::zero(), T::zero()), |(r1, r2), p| {
        (
            r1 + p.magnitude * (l - p.position) / l,
            r2 + p.magnitude * p.position / l,
        )
    });
    Reactions { left, right }
}

/// Point-wise closed-form evaluator for a validated spec.
#[derive(Debug, Clone)]
pub struct ClosedForm<'a, T> {
    spec: &'a ShaftSpec<T>,
    reactions: Reactions<T>,
    bending_stiffness: T,
    shear_stiffness: T,
}

impl<'a, T: Scalar> ClosedForm<'a, T> {
    pub fn new(spec: &'a ShaftSpec<T>) -> Result<Self> {
        spec.validate()?;
        let section = spec.section()?;
        Ok(Self::with_section(spec, &section))
    }

    fn with_section(spec: &'a ShaftSpec<T>, section: &SectionProperties<T>) -> Self {
        ClosedForm {
            spec,
            reactions: reactions_unchecked(spec),
            bending_stiffness: spec.material.youngs_modulus * section.second_moment,
            shear_stiffness: section.shear_coefficient * spec.material.shear_modulus() * section.area,
        }
    }

    pub fn reactions(&self) -> Reactions<T> {
        self.reactions
    }

    /// Shear force, left limit at load points.
    pub fn shear(&self, x: T) -> T {
        self.spec
            .loads
            .iter()
            .filter(|p| p.position < x)
            .fold(self.reactions.left, |v, p| v - p.magnitude)
    }

    pub fn moment(&self, x: T) -> T {
        self.spec
            .loads
            .iter()
            .filter(|p| p.position < x)
            .fold(self.reactions.left * x, |m, p| m - p.magnitude * (x - p.position))
    }

    pub fn torque(&self, x: T) -> T {
        self.spec.internal_torque(x)
    }

    /// Euler-Bernoulli part of the deflection.
    pub fn bending_deflection(&self, x: T) -> T {
        let l = self.spec.length;
        let six_eil = T::of(6.0) * self.bending_stiffness * l;
        self.spec
            .loads
            .iter()
            .map(|p| {
                let a = p.position;
                let b = l - a;
                if x <= a {
                    p.magnitude * b * x * (l * l - b * b - x * x) / six_eil
                } else {
                    p.magnitude * a * (l - x) * (T::of(2.0) * l * x - x * x - a * a) / six_eil
                }
            })
            .sum()
    }

    pub fn shear_deflection(&self, x: T) -> T {
        self.moment(x) / self.shear_stiffness
    }

    pub fn deflection(&self, x: T) -> T {
        self.bending_deflection(x) + self.shear_deflection(x)
    }

    /// Bending rotation, `-dw_b/dx`.
    pub fn rotation(&self, x: T) -> T {
        let l = self.spec.length;
        let six_eil = T::of(6.0) * self.bending_stiffness * l;
        let three = T::of(3.0);
        self.spec
            .loads
            .iter()
            .map(|p| {
                let a = p.position;
                let b = l - a;
                if x <= a {
                    -p.magnitude * b * (l * l - b * b - three * x * x) / six_eil
                } else {
                    -p.magnitude * a * (three * x * x - T::of(6.0) * l * x + T::of(2.0) * l * l + a * a)
                        / six_eil
                }
            })
            .sum()
    }
}

/// Uniform grid of `n_grid` points on `[0, L]` augmented with every load and
/// torque position. A uniform point closer than a quarter spacing to a
/// discontinuity is replaced by it, so no interval degenerates.
pub fn build_grid<T: Scalar>(spec: &ShaftSpec<T>, n_grid: usize) -> Result<Vec<T>> {
    if n_grid < 2 {
        return Err(Error::domain("grid", format!("need at least 2 points, got {n_grid}")));
    }
    let l = spec.length;
    let h = l / T::from_usize_lossy(n_grid - 1);
    let mut grid: Vec<T> = (0..n_grid)
        .map(|i| {
            if i == n_grid - 1 {
                l
            } else {
                T::from_usize_lossy(i) * h
            }
        })
        .collect();
    let snap = h / T::of(4.0);
    let mut snapped = vec![false; n_grid];
    for p in spec.discontinuities() {
        // Nearest uniform index.
        let k = (p / h).round().to_usize().unwrap_or(0).min(n_grid - 1);
        if k != 0 && k != n_grid - 1 && !snapped[k] && (grid[k] - p).abs() < snap {
            grid[k] = p;
            snapped[k] = true;
        } else {
            grid.push(p);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    Ok(grid)
}

fn check_grid<T: Scalar>(spec: &ShaftSpec<T>, grid: &[T]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::domain("grid", "need at least 2 points"));
    }
    for (i, &x) in grid.iter().enumerate() {
        if !(x >= T::zero() && x <= spec.length) {
            return Err(Error::domain(
                "grid",
                format!("point {i} at x = {x} lies outside [0, {}]", spec.length),
            ));
        }
        if i > 0 && !(x > grid[i - 1]) {
            return Err(Error::domain("grid", format!("grid not strictly increasing at index {i}")));
        }
    }
    Ok(())
}

/// Shear force, bending moment and internal torque on `grid`.
pub fn internal_forces<T: Scalar>(spec: &ShaftSpec<T>, grid: &[T]) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let cf = ClosedForm::new(spec)?;
    check_grid(spec, grid)?;
    Ok((
        grid.iter().map(|&x| cf.shear(x)).collect(),
        grid.iter().map(|&x| cf.moment(x)).collect(),
        grid.iter().map(|&x| cf.torque(x)).collect(),
    ))
}

/// Closed-form fields on the default augmented grid.
pub fn solve<T: Scalar>(spec: &ShaftSpec<T>, n_grid: usize) -> Result<BeamFields<T>> {
    if n_grid < MIN_GRID {
        return Err(Error::domain("grid", format!("need at least {MIN_GRID} points, got {n_grid}")));
    }
    spec.validate()?;
    let grid = build_grid(spec, n_grid)?;
    solve_on_grid(spec, &grid)
}

/// Closed-form fields on a caller-supplied grid, which must start at 0 and
/// end at `L`.
pub fn solve_on_grid<T: Scalar>(spec: &ShaftSpec<T>, grid: &[T]) -> Result<BeamFields<T>> {
    let cf = ClosedForm::new(spec)?;
    check_grid(spec, grid)?;
    if grid[0] != T::zero() || grid[grid.len() - 1] != spec.length {
        return Err(Error::domain("grid", "grid must include both supports"));
    }
    let eval = |f: &dyn Fn(T) -> T| grid.iter().map(|&x| f(x)).collect::<Vec<T>>();
    Ok(BeamFields {
        x: grid.to_vec(),
        shear: eval(&|x| cf.shear(x)),
        moment: eval(&|x| cf.moment(x)),
        torque: eval(&|x| cf.torque(x)),
        rotation: eval(&|x| cf.rotation(x)),
        deflection: eval(&|x| cf.deflection(x)),
    })
}
