//! How concentrated a resource allocation is across domains.

use serde::{Deserialize, Serialize};

use crate::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProfile {
    pub domains: Vec<String>,
    /// Nonnegative mass per domain, same order as `domains`.
    pub allocation: Vec<f64>,
    /// Total budget; must equal the sum of `allocation`.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotropyIndex {
    pub k_min: usize,
    pub ratio: f64,
    pub is_monotropic: bool,
    /// The `k_min` domains that carry the mass, largest first.
    pub core: Vec<String>,
}

impl AllocationProfile {
    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        let p: AllocationProfile = serde_json::from_str(text).map_err(|e| EvalError::Input(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.domains.is_empty() {
            return Err(EvalError::Input("allocation has no domains".into()));
        }
        if self.domains.len() != self.allocation.len() {
            return Err(EvalError::Input(format!(
                "{} domains but {} allocation entries",
                self.domains.len(),
                self.allocation.len()
            )));
        }
        if let Some(i) = self.allocation.iter().position(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(EvalError::Input(format!("allocation of {:?} is not a finite nonnegative number", self.domains[i])));
        }
        let sum: f64 = self.allocation.iter().sum();
        if !(self.total > 0.0) || (sum - self.total).abs() > 1e-9 * self.total {
            return Err(EvalError::Input(format!("allocation sums to {sum}, total is {}", self.total)));
        }
        Ok(())
    }
}

/// Smallest number of top domains holding at least `(1 - delta)` of the
/// total; monotropic when that is at most a `rho` fraction of all domains.
/// Equal masses keep their listed order.
pub fn monotropy_index(alloc: &AllocationProfile, delta: f64, rho: f64) -> Result<MonotropyIndex, EvalError> {
    alloc.validate()?;
    for (name, v) in [("delta", delta), ("rho", rho)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(EvalError::Input(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    let mut order: Vec<usize> = (0..alloc.domains.len()).collect();
    order.sort_by(|&a, &b| alloc.allocation[b].total_cmp(&alloc.allocation[a]));
    let target = (1.0 - delta) * alloc.total;
    let mut acc = 0.0;
    let mut k_min = order.len();
    for (k, &i) in order.iter().enumerate() {
        acc += alloc.allocation[i];
        // Rounding slack so that a sum equal to the target in exact arithmetic counts.
        if acc >= target * (1.0 - 1e-12) {
            k_min = k + 1;
            break;
        }
    }
    let ratio = k_min as f64 / alloc.domains.len() as f64;
    Ok(MonotropyIndex {
        k_min,
        ratio,
        is_monotropic: ratio <= rho,
        core: order[..k_min].iter().map(|&i| alloc.domains[i].clone()).collect(),
    })
}
