//! Expected harm of answering across query domains.

use serde::{Deserialize, Serialize};

use crate::EvalError;

const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmDomain {
    pub name: String,
    /// Probability that a query falls in this domain.
    pub p_q: f64,
    /// Error rate when answering, in [0, 1].
    pub epsilon: f64,
    /// Harm caused by one wrong answer, >= 0.
    pub harm: f64,
    /// Refused domains are never answered.
    #[serde(default)]
    pub refuses: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmProfile {
    pub domains: Vec<HarmDomain>,
}

impl HarmProfile {
    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        let p: HarmProfile = serde_json::from_str(text).map_err(|e| EvalError::Input(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |d: &HarmDomain, what: &str| Err(EvalError::Input(format!("domain {:?}: {what}", d.name)));
        for d in &self.domains {
            if !(d.p_q.is_finite() && d.p_q >= 0.0) {
                return bad(d, "P_q must be finite and >= 0");
            }
            if !(0.0..=1.0).contains(&d.epsilon) {
                return bad(d, "epsilon must lie in [0, 1]");
            }
            if !(d.harm.is_finite() && d.harm >= 0.0) {
                return bad(d, "H must be finite and >= 0");
            }
        }
        let mass: f64 = self.domains.iter().map(|d| d.p_q).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(EvalError::Input(format!("P_q sums to {mass}, not 1")));
        }
        Ok(())
    }
}

/// Sum of `P_q * epsilon * H` over the domains that are answered.
pub fn expected_harm(profile: &HarmProfile) -> f64 {
    profile
        .domains
        .iter()
        .filter(|d| !d.refuses)
        .map(|d| d.p_q * d.epsilon * d.harm)
        .sum()
}
