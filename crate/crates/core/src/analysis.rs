//! The three analysis levels and the labelled quantities each one reports.

use serde::{Deserialize, Serialize};

use crate::domain::{BeamFields, SectionProperties, ShaftSpec};
use crate::error::{Error, Result};
use crate::fatigue::{fatigue_analysis, FatigueReport, Reliability};
use crate::oracle::numerical_oracle;
use crate::scalar::{argmax_abs, max_abs, Scalar};
use crate::solver::{reactions, solve, Reactions, DEFAULT_GRID};
use crate::stress::{bending_stress, torsional_stress, yield_analysis, StressReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Deflection analysis.
    Bachelor,
    /// Adds von Mises stress and yield safety.
    Master,
    /// Adds Marin-corrected endurance limit and Goodman safety.
    Doctor,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Bachelor, Level::Master, Level::Doctor];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Bachelor => "bachelor",
            Level::Master => "master",
            Level::Doctor => "doctor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions<T> {
    pub level: Level,
    pub n_grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<Reliability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_c: Option<T>,
}

impl<T: Scalar> AnalysisOptions<T> {
    pub fn new(level: Level) -> Self {
        AnalysisOptions {
            level,
            n_grid: DEFAULT_GRID,
            reliability: None,
            temperature_c: None,
        }
    }

    pub fn doctor(reliability: Reliability, temperature_c: T) -> Self {
        AnalysisOptions {
            reliability: Some(reliability),
            temperature_c: Some(temperature_c),
            ..Self::new(Level::Doctor)
        }
    }
}

/// Which deflection route produces the fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis<T> {
    pub options: AnalysisOptions<T>,
    pub section: SectionProperties<T>,
    pub reactions: Reactions<T>,
    pub fields: BeamFields<T>,
    pub stress: Option<StressReport<T>>,
    pub fatigue: Option<FatigueReport<T>>,
}

pub fn analyze<T: Scalar>(
    spec: &ShaftSpec<T>,
    options: &AnalysisOptions<T>,
    solver: SolverKind,
) -> Result<Analysis<T>> {
    let fields = match solver {
        SolverKind::ClosedForm => solve(spec, options.n_grid)?,
        SolverKind::Oracle => numerical_oracle(spec, options.n_grid)?,
    };
    let stress = match options.level {
        Level::Bachelor => None,
        _ => Some(yield_analysis(spec, &fields)?),
    };
    let fatigue = match options.level {
        Level::Doctor => {
            let (Some(r), Some(t)) = (options.reliability, options.temperature_c) else {
                return Err(Error::domain(
                    "analysis options",
                    "doctor level needs a reliability and an operating temperature",
                ));
            };
            Some(fatigue_analysis(spec, &fields, r, t)?)
        }
        _ => None,
    };
    Ok(Analysis {
        options: *options,
        section: spec.section()?,
        reactions: reactions(spec)?,
        fields,
        stress,
        fatigue,
    })
}

/// One reported result line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub label: String,
    pub value: f64,
    /// Empty for dimensionless quantities.
    pub unit: String,
}

/// Fixed vocabulary of result labels: `(label, unit, first level reporting it)`.
pub const QUANTITY_REGISTRY: &[(&str, &str, Level)] = &[
    ("reaction_left", "N", Level::Bachelor),
    ("reaction_right", "N", Level::Bachelor),
    ("shear_max", "N", Level::Bachelor),
    ("moment_max", "N*m", Level::Bachelor),
    ("rotation_max", "rad", Level::Bachelor),
    ("w_max", "m", Level::Bachelor),
    ("torque_max", "N*m", Level::Master),
    ("tau_max", "Pa", Level::Master),
    ("sigma_b_max", "Pa", Level::Master),
    ("sigma_vm_max", "Pa", Level::Master),
    ("x_sigma_vm", "m", Level::Master),
    ("n_yield", "", Level::Master),
    ("k_a", "", Level::Doctor),
    ("k_b", "", Level::Doctor),
    ("k_c", "", Level::Doctor),
    ("k_d", "", Level::Doctor),
    ("k_e", "", Level::Doctor),
    ("k_f", "", Level::Doctor),
    ("Se_prime", "Pa", Level::Doctor),
    ("Se", "Pa", Level::Doctor),
    ("sigma_a_eq", "Pa", Level::Doctor),
    ("sigma_m_eq", "Pa", Level::Doctor),
    ("n_fatigue", "", Level::Doctor),
];

/// Registered unit of a label, `None` for unknown labels.
pub fn registered_unit(label: &str) -> Option<&'static str> {
    QUANTITY_REGISTRY
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|(_, u, _)| *u)
}

impl<T: Scalar> Analysis<T> {
    /// Result quantities in registry order. Torsion lines are left out when
    /// the shaft carries no torque.
    pub fn quantities(&self, spec: &ShaftSpec<T>) -> Vec<Quantity> {
        let f = &self.fields;
        let peak = |v: &[T]| argmax_abs(v).map_or(0.0, |(_, x)| x.to_f64_lossy());
        let mut values: Vec<(&'static str, f64)> = vec![
            ("reaction_left", self.reactions.left.to_f64_lossy()),
            ("reaction_right", self.reactions.right.to_f64_lossy()),
            ("shear_max", peak(&f.shear)),
            ("moment_max", peak(&f.moment)),
            ("rotation_max", peak(&f.rotation)),
            ("w_max", peak(&f.deflection)),
        ];
        if let Some(stress) = &self.stress {
            let t_max = max_abs(&f.torque);
            if t_max != T::zero() {
                values.push(("torque_max", peak(&f.torque)));
                values.push(("tau_max", torsional_stress(t_max, spec.diameter).to_f64_lossy()));
            }
            values.push(("sigma_b_max", bending_stress(max_abs(&f.moment), spec.diameter).to_f64_lossy()));
            values.push(("sigma_vm_max", stress.sigma_vm_max.to_f64_lossy()));
            values.push(("x_sigma_vm", stress.location.to_f64_lossy()));
            values.push(("n_yield", stress.n_yield.to_f64_lossy()));
        }
        if let Some(fat) = &self.fatigue {
            let k = fat.factors;
            values.extend([
                ("k_a", k.k_a.to_f64_lossy()),
                ("k_b", k.k_b.to_f64_lossy()),
                ("k_c", k.k_c.to_f64_lossy()),
                ("k_d", k.k_d.to_f64_lossy()),
                ("k_e", k.k_e.to_f64_lossy()),
                ("k_f", k.k_f.to_f64_lossy()),
                ("Se_prime", fat.se_prime.to_f64_lossy()),
                ("Se", fat.se.to_f64_lossy()),
                ("sigma_a_eq", fat.sigma_a_eq.to_f64_lossy()),
                ("sigma_m_eq", fat.sigma_m_eq.to_f64_lossy()),
                ("n_fatigue", fat.n_fatigue.to_f64_lossy()),
            ]);
        }
        values
            .into_iter()
            .map(|(label, value)| Quantity {
                label: label.to_string(),
                value,
                unit: registered_unit(label).expect("registered label").to_string(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TorquePair;
    use crate::solver::tests::midspan;

    fn labels(q: &[Quantity]) -> Vec<&str> {
        q.iter().map(|q| q.label.as_str()).collect()
    }

    #[test]
    fn bachelor_reports_deflection_only() {
        let s = midspan();
        let a = analyze(&s, &AnalysisOptions::new(Level::Bachelor), SolverKind::ClosedForm).unwrap();
        assert!(a.stress.is_none() && a.fatigue.is_none());
        let q = a.quantities(&s);
        assert_eq!(
            labels(&q),
            ["reaction_left", "reaction_right", "shear_max", "moment_max", "rotation_max", "w_max"]
        );
        assert_eq!(q[5].unit, "m");
    }

    #[test]
    fn master_without_torque_omits_torsion_lines() {
        let s = midspan();
        let a = analyze(&s, &AnalysisOptions::new(Level::Master), SolverKind::ClosedForm).unwrap();
        let q = a.quantities(&s);
        assert!(!labels(&q).contains(&"torque_max"));
        assert!(!labels(&q).contains(&"tau_max"));
        assert!(labels(&q).contains(&"n_yield"));

        let mut s = midspan();
        s.torque = Some(TorquePair::new(0.1, 0.9, 120.0));
        let a = analyze(&s, &AnalysisOptions::new(Level::Master), SolverKind::ClosedForm).unwrap();
        let q = a.quantities(&s);
        assert!(labels(&q).contains(&"torque_max"));
        assert!(labels(&q).contains(&"tau_max"));
    }

    #[test]
    fn doctor_needs_fatigue_options() {
        let s = midspan();
        assert!(analyze(&s, &AnalysisOptions::new(Level::Doctor), SolverKind::ClosedForm).is_err());
        let a = analyze(&s, &AnalysisOptions::doctor(Reliability::R90, 20.0), SolverKind::ClosedForm).unwrap();
        assert_eq!(a.quantities(&s).last().unwrap().label, "n_fatigue");
    }

    #[test]
    fn every_reported_label_is_registered() {
        let mut s = midspan();
        s.torque = Some(TorquePair::new(0.1, 0.9, 120.0));
        let a = analyze(&s, &AnalysisOptions::doctor(Reliability::R99, 120.0), SolverKind::Oracle).unwrap();
        for q in a.quantities(&s) {
            assert_eq!(registered_unit(&q.label), Some(q.unit.as_str()));
        }
    }
}
