//! Numerical grounding: the reported result lines must agree with a fresh
//! solve of the problem stated in the code channel.

use shaftlab_core::scalar::rel_diff;
use shaftlab_core::{analyze, SolverKind};
use shaftlab_data::harmony::{extract_quantities, parse, read_code, Channel};

use crate::output::ModelOutputRecord;
use crate::structural::Rate;

pub const DEFAULT_REL_TOL: f64 = 1e-4;

pub fn check_grounding(record: &ModelOutputRecord, rel_tol: f64, solver: SolverKind) -> Result<(), String> {
    check_grounding_text(&record.document(), rel_tol, solver)
}

/// Re-solves one document. A mismatch error starts with `label:`.
pub fn check_grounding_text(text: &str, rel_tol: f64, solver: SolverKind) -> Result<(), String> {
    let doc = parse(text).map_err(|e| format!("unparseable: {e}"))?;
    let code = doc.channel(Channel::Code).ok_or("no code channel")?;
    let (spec, options) = read_code(code).map_err(|e| format!("spec not reconstructable: {e}"))?;
    let analysis = analyze(&spec, &options, solver).map_err(|e| format!("re-solve failed: {e}"))?;
    let expected = analysis.quantities(&spec);
    let reported = extract_quantities(&doc).map_err(|e| e.to_string())?;

    for q in &expected {
        if !reported.iter().any(|r| r.label == q.label) {
            return Err(format!("missing quantity {}", q.label));
        }
    }
    for r in &reported {
        let Some(q) = expected.iter().find(|q| q.label == r.label) else {
            return Err(format!("quantity {} is not part of a {} analysis", r.label, options.level));
        };
        let d = rel_diff(r.value, q.value);
        if !(d <= rel_tol) {
            return Err(format!(
                "{}: reported {} but re-solve gives {} (relative difference {:.3e})",
                r.label, r.value, q.value, d
            ));
        }
    }
    Ok(())
}

pub fn eval_numerical_grounding(outputs: &[ModelOutputRecord], rel_tol: f64) -> Rate {
    eval_grounding_with(outputs, rel_tol, SolverKind::ClosedForm)
}

pub fn eval_grounding_with(outputs: &[ModelOutputRecord], rel_tol: f64, solver: SolverKind) -> Rate {
    use rayon::prelude::*;
    let results: Vec<Result<(), String>> = outputs
        .par_iter()
        .map(|r| check_grounding(r, rel_tol, solver))
        .collect();
    Rate::tally(
        "numerical_grounding",
        outputs.iter().map(|r| r.id.as_str()).zip(results),
    )
}
