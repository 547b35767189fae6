//! One accepted training sample and the per-slot pipeline that produces it.

use serde::{Deserialize, Serialize};
use shaftlab_core::{
    analyze, verify_all, AnalysisOptions, FatigueReport, Level, Quantity, Reactions, Reports, ShaftSpec,
    SolverKind, StressReport, VerificationConfig, VerificationReport,
};

use super::FactoriumError;
use crate::harmony::{render, ComposeInput, Locale, RenderError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub level: Level,
    pub spec: ShaftSpec,
    pub options: AnalysisOptions,
    pub locale: Locale,
    pub reactions: Reactions,
    /// The labelled result quantities, as reported in the result channel.
    pub fields_summary: Vec<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress: Option<StressReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fatigue: Option<FatigueReport>,
    pub verification: VerificationReport,
    pub harmony_text: String,
    pub token_count: usize,
    pub difficulty: f64,
}

/// Outcome of analysing and rendering one draw.
#[derive(Debug)]
pub enum Built {
    Accepted(Box<DatasetRecord>),
    Rejected {
        reason: String,
        verification: Option<VerificationReport>,
        detail: String,
    },
}

/// Analyses, verifies and renders a drawn instance. Token count and
/// difficulty are filled in later, once the vocabulary exists.
pub fn build_record(
    id: &str,
    spec: &ShaftSpec,
    options: &AnalysisOptions,
    tolerances: &VerificationConfig,
    locale: Locale,
) -> Result<Built, FactoriumError> {
    let analysis = match analyze(spec, options, SolverKind::ClosedForm) {
        Ok(a) => a,
        Err(e) => {
            return Ok(Built::Rejected {
                reason: "analysis".into(),
                verification: None,
                detail: e.to_string(),
            })
        }
    };
    let reports = Reports {
        stress: analysis.stress,
        fatigue: analysis.fatigue,
    };
    let verification = verify_all(spec, &analysis.fields, &reports, tolerances);
    if let Some(f) = verification.first_failure() {
        return Ok(Built::Rejected {
            reason: f.level.as_str().to_string(),
            detail: f.detail.clone(),
            verification: Some(verification),
        });
    }
    let input = ComposeInput {
        spec,
        analysis: &analysis,
        verification: &verification,
        locale,
    };
    let harmony_text = match render(&input) {
        Ok(t) => t,
        Err(e @ RenderError::Unverified(_)) => return Err(FactoriumError::Internal(e.to_string())),
        Err(e) => {
            return Ok(Built::Rejected {
                reason: "render".into(),
                detail: e.to_string(),
                verification: Some(verification),
            })
        }
    };
    Ok(Built::Accepted(Box::new(DatasetRecord {
        id: id.to_string(),
        level: options.level,
        spec: spec.clone(),
        options: *options,
        locale,
        reactions: analysis.reactions,
        fields_summary: analysis.quantities(spec),
        stress: analysis.stress,
        fatigue: analysis.fatigue,
        verification,
        harmony_text,
        token_count: 0,
        difficulty: 0.0,
    })))
}

impl DatasetRecord {
    /// Re-renders the record from its spec and options. Refuses records
    /// whose stored verification did not pass.
    pub fn render(&self, tolerances: &VerificationConfig) -> Result<String, FactoriumError> {
        if let Some(f) = self.verification.first_failure() {
            return Err(FactoriumError::Render(RenderError::Unverified(f.level.as_str().to_string())));
        }
        match build_record(&self.id, &self.spec, &self.options, tolerances, self.locale)? {
            Built::Accepted(r) => Ok(r.harmony_text),
            Built::Rejected { reason, detail, .. } => Err(FactoriumError::Render(RenderError::Unverified(format!(
                "{reason}: {detail}"
            )))),
        }
    }
}

pub fn record_id(level: Level, slot: usize) -> String {
    let prefix = match level {
        Level::Bachelor => 'B',
        Level::Master => 'M',
        Level::Doctor => 'D',
    };
    format!("{prefix}-{slot:06}")
}
