//! The per-level metrics table and its diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shaftlab_core::{Level, SolverKind};
use shaftlab_data::tokenizer::Vocabulary;

use crate::degenerate::{detect_degenerate, DEFAULT_GRAM, DEFAULT_REPEATS};
use crate::grounding::{check_grounding, DEFAULT_REL_TOL};
use crate::output::ModelOutputRecord;
use crate::perplexity::total_nll;
use crate::structural::{check_stop_token, check_structure, Diagnostic, Rate};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub rel_tol: f64,
    pub degenerate_gram: usize,
    pub degenerate_repeats: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            rel_tol: DEFAULT_REL_TOL,
            degenerate_gram: DEFAULT_GRAM,
            degenerate_repeats: DEFAULT_REPEATS,
        }
    }
}

/// One column of the table. Rates are `None` for an empty column; loss and
/// perplexity only when every record in the column carries logprobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub records: usize,
    pub test_loss: Option<f64>,
    pub perplexity: Option<f64>,
    pub structural_validity: Option<f64>,
    pub numerical_grounding: Option<f64>,
    pub correct_stop_token: Option<f64>,
    /// Completions with a repetition loop; `None` when no token ids were
    /// available.
    pub degenerate: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub version: u32,
    pub options: EvalOptions,
    pub bachelor: Column,
    pub master: Column,
    pub doctor: Column,
    pub all: Column,
    #[serde(skip)]
    pub diagnostics: Vec<Diagnostic>,
}

struct RecordEval {
    structural: Result<(), String>,
    grounding: Result<(), String>,
    stop: Result<(), String>,
    loop_at: Option<Option<usize>>,
}

fn eval_one(r: &ModelOutputRecord, opts: &EvalOptions, vocab: Option<&Vocabulary>) -> RecordEval {
    let ids: Option<Vec<u32>> = match (&r.logprobs, vocab) {
        (Some(lp), _) => Some(lp.iter().map(|t| t.token_id).collect()),
        (None, Some(v)) => Some(v.encode(&r.completion_text)),
        (None, None) => None,
    };
    let structural = check_structure(r);
    let grounding = match &structural {
        Ok(()) => check_grounding(r, opts.rel_tol, SolverKind::ClosedForm),
        Err(_) => Err("not evaluated: completion does not parse".into()),
    };
    RecordEval {
        structural,
        grounding,
        stop: check_stop_token(&r.document()),
        loop_at: ids.map(|ids| detect_degenerate(&ids, opts.degenerate_gram, opts.degenerate_repeats).map(|s| s.start)),
    }
}

fn column(outputs: &[&ModelOutputRecord], evals: &[&RecordEval]) -> Column {
    let rate = |f: &dyn Fn(&RecordEval) -> bool| {
        (!evals.is_empty()).then(|| evals.iter().filter(|e| f(e)).count() as f64 / evals.len() as f64)
    };
    let owned: Vec<ModelOutputRecord> = outputs.iter().map(|r| (*r).clone()).collect();
    let loss = match total_nll(&owned) {
        Ok((nll, n)) if n > 0 => Some(nll / n as f64),
        _ => None,
    };
    let degenerate = evals
        .iter()
        .map(|e| e.loop_at.map(|l| l.is_some() as usize))
        .sum::<Option<usize>>();
    Column {
        records: outputs.len(),
        test_loss: loss,
        perplexity: loss.map(f64::exp),
        structural_validity: rate(&|e| e.structural.is_ok()),
        numerical_grounding: rate(&|e| e.grounding.is_ok()),
        correct_stop_token: rate(&|e| e.stop.is_ok()),
        degenerate: if evals.is_empty() { None } else { degenerate },
    }
}

/// Evaluates every record and splits the results by level. Records whose
/// level is unknown only count toward the `all` column.
pub fn evaluate(outputs: &[ModelOutputRecord], opts: &EvalOptions, vocab: Option<&Vocabulary>) -> MetricsReport {
    let evals: Vec<RecordEval> = outputs.par_iter().map(|r| eval_one(r, opts, vocab)).collect();
    let levels: Vec<Option<Level>> = outputs.iter().map(|r| r.level()).collect();
    let pick = |want: Option<Level>| {
        let idx: Vec<usize> = (0..outputs.len())
            .filter(|&i| want.is_none() || levels[i] == want)
            .collect();
        column(
            &idx.iter().map(|&i| &outputs[i]).collect::<Vec<_>>(),
            &idx.iter().map(|&i| &evals[i]).collect::<Vec<_>>(),
        )
    };

    let mut diagnostics = Vec::new();
    for (metric, get) in [
        ("structural_validity", (|e: &RecordEval| &e.structural) as fn(&RecordEval) -> &Result<(), String>),
        ("numerical_grounding", |e| &e.grounding),
        ("correct_stop_token", |e| &e.stop),
    ] {
        let rate = Rate::tally(
            metric,
            outputs.iter().zip(&evals).map(|(r, e)| (r.id.as_str(), get(e).clone())),
        );
        diagnostics.extend(rate.diagnostics);
    }
    for (r, e) in outputs.iter().zip(&evals) {
        if let Some(Some(start)) = e.loop_at {
            diagnostics.push(Diagnostic {
                id: r.id.clone(),
                metric: "degenerate".into(),
                message: format!("repetition loop starting at token {start}"),
            });
        }
    }
    diagnostics.sort_by(|a, b| (&a.id, &a.metric).cmp(&(&b.id, &b.metric)));

    MetricsReport {
        version: REPORT_VERSION,
        options: *opts,
        bachelor: pick(Some(Level::Bachelor)),
        master: pick(Some(Level::Master)),
        doctor: pick(Some(Level::Doctor)),
        all: pick(None),
        diagnostics,
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn diagnostics_jsonl(&self) -> String {
        self.diagnostics
            .iter()
            .map(|d| serde_json::to_string(d).expect("diagnostic serializes") + "\n")
            .collect()
    }

    /// Every rate in the `all` column equals 1.
    pub fn is_perfect(&self) -> bool {
        let c = &self.all;
        [c.structural_validity, c.numerical_grounding, c.correct_stop_token]
            .iter()
            .all(|r| *r == Some(1.0))
    }

    pub fn table(&self) -> String {
        let cols = [&self.bachelor, &self.master, &self.doctor, &self.all];
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.1}%", 100.0 * v));
        let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        let rows: Vec<(&str, Vec<String>)> = vec![
            ("Records", cols.iter().map(|c| c.records.to_string()).collect()),
            ("Test Loss", cols.iter().map(|c| num(c.test_loss)).collect()),
            ("Perplexity", cols.iter().map(|c| num(c.perplexity)).collect()),
            ("Structural Validity", cols.iter().map(|c| pct(c.structural_validity)).collect()),
            ("Numerical Grounding", cols.iter().map(|c| pct(c.numerical_grounding)).collect()),
            ("Correct Stop Token", cols.iter().map(|c| pct(c.correct_stop_token)).collect()),
            (
                "Degenerate",
                cols.iter().map(|c| c.degenerate.map_or("-".into(), |d| d.to_string())).collect(),
            ),
        ];
        let mut out = format!("{:<22}{:>10}{:>10}{:>10}{:>10}\n", "Metric", "Bachelor", "Master", "Doctor", "All");
        for (name, cells) in rows {
            out.push_str(&format!("{name:<22}"));
            for c in cells {
                out.push_str(&format!("{c:>10}"));
            }
            out.push('\n');
        }
        out
    }
}
