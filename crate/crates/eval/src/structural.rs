//! Structural validity and stop-token accounting.

use serde::{Deserialize, Serialize};
use shaftlab_data::harmony::{parse, Special};

use crate::output::ModelOutputRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub id: String,
    pub metric: String,
    pub message: String,
}

/// An exact fraction of records, with a diagnostic for every failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub passed: usize,
    pub total: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl Rate {
    /// `None` for an empty set.
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.passed as f64 / self.total as f64)
    }

    pub(crate) fn tally<'a, I>(metric: &str, results: I) -> Rate
    where
        I: IntoIterator<Item = (&'a str, Result<(), String>)>,
    {
        let mut rate = Rate {
            passed: 0,
            total: 0,
            diagnostics: Vec::new(),
        };
        for (id, r) in results {
            rate.total += 1;
            match r {
                Ok(()) => rate.passed += 1,
                Err(message) => rate.diagnostics.push(Diagnostic {
                    id: id.to_string(),
                    metric: metric.to_string(),
                    message,
                }),
            }
        }
        rate
    }
}

pub fn check_structure(record: &ModelOutputRecord) -> Result<(), String> {
    parse(&record.document()).map(|_| ()).map_err(|e| e.to_string())
}

pub fn eval_structural_validity(outputs: &[ModelOutputRecord]) -> Rate {
    Rate::tally(
        "structural_validity",
        outputs.iter().map(|r| (r.id.as_str(), check_structure(r))),
    )
}

/// Passes when the last special token (trailing PADs aside) is STOP at the
/// very end of the text, or EOS directly preceded by STOP.
pub fn check_stop_token(text: &str) -> Result<(), String> {
    let mut specials: Vec<(usize, Special)> = Vec::new();
    let mut from = 0;
    while let Some((i, t)) = shaftlab_data::harmony::find_special(&text[from..]) {
        specials.push((from + i, t));
        from += i + t.text().len();
    }
    let mut end = text.len();
    while let Some(&(i, Special::Pad)) = specials.last() {
        if i + Special::Pad.text().len() != end {
            break;
        }
        specials.pop();
        end = i;
    }
    match specials.as_slice() {
        [.., (s, Special::Stop), (e, Special::Eos)] if s + Special::Stop.text().len() == *e => Ok(()),
        [.., (s, Special::Stop)] if s + Special::Stop.text().len() == end => Ok(()),
        [.., (_, last)] => Err(format!("final special token is {}, not STOP before EOS", last.name())),
        [] => Err("no special tokens".into()),
    }
}

pub fn eval_stop_token(outputs: &[ModelOutputRecord]) -> Rate {
    Rate::tally(
        "correct_stop_token",
        outputs.iter().map(|r| (r.id.as_str(), check_stop_token(&r.document()))),
    )
}
