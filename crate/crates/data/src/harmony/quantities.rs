//! Labelled numbers of the result channel, one per line:
//! `label = value unit`, with the unit left out for dimensionless labels.

use serde::{Deserialize, Serialize};
use shaftlab_core::{registered_unit, Quantity};
use thiserror::Error;

use super::{Channel, HarmonyDoc};
use crate::numfmt::{fmt6, parse_num};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedQuantity {
    pub label: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineProblem {
    /// 1-based line within the result body.
    pub line: usize,
    pub text: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("document has no result channel")]
    NoResultChannel,
    #[error("{} bad result line(s): {}", .0.len(), summarize(.0))]
    BadLines(Vec<LineProblem>),
}

fn summarize(problems: &[LineProblem]) -> String {
    problems
        .iter()
        .map(|p| format!("line {} {:?}: {}", p.line, p.text, p.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn format_quantity(q: &Quantity) -> String {
    if q.unit.is_empty() {
        format!("{} = {}", q.label, fmt6(q.value))
    } else {
        format!("{} = {} {}", q.label, fmt6(q.value), q.unit)
    }
}

fn parse_line(line: &str) -> Result<ExtractedQuantity, String> {
    let (label, rest) = line
        .split_once(" = ")
        .ok_or_else(|| "expected `label = value [unit]`".to_string())?;
    let label = label.trim();
    let unit = registered_unit(label).ok_or_else(|| format!("unknown label {label:?}"))?;
    let mut parts = rest.split_whitespace();
    let number = parts.next().ok_or_else(|| "missing value".to_string())?;
    let found_unit = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return Err("trailing text after unit".into());
    }
    let value = parse_num(number).ok_or_else(|| format!("unparseable number {number:?}"))?;
    if found_unit != unit {
        let want = if unit.is_empty() { "no unit" } else { unit };
        let got = if found_unit.is_empty() { "none" } else { found_unit };
        return Err(format!("unit mismatch for {label}: expected {want}, found {got}"));
    }
    Ok(ExtractedQuantity {
        label: label.to_string(),
        value,
        unit: unit.to_string(),
    })
}

/// Every quantity in the result channel, in order. All offending lines are
/// collected before failing.
pub fn extract_quantities(doc: &HarmonyDoc) -> Result<Vec<ExtractedQuantity>, ExtractError> {
    let body = doc.channel(Channel::Result).ok_or(ExtractError::NoResultChannel)?;
    let mut out: Vec<ExtractedQuantity> = Vec::new();
    let mut problems = Vec::new();
    for (i, raw) in body.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let problem = match parse_line(line) {
            Ok(q) if out.iter().any(|o| o.label == q.label) => format!("duplicate label {}", q.label),
            Ok(q) => {
                out.push(q);
                continue;
            }
            Err(reason) => reason,
        };
        problems.push(LineProblem {
            line: i + 1,
            text: line.to_string(),
            reason: problem,
        });
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(ExtractError::BadLines(problems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(result: &str) -> HarmonyDoc {
        HarmonyDoc {
            prompt: "p".into(),
            channels: Channel::ALL
                .iter()
                .map(|c| (*c, if *c == Channel::Result { result.to_string() } else { "x".into() }))
                .collect(),
            stopped: true,
        }
    }

    #[test]
    fn dimensionless_line() {
        let q = extract_quantities(&doc("\nn_fatigue = 1.71400\n")).unwrap();
        assert_eq!(
            q,
            vec![ExtractedQuantity {
                label: "n_fatigue".into(),
                value: 1.714,
                unit: String::new()
            }]
        );
    }

    #[test]
    fn formatted_quantities_parse_back() {
        let q = Quantity {
            label: "w_max".into(),
            value: 3.4136e-4,
            unit: "m".into(),
        };
        let line = format_quantity(&q);
        assert_eq!(line, "w_max = 3.41360e-4 m");
        let got = extract_quantities(&doc(&line)).unwrap();
        assert_eq!(got[0].value, 3.4136e-4);
    }

    #[test]
    fn all_bad_lines_are_listed() {
        let body = "\nw_max = 1.0 mm\nn_yield = abc\nfoo = 1\nSe = 1.00000e8 Pa\nSe = 2.00000e8 Pa\nn_yield = 2 Pa\n";
        let ExtractError::BadLines(p) = extract_quantities(&doc(body)).unwrap_err() else {
            panic!()
        };
        let lines: Vec<usize> = p.iter().map(|p| p.line).collect();
        assert_eq!(lines, vec![2, 3, 4, 6, 7]);
        assert!(p[0].reason.contains("expected m, found mm"));
        assert!(p[4].reason.contains("expected no unit"));
    }
}
