//! Seeded corruptions of valid documents, each paired with the diagnostic
//! the checks are expected to raise for it.

use rand::Rng;
use serde::{Deserialize, Serialize};
use shaftlab_core::SolverKind;
use shaftlab_data::factorium::rng::{substream, tag};
use shaftlab_data::harmony::{extract_quantities, parse, Channel, ExtractError, ParseError, Special};
use shaftlab_data::numfmt::{fmt6, parse_num};

use crate::grounding::check_grounding_text;
use crate::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionClass {
    MissingChannel,
    ReorderedChannels,
    StrippedStop,
    StrayBytes,
    DuplicatedChannel,
    Truncation,
    PerturbedNumeral,
    TokenInjection,
    EmptyPrompt,
    WrongUnit,
}

impl CorruptionClass {
    pub const ALL: [CorruptionClass; 10] = [
        CorruptionClass::MissingChannel,
        CorruptionClass::ReorderedChannels,
        CorruptionClass::StrippedStop,
        CorruptionClass::StrayBytes,
        CorruptionClass::DuplicatedChannel,
        CorruptionClass::Truncation,
        CorruptionClass::PerturbedNumeral,
        CorruptionClass::TokenInjection,
        CorruptionClass::EmptyPrompt,
        CorruptionClass::WrongUnit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionClass::MissingChannel => "missing_channel",
            CorruptionClass::ReorderedChannels => "reordered_channels",
            CorruptionClass::StrippedStop => "stripped_stop",
            CorruptionClass::StrayBytes => "stray_bytes",
            CorruptionClass::DuplicatedChannel => "duplicated_channel",
            CorruptionClass::Truncation => "truncation",
            CorruptionClass::PerturbedNumeral => "perturbed_numeral",
            CorruptionClass::TokenInjection => "token_injection",
            CorruptionClass::EmptyPrompt => "empty_prompt",
            CorruptionClass::WrongUnit => "wrong_unit",
        }
    }
}

/// What the checks should report for a corrupted document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Expectation {
    MissingChannel { channel: Channel },
    OrderViolation { expected: Channel, found: Channel },
    DuplicateChannel { channel: Channel },
    /// `found` is a prefix of the parser's description of what it saw.
    Malformed { expected: String, found: String },
    UnexpectedEnd { expected: String },
    EmptyRegion { region: String },
    UnitMismatch { label: String },
    Ungrounded { label: String },
}

/// First failing stage when a document is run through parse, extraction
/// and grounding in turn.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnosis {
    Accepted,
    Parse(ParseError),
    Extract(ExtractError),
    Ungrounded(String),
}

impl std::fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnosis::Accepted => f.write_str("accepted"),
            Diagnosis::Parse(e) => write!(f, "parse error: {e}"),
            Diagnosis::Extract(e) => write!(f, "extraction error: {e}"),
            Diagnosis::Ungrounded(m) => write!(f, "ungrounded: {m}"),
        }
    }
}

pub fn diagnose(text: &str, rel_tol: f64) -> Diagnosis {
    let doc = match parse(text) {
        Ok(d) => d,
        Err(e) => return Diagnosis::Parse(e),
    };
    if let Err(e) = extract_quantities(&doc) {
        return Diagnosis::Extract(e);
    }
    match check_grounding_text(text, rel_tol, SolverKind::ClosedForm) {
        Ok(()) => Diagnosis::Accepted,
        Err(m) => Diagnosis::Ungrounded(m),
    }
}

impl Expectation {
    pub fn matches(&self, d: &Diagnosis) -> bool {
        use Expectation as X;
        match (self, d) {
            (X::MissingChannel { channel }, Diagnosis::Parse(ParseError::MissingChannel { channel: c, .. })) => {
                c == channel
            }
            (
                X::OrderViolation { expected, found },
                Diagnosis::Parse(ParseError::OrderViolation {
                    expected: e, found: f, ..
                }),
            ) => e == expected && f == found,
            (X::DuplicateChannel { channel }, Diagnosis::Parse(ParseError::DuplicateChannel { channel: c, .. })) => {
                c == channel
            }
            (
                X::Malformed { expected, found },
                Diagnosis::Parse(ParseError::Malformed {
                    expected: e, found: f, ..
                }),
            ) => e == expected && f.starts_with(found.as_str()),
            (X::UnexpectedEnd { expected }, Diagnosis::Parse(ParseError::UnexpectedEnd { expected: e, .. })) => {
                e == expected
            }
            (X::EmptyRegion { region }, Diagnosis::Parse(ParseError::EmptyRegion { region: r, .. })) => r == region,
            (X::UnitMismatch { label }, Diagnosis::Extract(ExtractError::BadLines(lines))) => lines
                .iter()
                .any(|l| l.reason.starts_with(&format!("unit mismatch for {label}:"))),
            (X::Ungrounded { label }, Diagnosis::Ungrounded(m)) => m.starts_with(&format!("{label}:")),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corrupted {
    pub class: CorruptionClass,
    pub text: String,
    pub expected: Expectation,
}

/// Byte ranges of the regions in a valid document.
struct Layout {
    prompt: (usize, usize),
    /// Per channel: block start (opening token), body start, body end
    /// (start of CH_END), block end (after CH_END).
    blocks: Vec<(usize, usize, usize, usize)>,
    stop: usize,
}

fn layout(text: &str) -> Result<Layout, EvalError> {
    parse(text).map_err(|e| EvalError::Input(format!("corruption source is not a valid document: {e}")))?;
    let find = |needle: &str, from: usize| text[from..].find(needle).map(|i| i + from).expect("valid document");
    let p_start = find(Special::PromptStart.text(), 0) + Special::PromptStart.text().len();
    let p_end = find(Special::PromptEnd.text(), p_start);
    let mut blocks = Vec::new();
    let mut at = p_end;
    for c in Channel::ALL {
        let open = find(c.token().text(), at);
        let body = open + c.token().text().len();
        let close = find(Special::ChEnd.text(), body);
        at = close + Special::ChEnd.text().len();
        blocks.push((open, body, close, at));
    }
    Ok(Layout {
        prompt: (p_start, p_end),
        blocks,
        stop: find(Special::Stop.text(), at),
    })
}

fn splice(text: &str, start: usize, end: usize, with: &str) -> String {
    format!("{}{}{}", &text[..start], with, &text[end..])
}

/// Result-channel lines as (absolute start, line text).
fn result_lines(text: &str, l: &Layout) -> Vec<(usize, String)> {
    let (_, body, close, _) = l.blocks[Channel::Result.index()];
    let mut out = Vec::new();
    let mut pos = body;
    for line in text[body..close].split_inclusive('\n') {
        let trimmed = line.trim_end_matches('\n');
        if trimmed.contains(" = ") {
            out.push((pos, trimmed.to_string()));
        }
        pos += line.len();
    }
    out
}

fn unit_swap(unit: &str) -> Option<(&'static str, f64)> {
    Some(match unit {
        "m" => ("mm", 1e3),
        "Pa" => ("MPa", 1e-6),
        "N" => ("kN", 1e-3),
        "N*m" => ("kN*m", 1e-3),
        "rad" => ("deg", 180.0 / std::f64::consts::PI),
        _ => return None,
    })
}

/// Applies `class` to a valid rendered document. The choice of channel,
/// line or position is drawn from `rng`.
pub fn corrupt<R: Rng>(text: &str, class: CorruptionClass, rng: &mut R) -> Result<Corrupted, EvalError> {
    use CorruptionClass as C;
    let l = layout(text)?;
    let channel = |i: usize| Channel::ALL[i];
    let n = Channel::ALL.len();
    let (text, expected) = match class {
        C::MissingChannel => {
            let i = rng.random_range(0..n);
            let (open, _, _, end) = l.blocks[i];
            (splice(text, open, end, ""), Expectation::MissingChannel { channel: channel(i) })
        }
        C::ReorderedChannels => {
            let i = rng.random_range(0..n - 1);
            let (a0, _, _, a1) = l.blocks[i];
            let (b0, _, _, b1) = l.blocks[i + 1];
            let swapped = format!("{}{}", &text[b0..b1], &text[a0..a1]);
            (
                splice(text, a0, b1, &swapped),
                Expectation::OrderViolation {
                    expected: channel(i),
                    found: channel(i + 1),
                },
            )
        }
        C::StrippedStop => (
            splice(text, l.stop, l.stop + Special::Stop.text().len(), ""),
            Expectation::Malformed {
                expected: Special::Stop.name().into(),
                found: Special::Eos.name().into(),
            },
        ),
        C::StrayBytes => {
            // Between two blocks, or between the last block and STOP.
            let gap = rng.random_range(0..n);
            let at = l.blocks[gap].3;
            let junk: String = (0..rng.random_range(1..8))
                .map(|_| rng.random_range(b'a'..=b'z') as char)
                .collect();
            let expected = if gap + 1 < n {
                channel(gap + 1).token().name()
            } else {
                Special::Stop.name()
            };
            (
                splice(text, at, at, &junk),
                Expectation::Malformed {
                    expected: expected.into(),
                    found: "text".into(),
                },
            )
        }
        C::DuplicatedChannel => {
            let i = rng.random_range(0..n);
            let (open, _, _, end) = l.blocks[i];
            let block = text[open..end].to_string();
            (splice(text, end, end, &block), Expectation::DuplicateChannel { channel: channel(i) })
        }
        C::Truncation => {
            let i = rng.random_range(0..n);
            let (_, body, close, _) = l.blocks[i];
            let first = body + text[body..close].find(|c: char| !c.is_whitespace()).expect("non-blank body");
            let mut cut = rng.random_range(first + 1..close);
            while !text.is_char_boundary(cut) {
                cut += 1;
            }
            (
                text[..cut].to_string(),
                Expectation::UnexpectedEnd {
                    expected: Special::ChEnd.name().into(),
                },
            )
        }
        C::PerturbedNumeral => {
            let lines = result_lines(text, &l);
            let (at, line) = &lines[rng.random_range(0..lines.len())];
            let (label, rest) = line.split_once(" = ").expect("result line");
            let mut parts = rest.splitn(2, ' ');
            let value = parse_num(parts.next().unwrap_or_default()).expect("numeric result");
            let bumped = if value == 0.0 { 1e-3 } else { value * 1.01 };
            let new = match parts.next() {
                Some(unit) => format!("{label} = {} {unit}", fmt6(bumped)),
                None => format!("{label} = {}", fmt6(bumped)),
            };
            (
                splice(text, *at, at + line.len(), &new),
                Expectation::Ungrounded { label: label.into() },
            )
        }
        C::TokenInjection => {
            let (_, body, close, _) = l.blocks[Channel::Reasoning.index()];
            // Line starts past the first line, so the text before the token
            // is never blank.
            let starts: Vec<usize> = text[body..close]
                .match_indices('\n')
                .map(|(i, _)| body + i + 1)
                .filter(|&p| p > body + 1 && p < close)
                .collect();
            let at = starts[rng.random_range(0..starts.len())];
            (
                splice(text, at, at, Special::ChCode.text()),
                Expectation::Malformed {
                    expected: Special::ChEnd.name().into(),
                    found: Special::ChCode.name().into(),
                },
            )
        }
        C::EmptyPrompt => (
            splice(text, l.prompt.0, l.prompt.1, ""),
            Expectation::EmptyRegion { region: "prompt".into() },
        ),
        C::WrongUnit => {
            let lines: Vec<(usize, String)> = result_lines(text, &l)
                .into_iter()
                .filter(|(_, s)| s.rsplit(' ').next().and_then(unit_swap).is_some() && s.split(' ').count() == 4)
                .collect();
            let (at, line) = &lines[rng.random_range(0..lines.len())];
            let (label, rest) = line.split_once(" = ").expect("result line");
            let (number, unit) = rest.split_once(' ').expect("unit present");
            let (new_unit, k) = unit_swap(unit).expect("filtered");
            let value = parse_num(number).expect("numeric result");
            let new = format!("{label} = {} {new_unit}", fmt6(value * k));
            (
                splice(text, *at, at + line.len(), &new),
                Expectation::UnitMismatch { label: label.into() },
            )
        }
    };
    Ok(Corrupted { class, text, expected })
}

/// Outcome of one corruption in a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionOutcome {
    pub source_id: String,
    pub class: CorruptionClass,
    pub expected: Expectation,
    pub diagnosis: String,
    pub rejected: bool,
    pub correct: bool,
}

/// Applies every class to each `(id, text)` source, with one substream per
/// (class, source) pair.
pub fn corruption_suite(
    sources: &[(&str, &str)],
    seed: u64,
    rel_tol: f64,
) -> Result<Vec<CorruptionOutcome>, EvalError> {
    let mut out = Vec::with_capacity(sources.len() * CorruptionClass::ALL.len());
    for (ci, class) in CorruptionClass::ALL.into_iter().enumerate() {
        for (si, (id, text)) in sources.iter().enumerate() {
            let mut rng = substream(seed, &[tag::CORRUPTION, ci as u64, si as u64]);
            let c = corrupt(text, class, &mut rng)?;
            let d = diagnose(&c.text, rel_tol);
            out.push(CorruptionOutcome {
                source_id: id.to_string(),
                class,
                rejected: d != Diagnosis::Accepted,
                correct: c.expected.matches(&d),
                diagnosis: d.to_string(),
                expected: c.expected,
            });
        }
    }
    Ok(out)
}
