//! Strict single-pass parser. The first violation wins.

use thiserror::Error;

use super::{Channel, HarmonyDoc, Special};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("byte {offset}: expected {expected}, found {found}")]
    Malformed {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("byte {offset}: text ends where {expected} was expected")]
    UnexpectedEnd { offset: usize, expected: String },
    #[error("byte {offset}: channel {} appears a second time", channel_token(*.channel))]
    DuplicateChannel { offset: usize, channel: Channel },
    #[error("byte {offset}: found {} where {} was expected", channel_token(*.found), channel_token(*.expected))]
    OrderViolation {
        offset: usize,
        expected: Channel,
        found: Channel,
    },
    #[error("byte {offset}: channel {} is missing", channel_token(*.channel))]
    MissingChannel { offset: usize, channel: Channel },
    #[error("byte {offset}: {region} is empty")]
    EmptyRegion { offset: usize, region: String },
}

fn channel_token(c: Channel) -> &'static str {
    c.token().name()
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Malformed { offset, .. }
            | ParseError::UnexpectedEnd { offset, .. }
            | ParseError::DuplicateChannel { offset, .. }
            | ParseError::OrderViolation { offset, .. }
            | ParseError::MissingChannel { offset, .. }
            | ParseError::EmptyRegion { offset, .. } => *offset,
        }
    }

    /// Short machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Malformed { .. } => "malformed",
            ParseError::UnexpectedEnd { .. } => "unexpected_end",
            ParseError::DuplicateChannel { .. } => "duplicate_channel",
            ParseError::OrderViolation { .. } => "order_violation",
            ParseError::MissingChannel { .. } => "missing_channel",
            ParseError::EmptyRegion { .. } => "empty_region",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece<'a> {
    Token(Special),
    Text(&'a str),
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<Piece<'a>> {
        let rest = &self.src[self.pos..];
        if rest.is_empty() {
            return None;
        }
        if let Some(t) = Special::at_start(rest) {
            return Some(Piece::Token(t));
        }
        let end = super::find_special(rest).map_or(rest.len(), |(i, _)| i);
        Some(Piece::Text(&rest[..end]))
    }

    fn advance(&mut self, piece: Piece<'_>) {
        self.pos += match piece {
            Piece::Token(t) => t.text().len(),
            Piece::Text(s) => s.len(),
        };
    }

    fn expect(&mut self, want: Special) -> Result<(), ParseError> {
        match self.peek() {
            Some(Piece::Token(t)) if t == want => {
                self.advance(Piece::Token(t));
                Ok(())
            }
            Some(other) => Err(ParseError::Malformed {
                offset: self.pos,
                expected: want.name().into(),
                found: describe(other),
            }),
            None => Err(ParseError::UnexpectedEnd {
                offset: self.pos,
                expected: want.name().into(),
            }),
        }
    }

    /// A non-blank text region followed by `close`.
    fn region(&mut self, name: &str, close: Special) -> Result<&'a str, ParseError> {
        let start = self.pos;
        let body = match self.peek() {
            Some(Piece::Text(s)) => {
                self.advance(Piece::Text(s));
                s
            }
            Some(Piece::Token(_)) => "",
            None => {
                return Err(ParseError::UnexpectedEnd {
                    offset: self.pos,
                    expected: format!("{name} text"),
                })
            }
        };
        if body.trim().is_empty() {
            return Err(ParseError::EmptyRegion {
                offset: start,
                region: name.into(),
            });
        }
        self.expect(close)?;
        Ok(body)
    }
}

fn describe(piece: Piece<'_>) -> String {
    match piece {
        Piece::Token(t) => t.name().into(),
        Piece::Text(s) => {
            let head: String = s.chars().take(16).collect();
            format!("text {head:?}")
        }
    }
}

/// Parses a complete document. Trailing `PAD` tokens after `EOS` are allowed;
/// anything else outside the delimited regions is an error.
pub fn parse(text: &str) -> Result<HarmonyDoc, ParseError> {
    let mut cur = Cursor { src: text, pos: 0 };
    cur.expect(Special::Bos)?;
    cur.expect(Special::PromptStart)?;
    let prompt = cur.region("prompt", Special::PromptEnd)?.to_string();

    let mut channels: Vec<(Channel, String)> = Vec::with_capacity(Channel::ALL.len());
    for expected in Channel::ALL {
        let at = cur.pos;
        match cur.peek() {
            Some(Piece::Token(t)) if t == expected.token() => cur.advance(Piece::Token(t)),
            Some(Piece::Token(t)) => {
                if let Some(found) = t.channel() {
                    if channels.iter().any(|(c, _)| *c == found) {
                        return Err(ParseError::DuplicateChannel { offset: at, channel: found });
                    }
                }
                return Err(misplaced(text, at, expected, t));
            }
            Some(other) => {
                return Err(ParseError::Malformed {
                    offset: at,
                    expected: expected.token().name().into(),
                    found: describe(other),
                })
            }
            None => {
                return Err(ParseError::UnexpectedEnd {
                    offset: at,
                    expected: expected.token().name().into(),
                })
            }
        }
        let body = cur.region(&format!("{} body", expected.token().name()), Special::ChEnd)?;
        channels.push((expected, body.to_string()));
    }

    let at = cur.pos;
    if let Some(Piece::Token(t)) = cur.peek() {
        if let Some(c) = t.channel() {
            return Err(ParseError::DuplicateChannel { offset: at, channel: c });
        }
    }
    cur.expect(Special::Stop)?;
    cur.expect(Special::Eos)?;
    while let Some(piece) = cur.peek() {
        match piece {
            Piece::Token(Special::Pad) => cur.advance(piece),
            other => {
                return Err(ParseError::Malformed {
                    offset: cur.pos,
                    expected: "PAD or end of text".into(),
                    found: describe(other),
                })
            }
        }
    }
    Ok(HarmonyDoc {
        prompt,
        channels,
        stopped: true,
    })
}

/// `found` stands where channel `expected` should open. If `expected` opens
/// somewhere later the channels are out of order, otherwise it is missing.
fn misplaced(text: &str, at: usize, expected: Channel, found: Special) -> ParseError {
    let later = text[at..].contains(expected.token().text());
    match (later, found.channel()) {
        (true, Some(found)) => ParseError::OrderViolation {
            offset: at,
            expected,
            found,
        },
        (false, _) => ParseError::MissingChannel { offset: at, channel: expected },
        (true, None) => ParseError::Malformed {
            offset: at,
            expected: expected.token().name().into(),
            found: found.name().into(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmony::render_doc;

    fn sample() -> String {
        let doc = HarmonyDoc {
            prompt: "Shaft problem.".into(),
            channels: Channel::ALL
                .iter()
                .map(|c| (*c, format!("\nbody of {c:?}\n")))
                .collect(),
            stopped: true,
        };
        render_doc(&doc).unwrap()
    }

    #[test]
    fn rendered_text_parses_back() {
        let text = sample();
        let doc = parse(&text).unwrap();
        assert_eq!(render_doc(&doc).unwrap(), text);
        assert!(parse(&format!("{text}<|pad|><|pad|>")).is_ok());
    }

    #[test]
    fn removed_channel_is_named() {
        let text = sample();
        let start = text.find("<|verification|>").unwrap();
        let end = text[start..].find("<|end|>").unwrap() + start + "<|end|>".len();
        let cut = format!("{}{}", &text[..start], &text[end..]);
        assert_eq!(
            parse(&cut),
            Err(ParseError::MissingChannel {
                offset: start,
                channel: Channel::Verification
            })
        );
        assert!(parse(&cut).unwrap_err().to_string().contains("CH_VERIFICATION"));
    }

    #[test]
    fn swapped_channels_are_an_order_violation() {
        let text = sample()
            .replace("<|analysis|>\nbody of Analysis\n<|end|>", "@")
            .replace("<|reasoning|>\nbody of Reasoning\n<|end|>", "<|analysis|>\nbody of Analysis\n<|end|>")
            .replace('@', "<|reasoning|>\nbody of Reasoning\n<|end|>");
        let err = parse(&text).unwrap_err();
        assert!(matches!(
            err,
            ParseError::OrderViolation {
                expected: Channel::Analysis,
                found: Channel::Reasoning,
                ..
            }
        ));
    }

    #[test]
    fn stray_bytes_and_missing_stop() {
        let text = sample();
        let stray = text.replacen("<|end|><|reasoning|>", "<|end|>x<|reasoning|>", 1);
        assert_eq!(parse(&stray).unwrap_err().kind(), "malformed");
        let no_stop = text.replace("<|stop|>", "");
        match parse(&no_stop).unwrap_err() {
            ParseError::Malformed { expected, found, .. } => {
                assert_eq!(expected, "STOP");
                assert_eq!(found, "EOS");
            }
            e => panic!("{e}"),
        }
        assert_eq!(parse(&format!(" {text}")).unwrap_err().offset(), 0);
        assert_eq!(parse(&format!("{text}\n")).unwrap_err().kind(), "malformed");
    }

    #[test]
    fn truncation_and_empty_regions() {
        let text = sample();
        for cut in [0, 5, text.len() / 2, text.len() - 1] {
            let mut end = cut;
            while !text.is_char_boundary(end) {
                end -= 1;
            }
            assert!(parse(&text[..end]).is_err());
        }
        assert!(matches!(parse(""), Err(ParseError::UnexpectedEnd { offset: 0, .. })));
        let empty = text.replace("Shaft problem.", "");
        assert!(matches!(parse(&empty), Err(ParseError::EmptyRegion { .. })));
    }

    #[test]
    fn duplicated_channel() {
        let text = sample();
        let block = "<|reasoning|>\nbody of Reasoning\n<|end|>";
        let dup = text.replacen(block, &format!("{block}{block}"), 1);
        assert!(matches!(
            parse(&dup),
            Err(ParseError::DuplicateChannel {
                channel: Channel::Reasoning,
                ..
            })
        ));
    }

    #[test]
    fn injected_token_breaks_the_body() {
        let text = sample().replace("body of Reasoning", "body <|code|> of Reasoning");
        match parse(&text).unwrap_err() {
            ParseError::Malformed { expected, found, .. } => {
                assert_eq!(expected, "CH_END");
                assert_eq!(found, "CH_CODE");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn arbitrary_input_never_panics() {
        use proptest::prelude::*;
        proptest!(|(s in ".{0,200}")| {
            let _ = parse(&s);
        });
        proptest!(|(cut in 0usize..400)| {
            let text = sample();
            let mut end = cut.min(text.len());
            while !text.is_char_boundary(end) { end -= 1; }
            let r = parse(&text[..end]);
            prop_assert_eq!(r.is_ok(), end == text.len());
        });
    }
}
