//! Splits plain text (no special tokens) into chunks that merges never cross.
//!
//! Same shape as the GPT-2 rule: a chunk is an optional single leading space
//! followed by a run of letters, a run of digits or a run of other visible
//! characters; whitespace runs stand alone, except that a final space before
//! a visible character is handed to the following chunk.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Letter,
    Digit,
    Other,
    Space,
}

fn class(c: char) -> Class {
    if c.is_whitespace() {
        Class::Space
    } else if c.is_alphabetic() {
        Class::Letter
    } else if c.is_numeric() {
        Class::Digit
    } else {
        Class::Other
    }
}

pub fn pretokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |k: usize| chars.get(k).map_or(text.len(), |&(i, _)| i);
    let mut k = 0;
    while k < chars.len() {
        let (start, c) = chars[k];
        if class(c) == Class::Space {
            let mut j = k;
            while j < chars.len() && class(chars[j].1) == Class::Space {
                j += 1;
            }
            if j == chars.len() {
                out.push(&text[start..]);
                break;
            }
            if j - k > 1 {
                out.push(&text[start..end_of(j - 1)]);
                k = j - 1;
            }
            if chars[k].1 != ' ' {
                out.push(&text[chars[k].0..end_of(k + 1)]);
                k += 1;
                continue;
            }
        }
        let start = chars[k].0;
        let mut j = k;
        if chars[j].1 == ' ' {
            j += 1;
        }
        let run = class(chars[j].1);
        while j < chars.len() && class(chars[j].1) == run {
            j += 1;
        }
        out.push(&text[start..end_of(j)]);
        k = j;
    }
    out
}
