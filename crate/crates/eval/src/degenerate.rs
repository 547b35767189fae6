//! Repetition-loop detection on token id sequences.

use serde::{Deserialize, Serialize};

pub const DEFAULT_GRAM: usize = 8;
pub const DEFAULT_REPEATS: usize = 4;

/// Where a loop was found: `repeats` back-to-back copies of the `gram`
/// tokens starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSpan {
    pub start: usize,
    pub gram: usize,
    pub repeats: usize,
}

impl LoopSpan {
    pub fn len(&self) -> usize {
        self.gram * self.repeats
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The earliest-completing stretch where some `n`-gram appears at least `r`
/// times back-to-back. Linear in the sequence length.
pub fn detect_degenerate(ids: &[u32], n: usize, r: usize) -> Option<LoopSpan> {
    if n == 0 || r < 2 || ids.len() < n * r {
        return None;
    }
    // ids[j] == ids[j + n] for a stretch of (r - 1) * n positions means the
    // window at the stretch start repeats r times.
    let need = (r - 1) * n;
    let mut run = 0;
    for j in 0..ids.len() - n {
        if ids[j] == ids[j + n] {
            run += 1;
            if run == need {
                let start = j + 1 - need;
                let mut repeats = r;
                while start + (repeats + 1) * n <= ids.len()
                    && ids[start..start + n] == ids[start + repeats * n..start + (repeats + 1) * n]
                {
                    repeats += 1;
                }
                return Some(LoopSpan { start, gram: n, repeats });
            }
        } else {
            run = 0;
        }
    }
    None
}
