//! Dataset side of shaftlab: the structured response format, the byte-level
//! BPE tokenizer and the dataset factory with its curriculum scheduler.

pub mod factorium;
pub mod harmony;
pub mod numfmt;
pub mod tokenizer;
