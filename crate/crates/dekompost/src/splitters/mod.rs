//! The three splitter families behind one result type: frequency
//! geometric-mean splitting with morphological transformations, n-gram
//! positional scoring, and neural argmax decoding.

mod frequency;
mod neural;
mod ngram;

pub use frequency::{
    enumerate_candidates, frequency_split, frequency_split_with_candidate, SplitCandidate,
    Transform, TransformTable,
};
pub use neural::neural_split;
pub use ngram::{collect_ngram_stats, ngram_position_score, ngram_split, NgramStats};

use thiserror::Error;

use crate::chars::{char_count, char_slice};

/// Minimum character length of either part for the frequency and n-gram
/// splitters; rules out degenerate one- and two-letter parts.
pub const MIN_PART_LEN: usize = 3;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("boundary index {index} out of range for word of {len} characters")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Neural(#[from] crate::neural::NeuralError),
    #[error(transparent)]
    Tokenize(#[from] crate::tokenize::TokenizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMethod {
    Frequency,
    Ngram,
    Neural,
    None,
}

impl SplitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitMethod::Frequency => "frequency",
            SplitMethod::Ngram => "ngram",
            SplitMethod::Neural => "neural",
            SplitMethod::None => "none",
        }
    }
}

/// A surface-exact decomposition: `left + right == input`, or
/// `method == None` with the whole word in `left`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub left: String,
    pub right: String,
    pub score: f64,
    pub method: SplitMethod,
}

impl SplitResult {
    pub fn no_split(word: &str, score: f64) -> SplitResult {
        SplitResult {
            left: word.to_string(),
            right: String::new(),
            score,
            method: SplitMethod::None,
        }
    }

    pub(crate) fn at_boundary(
        word: &str,
        boundary: usize,
        score: f64,
        method: SplitMethod,
    ) -> SplitResult {
        let n = char_count(word);
        SplitResult {
            left: char_slice(word, 0, boundary).to_string(),
            right: char_slice(word, boundary, n).to_string(),
            score,
            method,
        }
    }

    /// Character offset of the split, if any.
    pub fn boundary(&self) -> Option<usize> {
        match self.method {
            SplitMethod::None => None,
            _ => Some(char_count(&self.left)),
        }
    }
}

/// Argmax over split positions, excluding the position after the last
/// token. Ties go to the leftmost position; a single-token input has no
/// legal position.
pub fn argmax_split_position(probs: &[f64]) -> Option<usize> {
    if probs.len() < 2 {
        return None;
    }
    let mut best = 0usize;
    for (i, &p) in probs[..probs.len() - 1].iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    Some(best)
}
