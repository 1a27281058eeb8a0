//! Positional n-gram statistics and the position-scoring splitter.
//!
//! For n in {2,3,4}, every lexicon word contributes its prefix n-gram as a
//! "begin" occurrence, its suffix n-gram as an "end" occurrence and interior
//! n-grams as "middle", weighted by word frequency. A word of length
//! exactly n counts as both begin and end. A boundary is scored by how
//! end-like the left part's suffix n-grams are and how begin-like the right
//! part's prefix n-grams are.

use std::collections::HashMap;

use crate::chars::{char_count, char_slice};
use crate::corpus::Lexicon;

use super::{SplitError, SplitMethod, SplitResult, MIN_PART_LEN};

const NGRAM_SIZES: [usize; 3] = [2, 3, 4];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PositionCounts {
    pub begin: u64,
    pub middle: u64,
    pub end: u64,
}

impl PositionCounts {
    fn total(&self) -> u64 {
        self.begin + self.middle + self.end
    }
}

/// Begin/middle/end counts per n-gram, collected over a lexicon.
#[derive(Debug, Clone, Default)]
pub struct NgramStats {
    counts: HashMap<String, PositionCounts>,
}

impl NgramStats {
    pub fn get(&self, gram: &str) -> PositionCounts {
        self.counts.get(gram).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn beginness(&self, gram: &str) -> f64 {
        let c = self.get(gram);
        let total = c.total();
        if total == 0 {
            0.0
        } else {
            c.begin as f64 / total as f64
        }
    }

    fn endness(&self, gram: &str) -> f64 {
        let c = self.get(gram);
        let total = c.total();
        if total == 0 {
            0.0
        } else {
            c.end as f64 / total as f64
        }
    }
}

/// Frequency-weighted positional counts over all lexicon words.
pub fn collect_ngram_stats(lexicon: &Lexicon) -> NgramStats {
    let mut stats = NgramStats::default();
    for (word, freq) in lexicon.iter() {
        let len = char_count(word);
        for n in NGRAM_SIZES {
            if len < n {
                continue;
            }
            for start in 0..=(len - n) {
                let gram = char_slice(word, start, start + n);
                let slot = stats.counts.entry(gram.to_string()).or_default();
                // A gram can be both the prefix and the suffix (len == n);
                // it then counts once in each role.
                let mut interior = true;
                if start == 0 {
                    slot.begin += freq;
                    interior = false;
                }
                if start + n == len {
                    slot.end += freq;
                    interior = false;
                }
                if interior {
                    slot.middle += freq;
                }
            }
        }
    }
    stats
}

/// Score component for a single n: how end-like the left suffix is plus how
/// begin-like the right prefix is, halved. Unseen or too-short grams
/// contribute 0.
pub(crate) fn position_score_for_n(
    word: &str,
    boundary: usize,
    stats: &NgramStats,
    n: usize,
) -> f64 {
    let len = char_count(word);
    let endness = if boundary >= n {
        stats.endness(char_slice(word, boundary - n, boundary))
    } else {
        0.0
    };
    let beginness = if len - boundary >= n {
        stats.beginness(char_slice(word, boundary, boundary + n))
    } else {
        0.0
    };
    0.5 * (endness + beginness)
}

/// Splitting score at a boundary: the per-n components averaged over
/// n in {2,3,4}. Always in [0, 1].
pub fn ngram_position_score(
    word: &str,
    boundary: usize,
    stats: &NgramStats,
) -> Result<f64, SplitError> {
    let len = char_count(word);
    if boundary < 1 || boundary >= len {
        return Err(SplitError::IndexOutOfRange {
            index: boundary,
            len,
        });
    }
    let sum: f64 = NGRAM_SIZES
        .iter()
        .map(|&n| position_score_for_n(word, boundary, stats, n))
        .sum();
    Ok(sum / NGRAM_SIZES.len() as f64)
}

/// Split at the highest-scoring boundary among positions leaving both parts
/// at least [`MIN_PART_LEN`] characters; ties go leftmost. Words shorter
/// than two minimum parts are returned unsplit.
pub fn ngram_split(word: &str, stats: &NgramStats) -> SplitResult {
    let len = char_count(word);
    if len < 2 * MIN_PART_LEN {
        return SplitResult::no_split(word, 0.0);
    }
    let mut best: Option<(usize, f64)> = None;
    for boundary in MIN_PART_LEN..=(len - MIN_PART_LEN) {
        let score = ngram_position_score(word, boundary, stats).expect("boundary in range");
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((boundary, score)),
        }
    }
    match best {
        Some((boundary, score)) => {
            SplitResult::at_boundary(word, boundary, score, SplitMethod::Ngram)
        }
        None => SplitResult::no_split(word, 0.0),
    }
}
