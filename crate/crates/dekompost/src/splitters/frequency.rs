//! Frequency-based splitting: every boundary is scored by the geometric
//! mean of its parts' lexicon frequencies, with a table of morphological
//! transformations mapping left surface parts onto lemmas (linking
//! elements, plural endings, umlaut).

use std::fs;
use std::path::Path;

use crate::chars::{char_count, char_slice, fold_lower};
use crate::corpus::Lexicon;

use super::{SplitMethod, SplitResult, MIN_PART_LEN};

/// One left-part transformation. Applying it to a lowercased surface part
/// yields a lemma candidate; `None` means the transform does not apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    Strip(String),
    Add(String),
    Deumlaut,
}

impl Transform {
    pub fn apply(&self, left: &str) -> Option<String> {
        match self {
            Transform::Strip(suffix) => left
                .strip_suffix(suffix.as_str())
                .filter(|s| !s.is_empty())
                .map(String::from),
            Transform::Add(suffix) => Some(format!("{left}{suffix}")),
            Transform::Deumlaut => {
                let out = left
                    .replace("äu", "au")
                    .replace('ä', "a")
                    .replace('ö', "o")
                    .replace('ü', "u");
                if out == left {
                    None
                } else {
                    Some(out)
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Transform::Strip(s) => format!("strip:{s}"),
            Transform::Add(s) => format!("add:{s}"),
            Transform::Deumlaut => "deumlaut".to_string(),
        }
    }
}

/// Ordered transform list. The identity mapping is always tried first and
/// is not part of the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformTable {
    pub transforms: Vec<Transform>,
}

impl Default for TransformTable {
    /// The linking elements "-s"/"-es", the common plural and linking
    /// endings, an added "-e" for truncated lemmas, and de-umlauting.
    fn default() -> TransformTable {
        let strip = ["s", "es", "n", "en", "nen", "e", "er"]
            .into_iter()
            .map(|s| Transform::Strip(s.to_string()));
        let mut transforms: Vec<Transform> = strip.collect();
        transforms.push(Transform::Add("e".to_string()));
        transforms.push(Transform::Deumlaut);
        TransformTable { transforms }
    }
}

impl TransformTable {
    /// Parse a transform config file: one `strip:<suffix>`, `add:<suffix>`
    /// or `deumlaut` per line, `#` comments.
    pub fn from_file(path: &Path) -> Result<TransformTable, std::io::Error> {
        let text = fs::read_to_string(path)?;
        let mut transforms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let t = if line == "deumlaut" {
                Transform::Deumlaut
            } else if let Some(s) = line.strip_prefix("strip:") {
                Transform::Strip(s.to_string())
            } else if let Some(s) = line.strip_prefix("add:") {
                Transform::Add(s.to_string())
            } else {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("line {}: unknown transform: {line}", i + 1),
                ));
            };
            transforms.push(t);
        }
        Ok(TransformTable { transforms })
    }

    /// The suffixes of all strip transforms; used for linking-element
    /// analysis in error reports.
    pub fn strip_suffixes(&self) -> Vec<String> {
        self.transforms
            .iter()
            .filter_map(|t| match t {
                Transform::Strip(s) => Some(s.clone()),
                _ => None,
            })
            .collect()
    }
}

/// One scoring candidate: a boundary with a lexicon-backed reading of both
/// parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub boundary: usize,
    pub left_surface: String,
    pub right_surface: String,
    /// Lexicon form the left part mapped to (identity or transformed).
    pub left_lemma: String,
    pub left_freq: u64,
    pub right_freq: u64,
    /// `None` for the identity mapping.
    pub transform: Option<Transform>,
}

impl SplitCandidate {
    /// Geometric mean of the part frequencies.
    pub fn score(&self) -> f64 {
        ((self.left_freq as f64) * (self.right_freq as f64)).sqrt()
    }
}

/// Enumerate all boundaries where both surface parts have at least
/// [`MIN_PART_LEN`] characters, the lowercased right part is in the
/// lexicon, and the left part maps into the lexicon either as-is or via a
/// transform. Candidates come out in deterministic order: boundary
/// ascending, identity before table transforms.
pub fn enumerate_candidates(
    word: &str,
    lexicon: &Lexicon,
    transforms: &TransformTable,
) -> Vec<SplitCandidate> {
    let lower = fold_lower(word);
    let len = char_count(&lower);
    let mut out = Vec::new();
    if len < 2 * MIN_PART_LEN {
        return out;
    }
    for boundary in MIN_PART_LEN..=(len - MIN_PART_LEN) {
        let left = char_slice(&lower, 0, boundary);
        let right = char_slice(&lower, boundary, len);
        let right_freq = lexicon.get(right);
        if right_freq == 0 {
            continue;
        }
        let left_surface = char_slice(word, 0, boundary).to_string();
        let right_surface = char_slice(word, boundary, len).to_string();
        let left_freq = lexicon.get(left);
        if left_freq > 0 {
            out.push(SplitCandidate {
                boundary,
                left_surface: left_surface.clone(),
                right_surface: right_surface.clone(),
                left_lemma: left.to_string(),
                left_freq,
                right_freq,
                transform: None,
            });
        }
        for t in &transforms.transforms {
            let Some(lemma) = t.apply(left) else { continue };
            let freq = lexicon.get(&lemma);
            if freq == 0 {
                continue;
            }
            out.push(SplitCandidate {
                boundary,
                left_surface: left_surface.clone(),
                right_surface: right_surface.clone(),
                left_lemma: lemma,
                left_freq: freq,
                right_freq,
                transform: Some(t.clone()),
            });
        }
    }
    out
}

/// Pick the candidate with the highest geometric-mean score. The no-split
/// option competes with the whole word's own frequency and wins ties, so a
/// split must score strictly higher than the unsplit word. Ties among
/// candidates go to the leftmost boundary, identity transform first.
pub fn frequency_split(
    word: &str,
    lexicon: &Lexicon,
    transforms: &TransformTable,
) -> SplitResult {
    let whole = lexicon.get(word) as f64;
    let mut best: Option<SplitCandidate> = None;
    for cand in enumerate_candidates(word, lexicon, transforms) {
        let better = match &best {
            None => true,
            Some(b) => cand.score() > b.score(),
        };
        if better {
            best = Some(cand);
        }
    }
    match best {
        Some(cand) if cand.score() > whole => {
            let boundary = cand.boundary;
            let score = cand.score();
            SplitResult::at_boundary(word, boundary, score, SplitMethod::Frequency)
        }
        _ => SplitResult::no_split(word, whole),
    }
}

/// As [`frequency_split`], but also return the winning candidate so callers
/// can reach the matched left lemma.
pub fn frequency_split_with_candidate(
    word: &str,
    lexicon: &Lexicon,
    transforms: &TransformTable,
) -> (SplitResult, Option<SplitCandidate>) {
    let result = frequency_split(word, lexicon, transforms);
    if result.method == SplitMethod::None {
        return (result, None);
    }
    let winner = enumerate_candidates(word, lexicon, transforms)
        .into_iter()
        .find(|c| Some(c.boundary) == result.boundary() && c.score() == result.score);
    (result, winner)
}
