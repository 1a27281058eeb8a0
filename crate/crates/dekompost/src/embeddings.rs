//! Word vectors in the standard text format (`count dim` header, then one
//! `word v1 ... v_dim` line per word), with configurable handling of
//! out-of-vocabulary words.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::chars::fold_lower;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} values")]
    DimensionMismatch { line: usize, expected: usize },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("oov policy unk_token requires an \"[unk]\" entry in the table")]
    MissingUnk,
}

/// What to return for a word that has no stored vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OovPolicy {
    /// The vector of the special token `[unk]`; an error if absent.
    UnkToken,
    /// A zero vector.
    Zero,
    /// The mean of the word's character n-gram vectors (n = 3..=6, word
    /// wrapped in `<` and `>`), or a zero vector when none match.
    NgramCompose,
}

impl OovPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            OovPolicy::UnkToken => "unk",
            OovPolicy::Zero => "zero",
            OovPolicy::NgramCompose => "ngram",
        }
    }

    pub fn parse(s: &str) -> Option<OovPolicy> {
        match s {
            "unk" | "unk_token" => Some(OovPolicy::UnkToken),
            "zero" => Some(OovPolicy::Zero),
            "ngram" | "ngram_compose" => Some(OovPolicy::NgramCompose),
            _ => None,
        }
    }
}

pub const UNK_WORD: &str = "[unk]";

/// Immutable word→vector map; lookups are case-sensitive first with a
/// lowercased fallback (German vectors are typically cased, while
/// compound-internal heads are lowercase).
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    ngram_vectors: Option<HashMap<String, Vec<f64>>>,
    pub oov_policy: OovPolicy,
    pub warnings: Vec<String>,
}

type ParsedVectors = (usize, HashMap<String, Vec<f64>>, Vec<String>);

fn parse_vector_file(path: &Path) -> Result<ParsedVectors, EmbedError> {
    let text = fs::read_to_string(path).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(EmbedError::Malformed {
        line: 1,
        msg: "missing `count dim` header".to_string(),
    })?;
    let mut parts = header.split_whitespace();
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(EmbedError::Malformed {
            line: 1,
            msg: "bad count in header".to_string(),
        })?;
    let dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(EmbedError::Malformed {
            line: 1,
            msg: "bad dim in header".to_string(),
        })?;

    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    let mut warnings = Vec::new();
    let mut rows = 0usize;
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().ok_or(EmbedError::Malformed {
            line: line_no,
            msg: "empty line".to_string(),
        })?;
        let values: Result<Vec<f64>, _> = fields.map(|f| f.parse::<f64>()).collect();
        let values = values.map_err(|_| EmbedError::Malformed {
            line: line_no,
            msg: "bad float value".to_string(),
        })?;
        if values.len() != dim {
            return Err(EmbedError::DimensionMismatch {
                line: line_no,
                expected: dim,
            });
        }
        rows += 1;
        if vectors.insert(word.to_string(), values).is_some() {
            warnings.push(format!("duplicate word {word:?}, keeping the last occurrence"));
        }
    }
    if rows != count {
        warnings.push(format!(
            "header declares {count} vectors but the file holds {rows}; using {rows}"
        ));
    }
    Ok((dim, vectors, warnings))
}

/// Load a word vector file. The zero OOV policy is the default; callers
/// switch policies with [`EmbeddingTable::with_policy`] and attach n-gram
/// vectors with [`EmbeddingTable::with_ngrams`].
pub fn load_text_vectors(path: &Path) -> Result<EmbeddingTable, EmbedError> {
    let (dim, vectors, warnings) = parse_vector_file(path)?;
    Ok(EmbeddingTable {
        dim,
        vectors,
        ngram_vectors: None,
        oov_policy: OovPolicy::Zero,
        warnings,
    })
}

impl EmbeddingTable {
    pub fn with_policy(mut self, policy: OovPolicy) -> EmbeddingTable {
        self.oov_policy = policy;
        self
    }

    /// Attach character-n-gram vectors loaded from a second file in the
    /// same text format.
    pub fn load_ngrams(mut self, path: &Path) -> Result<EmbeddingTable, EmbedError> {
        let (dim, vectors, warnings) = parse_vector_file(path)?;
        if dim != self.dim {
            return Err(EmbedError::DimensionMismatch {
                line: 1,
                expected: self.dim,
            });
        }
        self.warnings.extend(warnings);
        self.ngram_vectors = Some(vectors);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exact stored vector, no fallback and no OOV policy.
    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }

    fn lookup(&self, word: &str) -> Option<&[f64]> {
        if let Some(v) = self.vector(word) {
            return Some(v);
        }
        // German vectors are typically cased while compound-internal parts
        // are lowercase; try the lowercased and the capitalized form.
        let lower = fold_lower(word);
        if let Some(v) = self.vectors.get(&lower) {
            return Some(v.as_slice());
        }
        let mut chars = lower.chars();
        let capitalized: Option<String> = chars
            .next()
            .map(|c| c.to_uppercase().chain(chars).collect());
        capitalized
            .and_then(|c| self.vectors.get(&c))
            .map(|v| v.as_slice())
    }

    /// Vector for a word: stored vector if present (case-sensitive, then
    /// lowercased), otherwise whatever the OOV policy prescribes. The
    /// returned vector always has exactly `dim` components.
    pub fn embed(&self, word: &str) -> Result<Vec<f64>, EmbedError> {
        if let Some(v) = self.lookup(word) {
            return Ok(v.to_vec());
        }
        match self.oov_policy {
            OovPolicy::Zero => Ok(vec![0.0; self.dim]),
            OovPolicy::UnkToken => self
                .vectors
                .get(UNK_WORD)
                .cloned()
                .ok_or(EmbedError::MissingUnk),
            OovPolicy::NgramCompose => Ok(self.compose_from_ngrams(word)),
        }
    }

    fn compose_from_ngrams(&self, word: &str) -> Vec<f64> {
        let Some(ngrams) = &self.ngram_vectors else {
            return vec![0.0; self.dim];
        };
        let wrapped: Vec<char> = format!("<{word}>").chars().collect();
        let mut sum = vec![0.0; self.dim];
        let mut matched = 0usize;
        for n in 3..=6 {
            if wrapped.len() < n {
                break;
            }
            for start in 0..=(wrapped.len() - n) {
                let gram: String = wrapped[start..start + n].iter().collect();
                if let Some(v) = ngrams.get(&gram) {
                    for (s, x) in sum.iter_mut().zip(v.iter()) {
                        *s += x;
                    }
                    matched += 1;
                }
            }
        }
        if matched == 0 {
            return vec![0.0; self.dim];
        }
        sum.iter_mut().for_each(|x| *x /= matched as f64);
        sum
    }

    /// Write the table back in the `count dim` text format. Floats use the
    /// shortest representation that round-trips, so load ∘ dump ∘ load is
    /// the identity.
    pub fn write_text_vectors(&self, path: &Path) -> Result<(), EmbedError> {
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort();
        let mut f = fs::File::create(path).map_err(|source| EmbedError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let io_err = |source: std::io::Error| EmbedError::Io {
            path: path.display().to_string(),
            source,
        };
        writeln!(f, "{} {}", self.vectors.len(), self.dim).map_err(io_err)?;
        for w in words {
            let v = &self.vectors[w];
            let mut line = String::from(w.as_str());
            for x in v {
                line.push(' ');
                line.push_str(&format!("{x}"));
            }
            writeln!(f, "{line}").map_err(io_err)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write as _;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_basic_file() {
        let f = write_tmp("2 3\na 1 0 0\nb 0 1 0\n");
        let table = load_text_vectors(f.path()).unwrap();
        assert_eq!(table.dim, 3);
        assert_eq!(table.len(), 2);
        assert_eq!(table.vector("a"), Some([1.0, 0.0, 0.0].as_slice()));
        assert!(table.warnings.is_empty());
    }

    #[test]
    fn dimension_mismatch_carries_line_number() {
        let f = write_tmp("2 3\na 1 0 0\nb 0 1\n");
        match load_text_vectors(f.path()) {
            Err(EmbedError::DimensionMismatch { line: 3, expected: 3 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn header_count_mismatch_is_a_warning() {
        let f = write_tmp("5 2\na 1 0\nb 0 1\n");
        let table = load_text_vectors(f.path()).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.warnings.len(), 1);
    }

    #[test]
    fn duplicates_keep_last_with_warning() {
        let f = write_tmp("2 2\na 1 0\na 0 1\n");
        let table = load_text_vectors(f.path()).unwrap();
        assert_eq!(table.vector("a"), Some([0.0, 1.0].as_slice()));
        assert!(table.warnings[0].contains("duplicate"));
    }

    #[test]
    fn known_word_is_exact_and_case_falls_back() {
        let f = write_tmp("2 2\nTag 1 2\nhaus 3 4\n");
        let table = load_text_vectors(f.path()).unwrap();
        assert_eq!(table.embed("Tag").unwrap(), vec![1.0, 2.0]);
        // Lowercase of "Haus" finds "haus".
        assert_eq!(table.embed("Haus").unwrap(), vec![3.0, 4.0]);
        // Compound-internal lowercase heads recover the cased vector.
        assert_eq!(table.embed("tag").unwrap(), vec![1.0, 2.0]);
        assert_eq!(table.embed("überetwas").unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_policy_returns_zeros() {
        let f = write_tmp("1 2\na 1 1\n");
        let table = load_text_vectors(f.path()).unwrap();
        assert_eq!(table.embed("zz").unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn unk_policy_requires_unk_entry() {
        let f = write_tmp("2 2\n[unk] 9 9\na 1 1\n");
        let table = load_text_vectors(f.path())
            .unwrap()
            .with_policy(OovPolicy::UnkToken);
        assert_eq!(table.embed("zz").unwrap(), vec![9.0, 9.0]);

        let f = write_tmp("1 2\na 1 1\n");
        let table = load_text_vectors(f.path())
            .unwrap()
            .with_policy(OovPolicy::UnkToken);
        assert!(matches!(table.embed("zz"), Err(EmbedError::MissingUnk)));
    }

    #[test]
    fn ngram_compose_means_matched_grams() {
        let words = write_tmp("1 2\nx 5 5\n");
        let ngrams = write_tmp("2 2\n<ta 1 0\nag> 0 1\n");
        let table = load_text_vectors(words.path())
            .unwrap()
            .with_policy(OovPolicy::NgramCompose)
            .load_ngrams(ngrams.path())
            .unwrap();
        assert_eq!(table.embed("tag").unwrap(), vec![0.5, 0.5]);
        // No matching grams at all: zero vector.
        assert_eq!(table.embed("zz").unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dump_then_load_is_identity() {
        let f = write_tmp("3 2\nb -1.5 2.25\na 0.1 0.30000000000000004\nc 7 0\n");
        let table = load_text_vectors(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        table.write_text_vectors(out.path()).unwrap();
        let back = load_text_vectors(out.path()).unwrap();
        assert_eq!(back.dim, table.dim);
        assert_eq!(back.len(), table.len());
        for w in ["a", "b", "c"] {
            assert_eq!(back.vector(w), table.vector(w));
        }
    }
}
