//! Sub-word tokenization: character level and byte-pair encoding, plus the
//! projection of character-level gold boundaries onto token-level binary
//! label sequences.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::corpus::BoundaryLabel;

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("cannot tokenize an empty word")]
    EmptyWord,
    #[error("vocab size {target} is not larger than the {chars} distinct characters")]
    VocabTooSmall { target: usize, chars: usize },
    #[error("boundary {index} out of range for a {len}-token word of {chars} characters")]
    BoundaryOutOfRange {
        index: usize,
        len: usize,
        chars: usize,
    },
    #[error("single-token word cannot carry a split label")]
    SingleToken,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("merge file line {line}: expected `left right`")]
    BadMergeLine { line: usize },
}

/// A word cut into sub-word tokens with their character spans.
///
/// Invariant: the concatenation of `tokens` equals the source word, and the
/// spans tile `[0, char_len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub char_spans: Vec<(usize, usize)>,
}

impl TokenSequence {
    fn from_tokens(tokens: Vec<String>) -> TokenSequence {
        let mut spans = Vec::with_capacity(tokens.len());
        let mut pos = 0;
        for t in &tokens {
            let len = t.chars().count();
            spans.push((pos, pos + len));
            pos += len;
        }
        TokenSequence {
            tokens,
            char_spans: spans,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Total character length of the underlying word.
    pub fn char_len(&self) -> usize {
        self.char_spans.last().map(|s| s.1).unwrap_or(0)
    }
}

/// One token per unicode scalar value.
pub fn char_tokenize(word: &str) -> Result<TokenSequence, TokenizeError> {
    if word.is_empty() {
        return Err(TokenizeError::EmptyWord);
    }
    Ok(TokenSequence::from_tokens(
        word.chars().map(String::from).collect(),
    ))
}

/// Ordered merge rules plus the sub-word vocabulary they induce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    pub merges: Vec<(String, String)>,
    pub vocab: BTreeSet<String>,
    pub vocab_size_target: usize,
}

struct HeapEntry {
    count: u64,
    left: String,
    right: String,
    pair: (u32, u32),
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Max-heap: highest count first, ties broken by lexicographically
    // smallest (left, right).
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

fn adjacent_pairs(tokens: &[u32]) -> impl Iterator<Item = (u32, u32)> + '_ {
    tokens.windows(2).map(|w| (w[0], w[1]))
}

fn apply_merge_ids(tokens: &[u32], pair: (u32, u32), merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() && tokens[i] == pair.0 && tokens[i + 1] == pair.1 {
            out.push(merged);
            i += 2;
        } else {
            out.push(tokens[i]);
            i += 1;
        }
    }
    out
}

/// Learn merges by repeatedly joining the most frequent adjacent token pair
/// until the vocabulary reaches `vocab_size` or no pair occurs at least
/// twice. Pair counts are occurrence-weighted over the corpus; equal counts
/// are broken lexicographically by (left, right), so training is
/// deterministic.
pub fn bpe_train(corpus: &[String], vocab_size: usize) -> Result<BpeModel, TokenizeError> {
    // Intern token strings; ids are assigned in first-seen order but every
    // choice below is made on counts and strings, never ids.
    let mut strings: Vec<String> = Vec::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let intern = |s: String, strings: &mut Vec<String>, ids: &mut HashMap<String, u32>| -> u32 {
        if let Some(&id) = ids.get(&s) {
            return id;
        }
        let id = strings.len() as u32;
        ids.insert(s.clone(), id);
        strings.push(s);
        id
    };

    let mut word_counts: HashMap<&str, u64> = HashMap::new();
    for w in corpus {
        if w.is_empty() {
            continue;
        }
        *word_counts.entry(w.as_str()).or_insert(0) += 1;
    }
    let mut vocab: BTreeSet<String> = BTreeSet::new();
    let mut words: Vec<(Vec<u32>, u64)> = Vec::new();
    {
        // Sort distinct words so interning order is reproducible.
        let mut distinct: Vec<(&str, u64)> = word_counts.drain().collect();
        distinct.sort_unstable();
        for (w, c) in distinct {
            let toks: Vec<u32> = w
                .chars()
                .map(|ch| {
                    vocab.insert(ch.to_string());
                    intern(ch.to_string(), &mut strings, &mut ids)
                })
                .collect();
            words.push((toks, c));
        }
    }
    if vocab_size <= vocab.len() {
        return Err(TokenizeError::VocabTooSmall {
            target: vocab_size,
            chars: vocab.len(),
        });
    }

    let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
    let mut pair_words: HashMap<(u32, u32), HashSet<usize>> = HashMap::new();
    for (wi, (toks, c)) in words.iter().enumerate() {
        for p in adjacent_pairs(toks) {
            *pair_counts.entry(p).or_insert(0) += c;
            pair_words.entry(p).or_default().insert(wi);
        }
    }
    let mut heap: BinaryHeap<HeapEntry> = pair_counts
        .iter()
        .filter(|(_, &c)| c >= 2)
        .map(|(&pair, &count)| HeapEntry {
            count,
            left: strings[pair.0 as usize].clone(),
            right: strings[pair.1 as usize].clone(),
            pair,
        })
        .collect();

    let mut merges: Vec<(String, String)> = Vec::new();
    while vocab.len() < vocab_size {
        // Pop until an entry matches the live count; stale entries are the
        // price of lazy invalidation.
        let best = loop {
            match heap.pop() {
                None => break None,
                Some(e) => {
                    let live = pair_counts.get(&e.pair).copied().unwrap_or(0);
                    if live == e.count && live >= 2 {
                        break Some(e);
                    }
                }
            }
        };
        let Some(best) = best else { break };

        let merged_str = format!("{}{}", best.left, best.right);
        let merged_id = intern(merged_str.clone(), &mut strings, &mut ids);
        merges.push((best.left.clone(), best.right.clone()));
        vocab.insert(merged_str);

        let affected: Vec<usize> = pair_words
            .remove(&best.pair)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        let mut touched: HashSet<(u32, u32)> = HashSet::new();
        for wi in affected {
            let (toks, wcount) = {
                let (t, c) = &words[wi];
                (t.clone(), *c)
            };
            // The index can hold stale entries; skip words that no longer
            // contain the pair.
            if !adjacent_pairs(&toks).any(|p| p == best.pair) {
                continue;
            }
            for p in adjacent_pairs(&toks) {
                let c = pair_counts.get_mut(&p).expect("pair count missing");
                *c -= wcount;
                touched.insert(p);
            }
            let new_toks = apply_merge_ids(&toks, best.pair, merged_id);
            for p in adjacent_pairs(&new_toks) {
                *pair_counts.entry(p).or_insert(0) += wcount;
                pair_words.entry(p).or_default().insert(wi);
                touched.insert(p);
            }
            words[wi].0 = new_toks;
        }
        for p in touched {
            let c = pair_counts.get(&p).copied().unwrap_or(0);
            if c >= 2 {
                heap.push(HeapEntry {
                    count: c,
                    left: strings[p.0 as usize].clone(),
                    right: strings[p.1 as usize].clone(),
                    pair: p,
                });
            }
        }
    }

    Ok(BpeModel {
        merges,
        vocab,
        vocab_size_target: vocab_size,
    })
}

impl BpeModel {
    /// Rebuild a model from a merge list (e.g. an external merge file). The
    /// vocabulary is the merge results; single characters are always valid
    /// tokens on top of it.
    pub fn from_merges(merges: Vec<(String, String)>) -> BpeModel {
        let vocab: BTreeSet<String> = merges.iter().map(|(l, r)| format!("{l}{r}")).collect();
        let target = vocab.len();
        BpeModel {
            merges,
            vocab,
            vocab_size_target: target,
        }
    }

    /// Apply the learned merges in order. Unknown characters simply remain
    /// single-character tokens.
    pub fn encode(&self, word: &str) -> Result<TokenSequence, TokenizeError> {
        if word.is_empty() {
            return Err(TokenizeError::EmptyWord);
        }
        let mut tokens: Vec<String> = word.chars().map(String::from).collect();
        for (left, right) in &self.merges {
            if tokens.len() < 2 {
                break;
            }
            let mut out = Vec::with_capacity(tokens.len());
            let mut i = 0;
            while i < tokens.len() {
                if i + 1 < tokens.len() && tokens[i] == *left && tokens[i + 1] == *right {
                    out.push(format!("{left}{right}"));
                    i += 2;
                } else {
                    out.push(std::mem::take(&mut tokens[i]));
                    i += 1;
                }
            }
            tokens = out;
        }
        Ok(TokenSequence::from_tokens(tokens))
    }

    pub fn write_merge_file(&self, path: &Path) -> Result<(), TokenizeError> {
        let mut out = String::new();
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| TokenizeError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_merge_file(path: &Path) -> Result<BpeModel, TokenizeError> {
        let text = fs::read_to_string(path).map_err(|source| TokenizeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut merges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (l, r) = line
                .split_once(' ')
                .ok_or(TokenizeError::BadMergeLine { line: i + 1 })?;
            if l.is_empty() || r.is_empty() {
                return Err(TokenizeError::BadMergeLine { line: i + 1 });
            }
            merges.push((l.to_string(), r.to_string()));
        }
        Ok(BpeModel::from_merges(merges))
    }
}

/// Character or BPE tokenization behind one call.
#[derive(Debug, Clone)]
pub enum Tokenizer {
    Char,
    Bpe(BpeModel),
}

impl Tokenizer {
    pub fn tokenize(&self, word: &str) -> Result<TokenSequence, TokenizeError> {
        match self {
            Tokenizer::Char => char_tokenize(word),
            Tokenizer::Bpe(model) => model.encode(word),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Tokenizer::Char => "char",
            Tokenizer::Bpe(_) => "bpe",
        }
    }
}

/// Binary token labels: `labels[i] = 1` means a split occurs immediately
/// after token `i`. Exactly one label is 1; it can only sit on the last
/// token when a lossy projection attributed a mid-token boundary there.
/// `lossy` is set when the character boundary did not land on a token edge
/// and was attributed to the covering token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSequence {
    pub labels: Vec<u8>,
    pub lossy: bool,
}

impl LabelSequence {
    /// Index of the single positive label.
    pub fn split_position(&self) -> usize {
        self.labels.iter().position(|&l| l == 1).expect("one label set")
    }
}

/// Project a character boundary onto token labels.
///
/// If a token ends exactly at the boundary, it carries the label. Otherwise
/// the boundary falls strictly inside a token and the split is attributed
/// to that covering token's end, flagged lossy. Single-token words cannot
/// carry a split label and are an error; callers drop and count them.
pub fn project_labels(
    boundary: BoundaryLabel,
    tokens: &TokenSequence,
) -> Result<LabelSequence, TokenizeError> {
    let b = boundary.split_index;
    let chars = tokens.char_len();
    if b < 1 || b >= chars {
        return Err(TokenizeError::BoundaryOutOfRange {
            index: b,
            len: tokens.len(),
            chars,
        });
    }
    if tokens.len() == 1 {
        return Err(TokenizeError::SingleToken);
    }
    let mut labels = vec![0u8; tokens.len()];
    for (i, &(start, end)) in tokens.char_spans.iter().enumerate() {
        if end == b {
            labels[i] = 1;
            return Ok(LabelSequence {
                labels,
                lossy: false,
            });
        }
        if start < b && b < end {
            labels[i] = 1;
            return Ok(LabelSequence { labels, lossy: true });
        }
    }
    unreachable!("boundary inside [1, chars) always falls in some span");
}
