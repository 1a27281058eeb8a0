//! Compound-list ingestion and dataset plumbing.
//!
//! File formats (all UTF-8, tab-separated, `#` starts a comment line):
//!
//! * split file: `surface<TAB>modifier<TAB>head[<TAB>frequency]`, modifier
//!   alternatives separated by `|` ("Laufschuhe\tlauf|Lauf\tSchuhe" yields
//!   one entry per reading),
//! * annotated file: `frequency<TAB>surface<TAB>modifier<TAB>head<TAB>category`
//!   with category in 0..=3,
//! * frequency file: `word<TAB>count`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chars::{char_count, char_slice, fold_lower};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8")]
    Utf8 { path: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("category out of range, line {line}")]
    CategoryOutOfRange { line: usize },
    #[error("invalid entry: {0}")]
    InvalidEntry(String),
    #[error("cannot align head to surface: {surface}")]
    Unalignable { surface: String },
    #[error("partition ratios must be non-negative and sum to 1")]
    InvalidRatios,
}

/// A compound surface form with its gold modifier and head lemmas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompoundEntry {
    pub surface: String,
    pub modifier: String,
    pub head: String,
    pub frequency: Option<u64>,
}

impl CompoundEntry {
    pub fn new(
        surface: &str,
        modifier: &str,
        head: &str,
        frequency: Option<u64>,
    ) -> Result<CompoundEntry, CorpusError> {
        for (name, v) in [("surface", surface), ("modifier", modifier), ("head", head)] {
            if v.is_empty() {
                return Err(CorpusError::InvalidEntry(format!("empty {name}")));
            }
            if v.contains('\t') || v.contains('\n') {
                return Err(CorpusError::InvalidEntry(format!(
                    "{name} contains tab or newline"
                )));
            }
        }
        if char_count(surface) < 2 {
            return Err(CorpusError::InvalidEntry(format!(
                "surface too short: {surface}"
            )));
        }
        Ok(CompoundEntry {
            surface: surface.to_string(),
            modifier: modifier.to_string(),
            head: head.to_string(),
            frequency,
        })
    }
}

/// A compound with its idiomaticity category: 0 fully compositional,
/// 1 idiomatic modifier, 2 idiomatic head, 3 both idiomatic.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedCompound {
    pub entry: CompoundEntry,
    pub category: u8,
}

/// Gold split position: number of characters in the left surface part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryLabel {
    pub split_index: usize,
}

/// Lowercased word-form frequency counts. Zero-count entries are absent.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    counts: HashMap<String, u64>,
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    pub fn add(&mut self, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(fold_lower(word)).or_insert(0) += count;
    }

    /// Frequency of the lowercased form, 0 when absent.
    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(&fold_lower(word)).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, c)| (w.as_str(), *c))
    }
}

/// Deterministic train/dev/test partition.
#[derive(Debug, Clone)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

fn read_to_string(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| CorpusError::Utf8 {
        path: path.display().to_string(),
    })
}

/// Parse a split file. Ambiguous-modifier lines yield one entry per reading;
/// the readings share the surface (and therefore the gold boundary).
pub fn parse_split_file(path: &Path) -> Result<Vec<CompoundEntry>, CorpusError> {
    let text = read_to_string(path)?;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 || cols.len() > 4 {
            return Err(CorpusError::Malformed {
                line: line_no,
                msg: format!("expected 3 or 4 columns, got {}", cols.len()),
            });
        }
        let frequency = match cols.get(3) {
            Some(s) => Some(s.parse::<u64>().map_err(|_| CorpusError::Malformed {
                line: line_no,
                msg: format!("bad frequency: {s}"),
            })?),
            None => None,
        };
        for modifier in cols[1].split('|') {
            let entry = CompoundEntry::new(cols[0], modifier, cols[2], frequency)
                .map_err(|e| CorpusError::Malformed {
                    line: line_no,
                    msg: e.to_string(),
                })?;
            entries.push(entry);
        }
    }
    Ok(entries)
}

/// Serialize entries in split-file layout. `parse(write(parse(f)))` equals
/// `parse(f)` for well-formed files.
pub fn write_split_file(path: &Path, entries: &[CompoundEntry]) -> Result<(), CorpusError> {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.surface);
        out.push('\t');
        out.push_str(&e.modifier);
        out.push('\t');
        out.push_str(&e.head);
        if let Some(f) = e.frequency {
            out.push('\t');
            out.push_str(&f.to_string());
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub fn parse_annotated_file(path: &Path) -> Result<Vec<AnnotatedCompound>, CorpusError> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(CorpusError::Malformed {
                line: line_no,
                msg: format!("expected 5 columns, got {}", cols.len()),
            });
        }
        let frequency = cols[0].parse::<u64>().map_err(|_| CorpusError::Malformed {
            line: line_no,
            msg: format!("bad frequency: {}", cols[0]),
        })?;
        let category: u8 = cols[4]
            .parse()
            .map_err(|_| CorpusError::CategoryOutOfRange { line: line_no })?;
        if category > 3 {
            return Err(CorpusError::CategoryOutOfRange { line: line_no });
        }
        let entry = CompoundEntry::new(cols[1], cols[2], cols[3], Some(frequency)).map_err(
            |e| CorpusError::Malformed {
                line: line_no,
                msg: e.to_string(),
            },
        )?;
        out.push(AnnotatedCompound { entry, category });
    }
    Ok(out)
}

pub fn write_annotated_file(
    path: &Path,
    compounds: &[AnnotatedCompound],
) -> Result<(), CorpusError> {
    let mut out = String::new();
    for a in compounds {
        let freq = a.entry.frequency.unwrap_or(0);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            freq, a.entry.surface, a.entry.modifier, a.entry.head, a.category
        ));
    }
    write_file(path, out.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CorpusError> {
    let mut f = fs::File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(bytes).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn deumlaut(s: &str) -> String {
    s.replace("äu", "au")
        .replace('ä', "a")
        .replace('ö', "o")
        .replace('ü', "u")
}

/// Derive the gold character boundary by anchoring the head to the surface
/// suffix; the left part absorbs any linking element.
///
/// When the head is not a direct lowercase suffix, a short fallback chain
/// runs: strip one final "e"/"en"/"n"/"s" from the head, then de-umlaut the
/// head. Entries that still fail are reported unalignable so callers can
/// drop and count them.
pub fn derive_boundary(entry: &CompoundEntry) -> Result<BoundaryLabel, CorpusError> {
    let surface = fold_lower(&entry.surface);
    let head = fold_lower(&entry.head);

    let mut candidates = vec![head.clone()];
    for suffix in ["e", "en", "n", "s"] {
        if let Some(stem) = head.strip_suffix(suffix) {
            if !stem.is_empty() {
                candidates.push(stem.to_string());
            }
        }
    }
    let unrounded = deumlaut(&head);
    if unrounded != head {
        candidates.push(unrounded);
    }

    for cand in candidates {
        if surface.ends_with(&cand) {
            let split_index = char_count(&surface) - char_count(&cand);
            if split_index >= 1 && split_index < char_count(&surface) {
                return Ok(BoundaryLabel { split_index });
            }
        }
    }
    Err(CorpusError::Unalignable {
        surface: entry.surface.clone(),
    })
}

/// Left and right surface parts of an entry at its gold boundary.
pub fn gold_parts(entry: &CompoundEntry, boundary: BoundaryLabel) -> (String, String) {
    let n = char_count(&entry.surface);
    (
        char_slice(&entry.surface, 0, boundary.split_index).to_string(),
        char_slice(&entry.surface, boundary.split_index, n).to_string(),
    )
}

/// Count lowercased modifiers and heads, one per occurrence, then add the
/// optional external frequency file on top.
pub fn build_lexicon(
    entries: &[CompoundEntry],
    extra: Option<&Path>,
) -> Result<Lexicon, CorpusError> {
    let mut lex = Lexicon::new();
    for e in entries {
        lex.add(&e.modifier, 1);
        lex.add(&e.head, 1);
    }
    if let Some(path) = extra {
        for (word, count) in parse_frequency_file(path)? {
            lex.add(&word, count);
        }
    }
    Ok(lex)
}

pub fn parse_frequency_file(path: &Path) -> Result<Vec<(String, u64)>, CorpusError> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, count) = line.split_once('\t').ok_or_else(|| CorpusError::Malformed {
            line: i + 1,
            msg: "expected word<TAB>count".to_string(),
        })?;
        let count: u64 = count.parse().map_err(|_| CorpusError::Malformed {
            line: i + 1,
            msg: format!("bad count: {count}"),
        })?;
        out.push((word.to_string(), count));
    }
    Ok(out)
}

/// Shuffle deterministically by seed, then slice contiguously. Dev and test
/// sizes are floor-rounded; the remainder goes to train.
pub fn partition<T: Clone>(
    entries: &[T],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit<T>, CorpusError> {
    let (rt, rd, rs) = ratios;
    if rt < 0.0 || rd < 0.0 || rs < 0.0 || ((rt + rd + rs) - 1.0).abs() > 1e-9 {
        return Err(CorpusError::InvalidRatios);
    }
    let n = entries.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_dev = (n as f64 * rd).floor() as usize;
    let n_test = (n as f64 * rs).floor() as usize;
    let n_train = n - n_dev - n_test;

    let pick = |range: std::ops::Range<usize>| -> Vec<T> {
        order[range].iter().map(|&i| entries[i].clone()).collect()
    };
    Ok(DatasetSplit {
        train: pick(0..n_train),
        dev: pick(n_train..n_train + n_dev),
        test: pick(n_train + n_dev..n),
        seed,
    })
}

/// Summary counts over a split file, including how many entries cannot be
/// aligned to a gold boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub entries: usize,
    pub distinct_modifiers: usize,
    pub distinct_heads: usize,
    pub modifier_hapaxes: usize,
    pub head_hapaxes: usize,
    pub unalignable: usize,
}

pub fn corpus_stats(entries: &[CompoundEntry]) -> CorpusStats {
    let mut modifiers: HashMap<&str, u64> = HashMap::new();
    let mut heads: HashMap<&str, u64> = HashMap::new();
    let mut unalignable = 0;
    for e in entries {
        *modifiers.entry(e.modifier.as_str()).or_insert(0) += 1;
        *heads.entry(e.head.as_str()).or_insert(0) += 1;
        if derive_boundary(e).is_err() {
            unalignable += 1;
        }
    }
    CorpusStats {
        entries: entries.len(),
        distinct_modifiers: modifiers.len(),
        distinct_heads: heads.len(),
        modifier_hapaxes: modifiers.values().filter(|&&c| c == 1).count(),
        head_hapaxes: heads.values().filter(|&&c| c == 1).count(),
        unalignable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_basic_split_line() {
        let f = temp_file("Arbeitstag\tArbeit\tTag\n");
        let entries = parse_split_file(f.path()).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].surface, "Arbeitstag");
        assert_eq!(entries[0].modifier, "Arbeit");
        assert_eq!(entries[0].head, "Tag");
        assert_eq!(entries[0].frequency, None);
    }

    #[test]
    fn ambiguous_modifier_yields_one_entry_per_reading() {
        let f = temp_file("Laufschuhe\tlauf|Lauf\tSchuhe\n");
        let entries = parse_split_file(f.path()).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].modifier, "lauf");
        assert_eq!(entries[1].modifier, "Lauf");
        assert_eq!(entries[0].surface, entries[1].surface);
    }

    #[test]
    fn empty_file_is_empty_list() {
        let f = temp_file("");
        assert!(parse_split_file(f.path()).unwrap().is_empty());
    }

    #[test]
    fn comments_and_frequency_column() {
        let f = temp_file("# comment\nFreitag\tfrei\tTag\t171137\n");
        let entries = parse_split_file(f.path()).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].frequency, Some(171137));
    }

    #[test]
    fn malformed_line_carries_line_number() {
        let f = temp_file("Arbeitstag\tArbeit\tTag\nbroken line\n");
        match parse_split_file(f.path()) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn empty_field_is_malformed() {
        let f = temp_file("Arbeitstag\t\tTag\n");
        assert!(matches!(
            parse_split_file(f.path()),
            Err(CorpusError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn non_utf8_is_decode_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(&[0x41, 0xff, 0xfe, 0x0a]).unwrap();
        assert!(matches!(
            parse_split_file(f.path()),
            Err(CorpusError::Utf8 { .. })
        ));
    }

    #[test]
    fn parses_annotated_rows() {
        let f = temp_file("65883\tJahrhundert\tJahr\tHundert\t0\n13519\tLebensmittel\tLeben\tMittel\t3\n");
        let rows = parse_annotated_file(f.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].entry.frequency, Some(65883));
        assert_eq!(rows[0].category, 0);
        assert_eq!(rows[1].category, 3);
    }

    #[test]
    fn category_out_of_range_carries_line() {
        let f = temp_file("1\tXx\tY\tZ\t7\n");
        assert!(matches!(
            parse_annotated_file(f.path()),
            Err(CorpusError::CategoryOutOfRange { line: 1 })
        ));
    }

    #[test]
    fn boundary_direct_suffix() {
        let e = CompoundEntry::new("Arbeitstag", "Arbeit", "Tag", None).unwrap();
        assert_eq!(derive_boundary(&e).unwrap().split_index, 7);
        let e = CompoundEntry::new("Tischtennis", "Tisch", "Tennis", None).unwrap();
        assert_eq!(derive_boundary(&e).unwrap().split_index, 5);
        let e = CompoundEntry::new("Freitag", "frei", "Tag", None).unwrap();
        assert_eq!(derive_boundary(&e).unwrap().split_index, 4);
    }

    #[test]
    fn boundary_suffix_match_invariant() {
        let e = CompoundEntry::new("Arbeitstag", "Arbeit", "Tag", None).unwrap();
        let b = derive_boundary(&e).unwrap();
        let lower = fold_lower(&e.surface);
        assert_eq!(char_slice(&lower, b.split_index, char_count(&lower)), "tag");
        let (left, right) = gold_parts(&e, b);
        assert_eq!(left, "Arbeits");
        assert_eq!(right, "tag");
    }

    #[test]
    fn boundary_fallback_strips_head_inflection() {
        // Head listed with plural/inflection absent from the surface.
        let e = CompoundEntry::new("Schulbuch", "Schule", "Buche", None).unwrap();
        assert_eq!(derive_boundary(&e).unwrap().split_index, 5);
    }

    #[test]
    fn boundary_fallback_deumlauts_head() {
        let e = CompoundEntry::new("Handbuch", "Hand", "Büch", None).unwrap();
        assert_eq!(derive_boundary(&e).unwrap().split_index, 4);
    }

    #[test]
    fn boundary_unalignable_is_reported() {
        let e = CompoundEntry::new("Kirchhof", "Kirche", "Garten", None).unwrap();
        assert!(matches!(
            derive_boundary(&e),
            Err(CorpusError::Unalignable { .. })
        ));
        // Head equal to the whole surface cannot produce an interior split.
        let e = CompoundEntry::new("Tag", "Tag", "Tag", None).unwrap();
        assert!(derive_boundary(&e).is_err());
    }

    #[test]
    fn hyphenated_compounds_keep_boundaries() {
        let e = CompoundEntry::new("Nacht-und-Nebel-Aktion", "Nacht-und-Nebel", "Aktion", None)
            .unwrap();
        assert_eq!(derive_boundary(&e).unwrap().split_index, 16);
    }

    #[test]
    fn lexicon_counts_parts() {
        let entries = vec![
            CompoundEntry::new("Arbeitstag", "Arbeit", "Tag", None).unwrap(),
            CompoundEntry::new("Freitag", "frei", "Tag", None).unwrap(),
        ];
        let lex = build_lexicon(&entries, None).unwrap();
        assert_eq!(lex.get("arbeit"), 1);
        assert_eq!(lex.get("Frei"), 1);
        assert_eq!(lex.get("tag"), 2);
        assert_eq!(lex.get("missing"), 0);
        assert_eq!(lex.len(), 3);
    }

    #[test]
    fn empty_input_empty_lexicon() {
        assert!(build_lexicon(&[], None).unwrap().is_empty());
    }

    #[test]
    fn lexicon_merges_external_frequencies() {
        let f = temp_file("Tag\t10\nhaus\t5\n");
        let entries = vec![CompoundEntry::new("Arbeitstag", "Arbeit", "Tag", None).unwrap()];
        let lex = build_lexicon(&entries, Some(f.path())).unwrap();
        assert_eq!(lex.get("tag"), 11);
        assert_eq!(lex.get("haus"), 5);
    }

    #[test]
    fn partition_sizes_and_determinism() {
        let items: Vec<u32> = (0..10).collect();
        let s = partition(&items, (0.8, 0.1, 0.1), 42).unwrap();
        assert_eq!((s.train.len(), s.dev.len(), s.test.len()), (8, 1, 1));
        let s2 = partition(&items, (0.8, 0.1, 0.1), 42).unwrap();
        assert_eq!(s.train, s2.train);
        assert_eq!(s.dev, s2.dev);
        assert_eq!(s.test, s2.test);

        let s3 = partition(&items, (0.85, 0.1, 0.05), 42).unwrap();
        assert_eq!((s3.train.len(), s3.dev.len(), s3.test.len()), (9, 1, 0));
    }

    #[test]
    fn partition_rejects_bad_ratios() {
        assert!(partition(&[1, 2, 3], (0.5, 0.2, 0.2), 1).is_err());
        assert!(partition(&[1, 2, 3], (1.2, -0.1, -0.1), 1).is_err());
    }

    #[test]
    fn stats_count_hapaxes_and_unalignable() {
        let entries = vec![
            CompoundEntry::new("Arbeitstag", "Arbeit", "Tag", None).unwrap(),
            CompoundEntry::new("Freitag", "frei", "Tag", None).unwrap(),
            CompoundEntry::new("Kirchhof", "Kirche", "Garten", None).unwrap(),
        ];
        let st = corpus_stats(&entries);
        assert_eq!(st.entries, 3);
        assert_eq!(st.distinct_modifiers, 3);
        assert_eq!(st.distinct_heads, 2);
        assert_eq!(st.modifier_hapaxes, 3);
        assert_eq!(st.head_hapaxes, 1);
        assert_eq!(st.unalignable, 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn word_strategy() -> impl Strategy<Value = String> {
            proptest::string::string_regex("[a-zäöüß]{2,8}").unwrap()
        }

        proptest! {
            #[test]
            fn split_file_roundtrip(words in proptest::collection::vec((word_strategy(), word_strategy(), word_strategy(), proptest::option::of(0u64..10_000)), 0..20)) {
                let entries: Vec<CompoundEntry> = words
                    .into_iter()
                    .map(|(s, m, h, f)| CompoundEntry::new(&s, &m, &h, f).unwrap())
                    .collect();
                let f = tempfile::NamedTempFile::new().unwrap();
                write_split_file(f.path(), &entries).unwrap();
                let back = parse_split_file(f.path()).unwrap();
                prop_assert_eq!(back, entries);
            }

            #[test]
            fn partition_is_a_bijection(n in 0usize..40, seed in 0u64..1000) {
                let items: Vec<usize> = (0..n).collect();
                let s = partition(&items, (0.8, 0.1, 0.1), seed).unwrap();
                let mut all: Vec<usize> = s.train.iter().chain(s.dev.iter()).chain(s.test.iter()).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, items);
            }
        }
    }
}
