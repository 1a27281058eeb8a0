//! Character-offset helpers. All public indices in this crate count unicode
//! scalar values, never bytes; these helpers bridge to byte offsets for
//! slicing.

/// Number of unicode scalar values in `s`.
pub(crate) fn char_count(s: &str) -> usize {
    s.chars().count()
}

/// Byte offset of every character boundary, including the end of the string.
/// `boundaries(s).len() == char_count(s) + 1`.
pub(crate) fn char_boundaries(s: &str) -> Vec<usize> {
    let mut out: Vec<usize> = s.char_indices().map(|(i, _)| i).collect();
    out.push(s.len());
    out
}

/// Slice `s` by character offsets `[start, end)`.
pub(crate) fn char_slice(s: &str, start: usize, end: usize) -> &str {
    let bounds = char_boundaries(s);
    &s[bounds[start]..bounds[end]]
}

/// Per-character lowercasing. Keeps the character count stable (multi-char
/// lowercase expansions are truncated to their first character), so offsets
/// computed on the folded form are valid for the original.
pub(crate) fn fold_lower(s: &str) -> String {
    s.chars()
        .map(|c| c.to_lowercase().next().unwrap_or(c))
        .collect()
}
