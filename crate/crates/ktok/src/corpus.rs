//! Concept lexicon ingestion and substring-frequency corpora.
//!
//! A concept lexicon is a TSV file of `surface<TAB>frequency` lines, one per
//! concept, grouped by semantic type (e.g. drug or disease). Surfaces are
//! normalised, multi-word concepts are split into word-level entries, and the
//! words are expanded into substring-frequency sub-corpora. Sub-corpora merge
//! pointwise into the combined corpus used for scoring and eligibility.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{KtokError, Result};

/// Substrings longer than this are not counted when expanding a word.
/// Bounds memory on pathological inputs; clinically interesting subwords
/// are far shorter.
pub const DEFAULT_SUBSTRING_LEN_CAP: usize = 24;

/// Label given to a merged corpus.
pub const MERGED_CORPUS_LABEL: &str = "C";

const CORPUS_HEADER_PREFIX: &str = "#ktok-corpus v1 total=";

/// A semantic-type identifier such as `drug` or `disease`.
///
/// Identifiers are lowercase and non-empty; the set is open-ended so callers
/// can introduce further types beyond the two built-in groupings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SemanticType(String);

impl SemanticType {
    pub fn new(name: &str) -> Result<Self> {
        if name.is_empty() {
            return Err(KtokError::Config("semantic type must be non-empty".into()));
        }
        let ok = name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_');
        if !ok {
            return Err(KtokError::Config(format!(
                "semantic type {name:?} must be lowercase ascii ([a-z0-9_-])"
            )));
        }
        Ok(SemanticType(name.to_string()))
    }

    pub fn drug() -> Self {
        SemanticType("drug".to_string())
    }

    pub fn disease() -> Self {
        SemanticType("disease".to_string())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A normalised word-level concept with its frequency weight.
///
/// The frequency is treated as an opaque weight; whether it came from raw
/// mention counts or document counts does not matter downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptEntry {
    pub surface: String,
    pub frequency: u64,
    pub semantic_type: SemanticType,
}

/// A frequency map over character substrings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstringCorpus {
    entries: BTreeMap<String, u64>,
    total: u64,
    label: String,
}

impl SubstringCorpus {
    pub fn new(label: impl Into<String>) -> Self {
        SubstringCorpus {
            entries: BTreeMap::new(),
            total: 0,
            label: label.into(),
        }
    }

    /// Builds a corpus directly from `(substring, count)` pairs.
    /// Empty keys and zero counts are rejected.
    pub fn from_entries<I, S>(label: impl Into<String>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut corpus = SubstringCorpus::new(label);
        for (key, count) in pairs {
            corpus.add(key.into(), count)?;
        }
        Ok(corpus)
    }

    fn add(&mut self, key: String, count: u64) -> Result<()> {
        if key.is_empty() {
            return Err(KtokError::Config("corpus keys must be non-empty".into()));
        }
        if count == 0 {
            return Ok(());
        }
        *self.entries.entry(key).or_insert(0) += count;
        self.total += count;
        Ok(())
    }

    pub fn count(&self, key: &str) -> u64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct substrings.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Multiplies every count by `factor`. Used by scale-invariance tests.
    pub fn scaled(&self, factor: u64) -> SubstringCorpus {
        SubstringCorpus {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
            total: self.total * factor,
            label: self.label.clone(),
        }
    }
}

/// Lowercases, strips characters outside `[a-z0-9-]` and whitespace,
/// collapses whitespace runs to single spaces, and trims.
///
/// Total and idempotent; may return an empty string.
pub fn normalise(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    let mut pending_space = false;
    for ch in lowered.chars() {
        if ch.is_whitespace() {
            if !out.is_empty() {
                pending_space = true;
            }
            continue;
        }
        if ch.is_ascii_lowercase() || ch.is_ascii_digit() || ch == '-' {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Loads a concept lexicon from a `surface<TAB>frequency` TSV file.
///
/// `#`-prefixed comment lines and blank lines are skipped. Surfaces are
/// normalised and multi-word surfaces split into word-level entries, each
/// inheriting the concept frequency; duplicate words have their frequencies
/// summed. Entries are returned sorted by surface.
pub fn load_concepts(path: &Path, semantic_type: SemanticType) -> Result<Vec<ConceptEntry>> {
    let text = fs::read_to_string(path).map_err(|e| KtokError::io(path, e))?;
    let mut grouped: BTreeMap<String, u64> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (surface_raw, freq_raw) = line
            .split_once('\t')
            .ok_or_else(|| KtokError::parse(path, lineno, "expected `surface<TAB>frequency`"))?;
        let frequency: u64 = freq_raw.trim().parse().map_err(|_| {
            KtokError::parse(path, lineno, format!("invalid frequency {freq_raw:?}"))
        })?;
        if frequency == 0 {
            return Err(KtokError::parse(path, lineno, "frequency must be >= 1"));
        }
        // A surface may normalise to nothing (e.g. all-symbol lines); such
        // lines contribute no entries.
        for word in normalise(surface_raw).split_whitespace() {
            *grouped.entry(word.to_string()).or_insert(0) += frequency;
        }
    }
    if grouped.is_empty() {
        return Err(KtokError::EmptyInput(format!(
            "{} contains no usable concepts",
            path.display()
        )));
    }
    Ok(grouped
        .into_iter()
        .map(|(surface, frequency)| ConceptEntry {
            surface,
            frequency,
            semantic_type: semantic_type.clone(),
        })
        .collect())
}

/// Expands concepts into a substring-frequency corpus.
///
/// Every contiguous substring of each concept word (up to
/// [`DEFAULT_SUBSTRING_LEN_CAP`] characters) is counted once per occurrence
/// position, weighted by the concept frequency; overlapping occurrences all
/// count. The corpus label is the concepts' semantic type.
pub fn build_substring_corpus(concepts: &[ConceptEntry]) -> Result<SubstringCorpus> {
    build_substring_corpus_capped(concepts, DEFAULT_SUBSTRING_LEN_CAP)
}

/// As [`build_substring_corpus`] with an explicit substring length cap.
pub fn build_substring_corpus_capped(
    concepts: &[ConceptEntry],
    len_cap: usize,
) -> Result<SubstringCorpus> {
    let first = concepts
        .first()
        .ok_or_else(|| KtokError::EmptyInput("no concepts to expand".into()))?;
    if len_cap == 0 {
        return Err(KtokError::Config("substring length cap must be >= 1".into()));
    }
    let mut corpus = SubstringCorpus::new(first.semantic_type.name());
    for concept in concepts {
        if concept.semantic_type != first.semantic_type {
            return Err(KtokError::Config(format!(
                "mixed semantic types in one sub-corpus: {} vs {}",
                first.semantic_type, concept.semantic_type
            )));
        }
        let chars: Vec<char> = concept.surface.chars().collect();
        for start in 0..chars.len() {
            let max_end = (start + len_cap).min(chars.len());
            for end in start + 1..=max_end {
                let sub: String = chars[start..end].iter().collect();
                corpus.add(sub, concept.frequency)?;
            }
        }
    }
    Ok(corpus)
}

/// Pointwise sum of substring corpora, labelled [`MERGED_CORPUS_LABEL`].
pub fn merge_corpora(parts: &[SubstringCorpus]) -> Result<SubstringCorpus> {
    if parts.is_empty() {
        return Err(KtokError::EmptyInput("no corpora to merge".into()));
    }
    let mut merged = SubstringCorpus::new(MERGED_CORPUS_LABEL);
    for part in parts {
        for (key, count) in part.iter() {
            merged.add(key.to_string(), count)?;
        }
    }
    Ok(merged)
}

/// Writes a corpus in its canonical file form: a `#ktok-corpus v1 total=<N>`
/// header followed by `substring<TAB>count` lines sorted by
/// (count descending, substring ascending).
pub fn save_corpus(corpus: &SubstringCorpus, path: &Path) -> Result<()> {
    let mut rows: Vec<(&str, u64)> = corpus.iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut out = Vec::new();
    writeln!(out, "{CORPUS_HEADER_PREFIX}{}", corpus.total()).expect("write to vec");
    for (key, count) in rows {
        writeln!(out, "{key}\t{count}").expect("write to vec");
    }
    fs::write(path, out).map_err(|e| KtokError::io(path, e))
}

/// Reads a corpus file written by [`save_corpus`].
///
/// The loaded corpus carries the merged-corpus label; the file format does
/// not record one. The header total is checked against the entry sum.
pub fn load_corpus(path: &Path) -> Result<SubstringCorpus> {
    let text = fs::read_to_string(path).map_err(|e| KtokError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| KtokError::format(path, 1, "missing header"))?;
    let declared: u64 = header
        .strip_prefix(CORPUS_HEADER_PREFIX)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| {
            KtokError::format(path, 1, format!("expected `{CORPUS_HEADER_PREFIX}<N>`"))
        })?;
    let mut corpus = SubstringCorpus::new(MERGED_CORPUS_LABEL);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (key, count_raw) = line
            .split_once('\t')
            .ok_or_else(|| KtokError::format(path, lineno, "expected `substring<TAB>count`"))?;
        if key.is_empty() {
            return Err(KtokError::format(path, lineno, "empty substring"));
        }
        if corpus.entries.contains_key(key) {
            return Err(KtokError::format(
                path,
                lineno,
                format!("duplicate substring {key:?}"),
            ));
        }
        let count: u64 = count_raw
            .parse()
            .map_err(|_| KtokError::format(path, lineno, format!("invalid count {count_raw:?}")))?;
        corpus.add(key.to_string(), count)?;
    }
    if corpus.total() != declared {
        return Err(KtokError::format(
            path,
            1,
            format!("header total {declared} != entry sum {}", corpus.total()),
        ));
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(surface: &str, frequency: u64) -> ConceptEntry {
        ConceptEntry {
            surface: surface.to_string(),
            frequency,
            semantic_type: SemanticType::drug(),
        }
    }

    #[test]
    fn normalise_case_folds_and_trims() {
        assert_eq!(normalise("AtenoLOL "), "atenolol");
    }

    #[test]
    fn normalise_drops_disallowed_characters() {
        // Hand-applied character-class filter: the Greek letter and the
        // exclamation marks go, the hyphen stays.
        assert_eq!(normalise("β-blocker!!"), "-blocker");
    }

    #[test]
    fn normalise_empty_is_empty() {
        assert_eq!(normalise(""), "");
    }

    #[test]
    fn normalise_collapses_inner_whitespace() {
        assert_eq!(normalise("  Mitral \t  Valve  "), "mitral valve");
    }

    proptest! {
        #[test]
        fn normalise_is_idempotent(raw in "\\PC*") {
            let once = normalise(&raw);
            prop_assert_eq!(normalise(&once), once);
        }
    }

    #[test]
    fn load_concepts_single_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "atenolol\t3\n").unwrap();
        let entries = load_concepts(&path, SemanticType::drug()).unwrap();
        assert_eq!(entries, vec![entry("atenolol", 3)]);
    }

    #[test]
    fn load_concepts_splits_multiword_surfaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "Mitral Valve\t2\n").unwrap();
        let entries = load_concepts(&path, SemanticType::disease()).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].surface, "mitral");
        assert_eq!(entries[1].surface, "valve");
        assert!(entries.iter().all(|e| e.frequency == 2));
    }

    #[test]
    fn load_concepts_sums_duplicate_surfaces() {
        // Oracle: group by surface and sum the frequencies: 3 + 4 = 7.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "atenolol\t3\natenolol\t4\n").unwrap();
        let entries = load_concepts(&path, SemanticType::drug()).unwrap();
        assert_eq!(entries, vec![entry("atenolol", 7)]);
    }

    #[test]
    fn load_concepts_skips_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "# lexicon\natenolol\t3\n\n").unwrap();
        let entries = load_concepts(&path, SemanticType::drug()).unwrap();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn load_concepts_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "atenolol\t3\nbroken line\n").unwrap();
        let err = load_concepts(&path, SemanticType::drug()).unwrap_err();
        match err {
            KtokError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn load_concepts_rejects_bad_frequency() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "atenolol\tmany\n").unwrap();
        assert!(matches!(
            load_concepts(&path, SemanticType::drug()),
            Err(KtokError::Parse { line: 1, .. })
        ));
        std::fs::write(&path, "atenolol\t0\n").unwrap();
        assert!(matches!(
            load_concepts(&path, SemanticType::drug()),
            Err(KtokError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn load_concepts_rejects_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            load_concepts(&path, SemanticType::drug()),
            Err(KtokError::EmptyInput(_))
        ));
    }

    #[test]
    fn substring_corpus_two_char_word() {
        let corpus = build_substring_corpus(&[entry("ab", 1)]).unwrap();
        assert_eq!(corpus.count("a"), 1);
        assert_eq!(corpus.count("b"), 1);
        assert_eq!(corpus.count("ab"), 1);
        assert_eq!(corpus.total(), 3);
        assert_eq!(corpus.distinct(), 3);
    }

    #[test]
    fn substring_corpus_counts_overlapping_occurrences() {
        // Positional enumeration of "aa": "a" occurs at two positions and
        // "aa" at one, each weighted by frequency 2.
        let corpus = build_substring_corpus(&[entry("aa", 2)]).unwrap();
        assert_eq!(corpus.count("a"), 4);
        assert_eq!(corpus.count("aa"), 2);
        assert_eq!(corpus.total(), 6);
    }

    #[test]
    fn substring_corpus_is_linear_in_frequency() {
        let single = build_substring_corpus(&[entry("ab", 1)]).unwrap();
        let doubled = build_substring_corpus(&[entry("ab", 2)]).unwrap();
        for (key, count) in single.iter() {
            assert_eq!(doubled.count(key), 2 * count);
        }
        assert_eq!(doubled.total(), 2 * single.total());
    }

    #[test]
    fn substring_corpus_rejects_empty_and_mixed_input() {
        assert!(matches!(
            build_substring_corpus(&[]),
            Err(KtokError::EmptyInput(_))
        ));
        let mixed = vec![
            entry("ab", 1),
            ConceptEntry {
                surface: "cd".into(),
                frequency: 1,
                semantic_type: SemanticType::disease(),
            },
        ];
        assert!(matches!(
            build_substring_corpus(&mixed),
            Err(KtokError::Config(_))
        ));
    }

    #[test]
    fn substring_corpus_honours_length_cap() {
        let corpus = build_substring_corpus_capped(&[entry("abcd", 1)], 2).unwrap();
        assert_eq!(corpus.count("ab"), 1);
        assert_eq!(corpus.count("abc"), 0);
        assert_eq!(corpus.count("abcd"), 0);
    }

    proptest! {
        /// A word of length L with all-distinct characters has L(L+1)/2
        /// distinct substrings, each counted once.
        #[test]
        fn distinct_char_words_have_triangular_counts(len in 1usize..=20) {
            let alphabet = "abcdefghijklmnopqrst";
            let word = &alphabet[..len];
            let corpus = build_substring_corpus(&[entry(word, 1)]).unwrap();
            let expected = len * (len + 1) / 2;
            prop_assert_eq!(corpus.distinct(), expected);
            prop_assert_eq!(corpus.total(), expected as u64);
        }

        /// Doubling every input frequency doubles every output count.
        #[test]
        fn corpus_counts_scale_with_frequency(
            words in proptest::collection::vec("[a-c]{1,6}", 1..5),
            freqs in proptest::collection::vec(1u64..20, 5),
        ) {
            let base: Vec<ConceptEntry> = words
                .iter()
                .zip(&freqs)
                .map(|(w, f)| entry(w, *f))
                .collect();
            let doubled: Vec<ConceptEntry> = words
                .iter()
                .zip(&freqs)
                .map(|(w, f)| entry(w, 2 * *f))
                .collect();
            let c1 = build_substring_corpus(&base).unwrap();
            let c2 = build_substring_corpus(&doubled).unwrap();
            for (key, count) in c1.iter() {
                prop_assert_eq!(c2.count(key), 2 * count);
            }
            prop_assert_eq!(c2.total(), 2 * c1.total());
        }
    }

    #[test]
    fn merge_is_pointwise_addition() {
        let a = SubstringCorpus::from_entries("drug", [("a", 1u64)]).unwrap();
        let b = SubstringCorpus::from_entries("disease", [("a", 2u64), ("b", 1u64)]).unwrap();
        let merged = merge_corpora(&[a, b]).unwrap();
        assert_eq!(merged.count("a"), 3);
        assert_eq!(merged.count("b"), 1);
        assert_eq!(merged.total(), 4);
        assert_eq!(merged.label(), "C");
    }

    #[test]
    fn merge_single_part_is_identity_up_to_label() {
        let a = SubstringCorpus::from_entries("drug", [("ab", 3u64), ("b", 1u64)]).unwrap();
        let merged = merge_corpora(std::slice::from_ref(&a)).unwrap();
        assert_eq!(merged.count("ab"), 3);
        assert_eq!(merged.count("b"), 1);
        assert_eq!(merged.total(), a.total());
    }

    #[test]
    fn merge_rejects_empty_input() {
        assert!(matches!(merge_corpora(&[]), Err(KtokError::EmptyInput(_))));
    }

    proptest! {
        /// Merging is commutative and associative.
        #[test]
        fn merge_is_order_independent(
            pairs_a in proptest::collection::btree_map("[a-c]{1,3}", 1u64..50, 0..6),
            pairs_b in proptest::collection::btree_map("[a-c]{1,3}", 1u64..50, 0..6),
            pairs_c in proptest::collection::btree_map("[a-c]{1,3}", 1u64..50, 1..6),
        ) {
            let a = SubstringCorpus::from_entries("a", pairs_a).unwrap();
            let b = SubstringCorpus::from_entries("b", pairs_b).unwrap();
            let c = SubstringCorpus::from_entries("c", pairs_c).unwrap();
            let abc = merge_corpora(&[a.clone(), b.clone(), c.clone()]).unwrap();
            let cba = merge_corpora(&[c.clone(), b.clone(), a.clone()]).unwrap();
            prop_assert_eq!(&abc, &cba);
            let ab = merge_corpora(&[a, b]).unwrap();
            let ab_c = merge_corpora(&[ab, c]).unwrap();
            prop_assert_eq!(&abc, &ab_c);
        }
    }

    #[test]
    fn corpus_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        let corpus =
            SubstringCorpus::from_entries("drug", [("ol", 10u64), ("a", 10u64), ("olol", 3u64)])
                .unwrap();
        save_corpus(&corpus, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // Sorted by count descending then substring ascending.
        assert_eq!(text, "#ktok-corpus v1 total=23\na\t10\nol\t10\nolol\t3\n");
        let loaded = load_corpus(&path).unwrap();
        save_corpus(&loaded, dir.path().join("c2.tsv").as_path()).unwrap();
        let text2 = std::fs::read_to_string(dir.path().join("c2.tsv")).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn corpus_load_rejects_bad_total_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "#ktok-corpus v1 total=5\na\t1\n").unwrap();
        assert!(matches!(load_corpus(&path), Err(KtokError::Format { .. })));
        std::fs::write(&path, "#ktok-corpus v1 total=2\na\t1\na\t1\n").unwrap();
        assert!(matches!(
            load_corpus(&path),
            Err(KtokError::Format { line: 3, .. })
        ));
    }
}
