//! Semantic-type subword learning.
//!
//! The learner runs budget-limited pair merging over a concept set, decodes
//! each concept by greedy longest-match over the candidates its own merge
//! history produced, syllable-splits over-long word-initial pieces, and keeps
//! exactly the pieces some decode emitted. Candidate subwords never emitted
//! by any decode are discarded.
//!
//! Word-initial pieces are stored bare; word-internal pieces carry the
//! continuation marker (`##` by default).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::corpus::{ConceptEntry, SemanticType, SubstringCorpus};
use crate::error::{KtokError, Result};

const VOCAB_HEADER_PREFIX: &str = "#ktok-vocab v1 type=";
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

/// Tuning knobs for vocabulary learning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerConfig {
    /// Maximum number of merge operations applied to any single concept.
    pub budget_alpha: usize,
    /// Minimum weighted pair frequency required to merge. Merging hapax
    /// pairs produces noise vocabulary, so the default is 2.
    pub min_pair_count: u64,
    /// Word-initial pieces longer than this are syllable-split.
    pub prefix_syllable_len: usize,
    /// Marker prefixed to word-internal subwords.
    pub continuation_marker: String,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            budget_alpha: 20,
            min_pair_count: 2,
            prefix_syllable_len: 4,
            continuation_marker: "##".to_string(),
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget_alpha == 0 {
            return Err(KtokError::Config("budget_alpha must be >= 1".into()));
        }
        if self.prefix_syllable_len == 0 {
            return Err(KtokError::Config("prefix_syllable_len must be >= 1".into()));
        }
        if self.continuation_marker.is_empty() {
            return Err(KtokError::Config(
                "continuation_marker must be non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// The merge history of a learning run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTable {
    /// Globally ordered merge operations. No pair appears twice.
    pub merges: Vec<(String, String)>,
    /// Per concept: every marked candidate form its merge history produced,
    /// in discovery order (characters by position, then merged symbols).
    pub per_concept: BTreeMap<String, Vec<String>>,
}

/// A learned semantic-type subword vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedVocab {
    pub semantic_type: SemanticType,
    /// Word-initial forms bare, word-internal forms continuation-marked.
    pub subwords: BTreeSet<String>,
    /// Substring-corpus count per subword (marker-stripped lookup);
    /// subwords absent from the corpus are recorded with count 0.
    pub frequencies: BTreeMap<String, u64>,
}

struct ConceptState {
    word: String,
    frequency: u64,
    seq: Vec<String>,
    merges_applied: usize,
    candidates: Vec<String>,
    seen: BTreeSet<String>,
}

impl ConceptState {
    fn new(word: &str, frequency: u64, marker: &str) -> Self {
        let mut state = ConceptState {
            word: word.to_string(),
            frequency,
            seq: word.chars().map(String::from).collect(),
            merges_applied: 0,
            candidates: Vec::new(),
            seen: BTreeSet::new(),
        };
        let symbols: Vec<String> = state.seq.clone();
        for (pos, symbol) in symbols.iter().enumerate() {
            state.record(symbol, pos == 0, marker);
        }
        state
    }

    fn record(&mut self, symbol: &str, word_initial: bool, marker: &str) {
        let marked = if word_initial {
            symbol.to_string()
        } else {
            format!("{marker}{symbol}")
        };
        if self.seen.insert(marked.clone()) {
            self.candidates.push(marked);
        }
    }

    /// Replaces non-overlapping left-to-right occurrences of the pair.
    /// Returns true when at least one occurrence was merged.
    fn apply_merge(&mut self, left: &str, right: &str, marker: &str) -> bool {
        let mut next = Vec::with_capacity(self.seq.len());
        let mut i = 0;
        let mut changed = false;
        while i < self.seq.len() {
            if i + 1 < self.seq.len() && self.seq[i] == left && self.seq[i + 1] == right {
                let merged = format!("{}{}", self.seq[i], self.seq[i + 1]);
                let word_initial = next.is_empty();
                self.record(&merged, word_initial, marker);
                next.push(merged);
                changed = true;
                i += 2;
            } else {
                next.push(self.seq[i].clone());
                i += 1;
            }
        }
        self.seq = next;
        changed
    }
}

/// Learns a merge table over the concept set.
///
/// Each step counts every adjacent symbol pair across all still-active
/// concepts, weighted by concept frequency, and merges the most frequent
/// pair everywhere it occurs (ties broken by lexicographically smallest
/// `(left, right)`). A concept stops participating once `budget_alpha`
/// merges have been applied to it; learning stops when no pair reaches
/// `min_pair_count`.
pub fn bpe_learn(concepts: &[ConceptEntry], config: &LearnerConfig) -> Result<MergeTable> {
    config.validate()?;
    if concepts.is_empty() {
        return Err(KtokError::EmptyInput("no concepts to learn from".into()));
    }
    let marker = config.continuation_marker.as_str();

    // Collapse duplicate surfaces, summing their weights.
    let mut grouped: BTreeMap<&str, u64> = BTreeMap::new();
    for concept in concepts {
        if concept.surface.is_empty() {
            continue;
        }
        *grouped.entry(concept.surface.as_str()).or_insert(0) += concept.frequency;
    }
    if grouped.is_empty() {
        return Err(KtokError::EmptyInput("all concept surfaces empty".into()));
    }
    let mut states: Vec<ConceptState> = grouped
        .iter()
        .map(|(word, freq)| ConceptState::new(word, *freq, marker))
        .collect();

    let mut merges: Vec<(String, String)> = Vec::new();
    loop {
        let mut census: BTreeMap<(&str, &str), u64> = BTreeMap::new();
        for state in states.iter().filter(|s| s.merges_applied < config.budget_alpha) {
            for pair in state.seq.windows(2) {
                *census
                    .entry((pair[0].as_str(), pair[1].as_str()))
                    .or_insert(0) += state.frequency;
            }
        }
        // BTreeMap iteration is ascending, so keeping strict maxima leaves
        // the lexicographically smallest pair on ties.
        let best = census
            .iter()
            .fold(None::<(&(&str, &str), u64)>, |acc, (pair, count)| match acc {
                Some((_, best_count)) if *count <= best_count => acc,
                _ => Some((pair, *count)),
            });
        let Some((&(left, right), count)) = best else {
            break;
        };
        if count < config.min_pair_count {
            break;
        }
        let (left, right) = (left.to_string(), right.to_string());
        for state in &mut states {
            if state.merges_applied >= config.budget_alpha {
                continue;
            }
            if state.apply_merge(&left, &right, marker) {
                state.merges_applied += 1;
            }
        }
        merges.push((left, right));
    }

    Ok(MergeTable {
        merges,
        per_concept: states
            .into_iter()
            .map(|s| (s.word, s.candidates))
            .collect(),
    })
}

/// Greedy longest-match left-to-right decoding of `word` over a set of
/// marked candidate subwords: the match at position 0 uses the bare form,
/// later matches use continuation-marked forms.
pub fn greedy_decode(word: &str, candidates: &BTreeSet<String>, marker: &str) -> Result<Vec<String>> {
    let mut boundaries: Vec<usize> = word.char_indices().map(|(i, _)| i).collect();
    boundaries.push(word.len());
    let n_chars = boundaries.len() - 1;
    let mut pieces = Vec::new();
    let mut pos = 0;
    let mut key = String::new();
    while pos < n_chars {
        let mut matched = None;
        for end in (pos + 1..=n_chars).rev() {
            let slice = &word[boundaries[pos]..boundaries[end]];
            key.clear();
            if pos > 0 {
                key.push_str(marker);
            }
            key.push_str(slice);
            if candidates.contains(&key) {
                matched = Some((end, key.clone()));
                break;
            }
        }
        match matched {
            Some((end, piece)) => {
                pieces.push(piece);
                pos = end;
            }
            None => {
                return Err(KtokError::Decode {
                    word: word.to_string(),
                    position: pos,
                })
            }
        }
    }
    Ok(pieces)
}

/// Splits a word-initial piece into syllables when it exceeds the configured
/// length: a break is placed before every consonant that is immediately
/// followed by a vowel. Pieces after the first carry the continuation marker.
pub fn syllable_split(subword: &str, config: &LearnerConfig) -> Vec<String> {
    let chars: Vec<char> = subword.chars().collect();
    if chars.len() <= config.prefix_syllable_len {
        return vec![subword.to_string()];
    }
    let is_vowel = |c: char| VOWELS.contains(&c);
    let is_consonant = |c: char| c.is_ascii_alphabetic() && !is_vowel(c);
    let mut breaks = Vec::new();
    for i in 1..chars.len().saturating_sub(1) {
        if is_consonant(chars[i]) && is_vowel(chars[i + 1]) {
            breaks.push(i);
        }
    }
    if breaks.is_empty() {
        return vec![subword.to_string()];
    }
    let mut pieces = Vec::with_capacity(breaks.len() + 1);
    let mut start = 0;
    for brk in breaks.into_iter().chain(std::iter::once(chars.len())) {
        if brk == start {
            continue;
        }
        let core: String = chars[start..brk].iter().collect();
        if start == 0 {
            pieces.push(core);
        } else {
            pieces.push(format!("{}{}", config.continuation_marker, core));
        }
        start = brk;
    }
    pieces
}

/// Learns the semantic-type subword vocabulary for a concept set.
///
/// Runs [`bpe_learn`], decodes each concept over its own candidates,
/// syllable-splits each concept's first piece, and unions the emitted pieces.
/// Frequencies are copied from `corpus` by marker-stripped lookup.
pub fn learn_vocab(
    concepts: &[ConceptEntry],
    corpus: &SubstringCorpus,
    config: &LearnerConfig,
) -> Result<LearnedVocab> {
    let semantic_type = concepts
        .first()
        .ok_or_else(|| KtokError::EmptyInput("no concepts to learn from".into()))?
        .semantic_type
        .clone();
    let table = bpe_learn(concepts, config)?;
    let marker = config.continuation_marker.as_str();

    let mut subwords = BTreeSet::new();
    for (word, candidates) in &table.per_concept {
        let candidate_set: BTreeSet<String> = candidates.iter().cloned().collect();
        let decoded = greedy_decode(word, &candidate_set, marker)?;
        let mut pieces = syllable_split(&decoded[0], config);
        pieces.extend(decoded[1..].iter().cloned());
        subwords.extend(pieces);
    }

    let frequencies = subwords
        .iter()
        .map(|sw| {
            let core = sw.strip_prefix(marker).unwrap_or(sw);
            (sw.clone(), corpus.count(core))
        })
        .collect();

    Ok(LearnedVocab {
        semantic_type,
        subwords,
        frequencies,
    })
}

/// Path of the companion frequency file for a vocabulary file.
pub fn frequency_companion_path(vocab_path: &Path) -> PathBuf {
    let mut name = vocab_path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".freq");
    vocab_path.with_file_name(name)
}

/// Writes a learned vocabulary: a `#ktok-vocab v1 type=<t>` header followed
/// by one subword per line in sorted order, plus a companion `<path>.freq`
/// frequency file in the substring-corpus TSV format.
pub fn save_learned_vocab(vocab: &LearnedVocab, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{VOCAB_HEADER_PREFIX}{}", vocab.semantic_type).expect("write to vec");
    for subword in &vocab.subwords {
        writeln!(out, "{subword}").expect("write to vec");
    }
    fs::write(path, out).map_err(|e| KtokError::io(path, e))?;

    let freq_corpus = SubstringCorpus::from_entries(
        vocab.semantic_type.name(),
        vocab
            .frequencies
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .filter(|(_, v)| *v > 0),
    )?;
    crate::corpus::save_corpus(&freq_corpus, &frequency_companion_path(path))
}

/// Reads a learned vocabulary written by [`save_learned_vocab`]. The
/// companion frequency file is optional; missing entries default to 0.
pub fn load_learned_vocab(path: &Path) -> Result<LearnedVocab> {
    let (type_name, tokens) = read_vocab_file(path)?;
    let type_name = type_name.ok_or_else(|| {
        KtokError::format(path, 1, format!("expected `{VOCAB_HEADER_PREFIX}<type>`"))
    })?;
    let semantic_type = SemanticType::new(&type_name)?;
    let subwords: BTreeSet<String> = tokens.into_iter().collect();
    for subword in &subwords {
        if subword.strip_prefix("##").is_some_and(str::is_empty) {
            return Err(KtokError::format(
                path,
                1,
                "continuation subword with empty core".to_string(),
            ));
        }
    }

    let freq_path = frequency_companion_path(path);
    let counts = if freq_path.exists() {
        crate::corpus::load_corpus(&freq_path)?
    } else {
        SubstringCorpus::new(semantic_type.name())
    };
    let frequencies = subwords
        .iter()
        .map(|sw| (sw.clone(), counts.count(sw)))
        .collect();
    Ok(LearnedVocab {
        semantic_type,
        subwords,
        frequencies,
    })
}

/// Reads a vocabulary file: an optional `#ktok-vocab v1 type=<t>` header and
/// one token per line. Returns the declared type (if any) and the tokens in
/// file order. Duplicate tokens are rejected with their line number.
pub(crate) fn read_vocab_file(path: &Path) -> Result<(Option<String>, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| KtokError::io(path, e))?;
    let mut tokens = Vec::new();
    let mut seen = BTreeSet::new();
    let mut type_name = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if lineno == 1 {
            if let Some(t) = line.strip_prefix(VOCAB_HEADER_PREFIX) {
                type_name = Some(t.to_string());
                continue;
            }
        }
        if line.is_empty() {
            continue;
        }
        if !seen.insert(line.to_string()) {
            return Err(KtokError::format(
                path,
                lineno,
                format!("duplicate token {line:?}"),
            ));
        }
        tokens.push(line.to_string());
    }
    Ok((type_name, tokens))
}
