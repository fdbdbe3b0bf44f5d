//! Greedy longest-match tokenisation and the tokeniser pool.
//!
//! A [`Tokeniser`] segments one normalised word at a time against a vocabulary
//! of bare (word-initial) and continuation-marked (word-internal) subwords.
//! Augmenting the default tokeniser with learned semantic-type vocabularies
//! yields a [`TokeniserPool`]: the default tokeniser plus one augmented
//! tokeniser per semantic type, sharing a merged substring corpus for scoring
//! and an eligibility threshold.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::corpus::SubstringCorpus;
use crate::error::{KtokError, Result};
use crate::learner::LearnedVocab;
use crate::optimiser::ScoreConfig;

pub const DEFAULT_UNK_TOKEN: &str = "[UNK]";
pub const DEFAULT_MAX_WORD_CHARS: usize = 100;
pub const DEFAULT_CONTINUATION_MARKER: &str = "##";
pub const DEFAULT_MIN_FREQ: u64 = 1000;

/// Identifier of the default tokeniser in a pool.
pub const DEFAULT_TOKENISER_ID: &str = "base";

/// A greedy longest-match subword tokeniser.
///
/// For real baseline vocabularies every single letter and digit is present in
/// both bare and continuation form, which makes segmentation total on
/// normalised text; the type itself does not require it, and words that fail
/// to match at some position map to the unknown token as a whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokeniser {
    id: String,
    vocab: BTreeSet<String>,
    unk_token: String,
    max_input_chars_per_word: usize,
    marker: String,
    max_piece_chars: usize,
}

/// One tokeniser's segmentation of one word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segmentation {
    pub pieces: Vec<String>,
    pub source_id: String,
}

impl Segmentation {
    /// Number of subwords produced for the word.
    pub fn fertility(&self) -> usize {
        self.pieces.len()
    }

    /// Concatenation of the pieces with continuation markers stripped.
    /// Equals the source word unless the unknown token is present.
    pub fn concatenated(&self, marker: &str) -> String {
        self.pieces
            .iter()
            .map(|p| p.strip_prefix(marker).unwrap_or(p))
            .collect()
    }
}

impl Tokeniser {
    /// Builds a tokeniser over `vocab`, with the standard unknown token,
    /// marker and word-length cap. The unknown token is added to the
    /// vocabulary if absent.
    pub fn new(id: impl Into<String>, vocab: BTreeSet<String>) -> Self {
        Tokeniser::with_options(
            id,
            vocab,
            DEFAULT_UNK_TOKEN,
            DEFAULT_MAX_WORD_CHARS,
            DEFAULT_CONTINUATION_MARKER,
        )
    }

    pub fn with_options(
        id: impl Into<String>,
        mut vocab: BTreeSet<String>,
        unk_token: impl Into<String>,
        max_input_chars_per_word: usize,
        marker: impl Into<String>,
    ) -> Self {
        let unk_token = unk_token.into();
        let marker = marker.into();
        vocab.insert(unk_token.clone());
        let max_piece_chars = vocab
            .iter()
            .map(|p| p.strip_prefix(marker.as_str()).unwrap_or(p).chars().count())
            .max()
            .unwrap_or(1);
        Tokeniser {
            id: id.into(),
            vocab,
            unk_token,
            max_input_chars_per_word,
            marker,
            max_piece_chars,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    pub fn unk_token(&self) -> &str {
        &self.unk_token
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vocab.contains(token)
    }

    /// Greedy longest-match segmentation of a normalised word.
    ///
    /// Words longer than the configured cap, and words with no vocabulary
    /// match at some position, map to a single unknown token.
    pub fn tokenise_word(&self, word: &str) -> Segmentation {
        let pieces = if word.is_empty() || word.chars().count() > self.max_input_chars_per_word {
            None
        } else {
            self.match_pieces(word, true)
        };
        Segmentation {
            pieces: pieces.unwrap_or_else(|| vec![self.unk_token.clone()]),
            source_id: self.id.clone(),
        }
    }

    /// Segments the core of a continuation subword: every position matches
    /// against continuation-marked forms, so all returned pieces carry the
    /// marker. Returns `None` when some position has no match.
    pub fn tokenise_continuation(&self, core: &str) -> Option<Vec<String>> {
        if core.is_empty() || core.chars().count() > self.max_input_chars_per_word {
            return None;
        }
        self.match_pieces(core, false)
    }

    fn match_pieces(&self, word: &str, first_is_bare: bool) -> Option<Vec<String>> {
        let mut boundaries: Vec<usize> = word.char_indices().map(|(i, _)| i).collect();
        boundaries.push(word.len());
        let n_chars = boundaries.len() - 1;
        let mut pieces = Vec::new();
        let mut pos = 0;
        let mut key = String::new();
        while pos < n_chars {
            let bare = pos == 0 && first_is_bare;
            let limit = (pos + self.max_piece_chars).min(n_chars);
            let mut matched = None;
            for end in (pos + 1..=limit).rev() {
                let slice = &word[boundaries[pos]..boundaries[end]];
                key.clear();
                if !bare {
                    key.push_str(&self.marker);
                }
                key.push_str(slice);
                if self.vocab.contains(&key) {
                    matched = Some((end, key.clone()));
                    break;
                }
            }
            let (end, piece) = matched?;
            pieces.push(piece);
            pos = end;
        }
        Some(pieces)
    }
}

/// Extends a tokeniser's vocabulary with learned subwords. The result keeps
/// the base vocabulary in full and takes its id from the semantic type.
pub fn augment(base: &Tokeniser, learned: &LearnedVocab) -> Tokeniser {
    let mut vocab = base.vocab.clone();
    vocab.extend(learned.subwords.iter().cloned());
    Tokeniser::with_options(
        learned.semantic_type.name(),
        vocab,
        base.unk_token.clone(),
        base.max_input_chars_per_word,
        base.marker.clone(),
    )
}

/// The default tokeniser together with its semantic-type augmentations,
/// the merged substring corpus, and the selection thresholds.
#[derive(Debug, Clone)]
pub struct TokeniserPool {
    default: Tokeniser,
    augmented: Vec<Tokeniser>,
    corpus: SubstringCorpus,
    min_freq: u64,
    fertility_threshold: f64,
    score_config: ScoreConfig,
}

impl TokeniserPool {
    /// Assembles a pool from the default tokeniser and learned vocabularies.
    /// Augmented tokenisers keep the order of `learned`, which is also the
    /// tie-break priority after the default.
    pub fn build(
        default: Tokeniser,
        learned: &[LearnedVocab],
        corpus: SubstringCorpus,
        min_freq: u64,
        fertility_threshold: f64,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut augmented = Vec::with_capacity(learned.len());
        for vocab in learned {
            if !seen.insert(vocab.semantic_type.clone()) {
                return Err(KtokError::Config(format!(
                    "duplicate semantic type {} in pool",
                    vocab.semantic_type
                )));
            }
            augmented.push(augment(&default, vocab));
        }
        Ok(TokeniserPool {
            default,
            augmented,
            corpus,
            min_freq,
            fertility_threshold,
            score_config: ScoreConfig::default(),
        })
    }

    pub fn default_tokeniser(&self) -> &Tokeniser {
        &self.default
    }

    pub fn augmented(&self) -> &[Tokeniser] {
        &self.augmented
    }

    /// All tokenisers in priority order: the default first.
    pub fn tokenisers(&self) -> impl Iterator<Item = &Tokeniser> {
        std::iter::once(&self.default).chain(self.augmented.iter())
    }

    pub fn corpus(&self) -> &SubstringCorpus {
        &self.corpus
    }

    pub fn min_freq(&self) -> u64 {
        self.min_freq
    }

    pub fn fertility_threshold(&self) -> f64 {
        self.fertility_threshold
    }

    pub fn score_config(&self) -> &ScoreConfig {
        &self.score_config
    }

    pub fn with_fertility_threshold(&self, fertility_threshold: f64) -> Self {
        TokeniserPool {
            fertility_threshold,
            ..self.clone()
        }
    }

    pub fn with_min_freq(&self, min_freq: u64) -> Self {
        TokeniserPool {
            min_freq,
            ..self.clone()
        }
    }

    pub fn with_score_config(&self, score_config: ScoreConfig) -> Self {
        TokeniserPool {
            score_config,
            ..self.clone()
        }
    }

    pub fn with_corpus(&self, corpus: SubstringCorpus) -> Self {
        TokeniserPool { corpus, ..self.clone() }
    }
}

const VOCAB_HEADER_PREFIX: &str = "#ktok-vocab v1 type=";

/// Loads a tokeniser vocabulary.
///
/// Accepts the canonical headered format and, in compatibility mode, a plain
/// one-token-per-line baseline list (id `base`). The unknown token must be
/// present either way.
pub fn load_vocab(path: &Path) -> Result<Tokeniser> {
    let (type_name, tokens) = crate::learner::read_vocab_file(path)?;
    let id = type_name.unwrap_or_else(|| DEFAULT_TOKENISER_ID.to_string());
    let vocab: BTreeSet<String> = tokens.into_iter().collect();
    if !vocab.contains(DEFAULT_UNK_TOKEN) {
        return Err(KtokError::format(
            path,
            1,
            format!("vocabulary lacks the unknown token {DEFAULT_UNK_TOKEN:?}"),
        ));
    }
    Ok(Tokeniser::new(id, vocab))
}

/// Writes a tokeniser vocabulary in canonical form: a
/// `#ktok-vocab v1 type=<id>` header followed by sorted tokens.
pub fn save_vocab(tokeniser: &Tokeniser, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{VOCAB_HEADER_PREFIX}{}", tokeniser.id).expect("write to vec");
    for token in &tokeniser.vocab {
        writeln!(out, "{token}").expect("write to vec");
    }
    fs::write(path, out).map_err(|e| KtokError::io(path, e))
}

/// Inserts bare and continuation forms of the ascii letters, digits and
/// hyphen. Guarantees that any normalised word segments without the unknown
/// token; handy for fixture and test vocabularies.
pub fn with_char_coverage(mut vocab: BTreeSet<String>) -> BTreeSet<String> {
    for c in ('a'..='z').chain('0'..='9').chain(std::iter::once('-')) {
        vocab.insert(c.to_string());
        vocab.insert(format!("{DEFAULT_CONTINUATION_MARKER}{c}"));
    }
    vocab
}
