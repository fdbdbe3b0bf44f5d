//! Word- and sentence-level selection among pool segmentations.
//!
//! Each pool tokeniser segments a word independently; candidates are scored
//! against the merged substring corpus and the one with minimum entropy wins.
//! At sentence level the relative fertility reduction of the chosen output
//! versus the default tokeniser is computed; when it exceeds the pool's
//! threshold the whole sentence reverts to default segmentations.

use std::io::BufRead;

use serde::Serialize;

use crate::corpus::{normalise, SubstringCorpus};
use crate::error::{KtokError, Result};
use crate::tokeniser::{Segmentation, TokeniserPool};

/// Keeps entropies strictly negative by capping the probability below 1.
const PROB_CLAMP_EPSILON: f64 = 1e-12;

/// How a segmentation's probability is assembled from per-piece unigram
/// probabilities. The product reading is a unigram language-model score and
/// the default; the sum reading is kept for comparison, although it can
/// exceed 1 and is then no longer a probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ProbabilityMode {
    #[default]
    Product,
    Sum,
}

/// Scoring options. Smoothing adds one to each piece count and caps the
/// probability below 1 so the entropy is always defined; tests disable it
/// to check exact invariances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreConfig {
    pub mode: ProbabilityMode,
    pub disable_smoothing: bool,
}

/// Scores a segmentation against the merged corpus with default options:
/// probability is the product over pieces of smoothed unigram probabilities
/// `(count + 1) / (total + distinct)`, and the entropy is `p ln p`.
pub fn score(seg: &Segmentation, corpus: &SubstringCorpus, marker: &str) -> (f64, f64) {
    score_with(seg, corpus, marker, &ScoreConfig::default())
}

/// As [`score`] with explicit options.
pub fn score_with(
    seg: &Segmentation,
    corpus: &SubstringCorpus,
    marker: &str,
    config: &ScoreConfig,
) -> (f64, f64) {
    let total = corpus.total() as f64;
    let denominator = if config.disable_smoothing {
        total.max(1.0)
    } else {
        (total + corpus.distinct() as f64).max(1.0)
    };
    let add = if config.disable_smoothing { 0.0 } else { 1.0 };
    let piece_prob = |piece: &String| {
        let core = piece.strip_prefix(marker).unwrap_or(piece);
        (corpus.count(core) as f64 + add) / denominator
    };
    let p = match config.mode {
        ProbabilityMode::Product => seg.pieces.iter().map(piece_prob).product::<f64>(),
        ProbabilityMode::Sum => seg.pieces.iter().map(piece_prob).sum::<f64>(),
    };
    let p = match config.mode {
        ProbabilityMode::Product => p.clamp(f64::MIN_POSITIVE, 1.0 - PROB_CLAMP_EPSILON),
        // The sum reading may legitimately exceed 1; only guard the log.
        ProbabilityMode::Sum => p.max(f64::MIN_POSITIVE),
    };
    (p, p * p.ln())
}

/// One scored pool candidate for a word.
#[derive(Debug, Clone, Serialize)]
pub struct ScoredSegmentation {
    pub segmentation: Segmentation,
    pub probability: f64,
    pub entropy: f64,
    pub eligible: bool,
}

/// The pool's candidates for one word and the selected tokeniser.
#[derive(Debug, Clone, Serialize)]
pub struct WordChoice {
    pub word: String,
    pub candidates: Vec<ScoredSegmentation>,
    /// Identifier of the selected tokeniser.
    pub chosen: String,
}

impl WordChoice {
    pub fn chosen_segmentation(&self) -> &Segmentation {
        &self
            .candidates
            .iter()
            .find(|c| c.segmentation.source_id == self.chosen)
            .expect("chosen id always names a candidate")
            .segmentation
    }

    pub fn default_segmentation(&self) -> &Segmentation {
        // The default tokeniser is always the first candidate.
        &self.candidates[0].segmentation
    }

    pub fn eligible_ids(&self) -> Vec<&str> {
        self.candidates
            .iter()
            .filter(|c| c.eligible)
            .map(|c| c.segmentation.source_id.as_str())
            .collect()
    }

    /// True when the default won only because no augmented candidate was
    /// eligible, not because it scored best.
    pub fn default_by_ineligibility(&self) -> bool {
        self.chosen == self.candidates[0].segmentation.source_id
            && self.candidates.len() > 1
            && self.candidates[1..].iter().all(|c| !c.eligible)
    }
}

/// Per-sentence fertility accounting.
#[derive(Debug, Clone, Serialize)]
pub struct FertilityReport {
    /// Fertility of the default segmentation, word by word.
    pub default_per_word: Vec<usize>,
    /// Fertility of the chosen segmentation, word by word.
    pub chosen_per_word: Vec<usize>,
    pub default_total: usize,
    pub chosen_total: usize,
    /// Relative fertility reduction `(default - chosen) / default`;
    /// 0 for an empty sentence. Never exceeds 1.
    pub reduction: f64,
}

impl FertilityReport {
    fn from_choices(words: &[WordChoice]) -> Self {
        let default_per_word: Vec<usize> = words
            .iter()
            .map(|w| w.default_segmentation().fertility())
            .collect();
        let chosen_per_word: Vec<usize> = words
            .iter()
            .map(|w| w.chosen_segmentation().fertility())
            .collect();
        let default_total: usize = default_per_word.iter().sum();
        let chosen_total: usize = chosen_per_word.iter().sum();
        let reduction = if default_total == 0 {
            0.0
        } else {
            (default_total as f64 - chosen_total as f64) / default_total as f64
        };
        FertilityReport {
            default_per_word,
            chosen_per_word,
            default_total,
            chosen_total,
            reduction,
        }
    }
}

/// The pool's output for one sentence.
#[derive(Debug, Clone, Serialize)]
pub struct SentenceOutput {
    pub words: Vec<WordChoice>,
    /// True when the sentence reverted to default segmentations.
    pub gated: bool,
    /// Emitted pieces: default segmentations when gated, chosen otherwise.
    pub final_pieces: Vec<String>,
    pub report: FertilityReport,
}

/// Segments a word with every pool tokeniser and selects the eligible
/// candidate with minimum entropy.
///
/// The default candidate is always eligible; an augmented candidate is
/// eligible only when every piece's marker-stripped corpus count reaches the
/// pool's minimum frequency. Ties keep the earlier candidate in pool order
/// (default first).
pub fn word_optimise(word: &str, pool: &TokeniserPool) -> WordChoice {
    let corpus = pool.corpus();
    let marker = pool.default_tokeniser().marker();
    let mut candidates = Vec::new();
    for (index, tokeniser) in pool.tokenisers().enumerate() {
        let segmentation = tokeniser.tokenise_word(word);
        let (probability, entropy) = score_with(&segmentation, corpus, marker, pool.score_config());
        let eligible = index == 0
            || segmentation.pieces.iter().all(|piece| {
                let core = piece.strip_prefix(marker).unwrap_or(piece);
                corpus.count(core) >= pool.min_freq()
            });
        candidates.push(ScoredSegmentation {
            segmentation,
            probability,
            entropy,
            eligible,
        });
    }
    let chosen = candidates
        .iter()
        .filter(|c| c.eligible)
        .min_by(|a, b| a.entropy.total_cmp(&b.entropy))
        .expect("default candidate is always eligible")
        .segmentation
        .source_id
        .clone();
    WordChoice {
        word: word.to_string(),
        candidates,
        chosen,
    }
}

/// Optimises every word of a sentence, then applies the fertility gate:
/// when the relative fertility reduction strictly exceeds the pool's
/// threshold, default segmentations are emitted for the whole sentence.
pub fn sentence_optimise<S: AsRef<str>>(words: &[S], pool: &TokeniserPool) -> SentenceOutput {
    let choices: Vec<WordChoice> = words
        .iter()
        .map(|w| word_optimise(w.as_ref(), pool))
        .collect();
    let report = FertilityReport::from_choices(&choices);
    let gated = report.reduction > pool.fertility_threshold();
    let final_pieces = choices
        .iter()
        .flat_map(|choice| {
            if gated {
                choice.default_segmentation().pieces.clone()
            } else {
                choice.chosen_segmentation().pieces.clone()
            }
        })
        .collect();
    SentenceOutput {
        words: choices,
        gated,
        final_pieces,
        report,
    }
}

/// Streams sentence optimisation over line-oriented input (one sentence per
/// line). Lines are normalised and split on whitespace; output order matches
/// input order. Read failures carry the 1-based line number.
pub fn tokenise_corpus<'a, R: BufRead + 'a>(
    input: R,
    pool: &'a TokeniserPool,
) -> impl Iterator<Item = Result<(usize, SentenceOutput)>> + 'a {
    input.lines().enumerate().map(move |(idx, line)| {
        let lineno = idx + 1;
        let line = line.map_err(|e| KtokError::Parse {
            path: "<input>".into(),
            line: lineno,
            message: e.to_string(),
        })?;
        let words: Vec<String> = normalise(&line)
            .split_whitespace()
            .map(str::to_string)
            .collect();
        Ok((lineno, sentence_optimise(&words, pool)))
    })
}
