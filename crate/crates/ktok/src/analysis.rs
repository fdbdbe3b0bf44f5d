//! Desk-scale tokeniser analyses: fertility by annotation class, selection
//! audits over concept lists, and fertility-threshold sweeps.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::corpus::normalise;
use crate::error::{KtokError, Result};
use crate::optimiser::{sentence_optimise, word_optimise};
use crate::tokeniser::TokeniserPool;

/// A word with its BIO label (`B-<class>`, `I-<class>` or `O`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub word: String,
    pub bio_label: String,
}

impl AnnotatedToken {
    /// The class the token counts towards: `B-` and `I-` prefixes merge
    /// into the bare class name, `O` stands alone.
    pub fn class(&self) -> &str {
        self.bio_label
            .strip_prefix("B-")
            .or_else(|| self.bio_label.strip_prefix("I-"))
            .unwrap_or(&self.bio_label)
    }
}

/// Reads BIO annotations from a `word<TAB>label` TSV; blank lines separate
/// sentences and are skipped here (the analyses are word-level).
pub fn load_bio(path: &Path) -> Result<Vec<AnnotatedToken>> {
    let text = fs::read_to_string(path).map_err(|e| KtokError::io(path, e))?;
    let mut tokens = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (word, label) = line
            .split_once('\t')
            .ok_or_else(|| KtokError::parse(path, lineno, "expected `word<TAB>label`"))?;
        let well_formed = label == "O"
            || (label.strip_prefix("B-").is_some_and(|c| !c.is_empty()))
            || (label.strip_prefix("I-").is_some_and(|c| !c.is_empty()));
        if !well_formed {
            return Err(KtokError::parse(
                path,
                lineno,
                format!("label {label:?} must be `B-*`, `I-*` or `O`"),
            ));
        }
        tokens.push(AnnotatedToken {
            word: word.to_string(),
            bio_label: label.to_string(),
        });
    }
    Ok(tokens)
}

/// Mean per-word fertility of one annotation class under the default
/// tokeniser and under word-optimised pool output.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFertilityStats {
    pub class_label: String,
    pub mean_fertility_default: f64,
    pub mean_fertility_k: f64,
    pub word_count: usize,
}

/// Computes per-class mean fertility. Words are normalised first; words
/// that normalise to nothing are skipped, and classes without words are
/// omitted. Rows are sorted by class label.
pub fn fertility_by_class(
    annotated: &[AnnotatedToken],
    pool: &TokeniserPool,
) -> Vec<ClassFertilityStats> {
    let mut sums: BTreeMap<String, (u64, u64, usize)> = BTreeMap::new();
    for token in annotated {
        let word = normalise(&token.word);
        for word in word.split_whitespace() {
            let choice = word_optimise(word, pool);
            let entry = sums.entry(token.class().to_string()).or_insert((0, 0, 0));
            entry.0 += choice.default_segmentation().fertility() as u64;
            entry.1 += choice.chosen_segmentation().fertility() as u64;
            entry.2 += 1;
        }
    }
    sums.into_iter()
        .map(|(class_label, (def, k, n))| ClassFertilityStats {
            class_label,
            mean_fertility_default: def as f64 / n as f64,
            mean_fertility_k: k as f64 / n as f64,
            word_count: n,
        })
        .collect()
}

/// One audited word: its candidates, eligibility and the selected tokeniser.
#[derive(Debug, Clone)]
pub struct WordAudit {
    pub word: String,
    pub chosen: String,
    pub eligible: Vec<String>,
    pub candidates: Vec<(String, Vec<String>)>,
    /// Set when the emitted pieces match no pool member's raw output. With
    /// selection drawn from the pool itself this cannot fire; the flag is a
    /// safety net for audit parity.
    pub divergent: bool,
    pub by_ineligibility: bool,
}

/// Aggregated selection behaviour over a concept word list.
#[derive(Debug, Clone)]
pub struct SelectionAudit {
    pub words: Vec<WordAudit>,
    /// Selections per tokeniser id; sums to the number of audited words.
    pub chosen_counts: BTreeMap<String, usize>,
    /// Words where the default won because nothing else was eligible.
    pub default_by_ineligibility: usize,
    pub divergent_words: Vec<String>,
}

/// Traces the pool's choice for every word in a concept list.
pub fn selection_audit<S: AsRef<str>>(concepts: &[S], pool: &TokeniserPool) -> SelectionAudit {
    let mut words = Vec::new();
    let mut chosen_counts: BTreeMap<String, usize> = BTreeMap::new();
    for id in pool.tokenisers().map(|t| t.id().to_string()) {
        chosen_counts.insert(id, 0);
    }
    let mut default_by_ineligibility = 0;
    let mut divergent_words = Vec::new();
    for concept in concepts {
        let word = normalise(concept.as_ref());
        for word in word.split_whitespace() {
            let choice = word_optimise(word, pool);
            let emitted = choice.chosen_segmentation().pieces.clone();
            let divergent = !choice
                .candidates
                .iter()
                .any(|c| c.segmentation.pieces == emitted);
            let by_ineligibility = choice.default_by_ineligibility();
            if by_ineligibility {
                default_by_ineligibility += 1;
            }
            if divergent {
                divergent_words.push(word.to_string());
            }
            *chosen_counts.entry(choice.chosen.clone()).or_insert(0) += 1;
            words.push(WordAudit {
                word: word.to_string(),
                chosen: choice.chosen.clone(),
                eligible: choice
                    .eligible_ids()
                    .into_iter()
                    .map(str::to_string)
                    .collect(),
                candidates: choice
                    .candidates
                    .iter()
                    .map(|c| {
                        (
                            c.segmentation.source_id.clone(),
                            c.segmentation.pieces.clone(),
                        )
                    })
                    .collect(),
                divergent,
                by_ineligibility,
            });
        }
    }
    SelectionAudit {
        words,
        chosen_counts,
        default_by_ineligibility,
        divergent_words,
    }
}

/// One row of a fertility-threshold sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    /// Fraction of sentences that reverted to default output.
    pub gated_fraction: f64,
    /// Mean emitted pieces per sentence.
    pub mean_sentence_fertility: f64,
    /// Fraction of words whose emitted pieces differ from the default.
    pub changed_word_fraction: f64,
}

/// Runs the pool over the same sentences at each threshold.
///
/// Sentences are given as raw lines; each is normalised and split on
/// whitespace. Thresholds must lie in `[0, 1]`.
pub fn threshold_sweep<S: AsRef<str>>(
    lines: &[S],
    pool: &TokeniserPool,
    thetas: &[f64],
) -> Result<Vec<SweepRow>> {
    for &theta in thetas {
        if !(0.0..=1.0).contains(&theta) {
            return Err(KtokError::Config(format!(
                "threshold {theta} outside [0, 1]"
            )));
        }
    }
    let sentences: Vec<Vec<String>> = lines
        .iter()
        .map(|line| {
            normalise(line.as_ref())
                .split_whitespace()
                .map(str::to_string)
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let pool = pool.with_fertility_threshold(theta);
        let mut gated = 0usize;
        let mut pieces = 0usize;
        let mut words = 0usize;
        let mut changed = 0usize;
        for sentence in &sentences {
            let out = sentence_optimise(sentence, &pool);
            if out.gated {
                gated += 1;
            }
            pieces += out.final_pieces.len();
            words += out.words.len();
            if !out.gated {
                changed += out
                    .words
                    .iter()
                    .filter(|w| {
                        w.chosen_segmentation().pieces != w.default_segmentation().pieces
                    })
                    .count();
            }
        }
        let n = sentences.len();
        rows.push(SweepRow {
            theta,
            gated_fraction: if n == 0 { 0.0 } else { gated as f64 / n as f64 },
            mean_sentence_fertility: if n == 0 { 0.0 } else { pieces as f64 / n as f64 },
            changed_word_fraction: if words == 0 {
                0.0
            } else {
                changed as f64 / words as f64
            },
        });
    }
    Ok(rows)
}
