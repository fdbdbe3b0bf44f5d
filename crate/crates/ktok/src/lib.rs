//! Knowledge-infused subword tokenisation.
//!
//! `ktok` learns semantic-type subword vocabularies from concept lexicons,
//! assembles them into a pool around a default greedy longest-match
//! tokeniser, selects per-word segmentations by entropy minimisation over a
//! shared substring corpus, gates per-sentence output by a fertility
//! threshold, and initialises embedding rows for new subwords by averaging
//! their default-tokeniser back-off pieces.
//!
//! The pipeline, stage by stage:
//!
//! 1. [`corpus`] — load `surface<TAB>frequency` concept lexicons, normalise
//!    them, and expand them into substring-frequency sub-corpora that merge
//!    into one combined corpus.
//! 2. [`learner`] — budget-limited pair merging per semantic type, greedy
//!    longest-match decoding, syllable splitting of long prefixes, and the
//!    final discard of never-emitted candidates.
//! 3. [`tokeniser`] — the default tokeniser, its semantic-type
//!    augmentations, and the pool that ties them to the corpus and the
//!    selection thresholds.
//! 4. [`optimiser`] — per-word entropy-minimising selection and the
//!    per-sentence fertility gate.
//! 5. [`embedding`] — back-off dictionaries and averaged embedding rows for
//!    new subwords.
//! 6. [`analysis`] — fertility-by-class reports, selection audits and
//!    threshold sweeps; [`cli`] wraps everything as the `ktok` binary.
//!
//! Every operation is deterministic: identical inputs produce byte-identical
//! outputs, across runs and thread counts.
//!
//! ## Runnable examples
//!
//! One example per capability, each self-contained on the bundled fixtures:
//!
//! ```bash
//! cargo run -p ktok --example learn_vocab      # lexicon -> subword vocabulary
//! cargo run -p ktok --example pool_tokenise    # pool assembly + word selection
//! cargo run -p ktok --example fertility_gating # sentence gating across thresholds
//! cargo run -p ktok --example init_embeddings  # back-off + averaged rows
//! cargo run -p ktok --example analysis_reports # class fertility, audit, sweep
//! ```

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod learner;
pub mod optimiser;
pub mod tokeniser;

pub use corpus::{
    build_substring_corpus, load_concepts, merge_corpora, normalise, ConceptEntry, SemanticType,
    SubstringCorpus,
};
pub use error::{KtokError, Result};
pub use learner::{
    bpe_learn, greedy_decode, learn_vocab, syllable_split, LearnedVocab, LearnerConfig, MergeTable,
};
pub use optimiser::{
    score, sentence_optimise, tokenise_corpus, word_optimise, FertilityReport, SentenceOutput,
    WordChoice,
};
pub use tokeniser::{augment, load_vocab, save_vocab, Segmentation, Tokeniser, TokeniserPool};
