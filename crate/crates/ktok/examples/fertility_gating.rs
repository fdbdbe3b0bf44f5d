//! Sentence-level gating: when the pool's output saves too many subwords
//! relative to the default tokeniser, the sentence reverts to default
//! segmentations to stay close to what a pre-trained model saw.
//!
//! ```bash
//! cargo run -p ktok --example fertility_gating
//! ```

use std::path::Path;

use ktok::corpus::{build_substring_corpus, load_concepts, merge_corpora, SemanticType};
use ktok::learner::{learn_vocab, LearnerConfig};
use ktok::optimiser::sentence_optimise;
use ktok::tokeniser::{load_vocab, TokeniserPool};

fn main() -> ktok::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let base = load_vocab(&fixtures.join("base_vocab.txt"))?;

    let config = LearnerConfig::default();
    let mut learned = Vec::new();
    let mut sub_corpora = Vec::new();
    for (file, semantic_type) in [
        ("drug_concepts.tsv", SemanticType::drug()),
        ("disease_concepts.tsv", SemanticType::disease()),
    ] {
        let concepts = load_concepts(&fixtures.join(file), semantic_type)?;
        let corpus = build_substring_corpus(&concepts)?;
        learned.push(learn_vocab(&concepts, &corpus, &config)?);
        sub_corpora.push(corpus);
    }
    let combined = merge_corpora(&sub_corpora)?;
    let pool = TokeniserPool::build(base, &learned, combined, 1000, 1.0)?;

    let sentence: Vec<&str> = "the patient received timolol and metoprolol daily"
        .split_whitespace()
        .collect();

    for theta in [0.0, 0.035, 0.065, 1.0] {
        let out = sentence_optimise(&sentence, &pool.with_fertility_threshold(theta));
        println!(
            "theta={theta:<5} fertility {} -> {} (reduction {:.3})  gated={}",
            out.report.default_total, out.report.chosen_total, out.report.reduction, out.gated,
        );
        println!("  emitted: {}", out.final_pieces.join(" "));
    }
    Ok(())
}
