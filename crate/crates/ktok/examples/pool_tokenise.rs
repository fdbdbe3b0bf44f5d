//! Assemble the tokeniser pool and watch the per-word selection at work:
//! every pool member segments the word, candidates are scored against the
//! combined corpus, and the eligible one with minimum entropy wins.
//!
//! ```bash
//! cargo run -p ktok --example pool_tokenise
//! ```

use std::path::Path;

use ktok::corpus::{build_substring_corpus, load_concepts, merge_corpora, SemanticType};
use ktok::learner::{learn_vocab, LearnerConfig};
use ktok::optimiser::word_optimise;
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

    println!(
        "pool: {} tokenisers, corpus total {}",
        pool.tokenisers().count(),
        pool.corpus().total()
    );

    for word in ["timolol", "meropenem", "pneumonia", "sepsis", "daily"] {
        let choice = word_optimise(word, &pool);
        println!("\n{word}:");
        for candidate in &choice.candidates {
            let marker = if candidate.segmentation.source_id == choice.chosen {
                "*"
            } else {
                " "
            };
            println!(
                "  {marker} {:<8} {:?}  H={:.4e}  eligible={}",
                candidate.segmentation.source_id,
                candidate.segmentation.pieces,
                candidate.entropy,
                candidate.eligible,
            );
        }
    }
    Ok(())
}
