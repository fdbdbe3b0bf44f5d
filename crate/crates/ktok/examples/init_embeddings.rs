//! Initialise embedding rows for new pool subwords: each new subword is
//! segmented by the default tokeniser (the back-off dictionary) and its row
//! is the mean of the rows of those pieces.
//!
//! ```bash
//! cargo run -p ktok --example init_embeddings
//! ```

use std::path::Path;

use ktok::corpus::{build_substring_corpus, load_concepts, SemanticType, SubstringCorpus};
use ktok::embedding::{build_backoff, init_embeddings, load_embeddings};
use ktok::learner::{learn_vocab, LearnerConfig};
use ktok::tokeniser::{load_vocab, TokeniserPool};

fn main() -> ktok::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let base = load_vocab(&fixtures.join("base_vocab.txt"))?;
    let concepts = load_concepts(&fixtures.join("drug_concepts.tsv"), SemanticType::drug())?;
    let corpus = build_substring_corpus(&concepts)?;
    let drug = learn_vocab(&concepts, &corpus, &LearnerConfig::default())?;

    // The back-off step needs only the vocabularies.
    let pool = TokeniserPool::build(base, &[drug], SubstringCorpus::new("C"), 1000, 1.0)?;
    let backoff = build_backoff(&pool);
    println!(
        "back-off dictionary: {} new subwords, {} unmatched",
        backoff.len(),
        backoff.unmatched.len()
    );
    for (subword, targets) in backoff.entries.iter().take(8) {
        println!("  {subword:<10} -> {}", targets.join(" "));
    }

    let base_matrix = load_embeddings(&fixtures.join("base_embeddings.emb"))?;
    let expanded = init_embeddings(&base_matrix, &backoff)?;
    println!(
        "\nmatrix: {} rows -> {} rows (d={})",
        base_matrix.len(),
        expanded.len(),
        expanded.dim()
    );
    if let Some((subword, targets)) = backoff.entries.first() {
        println!("\naveraged row for {subword}:");
        println!("  targets: {}", targets.join(" "));
        println!("  row: {:?}", expanded.get(subword).unwrap());
    }
    Ok(())
}
