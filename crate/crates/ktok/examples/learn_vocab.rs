//! Learn a semantic-type subword vocabulary from the bundled drug lexicon.
//!
//! ```bash
//! cargo run -p ktok --example learn_vocab
//! ```

use std::path::Path;

use ktok::corpus::{build_substring_corpus, load_concepts, SemanticType};
use ktok::learner::{bpe_learn, learn_vocab, LearnerConfig};

fn main() -> ktok::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let concepts = load_concepts(&fixtures.join("drug_concepts.tsv"), SemanticType::drug())?;
    println!("loaded {} drug concept words", concepts.len());

    let corpus = build_substring_corpus(&concepts)?;
    println!(
        "substring corpus: {} distinct substrings, total weight {}",
        corpus.distinct(),
        corpus.total()
    );

    let config = LearnerConfig::default();
    let table = bpe_learn(&concepts, &config)?;
    println!("\nfirst merges:");
    for (left, right) in table.merges.iter().take(10) {
        println!("  {left} + {right} -> {left}{right}");
    }

    let vocab = learn_vocab(&concepts, &corpus, &config)?;
    println!(
        "\nlearned {} subwords for type {}; a sample with corpus counts:",
        vocab.subwords.len(),
        vocab.semantic_type
    );
    let mut by_count: Vec<(&String, &u64)> = vocab.frequencies.iter().collect();
    by_count.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    for (subword, count) in by_count.iter().take(15) {
        println!("  {subword:<10} {count}");
    }
    Ok(())
}
