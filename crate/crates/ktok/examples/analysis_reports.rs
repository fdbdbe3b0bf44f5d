//! Desk-scale analyses over the bundled fixtures: fertility by annotation
//! class, a tokeniser-selection audit, and a fertility-threshold sweep.
//!
//! ```bash
//! cargo run -p ktok --example analysis_reports
//! ```

use std::path::Path;

use ktok::analysis::{fertility_by_class, load_bio, selection_audit, threshold_sweep};
use ktok::corpus::{build_substring_corpus, load_concepts, merge_corpora, SemanticType};
use ktok::learner::{learn_vocab, LearnerConfig};
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

    println!("== fertility by class ==");
    let annotated = load_bio(&fixtures.join("annotations.bio"))?;
    for row in fertility_by_class(&annotated, &pool) {
        println!(
            "  {:<10} words={:<3} default={:.3} pool={:.3}",
            row.class_label, row.word_count, row.mean_fertility_default, row.mean_fertility_k
        );
    }

    println!("\n== selection audit over drug concepts ==");
    let text = std::fs::read_to_string(fixtures.join("concept_words.txt")).unwrap();
    let words: Vec<&str> = text
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let audit = selection_audit(&words, &pool);
    for (id, count) in &audit.chosen_counts {
        println!("  chosen {id}: {count}");
    }
    println!(
        "  default by ineligibility: {}",
        audit.default_by_ineligibility
    );

    println!("\n== threshold sweep ==");
    let sentences = std::fs::read_to_string(fixtures.join("sentences.txt")).unwrap();
    let lines: Vec<&str> = sentences.lines().collect();
    for row in threshold_sweep(&lines, &pool, &[0.0, 0.035, 0.065, 1.0])? {
        println!(
            "  theta={:<5} gated={:.2} mean_fertility={:.2} changed_words={:.2}",
            row.theta, row.gated_fraction, row.mean_sentence_fertility, row.changed_word_fraction
        );
    }
    Ok(())
}
