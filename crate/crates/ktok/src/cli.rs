//! The `ktok` command-line interface.
//!
//! Subcommands: `build-vocab`, `tokenize`, `init-embeddings`, `pool-info`
//! and `analyze {fertility,selection,sweep}`. All runs are deterministic:
//! identical inputs and flags produce byte-identical outputs.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis;
use crate::corpus::{self, SemanticType, SubstringCorpus};
use crate::embedding;
use crate::error::{KtokError, Result};
use crate::learner::{self, LearnerConfig};
use crate::optimiser::{self, ProbabilityMode, ScoreConfig, SentenceOutput};
use crate::tokeniser::{self, TokeniserPool, DEFAULT_MIN_FREQ};

#[derive(Parser)]
#[command(name = "ktok", version, about = "Semantic-type subword tokenisation toolkit")]
struct Cli {
    /// File of key=value defaults (min-freq, fertility-threshold, budget,
    /// min-pair-count, prefix-syllable-len, prob-mode, smoothing).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Accepted for interface stability; every operation is deterministic
    /// and no randomness is consumed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Emit line-delimited trace records (per-word candidates, scores,
    /// eligibility, gating) instead of plain pieces.
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a semantic-type subword vocabulary from a concept lexicon
    BuildVocab(BuildVocabArgs),
    /// Segment sentences with the tokeniser pool
    Tokenize(TokenizeArgs),
    /// Expand an embedding matrix with averaged rows for new subwords
    InitEmbeddings(InitEmbeddingsArgs),
    /// Show pool vocabulary sizes and overlaps
    PoolInfo(PoolVocabArgs),
    /// Tokeniser-level analyses
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Args)]
struct BuildVocabArgs {
    /// Concept lexicon: `surface<TAB>frequency` per line
    #[arg(long, value_name = "TSV")]
    concepts: PathBuf,
    /// Semantic type identifier (e.g. drug, disease)
    #[arg(long, value_name = "ID")]
    semantic_type: String,
    /// Maximum merges applied to any single concept
    #[arg(long, value_name = "N")]
    budget: Option<usize>,
    /// Minimum weighted pair frequency required to merge
    #[arg(long, value_name = "N")]
    min_pair_count: Option<u64>,
    /// Word-initial pieces longer than this are syllable-split
    #[arg(long, value_name = "N")]
    prefix_syllable_len: Option<usize>,
    /// Output vocabulary path (a `<path>.freq` companion is also written)
    #[arg(long, value_name = "VOCAB")]
    out: PathBuf,
    /// Also write the semantic type's substring corpus
    #[arg(long, value_name = "TSV")]
    out_corpus: Option<PathBuf>,
}

/// Pool construction flags shared by `tokenize` and `analyze`.
#[derive(Args)]
struct PoolArgs {
    /// Baseline vocabulary (headered, or plain one-token-per-line)
    #[arg(long, value_name = "VOCAB")]
    base: PathBuf,
    /// Learned drug vocabulary
    #[arg(long, value_name = "VOCAB")]
    drug: Option<PathBuf>,
    /// Learned disease vocabulary
    #[arg(long, value_name = "VOCAB")]
    disease: Option<PathBuf>,
    /// Substring corpus; may repeat, multiple files merge pointwise
    #[arg(long = "corpus-c", value_name = "TSV")]
    corpus_c: Vec<PathBuf>,
    /// Minimum corpus count every piece of an augmented candidate needs
    #[arg(long, value_name = "N")]
    min_freq: Option<u64>,
    /// Fertility gate threshold in [0,1]; presets 0, 0.035, 0.065 and 1
    #[arg(long, value_name = "F")]
    fertility_threshold: Option<f64>,
}

#[derive(Args)]
struct TokenizeArgs {
    #[command(flatten)]
    pool: PoolArgs,
    /// Write output here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Input text, one sentence per line
    #[arg(value_name = "INPUT")]
    input: PathBuf,
}

#[derive(Args)]
struct InitEmbeddingsArgs {
    /// Baseline embedding matrix
    #[arg(long, value_name = "EMB")]
    base_emb: PathBuf,
    #[command(flatten)]
    vocabs: PoolVocabArgs,
    /// Expanded matrix output
    #[arg(long, value_name = "EMB")]
    out_emb: PathBuf,
    /// Back-off dictionary output
    #[arg(long, value_name = "TSV")]
    out_backoff: PathBuf,
}

#[derive(Args)]
struct PoolVocabArgs {
    /// Baseline vocabulary
    #[arg(long = "base", alias = "base-vocab", value_name = "VOCAB")]
    base: PathBuf,
    /// Learned drug vocabulary
    #[arg(long, value_name = "VOCAB")]
    drug: Option<PathBuf>,
    /// Learned disease vocabulary
    #[arg(long, value_name = "VOCAB")]
    disease: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Mean per-word fertility by annotation class
    Fertility {
        /// BIO annotations: `word<TAB>label`, blank line between sentences
        #[arg(long, value_name = "TSV")]
        bio: PathBuf,
        #[command(flatten)]
        pool: PoolArgs,
        /// Write the report here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Tokeniser selection audit over a concept word list
    Selection {
        /// Concept words, one per line
        #[arg(long, value_name = "FILE")]
        concepts: PathBuf,
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Gating behaviour across fertility thresholds
    Sweep {
        /// Input text, one sentence per line
        #[arg(long, value_name = "TXT")]
        input: PathBuf,
        /// Comma-separated thresholds in [0,1]
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        thetas: Option<Vec<f64>>,
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// Parses argv, runs the requested pipeline, and returns the process exit
/// code: 0 on success, 1 on an operational error, 2 on a usage error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.exit_code() == 0 { 0 } else { 2 };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("ktok: {err}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let file_config = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::BuildVocab(args) => build_vocab(args, &file_config),
        Command::Tokenize(args) => tokenize(args, &file_config, cli.trace),
        Command::InitEmbeddings(args) => init_embeddings(args),
        Command::PoolInfo(args) => pool_info(args),
        Command::Analyze(args) => analyze(args, &file_config),
    }
}

/// `key=value` per line; `#` comments and blank lines ignored.
#[derive(Default)]
struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    const KNOWN_KEYS: [&'static str; 7] = [
        "min-freq",
        "fertility-threshold",
        "budget",
        "min-pair-count",
        "prefix-syllable-len",
        "prob-mode",
        "smoothing",
    ];

    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| KtokError::io(path, e))?;
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| KtokError::parse(path, idx + 1, "expected `key=value`"))?;
            let key = key.trim();
            if !Self::KNOWN_KEYS.contains(&key) {
                return Err(KtokError::parse(
                    path,
                    idx + 1,
                    format!("unknown config key {key:?}"),
                ));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                KtokError::Config(format!("config key {key} has invalid value {raw:?}"))
            }),
        }
    }

    fn score_config(&self) -> Result<ScoreConfig> {
        let mode = match self.values.get("prob-mode").map(String::as_str) {
            None | Some("product") => ProbabilityMode::Product,
            Some("sum") => ProbabilityMode::Sum,
            Some(other) => {
                return Err(KtokError::Config(format!(
                    "prob-mode must be `product` or `sum`, got {other:?}"
                )))
            }
        };
        let smoothing: bool = self.parsed("smoothing")?.unwrap_or(true);
        Ok(ScoreConfig {
            mode,
            disable_smoothing: !smoothing,
        })
    }
}

impl PoolArgs {
    fn build_pool(&self, file_config: &FileConfig) -> Result<TokeniserPool> {
        let base = tokeniser::load_vocab(&self.base)?;
        let mut learned = Vec::new();
        if let Some(path) = &self.drug {
            learned.push(learner::load_learned_vocab(path)?);
        }
        if let Some(path) = &self.disease {
            learned.push(learner::load_learned_vocab(path)?);
        }
        let corpus = if self.corpus_c.is_empty() {
            SubstringCorpus::new(corpus::MERGED_CORPUS_LABEL)
        } else {
            let parts: Vec<SubstringCorpus> = self
                .corpus_c
                .iter()
                .map(|p| corpus::load_corpus(p))
                .collect::<Result<_>>()?;
            corpus::merge_corpora(&parts)?
        };
        let min_freq = match self.min_freq {
            Some(v) => v,
            None => file_config.parsed("min-freq")?.unwrap_or(DEFAULT_MIN_FREQ),
        };
        let theta = match self.fertility_threshold {
            Some(v) => v,
            None => file_config.parsed("fertility-threshold")?.unwrap_or(1.0),
        };
        if !(0.0..=1.0).contains(&theta) {
            return Err(KtokError::Config(format!(
                "fertility threshold {theta} outside [0, 1]"
            )));
        }
        Ok(TokeniserPool::build(base, &learned, corpus, min_freq, theta)?
            .with_score_config(file_config.score_config()?))
    }
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| KtokError::io(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn build_vocab(args: BuildVocabArgs, file_config: &FileConfig) -> Result<()> {
    let semantic_type = SemanticType::new(&args.semantic_type)?;
    let concepts = corpus::load_concepts(&args.concepts, semantic_type)?;
    let sub_corpus = corpus::build_substring_corpus(&concepts)?;
    let config = LearnerConfig {
        budget_alpha: match args.budget {
            Some(v) => v,
            None => file_config.parsed("budget")?.unwrap_or(20),
        },
        min_pair_count: match args.min_pair_count {
            Some(v) => v,
            None => file_config.parsed("min-pair-count")?.unwrap_or(2),
        },
        prefix_syllable_len: match args.prefix_syllable_len {
            Some(v) => v,
            None => file_config.parsed("prefix-syllable-len")?.unwrap_or(4),
        },
        ..LearnerConfig::default()
    };
    let vocab = learner::learn_vocab(&concepts, &sub_corpus, &config)?;
    learner::save_learned_vocab(&vocab, &args.out)?;
    if let Some(out_corpus) = &args.out_corpus {
        corpus::save_corpus(&sub_corpus, out_corpus)?;
    }
    eprintln!(
        "ktok: learned {} {} subwords from {} concepts",
        vocab.subwords.len(),
        vocab.semantic_type,
        concepts.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    line: usize,
    #[serde(flatten)]
    sentence: &'a SentenceOutput,
}

fn tokenize(args: TokenizeArgs, file_config: &FileConfig, trace: bool) -> Result<()> {
    let pool = args.pool.build_pool(file_config)?;
    let file = fs::File::open(&args.input).map_err(|e| KtokError::io(&args.input, e))?;
    let mut content = String::new();
    for item in optimiser::tokenise_corpus(BufReader::new(file), &pool) {
        let (lineno, sentence) = item?;
        if trace {
            let record = TraceRecord {
                line: lineno,
                sentence: &sentence,
            };
            let json = serde_json::to_string(&record)
                .map_err(|e| KtokError::Integrity(format!("trace serialisation: {e}")))?;
            content.push_str(&json);
        } else {
            content.push_str(&sentence.final_pieces.join(" "));
        }
        content.push('\n');
    }
    emit(args.out.as_ref(), &content)
}

fn init_embeddings(args: InitEmbeddingsArgs) -> Result<()> {
    let base = tokeniser::load_vocab(&args.vocabs.base)?;
    let mut learned = Vec::new();
    if let Some(path) = &args.vocabs.drug {
        learned.push(learner::load_learned_vocab(path)?);
    }
    if let Some(path) = &args.vocabs.disease {
        learned.push(learner::load_learned_vocab(path)?);
    }
    // Back-off construction only consults vocabularies, never the corpus.
    let pool = TokeniserPool::build(
        base,
        &learned,
        SubstringCorpus::new(corpus::MERGED_CORPUS_LABEL),
        DEFAULT_MIN_FREQ,
        1.0,
    )?;
    let backoff = embedding::build_backoff(&pool);
    let base_matrix = embedding::load_embeddings(&args.base_emb)?;
    let expanded = embedding::init_embeddings(&base_matrix, &backoff)?;
    embedding::save_embeddings(&expanded, &args.out_emb)?;
    embedding::save_backoff(&backoff, &args.out_backoff)?;
    for subword in &backoff.unmatched {
        eprintln!("ktok: {subword} backs off to the unknown token");
    }
    eprintln!(
        "ktok: initialised {} new rows ({} unmatched)",
        backoff.entries.len(),
        backoff.unmatched.len()
    );
    Ok(())
}

fn pool_info(args: PoolVocabArgs) -> Result<()> {
    let base = tokeniser::load_vocab(&args.base)?;
    let mut learned = Vec::new();
    if let Some(path) = &args.drug {
        learned.push(learner::load_learned_vocab(path)?);
    }
    if let Some(path) = &args.disease {
        learned.push(learner::load_learned_vocab(path)?);
    }
    let pool = TokeniserPool::build(
        base,
        &learned,
        SubstringCorpus::new(corpus::MERGED_CORPUS_LABEL),
        DEFAULT_MIN_FREQ,
        1.0,
    )?;
    let base_vocab = pool.default_tokeniser().vocab();
    let mut report = String::from("tokeniser\tvocab_size\tadded\n");
    let _ = writeln!(report, "base\t{}\t0", base_vocab.len());
    let added: Vec<(String, std::collections::BTreeSet<&String>)> = pool
        .augmented()
        .iter()
        .map(|t| {
            (
                t.id().to_string(),
                t.vocab().difference(base_vocab).collect(),
            )
        })
        .collect();
    for (id, new) in &added {
        let size = base_vocab.len() + new.len();
        let _ = writeln!(report, "{id}\t{size}\t{}", new.len());
    }
    for i in 0..added.len() {
        for j in i + 1..added.len() {
            let shared = added[i].1.intersection(&added[j].1).count();
            let _ = writeln!(
                report,
                "overlap\t{}+{}\t{shared}",
                added[i].0, added[j].0
            );
        }
    }
    emit(None, &report)
}

fn analyze(command: AnalyzeCommand, file_config: &FileConfig) -> Result<()> {
    match command {
        AnalyzeCommand::Fertility { bio, pool, out } => {
            let pool = pool.build_pool(file_config)?;
            let annotated = analysis::load_bio(&bio)?;
            let stats = analysis::fertility_by_class(&annotated, &pool);
            let mut report = String::from("class\twords\tmean_fertility_default\tmean_fertility_k\n");
            for row in stats {
                let _ = writeln!(
                    report,
                    "{}\t{}\t{:.6}\t{:.6}",
                    row.class_label, row.word_count, row.mean_fertility_default, row.mean_fertility_k
                );
            }
            emit(out.as_ref(), &report)
        }
        AnalyzeCommand::Selection { concepts, pool, out } => {
            let pool = pool.build_pool(file_config)?;
            let text =
                fs::read_to_string(&concepts).map_err(|e| KtokError::io(&concepts, e))?;
            let words: Vec<&str> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect();
            let audit = analysis::selection_audit(&words, &pool);
            let mut report = String::from("word\tchosen\teligible\tpieces\n");
            for word in &audit.words {
                let pieces = word
                    .candidates
                    .iter()
                    .find(|(id, _)| *id == word.chosen)
                    .map(|(_, pieces)| pieces.join(" "))
                    .unwrap_or_default();
                let _ = writeln!(
                    report,
                    "{}\t{}\t{}\t{pieces}",
                    word.word,
                    word.chosen,
                    word.eligible.join(",")
                );
            }
            for (id, count) in &audit.chosen_counts {
                let _ = writeln!(report, "# chosen {id}={count}");
            }
            let _ = writeln!(
                report,
                "# default_by_ineligibility {}",
                audit.default_by_ineligibility
            );
            let _ = writeln!(report, "# divergent {}", audit.divergent_words.len());
            emit(out.as_ref(), &report)
        }
        AnalyzeCommand::Sweep {
            input,
            thetas,
            pool,
            out,
        } => {
            let pool = pool.build_pool(file_config)?;
            let text = fs::read_to_string(&input).map_err(|e| KtokError::io(&input, e))?;
            let lines: Vec<&str> = text.lines().collect();
            let thetas = thetas.unwrap_or_else(|| vec![0.0, 0.035, 0.065, 1.0]);
            let rows = analysis::threshold_sweep(&lines, &pool, &thetas)?;
            let mut report = String::from(
                "theta\tgated_fraction\tmean_sentence_fertility\tchanged_word_fraction\n",
            );
            for row in rows {
                let _ = writeln!(
                    report,
                    "{}\t{:.6}\t{:.6}\t{:.6}",
                    row.theta, row.gated_fraction, row.mean_sentence_fertility, row.changed_word_fraction
                );
            }
            emit(out.as_ref(), &report)
        }
    }
}
