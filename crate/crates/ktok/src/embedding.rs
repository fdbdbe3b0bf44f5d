//! Embedding initialisation for new subwords.
//!
//! New pool subwords have no row in a pre-trained embedding matrix. A
//! back-off dictionary maps each new subword to its default-tokeniser
//! segmentation, and the expanded matrix gives every new subword the
//! arithmetic mean of its target rows. Base rows are never touched.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{KtokError, Result};
use crate::tokeniser::TokeniserPool;

const EMB_HEADER_PREFIX: &str = "#ktok-emb v1 ";

/// A token-keyed dense matrix with an explicit row order for serialisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    rows: BTreeMap<String, Vec<f64>>,
    order: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(KtokError::Config("embedding dimension must be >= 1".into()));
        }
        Ok(EmbeddingMatrix {
            dim,
            rows: BTreeMap::new(),
            order: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.rows.get(token).map(Vec::as_slice)
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.order
            .iter()
            .map(|t| (t.as_str(), self.rows[t].as_slice()))
    }

    /// Appends a row. Rejects duplicate tokens, wrong dimensions and
    /// non-finite components.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dim {
            return Err(KtokError::Integrity(format!(
                "row {token:?} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if let Some(col) = vector.iter().position(|v| !v.is_finite()) {
            return Err(KtokError::Integrity(format!(
                "row {token:?} has a non-finite component at column {col}"
            )));
        }
        if self.rows.contains_key(&token) {
            return Err(KtokError::Integrity(format!("duplicate row {token:?}")));
        }
        self.order.push(token.clone());
        self.rows.insert(token, vector);
        Ok(())
    }
}

/// Maps each new pool subword to its default-tokeniser segmentation.
///
/// Keys are exactly the augmented vocabularies minus the base vocabulary, in
/// pool order then sorted within each tokeniser; subwords already known to
/// the base tokeniser get no entry. Unmatchable subwords map to the unknown
/// token and are listed in `unmatched`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackoffDictionary {
    pub entries: Vec<(String, Vec<String>)>,
    pub unmatched: Vec<String>,
}

impl BackoffDictionary {
    pub fn get(&self, subword: &str) -> Option<&[String]> {
        self.entries
            .iter()
            .find(|(k, _)| k == subword)
            .map(|(_, targets)| targets.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Builds the back-off dictionary for a pool by running the default
/// tokeniser over every new subword. Continuation subwords are segmented in
/// continuation context so every resulting piece keeps the marker.
pub fn build_backoff(pool: &TokeniserPool) -> BackoffDictionary {
    let base = pool.default_tokeniser();
    let marker = base.marker();
    let unk = base.unk_token();
    let mut entries = Vec::new();
    let mut unmatched = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for tokeniser in pool.augmented() {
        for subword in tokeniser.vocab() {
            if base.contains(subword) || !seen.insert(subword.clone()) {
                continue;
            }
            let targets = match subword.strip_prefix(marker) {
                Some(core) => base.tokenise_continuation(core),
                None => {
                    let seg = base.tokenise_word(subword);
                    (!seg.pieces.contains(&unk.to_string())).then_some(seg.pieces)
                }
            };
            let targets = match targets {
                Some(pieces) => pieces,
                None => {
                    unmatched.push(subword.clone());
                    vec![unk.to_string()]
                }
            };
            entries.push((subword.clone(), targets));
        }
    }
    BackoffDictionary { entries, unmatched }
}

/// Expands a base matrix with one averaged row per back-off entry.
///
/// Base rows are preserved bitwise; each new row is the elementwise
/// arithmetic mean of its target rows, appended in dictionary order. Every
/// target must already have a row.
pub fn init_embeddings(
    base: &EmbeddingMatrix,
    backoff: &BackoffDictionary,
) -> Result<EmbeddingMatrix> {
    let mut out = base.clone();
    for (subword, targets) in &backoff.entries {
        if targets.is_empty() {
            return Err(KtokError::Integrity(format!(
                "back-off entry {subword:?} has no targets"
            )));
        }
        let mut mean = vec![0.0f64; base.dim()];
        for target in targets {
            let row = base.get(target).ok_or_else(|| {
                KtokError::Integrity(format!(
                    "back-off target {target:?} for {subword:?} has no embedding row"
                ))
            })?;
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let l = targets.len() as f64;
        for v in &mut mean {
            *v /= l;
        }
        out.insert(subword.clone(), mean)?;
    }
    Ok(out)
}

/// Writes a matrix as `#ktok-emb v1 n=<count> d=<dim>` followed by one
/// `token v1 … vd` line per row in matrix order. Components use the shortest
/// decimal representation that parses back to the identical value.
pub fn save_embeddings(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{EMB_HEADER_PREFIX}n={} d={}", matrix.len(), matrix.dim())
        .expect("write to vec");
    for (token, row) in matrix.iter() {
        let mut line = String::from(token);
        for v in row {
            line.push(' ');
            line.push_str(&format!("{v}"));
        }
        writeln!(out, "{line}").expect("write to vec");
    }
    fs::write(path, out).map_err(|e| KtokError::io(path, e))
}

/// Reads a matrix written by [`save_embeddings`]. The header counts must
/// match the body exactly and every component must be finite.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let text = fs::read_to_string(path).map_err(|e| KtokError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| KtokError::format(path, 1, "missing header"))?;
    let bad_header =
        || KtokError::format(path, 1, format!("expected `{EMB_HEADER_PREFIX}n=<N> d=<D>`"));
    let rest = header.strip_prefix(EMB_HEADER_PREFIX).ok_or_else(bad_header)?;
    let (n_part, d_part) = rest.split_once(' ').ok_or_else(bad_header)?;
    let n: usize = n_part
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad_header)?;
    let d: usize = d_part
        .strip_prefix("d=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad_header)?;
    let mut matrix = EmbeddingMatrix::new(d)?;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let token = fields.next().filter(|t| !t.is_empty()).ok_or_else(|| {
            KtokError::format(path, lineno, "missing token")
        })?;
        let mut row = Vec::with_capacity(d);
        for (col, field) in fields.enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                KtokError::format(
                    path,
                    lineno,
                    format!("invalid component {field:?} for {token:?} at column {col}"),
                )
            })?;
            if !value.is_finite() {
                return Err(KtokError::format(
                    path,
                    lineno,
                    format!("non-finite component for {token:?} at column {col}"),
                ));
            }
            row.push(value);
        }
        if row.len() != d {
            return Err(KtokError::format(
                path,
                lineno,
                format!("row {token:?} has {} components, header says {d}", row.len()),
            ));
        }
        matrix.insert(token, row).map_err(|e| match e {
            KtokError::Integrity(message) => KtokError::format(path, lineno, message),
            other => other,
        })?;
    }
    if matrix.len() != n {
        return Err(KtokError::format(
            path,
            1,
            format!("header claims {n} rows, file has {}", matrix.len()),
        ));
    }
    Ok(matrix)
}

/// Writes a back-off dictionary as `new_subword<TAB>t1 t2 … tl` lines.
pub fn save_backoff(backoff: &BackoffDictionary, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for (subword, targets) in &backoff.entries {
        writeln!(out, "{subword}\t{}", targets.join(" ")).expect("write to vec");
    }
    fs::write(path, out).map_err(|e| KtokError::io(path, e))
}

/// Reads a back-off dictionary written by [`save_backoff`]. Entries mapping
/// to exactly `unk_token` are reported as unmatched.
pub fn load_backoff(path: &Path, unk_token: &str) -> Result<BackoffDictionary> {
    let text = fs::read_to_string(path).map_err(|e| KtokError::io(path, e))?;
    let mut entries = Vec::new();
    let mut unmatched = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (subword, targets_raw) = line
            .split_once('\t')
            .ok_or_else(|| KtokError::format(path, lineno, "expected `subword<TAB>targets`"))?;
        if !seen.insert(subword.to_string()) {
            return Err(KtokError::format(
                path,
                lineno,
                format!("duplicate subword {subword:?}"),
            ));
        }
        let targets: Vec<String> = targets_raw.split(' ').map(str::to_string).collect();
        if targets.iter().any(String::is_empty) {
            return Err(KtokError::format(path, lineno, "empty target"));
        }
        if targets == [unk_token.to_string()] {
            unmatched.push(subword.to_string());
        }
        entries.push((subword.to_string(), targets));
    }
    Ok(BackoffDictionary { entries, unmatched })
}
