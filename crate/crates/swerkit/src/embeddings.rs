//! Word-vector lexicon loading and the cosine-similarity oracle used to
//! decide whether a plain-word substitution is semantically close.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("inconsistent dimension at line {line}: expected {expected}, found {found}")]
    InconsistentDimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("no usable vectors in input")]
    EmptyLexicon,
    #[error("i/o error reading vectors: {0}")]
    Io(#[from] std::io::Error),
}

/// How to score a substitution when either word has no vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OovPolicy {
    /// Unknown words are treated as fully dissimilar (similarity 0).
    #[default]
    Dissimilar,
    /// Fall back to character overlap: 1 - edit_distance / max(len),
    /// the symmetric normalization of the character error rate.
    CharFallback,
}

/// Counters describing a completed load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadSummary {
    pub loaded: usize,
    pub skipped: usize,
    pub duplicates: usize,
    pub header_detected: bool,
}

/// Immutable word -> dense vector table. Lookup counters are atomic so
/// concurrent read-only scorers can share one lexicon.
#[derive(Debug, Default)]
pub struct EmbeddingLexicon {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
    summary: LoadSummary,
    lookups: AtomicU64,
    misses: AtomicU64,
}

impl EmbeddingLexicon {
    /// An empty lexicon; every lookup misses.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parse a word2vec/GloVe-style plain-text stream: one `word v1 .. vd`
    /// row per line, optionally preceded by a `count dim` header (detected
    /// when the first line is exactly two integer tokens). Rows with
    /// non-numeric components are counted and skipped; a numeric row whose
    /// arity disagrees with the established dimension is fatal.
    pub fn load_text_vectors(reader: impl BufRead) -> Result<Self, EmbeddingError> {
        let mut table: HashMap<String, Vec<f64>> = HashMap::new();
        let mut dim: Option<usize> = None;
        let mut summary = LoadSummary::default();

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else {
                continue; // blank line
            };
            let rest: Vec<&str> = fields.collect();

            if lineno == 0 && rest.len() == 1 {
                if let (Ok(_count), Ok(d)) = (word.parse::<u64>(), rest[0].parse::<usize>()) {
                    dim = Some(d);
                    summary.header_detected = true;
                    continue;
                }
            }

            let mut vector = Vec::with_capacity(rest.len());
            let mut malformed = false;
            for field in &rest {
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => vector.push(v),
                    _ => {
                        malformed = true;
                        break;
                    }
                }
            }
            if malformed || vector.is_empty() {
                summary.skipped += 1;
                continue;
            }
            match dim {
                None => dim = Some(vector.len()),
                Some(d) if d != vector.len() => {
                    return Err(EmbeddingError::InconsistentDimension {
                        line: lineno + 1,
                        expected: d,
                        found: vector.len(),
                    });
                }
                Some(_) => {}
            }
            // First occurrence wins.
            if table.contains_key(word) {
                summary.duplicates += 1;
            } else {
                table.insert(word.to_string(), vector);
                summary.loaded += 1;
            }
        }

        if table.is_empty() {
            return Err(EmbeddingError::EmptyLexicon);
        }
        Ok(EmbeddingLexicon {
            dim: dim.unwrap_or(0),
            table,
            summary,
            lookups: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn load_summary(&self) -> LoadSummary {
        self.summary
    }

    /// (lookups, misses) observed so far.
    pub fn stats(&self) -> (u64, u64) {
        (
            self.lookups.load(Ordering::Relaxed),
            self.misses.load(Ordering::Relaxed),
        )
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        let hit = self.table.get(word).map(|v| v.as_slice());
        if hit.is_none() {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        hit
    }

    /// Similarity in [0, 1] between two normalized words. Identical
    /// strings score 1.0 unconditionally; in-vocabulary pairs score
    /// max(cosine, 0); out-of-vocabulary pairs follow `policy`.
    pub fn similarity(&self, ref_word: &str, hyp_word: &str, policy: OovPolicy) -> f64 {
        if ref_word == hyp_word {
            return 1.0;
        }
        match (self.vector(ref_word), self.vector(hyp_word)) {
            (Some(u), Some(v)) => cosine(u, v)
                .expect("vectors from one lexicon share its dimension")
                .max(0.0),
            _ => match policy {
                OovPolicy::Dissimilar => 0.0,
                OovPolicy::CharFallback => {
                    let a = crate::align::align_chars(ref_word, hyp_word);
                    let longest = a.ref_len.max(a.hyp_len);
                    if longest == 0 {
                        return 1.0;
                    }
                    (1.0 - a.edits() as f64 / longest as f64).clamp(0.0, 1.0)
                }
            },
        }
    }
}

/// Cosine similarity u.v / (|u||v|); 0.0 when either vector is all zeros.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// Pluggable similarity source for the substitution weight. Implementors
/// must be shareable read-only across scoring threads.
pub trait SimilarityOracle: Send + Sync {
    fn similarity(&self, ref_word: &str, hyp_word: &str) -> f64;
}

/// The standard oracle: an embedding lexicon plus an OOV policy.
pub struct LexiconSimilarity {
    lexicon: EmbeddingLexicon,
    policy: OovPolicy,
}

impl LexiconSimilarity {
    pub fn new(lexicon: EmbeddingLexicon, policy: OovPolicy) -> Self {
        LexiconSimilarity { lexicon, policy }
    }

    pub fn lexicon(&self) -> &EmbeddingLexicon {
        &self.lexicon
    }
}

impl SimilarityOracle for LexiconSimilarity {
    fn similarity(&self, ref_word: &str, hyp_word: &str) -> f64 {
        self.lexicon.similarity(ref_word, hyp_word, self.policy)
    }
}

/// Test/fixture oracle: a fixed symmetric pair table, identity = 1,
/// anything unlisted = 0.
#[derive(Debug, Default)]
pub struct FixtureSimilarity {
    pairs: HashMap<(String, String), f64>,
}

impl FixtureSimilarity {
    pub fn new(pairs: &[(&str, &str, f64)]) -> Self {
        let mut table = HashMap::new();
        for (a, b, s) in pairs {
            table.insert((a.to_string(), b.to_string()), *s);
            table.insert((b.to_string(), a.to_string()), *s);
        }
        FixtureSimilarity { pairs: table }
    }
}

impl SimilarityOracle for FixtureSimilarity {
    fn similarity(&self, ref_word: &str, hyp_word: &str) -> f64 {
        if ref_word == hyp_word {
            return 1.0;
        }
        self.pairs
            .get(&(ref_word.to_string(), hyp_word.to_string()))
            .copied()
            .unwrap_or(0.0)
    }
}
