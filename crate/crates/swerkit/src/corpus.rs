//! Data ingestion: transcript files (trn `text (id)` lines or JSON-lines
//! `{id, text}`), CoNLL-2003 entity tags, and the annotation sidecar
//! that assembles everything into [`AnnotatedUtterance`]s.
//!
//! Annotation indices refer to positions in the normalized token
//! sequence, i.e. after punctuation-only tokens are dropped.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::Token;
use crate::normalize;
use crate::swer::{AnnotatedUtterance, AnnotationError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("duplicate id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("hypothesis {id:?} has no matching reference")]
    MissingReference { id: String },
    #[error("conflicting annotation: {0}")]
    ConflictingAnnotation(#[from] AnnotationError),
    #[error("no sentences parsed")]
    EmptyCorpus,
}

/// Non-fatal observation made while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: Option<usize>,
    pub message: String,
}

/// One CoNLL-2003 sentence: (surface form, NE tag) per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllSentence {
    pub tokens: Vec<(String, String)>,
}

/// Parsed CoNLL stream plus the lines that were skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllParse {
    pub sentences: Vec<ConllSentence>,
    pub warnings: Vec<Warning>,
}

/// Parse CoNLL-2003 column text: token in the first column, NE tag in
/// the last; blank lines separate sentences; `-DOCSTART-` records are
/// consumed as document boundaries. Malformed lines are skipped with a
/// warning and parsing continues. Arbitrary bytes are tolerated (lossy
/// UTF-8 conversion).
pub fn parse_conll(mut reader: impl Read) -> Result<ConllParse, CorpusError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = String::from_utf8_lossy(&bytes);

    let mut sentences = Vec::new();
    let mut warnings = Vec::new();
    let mut current: Vec<(String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            if !current.is_empty() {
                sentences.push(ConllSentence {
                    tokens: std::mem::take(&mut current),
                });
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields[0] == "-DOCSTART-" {
            if !current.is_empty() {
                sentences.push(ConllSentence {
                    tokens: std::mem::take(&mut current),
                });
            }
            continue;
        }
        if fields.len() < 2 {
            warnings.push(Warning {
                line: Some(lineno + 1),
                message: format!("expected at least 2 columns, got {}", fields.len()),
            });
            continue;
        }
        let tag = fields[fields.len() - 1];
        if tag != "O" && !tag.starts_with("I-") && !tag.starts_with("B-") {
            warnings.push(Warning {
                line: Some(lineno + 1),
                message: format!("unrecognized NE tag {tag:?}"),
            });
            continue;
        }
        current.push((fields[0].to_string(), tag.to_string()));
    }
    if !current.is_empty() {
        sentences.push(ConllSentence { tokens: current });
    }
    Ok(ConllParse {
        sentences,
        warnings,
    })
}

/// Convert a CoNLL sentence into an annotated utterance: tokens are
/// normalized (dropped ones shift the annotation indices), and any token
/// tagged other than `O` becomes a named entity. B-/I- prefixes are not
/// distinguished; tags apply per word.
pub fn to_annotated(
    sentence: &ConllSentence,
    id: impl Into<String>,
) -> Result<AnnotatedUtterance, CorpusError> {
    let mut tokens = Vec::new();
    let mut ne = Vec::new();
    for (surface, tag) in &sentence.tokens {
        if let Some(text) = normalize::normalize_token(surface) {
            let idx = tokens.len();
            tokens.push(Token::new(text, idx));
            if tag != "O" {
                ne.push(idx);
            }
        }
    }
    Ok(AnnotatedUtterance::new(id, tokens, &ne, &[], &[])?)
}

/// Sidecar annotation record, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ne: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sent: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spelled: Vec<(usize, usize, String)>,
}

/// A reference ready to score against its hypothesis token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringPair {
    pub id: String,
    pub reference: AnnotatedUtterance,
    pub hypothesis: Vec<Token>,
}

/// Pairs joined on id plus any warnings raised along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCorpus {
    pub pairs: Vec<ScoringPair>,
    pub warnings: Vec<Warning>,
}

/// Parse a transcript stream in either trn (`text (id)`) or JSON-lines
/// (`{"id": ..., "text": ...}`) form, auto-detected from the first
/// non-blank line. Returns (id, raw text) in file order.
pub fn parse_transcripts(mut reader: impl Read) -> Result<Vec<(String, String)>, CorpusError> {
    let mut content = String::new();
    reader.read_to_string(&mut content)?;
    let jsonl = content
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.trim_start().starts_with('{'))
        .unwrap_or(false);

    let mut out = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (lineno, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (id, text) = if jsonl {
            #[derive(Deserialize)]
            struct Rec {
                id: String,
                text: String,
            }
            let rec: Rec =
                serde_json::from_str(trimmed).map_err(|e| CorpusError::MalformedLine {
                    line: lineno + 1,
                    detail: e.to_string(),
                })?;
            (rec.id, rec.text)
        } else {
            let open = trimmed
                .rfind('(')
                .ok_or_else(|| CorpusError::MalformedLine {
                    line: lineno + 1,
                    detail: "expected trailing (utterance-id)".to_string(),
                })?;
            if !trimmed.ends_with(')') {
                return Err(CorpusError::MalformedLine {
                    line: lineno + 1,
                    detail: "expected trailing (utterance-id)".to_string(),
                });
            }
            let id = trimmed[open + 1..trimmed.len() - 1].trim().to_string();
            if id.is_empty() {
                return Err(CorpusError::MalformedLine {
                    line: lineno + 1,
                    detail: "empty utterance id".to_string(),
                });
            }
            (id, trimmed[..open].trim().to_string())
        };
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId {
                id,
                line: lineno + 1,
            });
        }
        out.push((id, text));
    }
    Ok(out)
}

/// Parse the annotation sidecar (JSON-lines), keyed by id.
pub fn parse_annotations(
    mut reader: impl Read,
) -> Result<BTreeMap<String, AnnotationRecord>, CorpusError> {
    let mut content = String::new();
    reader.read_to_string(&mut content)?;
    let mut out = BTreeMap::new();
    for (lineno, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let rec: AnnotationRecord =
            serde_json::from_str(trimmed).map_err(|e| CorpusError::MalformedLine {
                line: lineno + 1,
                detail: e.to_string(),
            })?;
        if out.contains_key(&rec.id) {
            return Err(CorpusError::DuplicateId {
                id: rec.id,
                line: lineno + 1,
            });
        }
        out.insert(rec.id.clone(), rec);
    }
    Ok(out)
}

/// Join references, hypotheses and annotations on id.
///
/// A reference without a hypothesis scores against an empty hypothesis
/// (all deletions) with a warning; a hypothesis without a reference is
/// an error. Annotations for unknown ids get a warning.
pub fn parse_pairs(
    ref_reader: impl Read,
    hyp_reader: impl Read,
    annotations_reader: Option<impl Read>,
) -> Result<ParsedCorpus, CorpusError> {
    let refs = parse_transcripts(ref_reader)?;
    let hyps = parse_transcripts(hyp_reader)?;
    let annotations = match annotations_reader {
        Some(r) => parse_annotations(r)?,
        None => BTreeMap::new(),
    };

    let ref_ids: HashSet<&str> = refs.iter().map(|(id, _)| id.as_str()).collect();
    for (id, _) in &hyps {
        if !ref_ids.contains(id.as_str()) {
            return Err(CorpusError::MissingReference { id: id.clone() });
        }
    }

    let mut warnings = Vec::new();
    for id in annotations.keys() {
        if !ref_ids.contains(id.as_str()) {
            warnings.push(Warning {
                line: None,
                message: format!("annotation for unknown id {id:?} ignored"),
            });
        }
    }

    let hyp_by_id: BTreeMap<&str, &str> = hyps
        .iter()
        .map(|(id, text)| (id.as_str(), text.as_str()))
        .collect();

    let mut pairs = Vec::with_capacity(refs.len());
    for (id, text) in &refs {
        let tokens = normalize::tokenize(text);
        let empty = AnnotationRecord::default();
        let ann = annotations.get(id).unwrap_or(&empty);
        let reference = AnnotatedUtterance::new(id, tokens, &ann.ne, &ann.sent, &ann.spelled)?;
        let hypothesis = match hyp_by_id.get(id.as_str()) {
            Some(text) => normalize::tokenize(text),
            None => {
                warnings.push(Warning {
                    line: None,
                    message: format!("reference {id:?} has no hypothesis; scoring as empty"),
                });
                Vec::new()
            }
        };
        pairs.push(ScoringPair {
            id: id.clone(),
            reference,
            hypothesis,
        });
    }
    Ok(ParsedCorpus { pairs, warnings })
}

/// Render one trn line, `text (id)`.
pub fn format_trn_line(text: &str, id: &str) -> String {
    format!("{text} ({id})")
}
