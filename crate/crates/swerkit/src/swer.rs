//! Semantic-WER: per-op weights, their aggregation into `score_a`, and
//! the importance-weighted final score, with a per-token audit trace.
//!
//! Substitution and deletion weights are normalized by the reference
//! length when aggregated, insertions by the hypothesis length. Wrong
//! named-entity and sentiment words additionally receive one
//! importance-weighted share of the residual accuracy each, which is
//! what lets the score separate hypotheses that classical WER ties.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{self, AlignmentResult, OpKind, Token};
use crate::embeddings::{OovPolicy, SimilarityOracle};
use crate::metrics;
use crate::normalize;

#[derive(Debug, Error, PartialEq)]
pub enum SwerError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum AnnotationError {
    #[error("utterance {id}: no tokens after normalization")]
    EmptyUtterance { id: String },
    #[error("utterance {id}: annotation index {index} out of range for {len} tokens")]
    IndexOutOfRange {
        id: String,
        index: usize,
        len: usize,
    },
    #[error("utterance {id}: conflicting annotations at token {index}")]
    Conflict { id: String, index: usize },
    #[error("utterance {id}: bad spelled span {start}..{end}")]
    BadSpan {
        id: String,
        start: usize,
        end: usize,
    },
}

/// Importance class of a reference token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TagClass {
    Plain,
    #[serde(rename = "ne")]
    NamedEntity,
    #[serde(rename = "sent")]
    Sentiment,
    #[serde(rename = "se")]
    SpelledEntity,
}

impl TagClass {
    /// NE and SENT errors count toward the wrong-important tally.
    pub fn is_important(self) -> bool {
        matches!(self, TagClass::NamedEntity | TagClass::Sentiment)
    }
}

/// A run of reference tokens that spell out one entity letter by letter.
/// `start..end` is a half-open token index range; `canonical` is the word
/// the letters combine into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpelledSpan {
    pub start: usize,
    pub end: usize,
    pub canonical: String,
}

/// A tokenized reference with per-token tags and spelled-out-entity spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedUtterance {
    pub id: String,
    pub tokens: Vec<Token>,
    pub tags: Vec<TagClass>,
    pub spelled_spans: Vec<SpelledSpan>,
}

impl AnnotatedUtterance {
    /// Validating constructor: checks bounds, overlap and tag conflicts,
    /// and tags every token inside a spelled span as SE.
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<Token>,
        ne: &[usize],
        sent: &[usize],
        spelled: &[(usize, usize, String)],
    ) -> Result<Self, AnnotationError> {
        let id = id.into();
        let len = tokens.len();
        if len == 0 {
            return Err(AnnotationError::EmptyUtterance { id });
        }
        let mut tags = vec![TagClass::Plain; len];
        for &i in ne {
            if i >= len {
                return Err(AnnotationError::IndexOutOfRange { id, index: i, len });
            }
            if tags[i] != TagClass::Plain {
                return Err(AnnotationError::Conflict { id, index: i });
            }
            tags[i] = TagClass::NamedEntity;
        }
        for &i in sent {
            if i >= len {
                return Err(AnnotationError::IndexOutOfRange { id, index: i, len });
            }
            if tags[i] != TagClass::Plain {
                return Err(AnnotationError::Conflict { id, index: i });
            }
            tags[i] = TagClass::Sentiment;
        }
        let mut spans: Vec<SpelledSpan> = Vec::with_capacity(spelled.len());
        for (start, end, canonical) in spelled {
            let (start, end) = (*start, *end);
            if start >= end || end > len {
                return Err(AnnotationError::BadSpan { id, start, end });
            }
            for i in start..end {
                if tags[i] != TagClass::Plain {
                    return Err(AnnotationError::Conflict { id, index: i });
                }
                tags[i] = TagClass::SpelledEntity;
            }
            spans.push(SpelledSpan {
                start,
                end,
                canonical: normalize::normalize_token(canonical).unwrap_or_default(),
            });
        }
        spans.sort_by_key(|s| s.start);
        for pair in spans.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(AnnotationError::BadSpan {
                    id,
                    start: pair[1].start,
                    end: pair[1].end,
                });
            }
        }
        Ok(AnnotatedUtterance {
            id,
            tokens,
            tags,
            spelled_spans: spans,
        })
    }

    /// Number of NE-tagged tokens; drives the Cat-I/II/III bucketing.
    pub fn entity_count(&self) -> usize {
        self.tags
            .iter()
            .filter(|t| **t == TagClass::NamedEntity)
            .count()
    }
}

/// Knobs of the semantic score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwerConfig {
    /// Importance weight, >= 1. Each wrong NE/SENT word adds one
    /// `iw * dw` share on top of `score_a`.
    pub iw: f64,
    /// Similarity gate for plain-word substitutions; at or above it the
    /// substitution is free, below it it costs a full error.
    pub sim_threshold: f64,
    /// Number of forgiven character substitutions inside spelled entities.
    pub char_sub_threshold: usize,
    /// Clamp the final score into [0, 1].
    pub clamp_output: bool,
    pub oov_policy: OovPolicy,
}

impl Default for SwerConfig {
    fn default() -> Self {
        SwerConfig {
            iw: 1.0,
            sim_threshold: 0.6,
            char_sub_threshold: 0,
            clamp_output: true,
            oov_policy: OovPolicy::Dissimilar,
        }
    }
}

impl SwerConfig {
    pub fn validate(&self) -> Result<(), SwerError> {
        if !(self.iw >= 1.0) {
            return Err(SwerError::InvalidConfig(format!(
                "iw must be >= 1, got {}",
                self.iw
            )));
        }
        if !(self.sim_threshold > 0.0 && self.sim_threshold < 1.0) {
            return Err(SwerError::InvalidConfig(format!(
                "sim_threshold must be in (0, 1), got {}",
                self.sim_threshold
            )));
        }
        Ok(())
    }
}

/// Why a trace entry got its weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Entity,
    Sentiment,
    SpelledCer,
    SimBelow,
    SimAbove,
    PlainDel,
    Ins,
}

/// One non-Match alignment op with the weight it contributed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub op: OpKind,
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
    pub weight: f64,
    pub reason: Reason,
}

/// Full per-utterance result of the semantic score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwerBreakdown {
    pub score_a: f64,
    pub accuracy: f64,
    pub dw: f64,
    pub wrong_important: usize,
    pub swer: f64,
    pub trace: Vec<TraceEntry>,
}

/// Substitution weight for one aligned (reference, hypothesis) word pair.
/// NE/SENT cost a full error, spelled entities cost their character error
/// rate, plain words are gated by embedding similarity.
pub fn substitution_weight(
    ref_tok: &Token,
    class: TagClass,
    hyp_tok: &Token,
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
) -> (f64, Reason) {
    match class {
        TagClass::NamedEntity => (1.0, Reason::Entity),
        TagClass::Sentiment => (1.0, Reason::Sentiment),
        TagClass::SpelledEntity => {
            let c = metrics::cer(&ref_tok.text, &hyp_tok.text, cfg.char_sub_threshold)
                .expect("reference tokens are non-empty");
            (c, Reason::SpelledCer)
        }
        TagClass::Plain => {
            let s = if ref_tok.text == hyp_tok.text {
                1.0
            } else {
                sim.similarity(&ref_tok.text, &hyp_tok.text)
            };
            if s < cfg.sim_threshold {
                (1.0, Reason::SimBelow)
            } else {
                (0.0, Reason::SimAbove)
            }
        }
    }
}

/// Deletion weight for one dropped reference word. Values here are the
/// pre-normalization weights: the uniform 1/N_r division happens in
/// [`score_a`], so a plain deletion ends up contributing 1/N_r.
pub fn deletion_weight(ref_tok: &Token, class: TagClass, cfg: &SwerConfig) -> (f64, Reason) {
    match class {
        TagClass::NamedEntity => (1.0, Reason::Entity),
        TagClass::Sentiment => (1.0, Reason::Sentiment),
        TagClass::SpelledEntity => {
            let c = metrics::cer(&ref_tok.text, "", cfg.char_sub_threshold)
                .expect("reference tokens are non-empty");
            (c, Reason::SpelledCer)
        }
        TagClass::Plain => (1.0, Reason::PlainDel),
    }
}

/// Per-insertion weight: one unit of probability mass spread over the
/// hypothesis. An insertion implies the hypothesis is non-empty.
pub fn insertion_weight(hyp_len: usize) -> f64 {
    1.0 / hyp_len as f64
}

/// Aggregate the weighted substitution, deletion and insertion errors.
/// Returns the raw (unclamped) score, the wrong NE/SENT count, and the
/// audit trace with one entry per non-Match op.
pub fn score_a(
    a: &AlignmentResult,
    reference: &AnnotatedUtterance,
    hypothesis: &[Token],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
) -> (f64, usize, Vec<TraceEntry>) {
    let mut ref_weighted = 0.0;
    let mut insertions = 0usize;
    let mut wrong_important = 0usize;
    let mut trace = Vec::new();

    for op in &a.ops {
        match op.kind {
            OpKind::Match => {}
            OpKind::Substitute => {
                let ri = op.ref_index.expect("substitute carries a ref index");
                let hi = op.hyp_index.expect("substitute carries a hyp index");
                let class = reference.tags[ri];
                let (w, reason) =
                    substitution_weight(&reference.tokens[ri], class, &hypothesis[hi], cfg, sim);
                ref_weighted += w;
                if class.is_important() {
                    wrong_important += 1;
                }
                trace.push(TraceEntry {
                    op: OpKind::Substitute,
                    ref_index: Some(ri),
                    hyp_index: Some(hi),
                    weight: w,
                    reason,
                });
            }
            OpKind::Delete => {
                let ri = op.ref_index.expect("delete carries a ref index");
                let class = reference.tags[ri];
                let (w, reason) = deletion_weight(&reference.tokens[ri], class, cfg);
                ref_weighted += w;
                if class.is_important() {
                    wrong_important += 1;
                }
                trace.push(TraceEntry {
                    op: OpKind::Delete,
                    ref_index: Some(ri),
                    hyp_index: None,
                    weight: w,
                    reason,
                });
            }
            OpKind::Insert => {
                insertions += 1;
                trace.push(TraceEntry {
                    op: OpKind::Insert,
                    ref_index: None,
                    hyp_index: op.hyp_index,
                    weight: insertion_weight(a.hyp_len),
                    reason: Reason::Ins,
                });
            }
        }
    }

    let mut score = ref_weighted / a.ref_len as f64;
    if insertions > 0 {
        score += insertions as f64 / a.hyp_len as f64;
    }
    (score, wrong_important, trace)
}

/// The full semantic score for one aligned pair.
pub fn swer_score(
    a: &AlignmentResult,
    reference: &AnnotatedUtterance,
    hypothesis: &[Token],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
) -> Result<SwerBreakdown, SwerError> {
    cfg.validate()?;
    if a.ref_len == 0 {
        return Err(SwerError::EmptyReference);
    }
    let (raw, wrong_important, trace) = score_a(a, reference, hypothesis, cfg, sim);
    let accuracy = 1.0 - raw.min(1.0);
    let dw = if a.ref_len > wrong_important {
        accuracy / (a.ref_len - wrong_important) as f64
    } else {
        0.0
    };
    let mut swer = raw + wrong_important as f64 * cfg.iw * dw;
    if cfg.clamp_output {
        swer = swer.clamp(0.0, 1.0);
    }
    Ok(SwerBreakdown {
        score_a: raw,
        accuracy,
        dw,
        wrong_important,
        swer,
        trace,
    })
}

/// Result of collapsing spelled spans: rewritten reference and
/// hypothesis, plus the collapsed-index -> original-span map.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedPair {
    pub reference: AnnotatedUtterance,
    pub hypothesis: Vec<Token>,
    pub span_map: Vec<(usize, SpelledSpan)>,
}

/// Collapse each spelled span into a single SE token on both sides.
///
/// The hypothesis tokens paired with span members by `raw_alignment`
/// (plus any insertions between them) concatenate into one hypothesis
/// unit; a span with nothing aligned to it simply emits no hypothesis
/// token and will align as a deletion. Alignment must be recomputed on
/// the collapsed sequences afterwards.
pub fn collapse_spelled_spans(
    reference: &AnnotatedUtterance,
    hypothesis: &[Token],
    raw_alignment: &AlignmentResult,
) -> CollapsedPair {
    // hyp partner of each ref index under Match/Substitute.
    let mut partner: Vec<Option<usize>> = vec![None; reference.tokens.len()];
    for op in &raw_alignment.ops {
        if matches!(op.kind, OpKind::Match | OpKind::Substitute) {
            partner[op.ref_index.unwrap()] = op.hyp_index;
        }
    }

    // For each span, the inclusive hyp range it absorbs (if any).
    let mut absorbed: Vec<Option<(usize, usize)>> = Vec::new();
    for span in &reference.spelled_spans {
        let hits: Vec<usize> = (span.start..span.end).filter_map(|r| partner[r]).collect();
        absorbed.push(match (hits.first(), hits.last()) {
            (Some(&lo), Some(&hi)) => Some((lo, hi)),
            _ => None,
        });
    }

    // Rewrite the reference.
    let mut ref_tokens = Vec::new();
    let mut tags = Vec::new();
    let mut spans_out = Vec::new();
    let mut span_map = Vec::new();
    let mut i = 0;
    let mut span_iter = reference.spelled_spans.iter().peekable();
    while i < reference.tokens.len() {
        if let Some(span) = span_iter.peek() {
            if span.start == i {
                let span = span_iter.next().unwrap();
                let text = if span.canonical.is_empty() {
                    reference.tokens[span.start..span.end]
                        .iter()
                        .map(|t| t.text.as_str())
                        .collect::<String>()
                } else {
                    span.canonical.clone()
                };
                let idx = ref_tokens.len();
                ref_tokens.push(Token::new(text, idx));
                tags.push(TagClass::SpelledEntity);
                spans_out.push(SpelledSpan {
                    start: idx,
                    end: idx + 1,
                    canonical: span.canonical.clone(),
                });
                span_map.push((idx, span.clone()));
                i = span.end;
                continue;
            }
        }
        let idx = ref_tokens.len();
        ref_tokens.push(Token::new(reference.tokens[i].text.clone(), idx));
        tags.push(reference.tags[i]);
        i += 1;
    }

    // Rewrite the hypothesis, concatenating each absorbed range.
    let mut hyp_tokens: Vec<Token> = Vec::new();
    let mut j = 0;
    while j < hypothesis.len() {
        if let Some((lo, hi)) = absorbed
            .iter()
            .flatten()
            .find(|(lo, hi)| (*lo..=*hi).contains(&j))
        {
            let text: String = hypothesis[*lo..=*hi]
                .iter()
                .map(|t| t.text.as_str())
                .collect();
            hyp_tokens.push(Token::new(text, hyp_tokens.len()));
            j = hi + 1;
        } else {
            hyp_tokens.push(Token::new(hypothesis[j].text.clone(), hyp_tokens.len()));
            j += 1;
        }
    }

    CollapsedPair {
        reference: AnnotatedUtterance {
            id: reference.id.clone(),
            tokens: ref_tokens,
            tags,
            spelled_spans: spans_out,
        },
        hypothesis: hyp_tokens,
        span_map,
    }
}

/// All classical and semantic scores for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceScore {
    pub id: String,
    pub ref_len: usize,
    pub hyp_len: usize,
    pub entity_count: usize,
    pub edits: usize,
    pub wer: f64,
    pub wip: f64,
    pub wil: f64,
    pub swer: SwerBreakdown,
}

/// Score one reference/hypothesis pair end to end: collapse spelled
/// spans if any, align, then compute WER, WIP/WIL and the semantic score
/// from the same alignment.
pub fn score_pair(
    reference: &AnnotatedUtterance,
    hypothesis: &[Token],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
) -> Result<UtteranceScore, SwerError> {
    cfg.validate()?;
    if reference.tokens.is_empty() {
        return Err(SwerError::EmptyReference);
    }
    let collapsed;
    let (ref_u, hyp) = if reference.spelled_spans.is_empty() {
        (reference, hypothesis)
    } else {
        let prelim = align::align_words(&reference.tokens, hypothesis);
        collapsed = collapse_spelled_spans(reference, hypothesis, &prelim);
        (&collapsed.reference, collapsed.hypothesis.as_slice())
    };
    let a = align::align_words(&ref_u.tokens, hyp);
    let wer = metrics::wer(&a).map_err(|_| SwerError::EmptyReference)?;
    let (wip, wil) = metrics::wip_wil(&a).map_err(|_| SwerError::EmptyReference)?;
    let swer = swer_score(&a, ref_u, hyp, cfg, sim)?;
    Ok(UtteranceScore {
        id: reference.id.clone(),
        ref_len: a.ref_len,
        hyp_len: a.hyp_len,
        entity_count: reference.entity_count(),
        edits: a.edits(),
        wer,
        wip,
        wil,
        swer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{align_words, tokens};
    use crate::embeddings::FixtureSimilarity;
    use proptest::prelude::*;

    fn table1_sim() -> FixtureSimilarity {
        FixtureSimilarity::new(&[("you", "u", 0.3), ("loves", "love", 0.85)])
    }

    fn annotated(id: &str, words: &[&str], ne: &[usize]) -> AnnotatedUtterance {
        AnnotatedUtterance::new(id, tokens(words), ne, &[], &[]).unwrap()
    }

    #[test]
    fn substitution_weight_cases() {
        let cfg = SwerConfig::default();
        let sim = table1_sim();
        let (w, r) = substitution_weight(
            &Token::new("paris", 0),
            TagClass::NamedEntity,
            &Token::new("phariz", 0),
            &cfg,
            &sim,
        );
        assert_eq!((w, r), (1.0, Reason::Entity));

        let (w, r) = substitution_weight(
            &Token::new("harvey", 0),
            TagClass::SpelledEntity,
            &Token::new("hrvey", 0),
            &cfg,
            &sim,
        );
        assert!((w - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(r, Reason::SpelledCer);

        let (w, r) = substitution_weight(
            &Token::new("loves", 0),
            TagClass::Plain,
            &Token::new("love", 0),
            &cfg,
            &sim,
        );
        assert_eq!((w, r), (0.0, Reason::SimAbove));

        let (w, r) = substitution_weight(
            &Token::new("you", 0),
            TagClass::Plain,
            &Token::new("u", 0),
            &cfg,
            &sim,
        );
        assert_eq!((w, r), (1.0, Reason::SimBelow));
    }

    #[test]
    fn threshold_boundary_goes_to_weight_zero() {
        let cfg = SwerConfig::default();
        let sim = FixtureSimilarity::new(&[("a", "b", 0.6)]);
        let (w, _) = substitution_weight(
            &Token::new("a", 0),
            TagClass::Plain,
            &Token::new("b", 0),
            &cfg,
            &sim,
        );
        assert_eq!(w, 0.0);
    }

    #[test]
    fn deletion_weight_cases() {
        let cfg = SwerConfig::default();
        let (w, r) = deletion_weight(&Token::new("paris", 0), TagClass::NamedEntity, &cfg);
        assert_eq!((w, r), (1.0, Reason::Entity));
        let (w, r) = deletion_weight(&Token::new("the", 0), TagClass::Plain, &cfg);
        assert_eq!((w, r), (1.0, Reason::PlainDel));
        let (w, r) = deletion_weight(&Token::new("harvey", 0), TagClass::SpelledEntity, &cfg);
        assert_eq!((w, r), (1.0, Reason::SpelledCer));
    }

    #[test]
    fn plain_deletion_contributes_one_over_ref_len() {
        let words: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
        let word_refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
        let reference = annotated("d", &word_refs, &[]);
        let hyp = tokens(&word_refs[1..]);
        let a = align_words(&reference.tokens, &hyp);
        let sim = FixtureSimilarity::default();
        let (s, wrong, _) = score_a(&a, &reference, &hyp, &SwerConfig::default(), &sim);
        assert!((s - 0.1).abs() < 1e-12);
        assert_eq!(wrong, 0);
    }

    #[test]
    fn insertion_weight_examples() {
        assert!((insertion_weight(10) - 0.1).abs() < 1e-12);
        // Sum identity: k insertions over a k-token hypothesis carry
        // exactly one unit of mass.
        let k = 7;
        let total: f64 = (0..k).map(|_| insertion_weight(k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_a_table1_row1() {
        let reference = annotated("t1", &["what", "did", "you", "do", "in", "paris"], &[5]);
        let hyp = tokens(&["what", "did", "u", "do", "in", "phariz"]);
        let a = align_words(&reference.tokens, &hyp);
        let (s, wrong, trace) = score_a(&a, &reference, &hyp, &SwerConfig::default(), &table1_sim());
        assert!((s - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(wrong, 1);
        assert_eq!(trace.len(), 2);
    }

    #[test]
    fn score_a_table1_row3_is_zero() {
        let reference = annotated("t3", &["ram", "loves", "sita"], &[]);
        let hyp = tokens(&["ram", "love", "sita"]);
        let a = align_words(&reference.tokens, &hyp);
        let (s, wrong, trace) = score_a(&a, &reference, &hyp, &SwerConfig::default(), &table1_sim());
        assert_eq!(s, 0.0);
        assert_eq!(wrong, 0);
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].reason, Reason::SimAbove);
    }

    #[test]
    fn swer_table1_rows() {
        let sim = table1_sim();
        let cfg = SwerConfig::default();

        let r1 = annotated("t1", &["what", "did", "you", "do", "in", "paris"], &[5]);
        let h1 = tokens(&["what", "did", "u", "do", "in", "phariz"]);
        let s1 = score_pair(&r1, &h1, &cfg, &sim).unwrap();
        assert!((s1.wer - 1.0 / 3.0).abs() < 1e-4);
        assert!((s1.swer.swer - 0.4667).abs() < 1e-4);

        let r2 = annotated("t2", &["i", "love", "switzerland"], &[2]);
        let h2 = tokens(&["i", "love", "switjerlan"]);
        let s2 = score_pair(&r2, &h2, &cfg, &sim).unwrap();
        assert!((s2.wer - 1.0 / 3.0).abs() < 1e-4);
        assert!((s2.swer.swer - 0.6667).abs() < 1e-4);

        let r3 = annotated("t3", &["ram", "loves", "sita"], &[]);
        let h3 = tokens(&["ram", "love", "sita"]);
        let s3 = score_pair(&r3, &h3, &cfg, &sim).unwrap();
        assert!((s3.wer - 1.0 / 3.0).abs() < 1e-4);
        assert_eq!(s3.swer.swer, 0.0);
    }

    #[test]
    fn breakdown_identities_hold() {
        let sim = table1_sim();
        let r = annotated("t1", &["what", "did", "you", "do", "in", "paris"], &[5]);
        let h = tokens(&["what", "did", "u", "do", "in", "phariz"]);
        let s = score_pair(&r, &h, &SwerConfig::default(), &sim).unwrap();
        let b = &s.swer;
        assert!((b.accuracy - (1.0 - b.score_a.min(1.0))).abs() < 1e-12);
        assert!((b.dw - b.accuracy / (s.ref_len - b.wrong_important) as f64).abs() < 1e-12);
        assert!(
            (b.swer - (b.score_a + b.wrong_important as f64 * b.dw)).abs() < 1e-12,
            "iw = 1 here"
        );
    }

    #[test]
    fn identity_hypothesis_scores_zero() {
        let r = annotated("id", &["a", "b", "paris"], &[2]);
        let s = score_pair(&r, &r.tokens, &SwerConfig::default(), &table1_sim()).unwrap();
        assert_eq!(s.swer.swer, 0.0);
        assert_eq!(s.swer.score_a, 0.0);
        assert!(s.swer.trace.is_empty());
    }

    #[test]
    fn dw_denominator_degenerate_case() {
        // Single-token reference that is itself the entity: #E == N_r.
        let r = annotated("one", &["paris"], &[0]);
        let h = tokens(&["london"]);
        let s = score_pair(&r, &h, &SwerConfig::default(), &table1_sim()).unwrap();
        assert_eq!(s.swer.dw, 0.0);
        assert_eq!(s.swer.swer, 1.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = SwerConfig::default();
        cfg.iw = 0.5;
        let r = annotated("x", &["a"], &[]);
        assert!(matches!(
            score_pair(&r, &r.tokens, &cfg, &table1_sim()),
            Err(SwerError::InvalidConfig(_))
        ));
    }

    fn spelled_reference() -> AnnotatedUtterance {
        // "my name is harvey spelled as h a r v e y", span 6..12 -> "harvey"
        AnnotatedUtterance::new(
            "sp",
            tokens(&[
                "my", "name", "is", "harvey", "spelled", "as", "h", "a", "r", "v", "e", "y",
            ]),
            &[],
            &[],
            &[(6, 12, "harvey".to_string())],
        )
        .unwrap()
    }

    #[test]
    fn collapse_concatenates_aligned_hyp_region() {
        let r = spelled_reference();
        let h = tokens(&[
            "my", "name", "is", "hurdy", "spelled", "as", "age", "a", "r", "v", "e", "y",
        ]);
        let prelim = align_words(&r.tokens, &h);
        let c = collapse_spelled_spans(&r, &h, &prelim);
        assert_eq!(c.reference.tokens.len(), 7);
        assert_eq!(c.reference.tokens[6].text, "harvey");
        assert_eq!(c.reference.tags[6], TagClass::SpelledEntity);
        assert_eq!(c.hypothesis.len(), 7);
        assert_eq!(c.hypothesis[6].text, "agearvey");
        assert_eq!(c.span_map.len(), 1);
        assert_eq!(c.span_map[0].0, 6);
    }

    #[test]
    fn collapse_perfect_span_matches() {
        let r = spelled_reference();
        let h = tokens(&[
            "my", "name", "is", "harvey", "spelled", "as", "h", "a", "r", "v", "e", "y",
        ]);
        let prelim = align_words(&r.tokens, &h);
        let c = collapse_spelled_spans(&r, &h, &prelim);
        let a = align_words(&c.reference.tokens, &c.hypothesis);
        assert_eq!(a.edits(), 0);
        let s = score_pair(&r, &h, &SwerConfig::default(), &table1_sim()).unwrap();
        assert_eq!(s.swer.swer, 0.0);
    }

    #[test]
    fn collapse_empty_span_region_becomes_deletion() {
        let r = spelled_reference();
        let h = tokens(&["my", "name", "is", "hurdy", "spelled", "as"]);
        let prelim = align_words(&r.tokens, &h);
        let c = collapse_spelled_spans(&r, &h, &prelim);
        assert_eq!(c.reference.tokens.len(), 7);
        assert_eq!(c.hypothesis.len(), 6);
        let a = align_words(&c.reference.tokens, &c.hypothesis);
        assert_eq!((a.subs, a.dels), (1, 1));
        // The deleted SE token costs cer("harvey", "") == 1, normalized.
        let sim = FixtureSimilarity::default();
        let (s, _, trace) = score_a(&a, &c.reference, &c.hypothesis, &SwerConfig::default(), &sim);
        assert!((s - 2.0 / 7.0).abs() < 1e-12);
        assert!(trace
            .iter()
            .any(|t| t.op == OpKind::Delete && t.reason == Reason::SpelledCer && t.weight == 1.0));
    }

    #[test]
    fn trace_has_one_entry_per_non_match_op() {
        let r = annotated("tr", &["a", "paris", "b", "c"], &[1]);
        let h = tokens(&["a", "x", "b", "q", "c", "z"]);
        let s = score_pair(&r, &h, &SwerConfig::default(), &table1_sim()).unwrap();
        let a = align_words(&r.tokens, &h);
        let non_match = a.ops.iter().filter(|o| o.kind != OpKind::Match).count();
        assert_eq!(s.swer.trace.len(), non_match);
    }

    #[test]
    fn annotation_validation_errors() {
        assert!(matches!(
            AnnotatedUtterance::new("e", vec![], &[], &[], &[]),
            Err(AnnotationError::EmptyUtterance { .. })
        ));
        assert!(matches!(
            AnnotatedUtterance::new("e", tokens(&["a", "b"]), &[7], &[], &[]),
            Err(AnnotationError::IndexOutOfRange { index: 7, .. })
        ));
        assert!(matches!(
            AnnotatedUtterance::new("e", tokens(&["a", "b"]), &[0], &[0], &[]),
            Err(AnnotationError::Conflict { index: 0, .. })
        ));
        assert!(matches!(
            AnnotatedUtterance::new("e", tokens(&["a", "b"]), &[], &[], &[(1, 1, "x".into())]),
            Err(AnnotationError::BadSpan { .. })
        ));
        assert!(matches!(
            AnnotatedUtterance::new(
                "e",
                tokens(&["a", "b", "c"]),
                &[],
                &[],
                &[(0, 2, "x".into()), (1, 3, "y".into())]
            ),
            Err(AnnotationError::Conflict { .. }) | Err(AnnotationError::BadSpan { .. })
        ));
    }

    fn arb_words(max: usize) -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(
            proptest::sample::select(vec![
                "alpha".to_string(),
                "beta".to_string(),
                "gamma".to_string(),
                "delta".to_string(),
                "paris".to_string(),
                "rome".to_string(),
            ]),
            1..=max,
        )
    }

    proptest! {
        #[test]
        fn swer_zero_on_identity(words in arb_words(12), ne in proptest::collection::vec(0usize..12, 0..3)) {
            let word_refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
            let ne: Vec<usize> = ne.into_iter().filter(|&i| i < words.len()).collect();
            let mut seen = std::collections::HashSet::new();
            let ne: Vec<usize> = ne.into_iter().filter(|i| seen.insert(*i)).collect();
            let r = AnnotatedUtterance::new("p", tokens(&word_refs), &ne, &[], &[]).unwrap();
            let s = score_pair(&r, &r.tokens, &SwerConfig::default(), &FixtureSimilarity::default()).unwrap();
            prop_assert_eq!(s.swer.swer, 0.0);
        }

        #[test]
        fn tagging_ne_never_decreases_swer(
            words in arb_words(8),
            target in 0usize..8,
            hyp_words in arb_words(8),
        ) {
            let target = target % words.len();
            let word_refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
            let hyp_refs: Vec<&str> = hyp_words.iter().map(|s| s.as_str()).collect();
            let plain = AnnotatedUtterance::new("p", tokens(&word_refs), &[], &[], &[]).unwrap();
            let tagged = AnnotatedUtterance::new("p", tokens(&word_refs), &[target], &[], &[]).unwrap();
            let cfg = SwerConfig::default();
            let sim = FixtureSimilarity::default();
            let h = tokens(&hyp_refs);
            let sp = score_pair(&plain, &h, &cfg, &sim).unwrap();
            let st = score_pair(&tagged, &h, &cfg, &sim).unwrap();
            prop_assert!(st.swer.swer >= sp.swer.swer - 1e-12);
        }

        #[test]
        fn swer_monotone_in_iw_preclamp(
            words in arb_words(8),
            hyp_words in arb_words(8),
            iw_lo in 1.0f64..3.0,
            bump in 0.0f64..2.0,
        ) {
            let word_refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
            let hyp_refs: Vec<&str> = hyp_words.iter().map(|s| s.as_str()).collect();
            let r = AnnotatedUtterance::new("p", tokens(&word_refs), &[0], &[], &[]).unwrap();
            let h = tokens(&hyp_refs);
            let mut cfg = SwerConfig { clamp_output: false, ..SwerConfig::default() };
            cfg.iw = iw_lo;
            let lo = score_pair(&r, &h, &cfg, &FixtureSimilarity::default()).unwrap();
            cfg.iw = iw_lo + bump;
            let hi = score_pair(&r, &h, &cfg, &FixtureSimilarity::default()).unwrap();
            if lo.swer.wrong_important >= 1 {
                prop_assert!(hi.swer.swer >= lo.swer.swer - 1e-12);
            }
        }
    }
}
