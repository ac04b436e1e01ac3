//! swerkit scores ASR hypothesis transcripts against annotated
//! references. It computes the classical metrics (WER, CER, WIP/WIL)
//! and SWER, a semantic word error rate that weights each error by
//! embedding similarity, named-entity/sentiment importance, and
//! character fidelity for spelled-out entities. A synthetic-corruption
//! harness and correlation reporting support validating the metric
//! against human judgments.
//!
//! The typical pipeline: [`corpus`] parses references, hypotheses and
//! annotations into scoring pairs; [`batch`] fans them out over
//! [`swer::score_pair`]; [`report`] aggregates and emits JSON/CSV.

pub mod align;
pub mod batch;
pub mod corpus;
pub mod embeddings;
pub mod injector;
pub mod metrics;
pub mod normalize;
pub mod report;
pub mod swer;

pub use align::{align_chars, align_words, AlignmentResult, EditOp, OpKind, Token};
pub use batch::{score_corpus, score_corpus_serial, score_corpus_with_jobs};
pub use corpus::{parse_conll, parse_pairs, CorpusError, ParsedCorpus, ScoringPair};
pub use embeddings::{
    cosine, EmbeddingLexicon, FixtureSimilarity, LexiconSimilarity, OovPolicy, SimilarityOracle,
};
pub use injector::{
    bucket_by_entity_count, char_perturb, generate_corpus_variants, generate_entity_variants,
    Bucket, CorruptionMode, CorruptionSpec, SubStrategy, VariantHypothesis,
};
pub use metrics::{cer, hwer_from_ratings, wer, wip_wil, MetricsError, RatingRecord};
pub use report::{iw_sweep, pearson, spearman, CorpusReport, ReportError, SweepReport};
pub use swer::{
    score_pair, swer_score, AnnotatedUtterance, SwerBreakdown, SwerConfig, SwerError, TagClass,
    UtteranceScore,
};
