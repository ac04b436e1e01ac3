//! Batch scoring across utterances. Scoring is pure per pair, so the
//! corpus fans out across worker threads when the `parallel` feature
//! (default) is on; `score_corpus_serial` is always available and the
//! two paths produce identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::corpus::ScoringPair;
use crate::embeddings::SimilarityOracle;
use crate::swer::{score_pair, SwerConfig, SwerError, UtteranceScore};

/// Sequential scoring fold, in input order.
pub fn score_corpus_serial(
    pairs: &[ScoringPair],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
) -> Result<Vec<UtteranceScore>, SwerError> {
    pairs
        .iter()
        .map(|p| score_pair(&p.reference, &p.hypothesis, cfg, sim))
        .collect()
}

/// Score a corpus, in parallel when built with the `parallel` feature.
/// Output order matches input order regardless of scheduling.
#[cfg(feature = "parallel")]
pub fn score_corpus(
    pairs: &[ScoringPair],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
) -> Result<Vec<UtteranceScore>, SwerError> {
    pairs
        .par_iter()
        .map(|p| score_pair(&p.reference, &p.hypothesis, cfg, sim))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn score_corpus(
    pairs: &[ScoringPair],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
) -> Result<Vec<UtteranceScore>, SwerError> {
    score_corpus_serial(pairs, cfg, sim)
}

/// Score with an explicit worker count. Without the `parallel` feature
/// the job count is ignored and scoring is sequential.
#[cfg(feature = "parallel")]
pub fn score_corpus_with_jobs(
    pairs: &[ScoringPair],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
    jobs: usize,
) -> Result<Vec<UtteranceScore>, SwerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool construction");
    pool.install(|| score_corpus(pairs, cfg, sim))
}

#[cfg(not(feature = "parallel"))]
pub fn score_corpus_with_jobs(
    pairs: &[ScoringPair],
    cfg: &SwerConfig,
    sim: &dyn SimilarityOracle,
    _jobs: usize,
) -> Result<Vec<UtteranceScore>, SwerError> {
    score_corpus_serial(pairs, cfg, sim)
}
