//! Classical metrics computed from an [`AlignmentResult`]: WER, CER,
//! WIP/WIL, plus human-assigned WER (HWER) from rating files.

use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

use crate::align::{self, AlignmentResult};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("rating record has no ratings")]
    EmptyRatings,
    #[error("rating {value} out of range 1..=5 (line {line})")]
    InvalidRating { value: i64, line: usize },
    #[error("malformed ratings row at line {line}: {detail}")]
    MalformedRatingsRow { line: usize, detail: String },
}

/// Word error rate (S+D+I)/N_r. Deliberately not clamped to [0,1]:
/// insertions can push the numerator past the reference length.
pub fn wer(a: &AlignmentResult) -> Result<f64, MetricsError> {
    if a.ref_len == 0 {
        return Err(MetricsError::EmptyReference);
    }
    Ok(a.edits() as f64 / a.ref_len as f64)
}

/// Character error rate of a single hypothesis word against a reference
/// word, clamped to 1.0. Up to `char_sub_threshold` character
/// substitutions are forgiven (treated as matches) before the rate is
/// computed; deletions and insertions are never forgiven.
pub fn cer(
    ref_word: &str,
    hyp_word: &str,
    char_sub_threshold: usize,
) -> Result<f64, MetricsError> {
    let a = align::align_chars(ref_word, hyp_word);
    if a.ref_len == 0 {
        return Err(MetricsError::EmptyReference);
    }
    let forgiven = a.subs.min(char_sub_threshold);
    let edits = a.subs - forgiven + a.dels + a.ins;
    Ok((edits as f64 / a.ref_len as f64).min(1.0))
}

/// Word information preserved (H/N_r)(H/N_h) and its complement, word
/// information lost. An empty hypothesis preserves nothing: WIP = 0.
pub fn wip_wil(a: &AlignmentResult) -> Result<(f64, f64), MetricsError> {
    if a.ref_len == 0 {
        return Err(MetricsError::EmptyReference);
    }
    if a.hyp_len == 0 {
        return Ok((0.0, 1.0));
    }
    let wip = (a.hits as f64 / a.ref_len as f64) * (a.hits as f64 / a.hyp_len as f64);
    Ok((wip, 1.0 - wip))
}

/// Ratings given to one stimulus by multiple raters, each on a 1..=5 scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingRecord {
    pub stimulus_id: String,
    pub ratings: Vec<u8>,
}

/// Human-assigned WER: one minus the subjective accuracy, where the
/// subjective accuracy is the mean rating divided by the top score 5.
/// Range is [0, 0.8] on the 1..=5 scale.
pub fn hwer_from_ratings(record: &RatingRecord) -> Result<f64, MetricsError> {
    if record.ratings.is_empty() {
        return Err(MetricsError::EmptyRatings);
    }
    let mean = record.ratings.iter().map(|&r| r as f64).sum::<f64>() / record.ratings.len() as f64;
    Ok(1.0 - mean / 5.0)
}

/// Parse a ratings CSV with header `stimulus_id,rating`, one row per
/// (stimulus, rater) pair, aggregating rows by stimulus id.
pub fn parse_ratings_csv(reader: impl BufRead) -> Result<Vec<RatingRecord>, MetricsError> {
    let mut by_id: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| MetricsError::MalformedRatingsRow {
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if lineno == 0 && trimmed.eq_ignore_ascii_case("stimulus_id,rating") {
            continue;
        }
        let (id, rating) = trimmed
            .rsplit_once(',')
            .ok_or_else(|| MetricsError::MalformedRatingsRow {
                line: lineno + 1,
                detail: "expected 'stimulus_id,rating'".to_string(),
            })?;
        let value: i64 =
            rating
                .trim()
                .parse()
                .map_err(|_| MetricsError::MalformedRatingsRow {
                    line: lineno + 1,
                    detail: format!("non-integer rating {rating:?}"),
                })?;
        if !(1..=5).contains(&value) {
            return Err(MetricsError::InvalidRating {
                value,
                line: lineno + 1,
            });
        }
        by_id.entry(id.trim().to_string()).or_default().push(value as u8);
    }
    Ok(by_id
        .into_iter()
        .map(|(stimulus_id, ratings)| RatingRecord {
            stimulus_id,
            ratings,
        })
        .collect())
}
