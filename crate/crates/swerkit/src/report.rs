//! Corpus-level aggregation, correlation of metric vectors against
//! human scores, and machine-readable emission.
//!
//! Emission is byte-stable: fields in a fixed order, floats rendered
//! with 6 decimal places, rows sorted by utterance id. The JSON schema
//! and CSV column set are versioned via `report_version`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use crate::injector::Bucket;
use crate::swer::{SwerConfig, UtteranceScore};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("missing human scores for {} id(s), first: {}", ids.len(), preview(ids))]
    MissingScore { ids: Vec<String> },
    #[error("unparseable report: {0}")]
    Parse(String),
}

fn preview(ids: &[String]) -> String {
    ids.iter()
        .take(10)
        .map(|s| s.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, ReportError> {
    if x.len() != y.len() {
        return Err(ReportError::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(ReportError::DegenerateInput(format!(
            "need at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(ReportError::DegenerateInput(
            "zero variance input".to_string(),
        ));
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Spearman rank correlation: Pearson over average-tie ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, ReportError> {
    pearson(&ranks(x), &ranks(y))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            out[k] = avg;
        }
        i = j;
    }
    out
}

/// Per-bucket means over the scored rows.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BucketAggregate {
    pub bucket: String,
    pub count: usize,
    pub mean_wer: f64,
    pub mean_swer: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Aggregates {
    pub count: usize,
    /// Pooled edits over pooled reference length.
    pub micro_wer: f64,
    /// Mean of per-utterance WER values.
    pub macro_wer: f64,
    pub macro_swer: f64,
    pub buckets: Vec<BucketAggregate>,
}

/// The scoring report: per-utterance rows plus aggregates and the
/// config that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    pub report_version: u32,
    pub config: SwerConfig,
    pub utterances: Vec<UtteranceScore>,
    pub aggregates: Aggregates,
}

impl CorpusReport {
    /// Assemble a report: rows are sorted by id (so output does not
    /// depend on scoring order) and aggregates are recomputed.
    pub fn build(mut rows: Vec<UtteranceScore>, config: SwerConfig) -> CorpusReport {
        rows.sort_by(|a, b| a.id.cmp(&b.id));
        let count = rows.len();
        let total_edits: usize = rows.iter().map(|r| r.edits).sum();
        let total_ref: usize = rows.iter().map(|r| r.ref_len).sum();
        let micro_wer = if total_ref > 0 {
            total_edits as f64 / total_ref as f64
        } else {
            0.0
        };
        let macro_wer = mean(rows.iter().map(|r| r.wer));
        let macro_swer = mean(rows.iter().map(|r| r.swer.swer));
        let buckets = Bucket::all()
            .into_iter()
            .map(|b| {
                let members: Vec<&UtteranceScore> = rows
                    .iter()
                    .filter(|r| Bucket::from_entity_count(r.entity_count) == b)
                    .collect();
                BucketAggregate {
                    bucket: b.label().to_string(),
                    count: members.len(),
                    mean_wer: mean(members.iter().map(|r| r.wer)),
                    mean_swer: mean(members.iter().map(|r| r.swer.swer)),
                }
            })
            .collect();
        CorpusReport {
            report_version: REPORT_VERSION,
            config,
            utterances: rows,
            aggregates: Aggregates {
                count,
                micro_wer,
                macro_wer,
                macro_swer,
                buckets,
            },
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// SWER recombined at a different importance weight from the stored
/// breakdown; matches `swer_score` arithmetic exactly.
pub fn swer_at_iw(row: &UtteranceScore, iw: f64, clamp: bool) -> f64 {
    let raw = row.swer.score_a + row.swer.wrong_important as f64 * iw * row.swer.dw;
    if clamp {
        raw.clamp(0.0, 1.0)
    } else {
        raw
    }
}

/// One correlation cell of the sweep table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepRow {
    pub metric: String,
    pub iw: Option<f64>,
    pub bucket: String,
    pub n: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub report_version: u32,
    pub rows: Vec<SweepRow>,
}

/// Correlate WER (baseline) and SWER at each importance weight against
/// per-utterance human scores, per bucket and overall. Buckets with
/// fewer than two points or zero variance yield empty cells; fewer than
/// two joined points overall is an error, as is any id without a human
/// score.
pub fn iw_sweep(
    rows: &[UtteranceScore],
    hwer: &BTreeMap<String, f64>,
    iw_values: &[f64],
    clamp: bool,
) -> Result<SweepReport, ReportError> {
    let missing: Vec<String> = rows
        .iter()
        .filter(|r| !hwer.contains_key(&r.id))
        .map(|r| r.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(ReportError::MissingScore { ids: missing });
    }
    if rows.len() < 2 {
        return Err(ReportError::DegenerateInput(format!(
            "need at least 2 scored utterances, got {}",
            rows.len()
        )));
    }

    let mut sorted: Vec<&UtteranceScore> = rows.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let groups = |bucket: Option<Bucket>| -> Vec<&UtteranceScore> {
        sorted
            .iter()
            .copied()
            .filter(|r| bucket.is_none_or(|b| Bucket::from_entity_count(r.entity_count) == b))
            .collect()
    };

    let mut out = Vec::new();
    let mut emit = |metric: &str, iw: Option<f64>, values: &dyn Fn(&UtteranceScore) -> f64| {
        for bucket in Bucket::all().into_iter().map(Some).chain([None]) {
            let members = groups(bucket);
            if members.is_empty() {
                continue;
            }
            let label = bucket.map_or("all", |b| b.label()).to_string();
            let x: Vec<f64> = members.iter().map(|r| values(r)).collect();
            let y: Vec<f64> = members.iter().map(|r| hwer[&r.id]).collect();
            out.push(SweepRow {
                metric: metric.to_string(),
                iw,
                bucket: label,
                n: members.len(),
                pearson: pearson(&x, &y).ok(),
                spearman: spearman(&x, &y).ok(),
            });
        }
    };

    emit("wer", None, &|r| r.wer);
    for &iw in iw_values {
        emit("swer", Some(iw), &|r| swer_at_iw(r, iw, clamp));
    }
    Ok(SweepReport {
        report_version: REPORT_VERSION,
        rows: out,
    })
}

// ---------------------------------------------------------------------
// Emission. Hand-written so float formatting ({:.6}) and field order are
// guaranteed byte-stable; parsing goes through serde against the same
// field names.

fn f6(x: f64) -> String {
    debug_assert!(x.is_finite());
    format!("{x:.6}")
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn config_json(cfg: &SwerConfig) -> String {
    let oov = match cfg.oov_policy {
        crate::embeddings::OovPolicy::Dissimilar => "dissimilar",
        crate::embeddings::OovPolicy::CharFallback => "char-fallback",
    };
    format!(
        "{{\"iw\":{},\"sim_threshold\":{},\"char_sub_threshold\":{},\"clamp_output\":{},\"oov_policy\":\"{}\"}}",
        f6(cfg.iw),
        f6(cfg.sim_threshold),
        cfg.char_sub_threshold,
        cfg.clamp_output,
        oov
    )
}

fn row_json(r: &UtteranceScore) -> String {
    let mut trace = String::from("[");
    for (i, t) in r.swer.trace.iter().enumerate() {
        if i > 0 {
            trace.push(',');
        }
        let kind = match t.op {
            crate::align::OpKind::Match => "match",
            crate::align::OpKind::Substitute => "substitute",
            crate::align::OpKind::Delete => "delete",
            crate::align::OpKind::Insert => "insert",
        };
        let reason = match t.reason {
            crate::swer::Reason::Entity => "entity",
            crate::swer::Reason::Sentiment => "sentiment",
            crate::swer::Reason::SpelledCer => "spelled-cer",
            crate::swer::Reason::SimBelow => "sim-below",
            crate::swer::Reason::SimAbove => "sim-above",
            crate::swer::Reason::PlainDel => "plain-del",
            crate::swer::Reason::Ins => "ins",
        };
        let _ = write!(
            trace,
            "{{\"op\":\"{}\",\"ref_index\":{},\"hyp_index\":{},\"weight\":{},\"reason\":\"{}\"}}",
            kind,
            opt_usize(t.ref_index),
            opt_usize(t.hyp_index),
            f6(t.weight),
            reason
        );
    }
    trace.push(']');
    format!(
        "{{\"id\":\"{}\",\"bucket\":\"{}\",\"ref_len\":{},\"hyp_len\":{},\"entity_count\":{},\"edits\":{},\"wer\":{},\"wip\":{},\"wil\":{},\"swer\":{{\"score_a\":{},\"accuracy\":{},\"dw\":{},\"wrong_important\":{},\"swer\":{},\"trace\":{}}}}}",
        esc(&r.id),
        Bucket::from_entity_count(r.entity_count).label(),
        r.ref_len,
        r.hyp_len,
        r.entity_count,
        r.edits,
        f6(r.wer),
        f6(r.wip),
        f6(r.wil),
        f6(r.swer.score_a),
        f6(r.swer.accuracy),
        f6(r.swer.dw),
        r.swer.wrong_important,
        f6(r.swer.swer),
        trace
    )
}

fn opt_usize(v: Option<usize>) -> String {
    v.map_or_else(|| "null".to_string(), |x| x.to_string())
}

fn opt_f6(v: Option<f64>) -> String {
    v.map_or_else(|| "null".to_string(), f6)
}

/// Serialize the report as JSON with stable field order.
pub fn emit_json(report: &CorpusReport) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"report_version\":{},\"config\":{},\"utterances\":[",
        report.report_version,
        config_json(&report.config)
    );
    for (i, r) in report.utterances.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&row_json(r));
    }
    let a = &report.aggregates;
    let mut buckets = String::from("[");
    for (i, b) in a.buckets.iter().enumerate() {
        if i > 0 {
            buckets.push(',');
        }
        let _ = write!(
            buckets,
            "{{\"bucket\":\"{}\",\"count\":{},\"mean_wer\":{},\"mean_swer\":{}}}",
            esc(&b.bucket),
            b.count,
            f6(b.mean_wer),
            f6(b.mean_swer)
        );
    }
    buckets.push(']');
    let _ = write!(
        out,
        "],\"aggregates\":{{\"count\":{},\"micro_wer\":{},\"macro_wer\":{},\"macro_swer\":{},\"buckets\":{}}}}}",
        a.count,
        f6(a.micro_wer),
        f6(a.macro_wer),
        f6(a.macro_swer),
        buckets
    );
    out.push('\n');
    out
}

pub const CSV_HEADER: &str =
    "id,bucket,ref_len,hyp_len,entity_count,edits,wer,wip,wil,score_a,accuracy,dw,wrong_important,swer";

/// Serialize the report as CSV: one row per utterance (sorted by id),
/// then `aggregate:micro` and `aggregate:macro` rows.
pub fn emit_csv(report: &CorpusReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.utterances {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.id),
            Bucket::from_entity_count(r.entity_count).label(),
            r.ref_len,
            r.hyp_len,
            r.entity_count,
            r.edits,
            f6(r.wer),
            f6(r.wip),
            f6(r.wil),
            f6(r.swer.score_a),
            f6(r.swer.accuracy),
            f6(r.swer.dw),
            r.swer.wrong_important,
            f6(r.swer.swer)
        );
    }
    let a = &report.aggregates;
    let _ = writeln!(
        out,
        "aggregate:micro,all,,,,,{},,,,,,,",
        f6(a.micro_wer)
    );
    let _ = writeln!(
        out,
        "aggregate:macro,all,,,,,{},,,,,,,{}",
        f6(a.macro_wer),
        f6(a.macro_swer)
    );
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Deserialize)]
struct ReportDe {
    report_version: u32,
    config: SwerConfig,
    utterances: Vec<RowDe>,
    aggregates: Aggregates,
}

#[derive(Deserialize)]
struct RowDe {
    id: String,
    #[allow(dead_code)]
    bucket: String,
    ref_len: usize,
    hyp_len: usize,
    entity_count: usize,
    edits: usize,
    wer: f64,
    wip: f64,
    wil: f64,
    swer: crate::swer::SwerBreakdown,
}

/// Parse a JSON report produced by [`emit_json`].
pub fn parse_json(input: &str) -> Result<CorpusReport, ReportError> {
    let de: ReportDe = serde_json::from_str(input).map_err(|e| ReportError::Parse(e.to_string()))?;
    Ok(CorpusReport {
        report_version: de.report_version,
        config: de.config,
        utterances: de
            .utterances
            .into_iter()
            .map(|r| UtteranceScore {
                id: r.id,
                ref_len: r.ref_len,
                hyp_len: r.hyp_len,
                entity_count: r.entity_count,
                edits: r.edits,
                wer: r.wer,
                wip: r.wip,
                wil: r.wil,
                swer: r.swer,
            })
            .collect(),
        aggregates: de.aggregates,
    })
}

/// Serialize the sweep table as JSON.
pub fn emit_sweep_json(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"report_version\":{},\"rows\":[", report.report_version);
    for (i, r) in report.rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"metric\":\"{}\",\"iw\":{},\"bucket\":\"{}\",\"n\":{},\"pearson\":{},\"spearman\":{}}}",
            esc(&r.metric),
            opt_f6(r.iw),
            esc(&r.bucket),
            r.n,
            opt_f6(r.pearson),
            opt_f6(r.spearman)
        );
    }
    out.push_str("]}\n");
    out
}

pub const SWEEP_CSV_HEADER: &str = "metric,iw,bucket,n,pearson,spearman";

/// Serialize the sweep table as CSV.
pub fn emit_sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.metric),
            r.iw.map_or(String::new(), f6),
            r.bucket,
            r.n,
            r.pearson.map_or(String::new(), f6),
            r.spearman.map_or(String::new(), f6)
        );
    }
    out
}

#[derive(Deserialize)]
struct SweepDe {
    report_version: u32,
    rows: Vec<SweepRow>,
}

/// Parse a JSON sweep table produced by [`emit_sweep_json`].
pub fn parse_sweep_json(input: &str) -> Result<SweepReport, ReportError> {
    let de: SweepDe = serde_json::from_str(input).map_err(|e| ReportError::Parse(e.to_string()))?;
    Ok(SweepReport {
        report_version: de.report_version,
        rows: de.rows,
    })
}
