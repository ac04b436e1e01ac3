//! Synthetic corruption harness: for every tagged entity in a reference,
//! emit one substituted and one deleted hypothesis (insertion variants
//! are deliberately excluded from the per-entity design), plus a
//! rate-driven random mix mode. Fully deterministic under a fixed seed.

use std::collections::BTreeMap;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::Token;
use crate::corpus::Warning;
use crate::swer::{AnnotatedUtterance, TagClass};

#[derive(Debug, Error, PartialEq)]
pub enum InjectError {
    #[error("utterance {id}: no tagged entities to corrupt")]
    NoEntities { id: String },
    #[error("invalid mix rates ({0}, {1}, {2}): each in [0,1], sum <= 1")]
    BadMixRates(f64, f64, f64),
}

/// How a substituted entity is rewritten.
#[derive(Debug, Clone, PartialEq)]
pub enum SubStrategy {
    /// Apply `k` random character edits, retrying until the word changes.
    CharPerturb(usize),
    /// Replace with a homophone from the table; words without an entry
    /// fall back to a 2-edit character perturbation.
    Homophones(HomophoneTable),
}

/// Word -> alternatives table loaded from `word alt1 alt2 ...` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HomophoneTable {
    table: BTreeMap<String, Vec<String>>,
}

impl HomophoneTable {
    pub fn load(reader: impl BufRead) -> std::io::Result<Self> {
        let mut table = BTreeMap::new();
        for line in reader.lines() {
            let line = line?;
            let mut fields = line.split_whitespace().map(str::to_string);
            if let Some(word) = fields.next() {
                let alts: Vec<String> = fields.collect();
                if !alts.is_empty() {
                    table.insert(word, alts);
                }
            }
        }
        Ok(HomophoneTable { table })
    }

    pub fn alternatives(&self, word: &str) -> Option<&[String]> {
        self.table.get(word).map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptionMode {
    PerEntityPair,
    RandomMix,
}

/// Full corruption recipe. `mix_rates` is only used by [`CorruptionMode::RandomMix`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionSpec {
    pub seed: u64,
    pub mode: CorruptionMode,
    pub sub_strategy: SubStrategy,
    pub mix_rates: (f64, f64, f64),
}

impl Default for CorruptionSpec {
    fn default() -> Self {
        CorruptionSpec {
            seed: 0,
            mode: CorruptionMode::PerEntityPair,
            sub_strategy: SubStrategy::CharPerturb(2),
            mix_rates: (0.1, 0.05, 0.05),
        }
    }
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<(), InjectError> {
        let (s, d, i) = self.mix_rates;
        let ok = (0.0..=1.0).contains(&s)
            && (0.0..=1.0).contains(&d)
            && (0.0..=1.0).contains(&i)
            && s + d + i <= 1.0 + 1e-12;
        if ok {
            Ok(())
        } else {
            Err(InjectError::BadMixRates(s, d, i))
        }
    }
}

/// What was done to produce a variant token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantOp {
    Sub,
    Del,
    Ins,
}

/// One corrupted hypothesis with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantHypothesis {
    pub source_id: String,
    pub variant_id: String,
    pub tokens: Vec<Token>,
    /// (op, reference token index) per edit, in reference order.
    pub edits: Vec<(VariantOp, usize)>,
}

impl VariantHypothesis {
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Apply `k` random character edits (substitute/delete/insert, uniform)
/// to `word`, retrying until the result is non-empty and differs from
/// the input. Deterministic for a fixed RNG state.
pub fn char_perturb(word: &str, k: usize, rng: &mut ChaCha8Rng) -> String {
    debug_assert!(!word.is_empty());
    loop {
        let mut chars: Vec<char> = word.chars().collect();
        for _ in 0..k.max(1) {
            match rng.random_range(0..3u8) {
                0 if !chars.is_empty() => {
                    // substitute with a different letter
                    let pos = rng.random_range(0..chars.len());
                    let old = chars[pos];
                    let mut c = random_letter(rng);
                    while c == old {
                        c = random_letter(rng);
                    }
                    chars[pos] = c;
                }
                1 if !chars.is_empty() => {
                    let pos = rng.random_range(0..chars.len());
                    chars.remove(pos);
                }
                _ => {
                    let pos = rng.random_range(0..=chars.len());
                    chars.insert(pos, random_letter(rng));
                }
            }
        }
        let candidate: String = chars.into_iter().collect();
        if !candidate.is_empty() && candidate != word {
            return candidate;
        }
    }
}

fn random_letter(rng: &mut ChaCha8Rng) -> char {
    (b'a' + rng.random_range(0..26u8)) as char
}

fn substitute_word(word: &str, strategy: &SubStrategy, rng: &mut ChaCha8Rng) -> String {
    match strategy {
        SubStrategy::CharPerturb(k) => char_perturb(word, *k, rng),
        SubStrategy::Homophones(table) => match table.alternatives(word) {
            Some(alts) => alts[rng.random_range(0..alts.len())].clone(),
            None => char_perturb(word, 2, rng),
        },
    }
}

fn reindexed(texts: Vec<String>) -> Vec<Token> {
    texts
        .into_iter()
        .enumerate()
        .map(|(i, t)| Token::new(t, i))
        .collect()
}

/// Per-entity variants: for each NE token, one hypothesis with that
/// token substituted and one with it deleted, all other tokens
/// untouched. Errors when the reference has no NE tokens.
pub fn generate_entity_variants(
    reference: &AnnotatedUtterance,
    spec: &CorruptionSpec,
) -> Result<Vec<VariantHypothesis>, InjectError> {
    spec.validate()?;
    let entities: Vec<usize> = (0..reference.tokens.len())
        .filter(|&i| reference.tags[i] == TagClass::NamedEntity)
        .collect();
    if entities.is_empty() {
        return Err(InjectError::NoEntities {
            id: reference.id.clone(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(entities.len() * 2);
    for &idx in &entities {
        let mut texts: Vec<String> = reference.tokens.iter().map(|t| t.text.clone()).collect();
        texts[idx] = substitute_word(&reference.tokens[idx].text, &spec.sub_strategy, &mut rng);
        out.push(VariantHypothesis {
            source_id: reference.id.clone(),
            variant_id: format!("{}#sub{}", reference.id, idx),
            tokens: reindexed(texts),
            edits: vec![(VariantOp::Sub, idx)],
        });

        let texts: Vec<String> = reference
            .tokens
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, t)| t.text.clone())
            .collect();
        out.push(VariantHypothesis {
            source_id: reference.id.clone(),
            variant_id: format!("{}#del{}", reference.id, idx),
            tokens: reindexed(texts),
            edits: vec![(VariantOp::Del, idx)],
        });
    }
    Ok(out)
}

/// One randomly corrupted hypothesis driven by `mix_rates`.
pub fn generate_random_mix(
    reference: &AnnotatedUtterance,
    spec: &CorruptionSpec,
    rng: &mut ChaCha8Rng,
) -> Result<VariantHypothesis, InjectError> {
    spec.validate()?;
    let (p_sub, p_del, p_ins) = spec.mix_rates;
    let mut texts = Vec::new();
    let mut edits = Vec::new();
    for (i, tok) in reference.tokens.iter().enumerate() {
        let u: f64 = rng.random_range(0.0..1.0);
        if u < p_sub {
            texts.push(substitute_word(&tok.text, &spec.sub_strategy, rng));
            edits.push((VariantOp::Sub, i));
        } else if u < p_sub + p_del {
            edits.push((VariantOp::Del, i));
        } else if u < p_sub + p_del + p_ins {
            texts.push(tok.text.clone());
            let len = rng.random_range(3..8usize);
            let word: String = (0..len).map(|_| random_letter(rng)).collect();
            texts.push(word);
            edits.push((VariantOp::Ins, i));
        } else {
            texts.push(tok.text.clone());
        }
    }
    Ok(VariantHypothesis {
        source_id: reference.id.clone(),
        variant_id: format!("{}#mix", reference.id),
        tokens: reindexed(texts),
        edits,
    })
}

/// Run the configured mode over a whole corpus. Each utterance draws
/// from its own RNG stream (seed xor utterance index), so output does
/// not depend on scheduling or corpus order. Utterances without
/// entities produce a warning, not an error.
pub fn generate_corpus_variants(
    corpus: &[AnnotatedUtterance],
    spec: &CorruptionSpec,
) -> Result<(Vec<VariantHypothesis>, Vec<Warning>), InjectError> {
    spec.validate()?;
    let mut variants = Vec::new();
    let mut warnings = Vec::new();
    for (index, reference) in corpus.iter().enumerate() {
        let derived = CorruptionSpec {
            seed: spec.seed ^ index as u64,
            ..spec.clone()
        };
        match spec.mode {
            CorruptionMode::PerEntityPair => match generate_entity_variants(reference, &derived) {
                Ok(mut v) => variants.append(&mut v),
                Err(InjectError::NoEntities { id }) => warnings.push(Warning {
                    line: None,
                    message: format!("utterance {id:?} has no entities; skipped"),
                }),
                Err(e) => return Err(e),
            },
            CorruptionMode::RandomMix => {
                let mut rng = ChaCha8Rng::seed_from_u64(derived.seed);
                variants.push(generate_random_mix(reference, &derived, &mut rng)?);
            }
        }
    }
    Ok((variants, warnings))
}

/// Validation buckets by entity count: one, two, three, anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    #[serde(rename = "cat-i")]
    CatI,
    #[serde(rename = "cat-ii")]
    CatII,
    #[serde(rename = "cat-iii")]
    CatIII,
    #[serde(rename = "other")]
    Other,
}

impl Bucket {
    pub fn from_entity_count(n: usize) -> Bucket {
        match n {
            1 => Bucket::CatI,
            2 => Bucket::CatII,
            3 => Bucket::CatIII,
            _ => Bucket::Other,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bucket::CatI => "cat-i",
            Bucket::CatII => "cat-ii",
            Bucket::CatIII => "cat-iii",
            Bucket::Other => "other",
        }
    }

    pub fn all() -> [Bucket; 4] {
        [Bucket::CatI, Bucket::CatII, Bucket::CatIII, Bucket::Other]
    }
}

impl std::fmt::Display for Bucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Partition a corpus by entity count. All four buckets are always
/// present so counts can be reported uniformly.
pub fn bucket_by_entity_count(
    corpus: &[AnnotatedUtterance],
) -> BTreeMap<Bucket, Vec<&AnnotatedUtterance>> {
    let mut out: BTreeMap<Bucket, Vec<&AnnotatedUtterance>> =
        Bucket::all().into_iter().map(|b| (b, Vec::new())).collect();
    for u in corpus {
        out.get_mut(&Bucket::from_entity_count(u.entity_count()))
            .unwrap()
            .push(u);
    }
    out
}
