//! Batch-scoring throughput: data-parallel vs sequential, plus the
//! alignment microbenchmark underneath both.
//!
//! Run with `cargo bench -p swerkit`. The parallel path requires the
//! default `parallel` feature.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swerkit::align::{align_words, Token};
use swerkit::batch::{score_corpus_serial, score_corpus_with_jobs};
use swerkit::corpus::ScoringPair;
use swerkit::embeddings::FixtureSimilarity;
use swerkit::swer::{AnnotatedUtterance, SwerConfig};

const WORDS: &[&str] = &[
    "the", "market", "opened", "higher", "after", "reports", "from", "paris", "london", "zurich",
    "showed", "steady", "growth", "in", "services", "and", "energy", "prices", "fell", "again",
];

fn synthetic_corpus(n: usize, len: usize, seed: u64) -> Vec<ScoringPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let ref_words: Vec<Token> = (0..len)
                .map(|j| Token::new(WORDS[rng.random_range(0..WORDS.len())], j))
                .collect();
            let ne = vec![rng.random_range(0..len)];
            let reference =
                AnnotatedUtterance::new(format!("u{i:05}"), ref_words.clone(), &ne, &[], &[])
                    .unwrap();
            // Corrupt roughly one token in five.
            let hypothesis: Vec<Token> = ref_words
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    if rng.random_range(0..5u8) == 0 {
                        Token::new(WORDS[rng.random_range(0..WORDS.len())], j)
                    } else {
                        t.clone()
                    }
                })
                .collect();
            ScoringPair {
                id: reference.id.clone(),
                reference,
                hypothesis,
            }
        })
        .collect()
}

fn bench_batch_scoring(c: &mut Criterion) {
    let cfg = SwerConfig::default();
    let sim = FixtureSimilarity::default();
    let mut group = c.benchmark_group("score_corpus");
    for &n in &[200usize, 2000] {
        let pairs = synthetic_corpus(n, 16, 7);
        group.bench_with_input(BenchmarkId::new("serial", n), &pairs, |b, pairs| {
            b.iter(|| score_corpus_serial(pairs, &cfg, &sim).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &pairs, |b, pairs| {
            b.iter(|| score_corpus_with_jobs(pairs, &cfg, &sim, 0).unwrap())
        });
    }
    group.finish();
}

fn bench_alignment(c: &mut Criterion) {
    let pairs = synthetic_corpus(1, 40, 11);
    let p = &pairs[0];
    c.bench_function("align_words_len40", |b| {
        b.iter(|| align_words(&p.reference.tokens, &p.hypothesis))
    });
}

criterion_group!(benches, bench_batch_scoring, bench_alignment);
criterion_main!(benches);
