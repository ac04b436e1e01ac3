//! Word- and character-level minimum-edit-distance alignment.
//!
//! Produces the ordered edit-operation sequence every downstream metric
//! consumes, with a fixed tie-break so op sequences are reproducible
//! across runs and platforms.

use serde::{Deserialize, Serialize};

/// A normalized token with its 0-based position in its sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub index: usize,
}

impl Token {
    pub fn new(text: impl Into<String>, index: usize) -> Self {
        Token {
            text: text.into(),
            index,
        }
    }
}

/// Edit operation kinds, in backtrace preference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// One step of an alignment. Match/Substitute carry both indices,
/// Delete only `ref_index`, Insert only `hyp_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: OpKind,
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
}

/// Ordered edit ops plus the counts (H, S, D, I) and sequence lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub ops: Vec<EditOp>,
    pub hits: usize,
    pub subs: usize,
    pub dels: usize,
    pub ins: usize,
    pub ref_len: usize,
    pub hyp_len: usize,
}

impl AlignmentResult {
    /// Total edit count S + D + I.
    pub fn edits(&self) -> usize {
        self.subs + self.dels + self.ins
    }
}

/// The fixed tie-break applied while reconstructing an optimal path:
/// when costs tie, ops earlier in this order win. Reconstruction walks
/// forward from the start of both sequences over a suffix-cost table,
/// so with equal-cost choices the later reference token is the one that
/// deletes (e.g. `["a","a"]` vs `["a"]` matches the first "a").
pub fn backtrace_policy() -> [OpKind; 4] {
    [
        OpKind::Match,
        OpKind::Substitute,
        OpKind::Delete,
        OpKind::Insert,
    ]
}

/// Optimal unit-cost alignment of two word sequences.
///
/// Empty inputs are valid; empty-vs-empty yields zero ops. Deterministic
/// for fixed inputs per [`backtrace_policy`].
pub fn align_words(reference: &[Token], hypothesis: &[Token]) -> AlignmentResult {
    let r: Vec<&str> = reference.iter().map(|t| t.text.as_str()).collect();
    let h: Vec<&str> = hypothesis.iter().map(|t| t.text.as_str()).collect();
    align_items(&r, &h)
}

/// Optimal unit-cost alignment of the character sequences of two words.
pub fn align_chars(reference: &str, hypothesis: &str) -> AlignmentResult {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    align_items(&r, &h)
}

/// Core DP: full (N_r+1)x(N_h+1) suffix-cost matrix, unit costs, explicit
/// forward reconstruction. `cost[i][j]` is the edit distance between
/// `r[i..]` and `h[j..]`.
fn align_items<T: PartialEq>(r: &[T], h: &[T]) -> AlignmentResult {
    let nr = r.len();
    let nh = h.len();

    let mut cost = vec![vec![0u32; nh + 1]; nr + 1];
    for j in 0..=nh {
        cost[nr][j] = (nh - j) as u32;
    }
    for i in (0..nr).rev() {
        cost[i][nh] = (nr - i) as u32;
        for j in (0..nh).rev() {
            let diag = cost[i + 1][j + 1] + u32::from(r[i] != h[j]);
            let del = cost[i + 1][j] + 1;
            let ins = cost[i][j + 1] + 1;
            cost[i][j] = diag.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(nr.max(nh));
    let (mut hits, mut subs, mut dels, mut ins) = (0usize, 0usize, 0usize, 0usize);
    let (mut i, mut j) = (0usize, 0usize);
    while i < nr || j < nh {
        let here = cost[i][j];
        if i < nr && j < nh && r[i] == h[j] && cost[i + 1][j + 1] == here {
            ops.push(EditOp {
                kind: OpKind::Match,
                ref_index: Some(i),
                hyp_index: Some(j),
            });
            hits += 1;
            i += 1;
            j += 1;
        } else if i < nr && j < nh && r[i] != h[j] && cost[i + 1][j + 1] + 1 == here {
            ops.push(EditOp {
                kind: OpKind::Substitute,
                ref_index: Some(i),
                hyp_index: Some(j),
            });
            subs += 1;
            i += 1;
            j += 1;
        } else if i < nr && cost[i + 1][j] + 1 == here {
            ops.push(EditOp {
                kind: OpKind::Delete,
                ref_index: Some(i),
                hyp_index: None,
            });
            dels += 1;
            i += 1;
        } else {
            ops.push(EditOp {
                kind: OpKind::Insert,
                ref_index: None,
                hyp_index: Some(j),
            });
            ins += 1;
            j += 1;
        }
    }

    AlignmentResult {
        ops,
        hits,
        subs,
        dels,
        ins,
        ref_len: nr,
        hyp_len: nh,
    }
}

#[cfg(test)]
pub(crate) fn tokens(words: &[&str]) -> Vec<Token> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| Token::new(*w, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain recursive search over all edit scripts, no memoization.
    /// Independent of the DP path; usable only for short sequences.
    fn brute_force_distance<T: PartialEq>(r: &[T], h: &[T]) -> usize {
        fn feasible<T: PartialEq>(r: &[T], h: &[T], i: usize, j: usize, budget: i64) -> bool {
            if budget < 0 {
                return false;
            }
            if i == r.len() {
                return budget >= (h.len() - j) as i64;
            }
            if j == h.len() {
                return budget >= (r.len() - i) as i64;
            }
            if r[i] == h[j] && feasible(r, h, i + 1, j + 1, budget) {
                return true;
            }
            feasible(r, h, i + 1, j + 1, budget - 1)
                || feasible(r, h, i + 1, j, budget - 1)
                || feasible(r, h, i, j + 1, budget - 1)
        }
        (0..=(r.len() + h.len()))
            .find(|&b| feasible(r, h, 0, 0, b as i64))
            .expect("edit distance is bounded by len(r) + len(h)")
    }

    #[test]
    fn table1_row1_counts() {
        let r = tokens(&["what", "did", "you", "do", "in", "paris"]);
        let h = tokens(&["what", "did", "u", "do", "in", "phariz"]);
        let a = align_words(&r, &h);
        assert_eq!((a.subs, a.dels, a.ins, a.hits), (2, 0, 0, 4));
    }

    #[test]
    fn identity_alignment_is_all_matches() {
        let r = tokens(&["a", "b", "c", "d"]);
        let a = align_words(&r, &r);
        assert_eq!((a.subs, a.dels, a.ins, a.hits), (0, 0, 0, 4));
        assert!(a.ops.iter().all(|op| op.kind == OpKind::Match));
    }

    #[test]
    fn shifted_sequence_total_edits() {
        // ["a","b","c"] vs ["b","c","d"]: any optimal script has 2 edits.
        let r = tokens(&["a", "b", "c"]);
        let h = tokens(&["b", "c", "d"]);
        let a = align_words(&r, &h);
        assert_eq!(a.edits(), 2);
        assert_eq!(
            a.edits(),
            brute_force_distance(&["a", "b", "c"], &["b", "c", "d"])
        );
    }

    #[test]
    fn char_alignment_single_deletion() {
        let a = align_chars("harvey", "hrvey");
        assert_eq!((a.subs, a.dels, a.ins), (0, 1, 0));
    }

    #[test]
    fn char_alignment_identity() {
        let a = align_chars("harvey", "harvey");
        assert_eq!(a.edits(), 0);
        assert_eq!(a.hits, 6);
    }

    #[test]
    fn char_alignment_prefix_reshaping() {
        let a = align_chars("harvey", "agearvey");
        assert_eq!(a.edits(), 3);
        let r: Vec<char> = "harvey".chars().collect();
        let h: Vec<char> = "agearvey".chars().collect();
        assert_eq!(a.edits(), brute_force_distance(&r, &h));
    }

    #[test]
    fn tie_breaks_toward_substitute() {
        let a = align_words(&tokens(&["a"]), &tokens(&["b"]));
        assert_eq!(a.ops.len(), 1);
        assert_eq!(a.ops[0].kind, OpKind::Substitute);
    }

    #[test]
    fn swapping_roles_swaps_dels_and_ins() {
        // Unique optimal path in both directions.
        let r = tokens(&["a", "b", "c"]);
        let h = tokens(&["a", "b"]);
        let fwd = align_words(&r, &h);
        let rev = align_words(&h, &r);
        assert_eq!((fwd.dels, fwd.ins), (1, 0));
        assert_eq!((rev.dels, rev.ins), (0, 1));
        assert_eq!(fwd.edits(), rev.edits());
    }

    #[test]
    fn forced_insert() {
        let a = align_words(&[], &tokens(&["x"]));
        assert_eq!(a.ops.len(), 1);
        assert_eq!(a.ops[0].kind, OpKind::Insert);
        assert_eq!(a.ops[0].hyp_index, Some(0));
    }

    #[test]
    fn empty_vs_empty_yields_zero_ops() {
        let a = align_words(&[], &[]);
        assert!(a.ops.is_empty());
        assert_eq!(a.edits(), 0);
    }

    #[test]
    fn later_ref_token_deletes_and_is_stable() {
        let r = tokens(&["a", "a"]);
        let h = tokens(&["a"]);
        let first = align_words(&r, &h);
        assert_eq!(first.ops[0].kind, OpKind::Match);
        assert_eq!(first.ops[0].ref_index, Some(0));
        assert_eq!(first.ops[1].kind, OpKind::Delete);
        assert_eq!(first.ops[1].ref_index, Some(1));
        for _ in 0..1000 {
            assert_eq!(align_words(&r, &h), first);
        }
    }

    #[test]
    fn index_coverage_is_a_permutation() {
        let r = tokens(&["x", "y", "z", "x"]);
        let h = tokens(&["y", "z", "q", "x", "w"]);
        let a = align_words(&r, &h);
        let mut ref_seen: Vec<usize> = a.ops.iter().filter_map(|o| o.ref_index).collect();
        let mut hyp_seen: Vec<usize> = a.ops.iter().filter_map(|o| o.hyp_index).collect();
        ref_seen.sort_unstable();
        hyp_seen.sort_unstable();
        assert_eq!(ref_seen, (0..r.len()).collect::<Vec<_>>());
        assert_eq!(hyp_seen, (0..h.len()).collect::<Vec<_>>());
    }

    fn small_seq() -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..3, 0..=4)
    }

    fn word_seq() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(
            proptest::sample::select(vec![
                "a".to_string(),
                "b".to_string(),
                "c".to_string(),
                "dog".to_string(),
                "cat".to_string(),
            ]),
            0..=40,
        )
    }

    proptest! {
        #[test]
        fn dp_matches_brute_force_on_short_sequences(r in small_seq(), h in small_seq()) {
            let a = align_items(&r, &h);
            prop_assert_eq!(a.edits(), brute_force_distance(&r, &h));
        }

        #[test]
        fn count_identities_hold(r in word_seq(), h in word_seq()) {
            let rt = tokens(&r.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            let ht = tokens(&h.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            let a = align_words(&rt, &ht);
            prop_assert_eq!(a.hits + a.subs + a.dels, a.ref_len);
            prop_assert_eq!(a.hits + a.subs + a.ins, a.hyp_len);
        }

        #[test]
        fn distance_is_symmetric(r in word_seq(), h in word_seq()) {
            let rt = tokens(&r.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            let ht = tokens(&h.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            let fwd = align_words(&rt, &ht);
            let rev = align_words(&ht, &rt);
            prop_assert_eq!(fwd.edits(), rev.edits());
        }

        #[test]
        fn alignment_is_deterministic(r in word_seq(), h in word_seq()) {
            let rt = tokens(&r.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            let ht = tokens(&h.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            prop_assert_eq!(align_words(&rt, &ht), align_words(&rt, &ht));
        }
    }
}
