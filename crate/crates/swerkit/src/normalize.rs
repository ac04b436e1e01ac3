//! Transcript normalization applied before any scoring.
//!
//! Lowercase, strip leading/trailing punctuation (so spelled tokens like
//! "h." become "h"), drop tokens that are punctuation-only, collapse
//! whitespace. Internal punctuation (apostrophes, hyphens) is kept.

use crate::align::Token;

/// Normalize a single raw token. Returns `None` when nothing remains,
/// e.g. for punctuation-only input.
pub fn normalize_token(raw: &str) -> Option<String> {
    let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        return None;
    }
    Some(trimmed.to_lowercase())
}

/// Split on whitespace and normalize each token; dead tokens are dropped
/// and indices are assigned over the survivors.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(normalize_token)
        .enumerate()
        .map(|(i, t)| Token::new(t, i))
        .collect()
}

/// Like [`tokenize`], but also reports which raw token positions survived,
/// so per-position annotations can be remapped onto normalized indices.
pub fn tokenize_with_map(text: &str) -> (Vec<Token>, Vec<Option<usize>>) {
    let mut tokens = Vec::new();
    let mut map = Vec::new();
    for raw in text.split_whitespace() {
        match normalize_token(raw) {
            Some(t) => {
                map.push(Some(tokens.len()));
                tokens.push(Token::new(t, tokens.len()));
            }
            None => map.push(None),
        }
    }
    (tokens, map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowercases_and_strips_edges() {
        assert_eq!(normalize_token("Paris,").as_deref(), Some("paris"));
        assert_eq!(normalize_token("H.").as_deref(), Some("h"));
        assert_eq!(normalize_token("EU").as_deref(), Some("eu"));
    }

    #[test]
    fn keeps_internal_punctuation() {
        assert_eq!(normalize_token("don't").as_deref(), Some("don't"));
        assert_eq!(normalize_token("easy-going").as_deref(), Some("easy-going"));
    }

    #[test]
    fn punctuation_only_tokens_die() {
        assert_eq!(normalize_token("."), None);
        assert_eq!(normalize_token("?!"), None);
        assert_eq!(normalize_token("--"), None);
    }

    #[test]
    fn tokenize_spelled_name_sentence() {
        let toks = tokenize("My name is harvey spelled as h. a. r. v. e. y.");
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(
            texts,
            ["my", "name", "is", "harvey", "spelled", "as", "h", "a", "r", "v", "e", "y"]
        );
        assert!(toks.iter().enumerate().all(|(i, t)| t.index == i));
    }

    #[test]
    fn tokenize_with_map_tracks_dropped_positions() {
        let (toks, map) = tokenize_with_map("EU rejects . lamb");
        assert_eq!(toks.len(), 3);
        assert_eq!(map, vec![Some(0), Some(1), None, Some(2)]);
    }
}
