use super::EmbeddingSet;
use crate::wordlists::WordList;

pub const MAX_TOKEN_CHARS: usize = 20;

/// True for tokens free of ASCII uppercase letters, digits and punctuation
/// (underscore allowed, so phrase tokens survive) and at most
/// [`MAX_TOKEN_CHARS`] characters long.
pub fn is_plain_token(word: &str) -> bool {
    word.chars().count() <= MAX_TOKEN_CHARS
        && !word.chars().any(|c| {
            c.is_ascii_uppercase() || c.is_ascii_digit() || (c.is_ascii_punctuation() && c != '_')
        })
}

/// Keeps the first `max_rank` words, then drops non-plain tokens and any word
/// in `exclusions`. Order is preserved; an empty result is legal.
pub fn reduce_vocabulary(
    emb: &EmbeddingSet,
    max_rank: usize,
    exclusions: &WordList,
) -> EmbeddingSet {
    let excluded = exclusions.token_set();
    emb.retain_indices(|i, w| i < max_rank && is_plain_token(w) && !excluded.contains(w))
}
