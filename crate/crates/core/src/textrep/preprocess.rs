use crate::lexicon::{strip_punctuation, Lexicon};

/// Lowercases, drops hashtag tokens, strips punctuation and removes stopwords.
pub fn preprocess(text: &str) -> Vec<String> {
    preprocess_with(text, Lexicon::english())
}

pub fn preprocess_with(text: &str, lexicon: &Lexicon) -> Vec<String> {
    text.split_whitespace()
        .filter(|t| !t.starts_with('#'))
        .map(|t| strip_punctuation(&t.to_lowercase()))
        .filter(|t| !t.is_empty() && !lexicon.is_stopword(t))
        .collect()
}
