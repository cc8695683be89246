//! Word- and character-level surface statistics of raw text.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lexicon::{is_digit, is_letter, is_punctuation};

/// Surface statistics of one document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StyloVector {
    pub max_word_len: f64,
    pub min_word_len: f64,
    pub mean_word_len: f64,
    pub std_word_len: f64,
    pub n_upper_start: u64,
    pub n_lower_start: u64,
    pub n_digits: u64,
    pub n_letters: u64,
    pub n_spaces: u64,
    pub n_punct: u64,
    pub n_hashtags: u64,
    /// Counts of a, e, i, o, u (case-insensitive).
    pub n_vowel: [u64; 5],
}

/// Which quantities of a [`StyloVector`] become features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyloProfile {
    /// All sixteen quantities.
    #[default]
    Full16,
    /// The ten character-based counts (digits, letters, spaces, punctuation,
    /// hashtags and the five vowels).
    Char10,
}

impl StyloProfile {
    pub fn dim(self) -> usize {
        match self {
            StyloProfile::Full16 => 16,
            StyloProfile::Char10 => 10,
        }
    }
}

impl FromStr for StyloProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full16" => Ok(StyloProfile::Full16),
            "char10" => Ok(StyloProfile::Char10),
            other => Err(Error::Parameter(format!(
                "unknown stylometric profile `{other}`"
            ))),
        }
    }
}

impl StyloVector {
    pub fn features(&self, profile: StyloProfile) -> Vec<f64> {
        let chars = [
            self.n_digits,
            self.n_letters,
            self.n_spaces,
            self.n_punct,
            self.n_hashtags,
        ]
        .into_iter()
        .chain(self.n_vowel)
        .map(|c| c as f64);
        match profile {
            StyloProfile::Char10 => chars.collect(),
            StyloProfile::Full16 => [
                self.max_word_len,
                self.min_word_len,
                self.mean_word_len,
                self.std_word_len,
                self.n_upper_start as f64,
                self.n_lower_start as f64,
            ]
            .into_iter()
            .chain(chars)
            .collect(),
        }
    }
}

/// Computes the stylometric vector. Words are whitespace-separated tokens of the
/// unprocessed text; word lengths count Unicode scalar values.
pub fn stylometric(text: &str) -> StyloVector {
    let mut v = StyloVector::default();

    let lens: Vec<f64> = text
        .split_whitespace()
        .map(|w| {
            let first = w
                .chars()
                .next()
                .expect("split_whitespace yields non-empty words");
            if first.is_uppercase() {
                v.n_upper_start += 1;
            } else if first.is_lowercase() {
                v.n_lower_start += 1;
            }
            if first == '#' {
                v.n_hashtags += 1;
            }
            w.chars().count() as f64
        })
        .collect();
    if !lens.is_empty() {
        let n = lens.len() as f64;
        let mean = lens.iter().sum::<f64>() / n;
        v.max_word_len = lens.iter().copied().fold(f64::MIN, f64::max);
        v.min_word_len = lens.iter().copied().fold(f64::MAX, f64::min);
        v.mean_word_len = mean;
        v.std_word_len = (lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n).sqrt();
    }

    for c in text.chars() {
        if is_digit(c) {
            v.n_digits += 1;
        }
        if is_letter(c) {
            v.n_letters += 1;
        }
        if c.is_whitespace() {
            v.n_spaces += 1;
        }
        if is_punctuation(c) {
            v.n_punct += 1;
        }
        if let Some(i) = "aeiou".find(c.to_ascii_lowercase()) {
            v.n_vowel[i] += 1;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hello_world() {
        let v = stylometric("Hello World");
        assert_eq!(
            v,
            StyloVector {
                max_word_len: 5.0,
                min_word_len: 5.0,
                mean_word_len: 5.0,
                std_word_len: 0.0,
                n_upper_start: 2,
                n_lower_start: 0,
                n_digits: 0,
                n_letters: 10,
                n_spaces: 1,
                n_punct: 0,
                n_hashtags: 0,
                n_vowel: [0, 1, 0, 2, 0],
            }
        );
    }

    #[test]
    fn empty_text_is_zero() {
        assert_eq!(stylometric(""), StyloVector::default());
        assert!(stylometric("")
            .features(StyloProfile::Full16)
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn hashtag_characters_still_counted() {
        let v = stylometric("#covid19 kills 9");
        assert_eq!(v.n_hashtags, 1);
        assert_eq!(v.n_digits, 3);
        assert_eq!(v.n_punct, 1);
        assert_eq!(v.n_lower_start, 1);
    }

    #[test]
    fn word_length_moments() {
        let v = stylometric("a abc");
        assert_eq!(
            (v.min_word_len, v.max_word_len, v.mean_word_len),
            (1.0, 3.0, 2.0)
        );
        assert_eq!(v.std_word_len, 1.0);
    }

    #[test]
    fn profile_dimensions() {
        let v = stylometric("Some text, 42!");
        assert_eq!(v.features(StyloProfile::Full16).len(), 16);
        assert_eq!(v.features(StyloProfile::Char10).len(), 10);
        assert_eq!(
            v.features(StyloProfile::Char10)[..5],
            [2.0, 8.0, 2.0, 2.0, 0.0]
        );
    }

    proptest! {
        #[test]
        fn counts_are_additive(a in "[ -~]{0,30}", b in "[ -~]{0,30}") {
            let (va, vb) = (stylometric(&a), stylometric(&b));
            let vab = stylometric(&format!("{a} {b}"));
            prop_assert_eq!(vab.n_digits, va.n_digits + vb.n_digits);
            prop_assert_eq!(vab.n_letters, va.n_letters + vb.n_letters);
            prop_assert_eq!(vab.n_punct, va.n_punct + vb.n_punct);
            prop_assert_eq!(vab.n_spaces, va.n_spaces + vb.n_spaces + 1);
            for i in 0..5 {
                prop_assert_eq!(vab.n_vowel[i], va.n_vowel[i] + vb.n_vowel[i]);
            }
        }

        #[test]
        fn word_stats_are_ordered(t in "[a-zA-Z ]{0,60}") {
            let v = stylometric(&t);
            if t.split_whitespace().next().is_some() {
                prop_assert!(v.min_word_len <= v.mean_word_len + 1e-12);
                prop_assert!(v.mean_word_len <= v.max_word_len + 1e-12);
            }
        }
    }
}
