//! Bundled English stopword list, lemma table and character classes.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");
const LEMMAS_EN: &str = include_str!("../data/lemmas_en.tsv");

/// Stopwords plus a surface → lemma lookup table.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    stopwords: HashSet<String>,
    lemmas: HashMap<String, String>,
}

impl Lexicon {
    /// The lexicon compiled into the crate.
    pub fn english() -> &'static Lexicon {
        static EN: OnceLock<Lexicon> = OnceLock::new();
        EN.get_or_init(|| {
            Lexicon::parse(STOPWORDS_EN, LEMMAS_EN).expect("bundled lexicon is well formed")
        })
    }

    pub fn parse(stopwords: &str, lemmas: &str) -> Result<Self> {
        let stopwords = data_lines(stopwords).map(str::to_owned).collect();
        let mut table = HashMap::new();
        for (i, line) in data_lines(lemmas).enumerate() {
            let (surface, lemma) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("lemma table entry {} lacks a tab", i + 1)))?;
            table.insert(surface.to_owned(), lemma.to_owned());
        }
        Ok(Self {
            stopwords,
            lemmas: table,
        })
    }

    pub fn from_files(stopwords: &Path, lemmas: &Path) -> Result<Self> {
        let sw = std::fs::read_to_string(stopwords).map_err(|e| Error::io(stopwords, e))?;
        let lm = std::fs::read_to_string(lemmas).map_err(|e| Error::io(lemmas, e))?;
        Self::parse(&sw, &lm)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Lemma of `token`, or `token` itself when the table has no entry.
    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.lemmas.get(token).map_or(token, String::as_str)
    }
}

fn data_lines(s: &str) -> impl Iterator<Item = &str> {
    s.lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Unicode general category P*.
pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Unicode general category L*.
pub fn is_letter(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::UppercaseLetter
            | GeneralCategory::LowercaseLetter
            | GeneralCategory::TitlecaseLetter
            | GeneralCategory::ModifierLetter
            | GeneralCategory::OtherLetter
    )
}

/// Unicode general category Nd.
pub fn is_digit(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

/// Deletes punctuation characters in place: "covid-19" → "covid19".
pub fn strip_punctuation(token: &str) -> String {
    token.chars().filter(|&c| !is_punctuation(c)).collect()
}
