//! Non-contextual text representations: stylometric statistics and LSA.

mod lsa;
mod preprocess;
mod stylometric;

pub use lsa::{
    char_ngrams, fit_lsa, transform_lsa, word_ngrams, LsaConfig, LsaModel, NgramKind,
    TfidfVectorizer,
};
pub use preprocess::{preprocess, preprocess_with};
pub use stylometric::{stylometric, StyloProfile, StyloVector};
