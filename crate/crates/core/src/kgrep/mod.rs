//! Knowledge-graph document representations.
//!
//! Document and metadata text is aligned against entity aliases by exact
//! token n-gram lookup (n ≤ 3), and the embeddings of the matched entities are
//! averaged into one vector per document.

mod concepts;
mod dictionary;
mod stats;
mod store;

pub use concepts::{
    agg_average, agg_average_with, entity_repr, match_concepts, match_concepts_with,
    metadata_concepts, Aggregation, ConceptSet, MatchMode, Span,
};
pub use dictionary::{AliasDictionary, MAX_NGRAM};
pub use stats::{concept_stats, ConceptStats, TopConcept};
pub use store::{EntityEmbeddingStore, KgMethod};

use ndarray::Array2;
use rayon::prelude::*;

use crate::corpus::Document;
use crate::error::Result;
use crate::lexicon::{strip_punctuation, Lexicon};

/// Lowercases, deletes punctuation in place, drops stopwords and lemmatizes.
/// Aliases and documents must both go through this function.
pub fn preprocess_kg(text: &str) -> Vec<String> {
    preprocess_kg_with(text, Lexicon::english())
}

pub fn preprocess_kg_with(text: &str, lexicon: &Lexicon) -> Vec<String> {
    text.split_whitespace()
        .map(|t| strip_punctuation(&t.to_lowercase()))
        .filter(|t| !t.is_empty() && !lexicon.is_stopword(t))
        .map(|t| lexicon.lemma(&t).to_owned())
        .collect()
}

/// Matching and aggregation options shared by the block builders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KgOptions {
    pub mode: MatchMode,
    pub aggregation: Aggregation,
}

/// Concept sets of document bodies.
pub fn document_concepts(
    docs: &[Document],
    dict: &AliasDictionary,
    opts: KgOptions,
) -> Vec<ConceptSet> {
    let lexicon = Lexicon::english();
    docs.par_iter()
        .map(|d| {
            match_concepts_with(&preprocess_kg_with(&d.text, lexicon), dict, opts.mode)
                .with_id(d.id.clone())
        })
        .collect()
}

fn aggregate_rows(
    sets: &[ConceptSet],
    store: &EntityEmbeddingStore,
    aggregation: Aggregation,
) -> Result<Array2<f32>> {
    let rows = sets
        .par_iter()
        .map(|cs| agg_average_with(cs, store, aggregation))
        .collect::<Result<Vec<_>>>()?;
    let mut m = Array2::zeros((rows.len(), store.dim()));
    for (i, r) in rows.into_iter().enumerate() {
        m.row_mut(i).assign(&ndarray::Array1::from(r));
    }
    Ok(m)
}

/// One KG block: the averaged concept embedding of every document body.
pub fn kg_matrix(
    docs: &[Document],
    dict: &AliasDictionary,
    store: &EntityEmbeddingStore,
    opts: KgOptions,
) -> Result<Array2<f32>> {
    aggregate_rows(
        &document_concepts(docs, dict, opts),
        store,
        opts.aggregation,
    )
}

/// One KG-ENTITY block: the averaged entity embedding of every document's metadata.
pub fn entity_matrix(
    docs: &[Document],
    dict: &AliasDictionary,
    store: &EntityEmbeddingStore,
    opts: KgOptions,
) -> Result<Array2<f32>> {
    let lexicon = Lexicon::english();
    let sets: Vec<ConceptSet> = docs
        .par_iter()
        .map(|d| metadata_concepts(&d.metadata, dict, lexicon).with_id(d.id.clone()))
        .collect();
    aggregate_rows(&sets, store, opts.aggregation)
}
