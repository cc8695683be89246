use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::dictionary::AliasDictionary;
use super::preprocess_kg_with;
use super::store::EntityEmbeddingStore;
use crate::error::Result;
use crate::lexicon::Lexicon;

/// One alias occurrence: `len` tokens starting at token offset `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
    pub entity: usize,
}

/// Concepts matched in one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptSet {
    pub doc_id: String,
    /// Distinct entity rows, ascending.
    pub concepts: Vec<usize>,
    /// Every match, ordered by (start, len).
    pub spans: Vec<Span>,
}

impl ConceptSet {
    pub fn from_spans(mut spans: Vec<Span>) -> Self {
        spans.sort_unstable();
        let concepts: BTreeSet<usize> = spans.iter().map(|s| s.entity).collect();
        Self {
            doc_id: String::new(),
            concepts: concepts.into_iter().collect(),
            spans,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.doc_id = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Set when nothing matched; the aggregated vector is then all zeros.
    pub fn no_concept(&self) -> bool {
        self.is_empty()
    }

    /// Entity rows with multiplicity, ascending.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ: Vec<usize> = self.spans.iter().map(|s| s.entity).collect();
        occ.sort_unstable();
        occ
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// Every 1-, 2- and 3-gram that is an alias counts, overlaps included.
    #[default]
    Overlapping,
    /// Leftmost-longest, non-overlapping segmentation.
    LongestOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Each distinct concept weighs once.
    #[default]
    Set,
    /// Concepts weigh by number of occurrences.
    Multiset,
}

pub fn match_concepts(tokens: &[String], dict: &AliasDictionary) -> ConceptSet {
    match_concepts_with(tokens, dict, MatchMode::Overlapping)
}

pub fn match_concepts_with(
    tokens: &[String],
    dict: &AliasDictionary,
    mode: MatchMode,
) -> ConceptSet {
    let mut spans = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        match mode {
            MatchMode::Overlapping => {
                dict.walk(tokens, start, |len, entity| {
                    spans.push(Span { start, len, entity })
                });
                start += 1;
            }
            MatchMode::LongestOnly => {
                let mut longest = None;
                dict.walk(tokens, start, |len, entity| {
                    longest = Some(Span { start, len, entity })
                });
                match longest {
                    Some(span) => {
                        spans.push(span);
                        start += span.len;
                    }
                    None => start += 1,
                }
            }
        }
    }
    ConceptSet::from_spans(spans)
}

/// Mean of the concept embeddings; the zero vector when there are none.
///
/// Summation runs in f64 over ascending entity rows, so the result does not
/// depend on the order in which concepts were found.
pub fn agg_average(concepts: &ConceptSet, store: &EntityEmbeddingStore) -> Result<Vec<f32>> {
    agg_average_with(concepts, store, Aggregation::Set)
}

pub fn agg_average_with(
    concepts: &ConceptSet,
    store: &EntityEmbeddingStore,
    aggregation: Aggregation,
) -> Result<Vec<f32>> {
    let mut rows = match aggregation {
        Aggregation::Set => concepts.concepts.clone(),
        Aggregation::Multiset => concepts.occurrences(),
    };
    rows.sort_unstable();
    mean_rows(&rows, store)
}

fn mean_rows(rows: &[usize], store: &EntityEmbeddingStore) -> Result<Vec<f32>> {
    let mut sum = vec![0.0f64; store.dim()];
    for &r in rows {
        for (s, &v) in sum.iter_mut().zip(store.row(r)?) {
            *s += v as f64;
        }
    }
    if rows.is_empty() {
        return Ok(vec![0.0; store.dim()]);
    }
    let n = rows.len() as f64;
    Ok(sum.into_iter().map(|s| (s / n) as f32).collect())
}

/// Concepts found in metadata values: each value is matched both as a whole
/// alias and through its n-grams, and the results are united.
pub fn metadata_concepts(
    metadata: &IndexMap<String, String>,
    dict: &AliasDictionary,
    lexicon: &Lexicon,
) -> ConceptSet {
    let mut spans = Vec::new();
    let mut offset = 0;
    for value in metadata.values() {
        let toks = preprocess_kg_with(value, lexicon);
        if toks.is_empty() {
            continue;
        }
        if let Some(entity) = dict.get(&toks.join(" ")) {
            spans.push(Span {
                start: offset,
                len: toks.len(),
                entity,
            });
        }
        for s in match_concepts(&toks, dict).spans {
            if s.start != 0 || s.len != toks.len() {
                spans.push(Span {
                    start: s.start + offset,
                    ..s
                });
            }
        }
        offset += toks.len();
    }
    ConceptSet::from_spans(spans)
}

/// Entity representation of a document's metadata; zero when nothing matches.
pub fn entity_repr(
    metadata: &IndexMap<String, String>,
    dict: &AliasDictionary,
    store: &EntityEmbeddingStore,
) -> Result<Vec<f32>> {
    agg_average(
        &metadata_concepts(metadata, dict, Lexicon::english()),
        store,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgrep::KgMethod;
    use ndarray::Array2;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    /// Dictionary whose aliases map to explicit rows of a `rows × dim` store.
    fn fixture(
        aliases: &[(&str, usize)],
        rows: usize,
        dim: usize,
    ) -> (AliasDictionary, EntityEmbeddingStore) {
        let mut raw = vec![String::new(); rows];
        for (a, r) in aliases {
            raw[*r] = a.to_string();
        }
        let dict = AliasDictionary::build(&raw, dim, Lexicon::english());
        let m = Array2::from_shape_fn((rows, dim), |(i, j)| (i * 10 + j) as f32 * 0.5 - 3.0);
        (
            dict,
            EntityEmbeddingStore::new(KgMethod::TransE, raw, m).unwrap(),
        )
    }

    #[test]
    fn bigram_and_inner_unigram_both_match() {
        let (dict, _) = fixture(&[("donald trump", 7), ("vaccine", 3), ("trump", 9)], 10, 2);
        let cs = match_concepts(&toks("donald trump vaccine"), &dict);
        assert_eq!(cs.concepts, vec![3, 7, 9]);
        assert_eq!(cs.spans.len(), 3);
    }

    #[test]
    fn longest_only_mode_skips_inner_matches() {
        let (dict, _) = fixture(&[("donald trump", 7), ("vaccine", 3), ("trump", 9)], 10, 2);
        let cs = match_concepts_with(
            &toks("donald trump vaccine trump"),
            &dict,
            MatchMode::LongestOnly,
        );
        assert_eq!(cs.concepts, vec![3, 7, 9]);
        assert_eq!(
            cs.spans,
            vec![
                Span {
                    start: 0,
                    len: 2,
                    entity: 7
                },
                Span {
                    start: 2,
                    len: 1,
                    entity: 3
                },
                Span {
                    start: 3,
                    len: 1,
                    entity: 9
                }
            ]
        );
    }

    #[test]
    fn empty_tokens_match_nothing() {
        let (dict, store) = fixture(&[("vaccine", 0)], 1, 3);
        let cs = match_concepts(&[], &dict);
        assert!(cs.no_concept());
        assert_eq!(agg_average(&cs, &store).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn single_concept_is_its_embedding() {
        let (dict, store) = fixture(&[("vaccine", 2)], 4, 3);
        let cs = match_concepts(&toks("vaccine"), &dict);
        let v = agg_average(&cs, &store).unwrap();
        assert_eq!(v, store.row(2).unwrap().to_vec());
    }

    #[test]
    fn opposite_embeddings_cancel() {
        let m = Array2::from_shape_vec((2, 3), vec![1.5, -2.0, 0.25, -1.5, 2.0, -0.25]).unwrap();
        let store =
            EntityEmbeddingStore::new(KgMethod::TransE, vec!["a".into(), "b".into()], m).unwrap();
        let cs = ConceptSet::from_spans(vec![
            Span {
                start: 0,
                len: 1,
                entity: 0,
            },
            Span {
                start: 1,
                len: 1,
                entity: 1,
            },
        ]);
        assert_eq!(agg_average(&cs, &store).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn multiset_weights_repeats() {
        let (dict, store) = fixture(&[("vaccine", 0), ("covid", 1)], 2, 2);
        let cs = match_concepts(&toks("vaccine vaccine covid"), &dict);
        let set = agg_average_with(&cs, &store, Aggregation::Set).unwrap();
        let multi = agg_average_with(&cs, &store, Aggregation::Multiset).unwrap();
        let (r0, r1) = (store.row(0).unwrap(), store.row(1).unwrap());
        for j in 0..2 {
            assert_eq!(set[j], ((r0[j] as f64 + r1[j] as f64) / 2.0) as f32);
            assert_eq!(multi[j], ((2.0 * r0[j] as f64 + r1[j] as f64) / 3.0) as f32);
        }
    }

    #[test]
    fn out_of_range_concept_is_integrity_error() {
        let (_, store) = fixture(&[("x", 0)], 1, 2);
        let cs = ConceptSet::from_spans(vec![Span {
            start: 0,
            len: 1,
            entity: 5,
        }]);
        assert!(matches!(
            agg_average(&cs, &store),
            Err(crate::Error::Integrity { index: 5, .. })
        ));
    }

    #[test]
    fn metadata_entity_representation() {
        let (dict, store) = fixture(&[("republican", 12), ("abortion", 4)], 13, 2);
        let mut md = IndexMap::new();
        md.insert("party".to_owned(), "republican".to_owned());
        assert_eq!(
            entity_repr(&md, &dict, &store).unwrap(),
            store.row(12).unwrap().to_vec()
        );

        let mut md = IndexMap::new();
        md.insert("speaker".to_owned(), "dwayne bohac".to_owned());
        md.insert("subject".to_owned(), "abortion".to_owned());
        assert_eq!(
            entity_repr(&md, &dict, &store).unwrap(),
            store.row(4).unwrap().to_vec()
        );

        assert_eq!(
            entity_repr(&IndexMap::new(), &dict, &store).unwrap(),
            vec![0.0; 2]
        );
    }

    #[test]
    fn metadata_whole_value_longer_than_three_tokens() {
        let (dict, _) = fixture(&[("state representative texas district", 1)], 2, 2);
        let mut md = IndexMap::new();
        md.insert(
            "job".to_owned(),
            "State Representative, Texas District".to_owned(),
        );
        assert_eq!(
            metadata_concepts(&md, &dict, Lexicon::english()).concepts,
            vec![1]
        );
    }
}
