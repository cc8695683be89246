use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::concepts::ConceptSet;
use super::store::EntityEmbeddingStore;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopConcept {
    pub entity: usize,
    pub alias: String,
    /// Number of documents containing the concept.
    pub documents: usize,
}

/// Concept frequency and coverage summary over one collection of documents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptStats {
    pub n_documents: usize,
    pub n_without_concepts: usize,
    /// Fraction of documents with at least one concept.
    pub coverage: f64,
    pub top: Vec<TopConcept>,
    /// Distinct concepts per document → number of documents.
    pub histogram: BTreeMap<usize, usize>,
}

impl ConceptStats {
    pub fn zero_concept_rate(&self) -> f64 {
        if self.n_documents == 0 {
            0.0
        } else {
            self.n_without_concepts as f64 / self.n_documents as f64
        }
    }
}

/// Top-`k` concepts by document frequency (ties by entity row) and coverage.
/// `store` supplies display aliases when given.
pub fn concept_stats(
    sets: &[ConceptSet],
    store: Option<&EntityEmbeddingStore>,
    k: usize,
) -> ConceptStats {
    let mut df: HashMap<usize, usize> = HashMap::new();
    let mut histogram = BTreeMap::new();
    let mut empty = 0;
    for cs in sets {
        if cs.no_concept() {
            empty += 1;
        }
        *histogram.entry(cs.len()).or_insert(0) += 1;
        for &c in &cs.concepts {
            *df.entry(c).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(usize, usize)> = df.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let top = ranked
        .into_iter()
        .take(k)
        .map(|(entity, documents)| TopConcept {
            entity,
            alias: store
                .and_then(|s| s.aliases.get(entity).cloned())
                .unwrap_or_else(|| format!("#{entity}")),
            documents,
        })
        .collect();
    let n = sets.len();
    ConceptStats {
        n_documents: n,
        n_without_concepts: empty,
        coverage: if n == 0 {
            0.0
        } else {
            (n - empty) as f64 / n as f64
        },
        top,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgrep::{match_concepts, preprocess_kg, AliasDictionary, KgMethod};
    use ndarray::Array2;

    fn store() -> EntityEmbeddingStore {
        EntityEmbeddingStore::new(
            KgMethod::TransE,
            vec!["government".into(), "tax".into()],
            Array2::zeros((2, 2)),
        )
        .unwrap()
    }

    #[test]
    fn every_document_mentions_government() {
        let s = store();
        let dict = AliasDictionary::from_store(&s);
        let texts = [
            "the government raised taxes",
            "government shutdown",
            "a new government",
        ];
        let sets: Vec<_> = texts
            .iter()
            .map(|t| match_concepts(&preprocess_kg(t), &dict))
            .collect();
        let st = concept_stats(&sets, Some(&s), 10);
        assert_eq!(
            st.top[0],
            TopConcept {
                entity: 0,
                alias: "government".into(),
                documents: 3
            }
        );
        assert_eq!(st.top[1].documents, 1);
        assert_eq!(st.coverage, 1.0);
        assert_eq!(st.histogram, BTreeMap::from([(1, 2), (2, 1)]));
    }

    #[test]
    fn one_uncovered_document_in_ten() {
        let s = store();
        let dict = AliasDictionary::from_store(&s);
        let mut texts = vec!["tax cut"; 9];
        texts.push("nothing relevant");
        let sets: Vec<_> = texts
            .iter()
            .map(|t| match_concepts(&preprocess_kg(t), &dict))
            .collect();
        let st = concept_stats(&sets, Some(&s), 1);
        assert!((st.coverage - 0.9).abs() < 1e-15);
        assert_eq!(st.n_without_concepts, 1);
        assert!((st.zero_concept_rate() - 0.1).abs() < 1e-15);
        assert_eq!(st.top.len(), 1);
    }
}
