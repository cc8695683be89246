use std::collections::HashMap;

use super::preprocess_kg_with;
use super::store::EntityEmbeddingStore;
use crate::lexicon::Lexicon;

/// Longest alias (in tokens) considered by n-gram matching.
pub const MAX_NGRAM: usize = 3;

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: HashMap<u32, usize>,
    entity: Option<usize>,
}

/// Preprocessed alias → entity row, with a token trie for n-gram scanning.
#[derive(Debug, Clone)]
pub struct AliasDictionary {
    aliases: HashMap<String, usize>,
    n_entities: usize,
    dim: usize,
    max_ngram: usize,
    tokens: HashMap<String, u32>,
    trie: Vec<TrieNode>,
    collisions: usize,
}

impl AliasDictionary {
    /// Builds the dictionary from a store's raw aliases with the bundled lexicon.
    pub fn from_store(store: &EntityEmbeddingStore) -> Self {
        Self::build(&store.aliases, store.dim(), Lexicon::english())
    }

    /// Aliases are run through the same preprocessing as documents. Aliases that
    /// preprocess to nothing are skipped; on collision the first row wins.
    pub fn build<S: AsRef<str>>(raw_aliases: &[S], dim: usize, lexicon: &Lexicon) -> Self {
        let mut dict = Self {
            aliases: HashMap::new(),
            n_entities: raw_aliases.len(),
            dim,
            max_ngram: MAX_NGRAM,
            tokens: HashMap::new(),
            trie: vec![TrieNode::default()],
            collisions: 0,
        };
        for (row, raw) in raw_aliases.iter().enumerate() {
            let toks = preprocess_kg_with(raw.as_ref(), lexicon);
            if toks.is_empty() {
                continue;
            }
            dict.insert_tokens(&toks, row);
        }
        if dict.collisions > 0 {
            log::warn!(
                "{} alias collisions resolved to the first entity row",
                dict.collisions
            );
        }
        dict
    }

    /// Inserts an already-preprocessed alias. Returns false on collision.
    pub fn insert_tokens(&mut self, toks: &[String], row: usize) -> bool {
        let key = toks.join(" ");
        if self.aliases.contains_key(&key) {
            self.collisions += 1;
            log::debug!(
                "alias `{key}` of row {row} already maps to row {}",
                self.aliases[&key]
            );
            return false;
        }
        self.aliases.insert(key, row);
        self.n_entities = self.n_entities.max(row + 1);
        if toks.len() <= self.max_ngram {
            let mut node = 0;
            for t in toks {
                let next_id = self.tokens.len() as u32;
                let id = *self.tokens.entry(t.clone()).or_insert(next_id);
                node = match self.trie[node].children.get(&id) {
                    Some(&n) => n,
                    None => {
                        self.trie.push(TrieNode::default());
                        let n = self.trie.len() - 1;
                        self.trie[node].children.insert(id, n);
                        n
                    }
                };
            }
            self.trie[node].entity = Some(row);
        }
        true
    }

    /// Entity row of a preprocessed, space-joined alias.
    pub fn get(&self, alias: &str) -> Option<usize> {
        self.aliases.get(alias).copied()
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_ngram(&self) -> usize {
        self.max_ngram
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn aliases(&self) -> impl Iterator<Item = (&str, usize)> {
        self.aliases.iter().map(|(a, &r)| (a.as_str(), r))
    }

    /// Calls `hit(len, entity)` for every alias that starts at `tokens[start]`,
    /// shortest first.
    pub(crate) fn walk(&self, tokens: &[String], start: usize, mut hit: impl FnMut(usize, usize)) {
        let mut node = 0;
        for (k, t) in tokens[start..].iter().take(self.max_ngram).enumerate() {
            let Some(id) = self.tokens.get(t) else { return };
            let Some(&next) = self.trie[node].children.get(id) else {
                return;
            };
            node = next;
            if let Some(e) = self.trie[node].entity {
                hit(k + 1, e);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases_are_preprocessed_and_first_wins() {
        let dict = AliasDictionary::build(
            &["Donald Trump", "The Vaccines", "vaccine", ""],
            4,
            Lexicon::english(),
        );
        assert_eq!(dict.get("donald trump"), Some(0));
        assert_eq!(dict.get("vaccine"), Some(1));
        assert_eq!(dict.collisions(), 1);
        assert_eq!(dict.len(), 2);
        assert_eq!(dict.n_entities(), 4);
    }

    #[test]
    fn long_aliases_kept_for_whole_string_lookup() {
        let dict = AliasDictionary::build(
            &["quantum field theory lattice model"],
            2,
            Lexicon::english(),
        );
        assert_eq!(dict.get("quantum field theory lattice model"), Some(0));
        let toks: Vec<String> = ["quantum", "field", "theory"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut hits = Vec::new();
        dict.walk(&toks, 0, |l, e| hits.push((l, e)));
        assert!(hits.is_empty());
    }
}
