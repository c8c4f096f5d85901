//! Canonical label keys and the preferred-label index used to resolve 5XX references
//! and to answer exact label lookups.

use std::collections::BTreeMap;

use crate::rdf::{vocab, Graph, Iri, Term};

/// Canonical form of a heading for matching: whitespace collapsed, trailing periods
/// removed, case preserved.
pub fn label_key(label: &str) -> String {
    let mut key = String::with_capacity(label.len());
    for word in label.split_whitespace() {
        if !key.is_empty() {
            key.push(' ');
        }
        key.push_str(word);
    }
    let trimmed = key.trim_end_matches(|c: char| c == '.' || c.is_whitespace()).len();
    key.truncate(trimmed);
    key
}

/// `label_key(prefLabel)` to the concepts carrying that label, each list sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelIndex {
    entries: BTreeMap<String, Vec<Iri>>,
}

impl LabelIndex {
    pub fn new() -> Self {
        LabelIndex::default()
    }

    /// Registers `concept` under the key of `label`.
    pub fn insert(&mut self, label: &str, concept: Iri) {
        self.insert_key(label_key(label), concept);
    }

    pub(crate) fn insert_key(&mut self, key: String, concept: Iri) {
        let list = self.entries.entry(key).or_default();
        if let Err(pos) = list.binary_search(&concept) {
            list.insert(pos, concept);
        }
    }

    /// Exact, case-sensitive lookup on `label_key(label)`.
    pub fn lookup(&self, label: &str) -> &[Iri] {
        self.entries
            .get(&label_key(label))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Iri])> + '_ {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Rebuilds the index from the `skos:prefLabel` triples of a graph.
    pub fn from_graph(graph: &Graph) -> Self {
        let mut index = LabelIndex::new();
        for t in graph.matching(None, Some(&vocab::SKOS_PREF_LABEL), None) {
            if let Term::Literal(lit) = &t.object {
                index.insert(lit.lexical(), t.subject.clone());
            }
        }
        index
    }
}
