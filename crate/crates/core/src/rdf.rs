//! Minimal RDF data model: IRIs, literals, triples and an ordered in-memory graph.
//!
//! There are no blank nodes. Every subject produced by the converter is a minted
//! concept IRI, and every object is either an IRI or a literal.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Bound;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("IRI {0:?} has no scheme")]
    MissingScheme(String),
    #[error("IRI {0:?} contains whitespace or a forbidden character")]
    InvalidIriChar(String),
    #[error("literal cannot carry both a language tag and a datatype")]
    LanguageAndDatatype,
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
}

/// An absolute IRI. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, TermError> {
        let value = value.as_ref();
        let scheme_end = value
            .find(':')
            .ok_or_else(|| TermError::MissingScheme(value.to_owned()))?;
        let scheme = &value[..scheme_end];
        let scheme_ok = scheme
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic())
            && scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !scheme_ok {
            return Err(TermError::MissingScheme(value.to_owned()));
        }
        if value
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
        {
            return Err(TermError::InvalidIriChar(value.to_owned()));
        }
        Ok(Iri(Arc::from(value)))
    }

    /// Builds an IRI from a string already known to be valid, such as a vocabulary constant.
    pub(crate) fn new_unchecked(value: &str) -> Self {
        debug_assert!(Iri::new(value).is_ok(), "invalid IRI constant {value}");
        Iri(Arc::from(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The IRI with any `#fragment` removed.
    pub fn without_fragment(&self) -> &str {
        match self.0.find('#') {
            Some(i) => &self.0[..i],
            None => &self.0,
        }
    }

    pub fn fragment(&self) -> Option<&str> {
        self.0.find('#').map(|i| &self.0[i + 1..])
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl serde::Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A plain, language-tagged or typed literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: Arc<str>,
    language: Option<Arc<str>>,
    datatype: Option<Iri>,
}

impl Literal {
    pub fn plain(lexical: impl AsRef<str>) -> Self {
        Literal {
            lexical: Arc::from(lexical.as_ref()),
            language: None,
            datatype: None,
        }
    }

    /// Language tags are stored lowercase.
    pub fn with_language(lexical: impl AsRef<str>, language: &str) -> Result<Self, TermError> {
        let valid = !language.is_empty()
            && language.split('-').all(|part| {
                !part.is_empty() && part.len() <= 8 && part.chars().all(|c| c.is_ascii_alphanumeric())
            })
            && language.split('-').next().unwrap().chars().all(|c| c.is_ascii_alphabetic());
        if !valid {
            return Err(TermError::InvalidLanguage(language.to_owned()));
        }
        Ok(Literal {
            lexical: Arc::from(lexical.as_ref()),
            language: Some(Arc::from(language.to_ascii_lowercase())),
            datatype: None,
        })
    }

    pub fn typed(lexical: impl AsRef<str>, datatype: Iri) -> Self {
        Literal {
            lexical: Arc::from(lexical.as_ref()),
            language: None,
            datatype: Some(datatype),
        }
    }

    /// General constructor enforcing the language/datatype exclusion.
    pub fn new(
        lexical: impl AsRef<str>,
        language: Option<&str>,
        datatype: Option<Iri>,
    ) -> Result<Self, TermError> {
        match (language, datatype) {
            (Some(_), Some(_)) => Err(TermError::LanguageAndDatatype),
            (Some(lang), None) => Literal::with_language(lexical, lang),
            (None, Some(dt)) => Ok(Literal::typed(lexical, dt)),
            (None, None) => Ok(Literal::plain(lexical)),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn datatype(&self) -> Option<&Iri> {
        self.datatype.as_ref()
    }
}

/// An RDF node in object position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Iri(_) => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

/// Ordering is subject, then predicate, then object; graphs iterate in this order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }

    pub fn matches(&self, s: Option<&Iri>, p: Option<&Iri>, o: Option<&Term>) -> bool {
        s.is_none_or(|s| &self.subject == s)
            && p.is_none_or(|p| &self.predicate == p)
            && o.is_none_or(|o| &self.object == o)
    }
}

/// A set of triples with deterministic (sorted) iteration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    /// Returns `true` when the triple was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.triples.iter()
    }

    /// Triples matching every bound position; `None` is a wildcard.
    pub fn matching<'a>(
        &'a self,
        s: Option<&'a Iri>,
        p: Option<&'a Iri>,
        o: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        match s {
            Some(subject) => {
                let lower = Triple {
                    subject: subject.clone(),
                    predicate: p.cloned().unwrap_or_else(|| Iri(Arc::from(""))),
                    object: Term::Iri(Iri(Arc::from(""))),
                };
                Box::new(
                    self.triples
                        .range((Bound::Included(lower), Bound::Unbounded))
                        .take_while(move |t| &t.subject == subject)
                        .filter(move |t| t.matches(None, p, o)),
                )
            }
            None => Box::new(self.triples.iter().filter(move |t| t.matches(None, p, o))),
        }
    }

    pub fn match_pattern(&self, s: Option<&Iri>, p: Option<&Iri>, o: Option<&Term>) -> Vec<Triple> {
        self.matching(s, p, o).cloned().collect()
    }

    /// Distinct subjects in sorted order.
    pub fn subjects(&self) -> Vec<Iri> {
        let mut out: Vec<Iri> = Vec::new();
        for t in &self.triples {
            if out.last() != Some(&t.subject) {
                out.push(t.subject.clone());
            }
        }
        out
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter);
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for Graph {
    type Item = Triple;
    type IntoIter = std::collections::btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

/// Namespace and term constants used by the SKOS mapping.
pub mod vocab {
    use super::Iri;
    use std::sync::LazyLock;

    pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const SKOS_NS: &str = "http://www.w3.org/2004/02/skos/core#";
    pub const DCTERMS_NS: &str = "http://purl.org/dc/terms/";
    pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

    /// Fixed prefix table used by every serializer.
    pub const PREFIXES: [(&str, &str); 3] =
        [("rdf", RDF_NS), ("skos", SKOS_NS), ("dcterms", DCTERMS_NS)];

    macro_rules! terms {
        ($($name:ident = $ns:ident + $local:literal;)*) => {
            $(
                pub static $name: LazyLock<Iri> =
                    LazyLock::new(|| Iri::new_unchecked(&format!("{}{}", $ns, $local)));
            )*
        };
    }

    terms! {
        RDF_TYPE = RDF_NS + "type";
        SKOS_CONCEPT = SKOS_NS + "Concept";
        SKOS_IN_SCHEME = SKOS_NS + "inScheme";
        SKOS_PREF_LABEL = SKOS_NS + "prefLabel";
        SKOS_ALT_LABEL = SKOS_NS + "altLabel";
        SKOS_BROADER = SKOS_NS + "broader";
        SKOS_NARROWER = SKOS_NS + "narrower";
        SKOS_RELATED = SKOS_NS + "related";
        SKOS_NOTE = SKOS_NS + "note";
        SKOS_EDITORIAL_NOTE = SKOS_NS + "editorialNote";
        SKOS_DEFINITION = SKOS_NS + "definition";
        SKOS_SCOPE_NOTE = SKOS_NS + "scopeNote";
        SKOS_EXAMPLE = SKOS_NS + "example";
        SKOS_CHANGE_NOTE = SKOS_NS + "changeNote";
        SKOS_HISTORY_NOTE = SKOS_NS + "historyNote";
        DCTERMS_SOURCE = DCTERMS_NS + "source";
        DCTERMS_CREATED = DCTERMS_NS + "created";
        DCTERMS_MODIFIED = DCTERMS_NS + "modified";
        DCTERMS_LCC = DCTERMS_NS + "lcc";
        XSD_DATE = XSD_NS + "date";
        XSD_DATE_TIME = XSD_NS + "dateTime";
    }

    /// Splits an IRI into a namespace and a local name usable as an XML/Turtle name.
    pub fn split_iri(iri: &str) -> Option<(&str, &str)> {
        let cut = iri.rfind(['#', '/'])? + 1;
        let (ns, local) = iri.split_at(cut);
        let mut chars = local.chars();
        let first = chars.next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return None;
        }
        Some((ns, local))
    }

    /// Prefixed form (`skos:prefLabel`) when the IRI falls in the fixed prefix table.
    pub fn compact(iri: &str) -> Option<(&'static str, &str)> {
        let (ns, local) = split_iri(iri)?;
        PREFIXES
            .iter()
            .find(|(_, n)| *n == ns)
            .map(|(prefix, _)| (*prefix, local))
    }
}
