//! Serializations of graphs and single concept descriptions.
//!
//! Every writer is deterministic: triples are emitted in sorted order and the prefix
//! table (`rdf`, `skos`, `dcterms`) is fixed.

mod json;
pub mod ntriples;
mod rdfxml;
mod turtle;
mod xhtml;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rdf::{Graph, Iri, Term, Triple};

pub use ntriples::{
    format_triple, parse_ntriples, parse_ntriples_str, write_ntriples, NTriplesError,
    NTriplesReader,
};
pub use xhtml::{render_xhtml_rdfa, PageConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    RdfXml,
    N3,
    XhtmlRdfa,
    Json,
    NTriples,
}

impl Representation {
    pub const ALL: [Representation; 5] = [
        Representation::RdfXml,
        Representation::N3,
        Representation::XhtmlRdfa,
        Representation::Json,
        Representation::NTriples,
    ];

    pub fn media_type(self) -> &'static str {
        match self {
            Representation::RdfXml => "application/rdf+xml",
            Representation::N3 => "text/n3",
            Representation::XhtmlRdfa => "application/xhtml+xml",
            Representation::Json => "application/json",
            Representation::NTriples => "application/n-triples",
        }
    }

    /// URL suffix that forces this representation.
    pub fn extension(self) -> &'static str {
        match self {
            Representation::RdfXml => "rdf",
            Representation::N3 => "n3",
            Representation::XhtmlRdfa => "html",
            Representation::Json => "json",
            Representation::NTriples => "nt",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Representation> {
        Representation::ALL.into_iter().find(|r| r.extension() == ext)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.media_type())
    }
}

impl FromStr for Representation {
    type Err = SerializeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Representation::ALL
            .into_iter()
            .find(|r| r.media_type() == s || r.extension() == s)
            .ok_or_else(|| SerializeError::UnknownRepresentation(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("{0} output needs a single concept description, not a whole graph")]
    UnsupportedCombination(Representation),
    #[error("unknown representation {0:?}")]
    UnknownRepresentation(String),
    #[error("predicate {0} cannot be written as a qualified name")]
    UnqualifiablePredicate(String),
}

/// Everything said about one concept, ready for rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptDescription {
    pub concept: Iri,
    /// Sorted by predicate, then object.
    pub properties: Vec<(Iri, Term)>,
}

impl ConceptDescription {
    /// Collects the triples whose subject is `concept`; others are ignored.
    pub fn new<'a>(concept: Iri, triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut properties: Vec<(Iri, Term)> = triples
            .into_iter()
            .filter(|t| t.subject == concept)
            .map(|t| (t.predicate.clone(), t.object.clone()))
            .collect();
        properties.sort();
        properties.dedup();
        ConceptDescription {
            concept,
            properties,
        }
    }

    pub fn from_graph(concept: Iri, graph: &Graph) -> Self {
        let triples: Vec<Triple> = graph.matching(Some(&concept), None, None).cloned().collect();
        ConceptDescription::new(concept, &triples)
    }

    /// The concept IRI without its fragment: the URL of the describing document.
    pub fn document_uri(&self) -> &str {
        self.concept.without_fragment()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    pub fn objects<'a>(&'a self, predicate: &'a Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.properties
            .iter()
            .filter(move |(p, _)| p == predicate)
            .map(|(_, o)| o)
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.properties
            .iter()
            .map(|(p, o)| Triple::new(self.concept.clone(), p.clone(), o.clone()))
    }
}

/// What to serialize.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Graph(&'a Graph),
    Concept(&'a ConceptDescription),
}

impl<'a> From<&'a Graph> for Input<'a> {
    fn from(g: &'a Graph) -> Self {
        Input::Graph(g)
    }
}

impl<'a> From<&'a ConceptDescription> for Input<'a> {
    fn from(d: &'a ConceptDescription) -> Self {
        Input::Concept(d)
    }
}

impl Input<'_> {
    /// Sorted triples of the input.
    fn triples(&self) -> Vec<Triple> {
        match self {
            Input::Graph(g) => g.iter().cloned().collect(),
            Input::Concept(d) => d.triples().collect(),
        }
    }
}

/// Serializes a graph or one concept description. XHTML+RDFa output is per concept.
pub fn serialize<'a>(
    input: impl Into<Input<'a>>,
    kind: Representation,
) -> Result<Vec<u8>, SerializeError> {
    let input = input.into();
    let triples = input.triples();
    let text = match kind {
        Representation::NTriples => {
            let mut out = String::new();
            for t in &triples {
                ntriples::push_triple(t, &mut out);
            }
            out
        }
        Representation::RdfXml => rdfxml::write(&triples)?,
        Representation::N3 => turtle::write(&triples),
        Representation::Json => json::write(&triples),
        Representation::XhtmlRdfa => match input {
            Input::Concept(d) => render_xhtml_rdfa(d, &PageConfig::default()),
            Input::Graph(_) => return Err(SerializeError::UnsupportedCombination(kind)),
        },
    };
    Ok(text.into_bytes())
}

pub(crate) type PredicateGroup<'a> = (&'a Iri, Vec<&'a Term>);
pub(crate) type SubjectGroup<'a> = (&'a Iri, Vec<PredicateGroup<'a>>);

/// Groups sorted triples by subject, then predicate.
pub(crate) fn group(triples: &[Triple]) -> Vec<SubjectGroup<'_>> {
    let mut out: Vec<SubjectGroup<'_>> = Vec::new();
    for t in triples {
        match out.last_mut() {
            Some((s, preds)) if *s == &t.subject => match preds.last_mut() {
                Some((p, objs)) if *p == &t.predicate => objs.push(&t.object),
                _ => preds.push((&t.predicate, vec![&t.object])),
            },
            _ => out.push((&t.subject, vec![(&t.predicate, vec![&t.object])])),
        }
    }
    out
}

pub(crate) fn escape_xml(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}
