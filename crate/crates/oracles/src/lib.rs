//! Independent readers for every RDF representation the service emits.
//!
//! RDF/XML, Turtle and N-Triples go through the `rio` parsers; RDF/JSON is decoded with
//! `serde_json`; XHTML+RDFa is read by a small extractor over `roxmltree` that
//! implements the attribute subset `about`, `typeof`, `property`, `rel`, `href`,
//! `datatype` and `xml:lang`. Results are plain strings so they never share types with
//! the code under test.

use std::collections::BTreeSet;

use rio_api::model;
use rio_api::parser::TriplesParser;
use rio_turtle::{NTriplesParser, TurtleParser};
use rio_xml::RdfXmlParser;
use roxmltree::{Document, Node, ParsingOptions, NS_XML_URI};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Iri(String),
    Literal {
        value: String,
        language: Option<String>,
        datatype: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Statement {
    pub subject: String,
    pub predicate: String,
    pub object: Object,
}

impl Statement {
    pub fn iri(s: &str, p: &str, o: &str) -> Statement {
        Statement {
            subject: s.into(),
            predicate: p.into(),
            object: Object::Iri(o.into()),
        }
    }

    pub fn literal(s: &str, p: &str, value: &str, language: Option<&str>, datatype: Option<&str>) -> Statement {
        Statement {
            subject: s.into(),
            predicate: p.into(),
            object: Object::Literal {
                value: value.into(),
                language: language.map(str::to_lowercase),
                datatype: datatype.map(Into::into),
            },
        }
    }
}

pub type Statements = BTreeSet<Statement>;

fn from_rio(t: &model::Triple<'_>) -> Result<Statement, String> {
    let subject = match t.subject {
        model::Subject::NamedNode(n) => n.iri.to_owned(),
        other => return Err(format!("unexpected subject {other}")),
    };
    let object = match t.object {
        model::Term::NamedNode(n) => Object::Iri(n.iri.to_owned()),
        model::Term::Literal(model::Literal::Simple { value }) => Object::Literal {
            value: value.to_owned(),
            language: None,
            datatype: None,
        },
        model::Term::Literal(model::Literal::LanguageTaggedString { value, language }) => {
            Object::Literal {
                value: value.to_owned(),
                language: Some(language.to_lowercase()),
                datatype: None,
            }
        }
        model::Term::Literal(model::Literal::Typed { value, datatype }) => {
            if datatype.iri == "http://www.w3.org/2001/XMLSchema#string" {
                Object::Literal {
                    value: value.to_owned(),
                    language: None,
                    datatype: None,
                }
            } else {
                Object::Literal {
                    value: value.to_owned(),
                    language: None,
                    datatype: Some(datatype.iri.to_owned()),
                }
            }
        }
        other => return Err(format!("unexpected object {other}")),
    };
    Ok(Statement {
        subject,
        predicate: t.predicate.iri.to_owned(),
        object,
    })
}

fn collect<P, E>(mut parser: P) -> Result<Statements, String>
where
    P: TriplesParser<Error = E>,
    E: std::error::Error + From<std::io::Error>,
{
    let mut out = Statements::new();
    let mut failure = None;
    parser
        .parse_all(&mut |t| {
            match from_rio(&t) {
                Ok(s) => {
                    out.insert(s);
                }
                Err(e) => failure = Some(e),
            }
            Ok(()) as Result<(), E>
        })
        .map_err(|e| e.to_string())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn parse_rdfxml(text: &str) -> Result<Statements, String> {
    collect(RdfXmlParser::new(text.as_bytes(), None))
}

/// Turtle, which is also what the `text/n3` representation contains.
pub fn parse_turtle(text: &str) -> Result<Statements, String> {
    collect(TurtleParser::new(text.as_bytes(), None))
}

pub fn parse_ntriples(text: &str) -> Result<Statements, String> {
    collect(NTriplesParser::new(text.as_bytes()))
}

/// RDF/JSON: `{subject: {predicate: [{type, value, lang?, datatype?}]}}`.
pub fn parse_rdf_json(text: &str) -> Result<Statements, String> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let subjects = doc.as_object().ok_or("top level is not an object")?;
    let mut out = Statements::new();
    for (subject, predicates) in subjects {
        let predicates = predicates.as_object().ok_or("subject value is not an object")?;
        for (predicate, objects) in predicates {
            let objects = objects.as_array().ok_or("predicate value is not an array")?;
            for object in objects {
                let field = |k: &str| object.get(k).and_then(|v| v.as_str());
                let value = field("value").ok_or("object without value")?;
                let object = match field("type") {
                    Some("uri") => Object::Iri(value.to_owned()),
                    Some("literal") => Object::Literal {
                        value: value.to_owned(),
                        language: field("lang").map(str::to_lowercase),
                        datatype: field("datatype").map(str::to_owned),
                    },
                    other => return Err(format!("unknown object type {other:?}")),
                };
                out.insert(Statement {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
            }
        }
    }
    Ok(out)
}

fn parse_xml(text: &str) -> Result<Document<'_>, String> {
    let options = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    Document::parse_with_options(text, options).map_err(|e| e.to_string())
}

/// Generic XML well-formedness check.
pub fn check_well_formed(text: &str) -> Result<(), String> {
    parse_xml(text).map(|_| ())
}

fn expand_curie(node: Node<'_, '_>, curie: &str) -> Result<String, String> {
    let (prefix, local) = curie
        .split_once(':')
        .ok_or_else(|| format!("{curie:?} is not a CURIE"))?;
    let ns = node
        .lookup_namespace_uri(Some(prefix))
        .ok_or_else(|| format!("prefix {prefix:?} is not declared"))?;
    Ok(format!("{ns}{local}"))
}

fn language(node: Node<'_, '_>) -> Option<String> {
    node.ancestors()
        .filter(|n| n.is_element())
        .find_map(|n| n.attribute((NS_XML_URI, "lang")))
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
}

/// Extracts the triples expressed by RDFa attributes in an XHTML document.
pub fn extract_rdfa(text: &str) -> Result<Statements, String> {
    let doc = parse_xml(text)?;
    let mut out = Statements::new();
    walk(doc.root_element(), None, &mut out)?;
    Ok(out)
}

fn walk(node: Node<'_, '_>, subject: Option<&str>, out: &mut Statements) -> Result<(), String> {
    let subject = node.attribute("about").or(subject);
    if let (Some(types), Some(s)) = (node.attribute("typeof"), node.attribute("about")) {
        for t in types.split_whitespace() {
            out.insert(Statement::iri(s, RDF_TYPE, &expand_curie(node, t)?));
        }
    }
    if let Some(rels) = node.attribute("rel") {
        let s = subject.ok_or("rel without a subject")?;
        let href = node.attribute("href").ok_or("rel without href")?;
        for r in rels.split_whitespace() {
            out.insert(Statement::iri(s, &expand_curie(node, r)?, href));
        }
    }
    if let Some(props) = node.attribute("property") {
        let s = subject.ok_or("property without a subject")?;
        if node.children().any(|c| c.is_element()) {
            return Err("XML literals are not expected".into());
        }
        let value: String = node
            .descendants()
            .filter(|d| d.is_text())
            .filter_map(|d| d.text())
            .collect();
        let datatype = node
            .attribute("datatype")
            .map(|d| expand_curie(node, d))
            .transpose()?;
        let lang = if datatype.is_some() { None } else { language(node) };
        for p in props.split_whitespace() {
            out.insert(Statement {
                subject: s.to_owned(),
                predicate: expand_curie(node, p)?,
                object: Object::Literal {
                    value: value.clone(),
                    language: lang.clone(),
                    datatype: datatype.clone(),
                },
            });
        }
    }
    for child in node.children().filter(|c| c.is_element()) {
        walk(child, subject, out)?;
    }
    Ok(())
}
