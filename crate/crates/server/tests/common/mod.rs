#![allow(dead_code)]

use std::fs;
use std::sync::Arc;

use marcskos::convert::{convert, Conversion, ConversionConfig};
use marcskos::marc::parse_marcxml;
use marcskos::rdf::{Iri, Term, Triple};
use marcskos::store::{StoreMeta, TripleStore};
use marcskos_oracles::{Object, Statement, Statements};
use marcskos_server::{Service, ServiceConfig};
use tempfile::TempDir;

pub const BASE: &str = "http://lcsh.info/";

pub fn fixture_conversion() -> Conversion {
    let xml = fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/authorities.xml")).unwrap();
    convert(parse_marcxml(xml.as_slice()), &ConversionConfig::new(BASE).unwrap()).unwrap()
}

pub struct Fixture {
    pub dir: TempDir,
    pub conversion: Conversion,
    pub store: Arc<TripleStore>,
}

impl Fixture {
    pub fn new() -> Fixture {
        let conversion = fixture_conversion();
        let dir = tempfile::tempdir().unwrap();
        let meta = StoreMeta {
            base_uri: Some(BASE.into()),
            fragment: Some("concept".into()),
        };
        let mut store = TripleStore::create_with(dir.path().join("store"), meta).unwrap();
        store.bulk_insert(conversion.graph.iter().cloned()).unwrap();
        drop(store);
        let store = Arc::new(TripleStore::open(dir.path().join("store")).unwrap());
        Fixture { dir, conversion, store }
    }

    pub fn service(&self) -> Service {
        Service::new(Arc::clone(&self.store), ServiceConfig::default()).unwrap()
    }

    /// Expected statements for one concept, taken from the in-memory graph.
    pub fn description(&self, lccn: &str) -> Statements {
        let concept = concept(lccn);
        self.conversion
            .graph
            .match_pattern(Some(&concept), None, None)
            .iter()
            .map(statement)
            .collect()
    }

    pub fn lccns(&self) -> Vec<String> {
        self.conversion
            .graph
            .subjects()
            .iter()
            .map(|s| lccn_of(s.as_str()).to_owned())
            .collect()
    }
}

pub fn concept(lccn: &str) -> Iri {
    Iri::new(format!("{BASE}{lccn}#concept")).unwrap()
}

pub fn lccn_of(iri: &str) -> &str {
    iri.strip_prefix(BASE).unwrap().strip_suffix("#concept").unwrap()
}

pub fn statement(t: &Triple) -> Statement {
    let object = match &t.object {
        Term::Iri(i) => Object::Iri(i.as_str().to_owned()),
        Term::Literal(l) => Object::Literal {
            value: l.lexical().to_owned(),
            language: l.language().map(str::to_owned),
            datatype: l.datatype().map(|d| d.as_str().to_owned()),
        },
    };
    Statement {
        subject: t.subject.as_str().to_owned(),
        predicate: t.predicate.as_str().to_owned(),
        object,
    }
}

/// Reference parser for a response body of the given media type.
pub fn reparse(media_type: &str, body: &str) -> Statements {
    let parsed = match media_type {
        "application/rdf+xml" => marcskos_oracles::parse_rdfxml(body),
        "text/n3" => marcskos_oracles::parse_turtle(body),
        "application/json" => marcskos_oracles::parse_rdf_json(body),
        "application/xhtml+xml" => marcskos_oracles::extract_rdfa(body),
        "application/n-triples" => marcskos_oracles::parse_ntriples(body),
        other => panic!("no reader for {other}"),
    };
    parsed.unwrap_or_else(|e| panic!("{media_type}: {e}\n{body}"))
}
