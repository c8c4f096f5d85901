use std::fs;

use marcskos::convert::{convert, Conversion, ConversionConfig};
use marcskos::marc::parse_marcxml;
use marcskos::rdf::{vocab, Graph, Iri, Literal, Term, Triple};
use marcskos::serialize::{render_xhtml_rdfa, serialize, ConceptDescription, PageConfig, Representation};
use marcskos_oracles::{
    check_well_formed, extract_rdfa, parse_ntriples, parse_rdf_json, parse_rdfxml, parse_turtle, Object,
    Statement, Statements,
};

fn fixture_conversion(scheme: bool) -> Conversion {
    let xml = fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/authorities.xml")).unwrap();
    let mut config = ConversionConfig::new("http://lcsh.info/").unwrap();
    if scheme {
        config = config.with_scheme(Iri::new("http://lcsh.info/lcsh").unwrap());
    }
    convert(parse_marcxml(xml.as_slice()), &config).unwrap()
}

fn statement(t: &Triple) -> Statement {
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

fn expected(triples: impl IntoIterator<Item = Triple>) -> Statements {
    triples.into_iter().map(|t| statement(&t)).collect()
}

fn text(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).expect("serializer output is UTF-8")
}

type Reader = fn(&str) -> Result<Statements, String>;

const MACHINE_READERS: [(Representation, Reader); 4] = [
    (Representation::RdfXml, parse_rdfxml),
    (Representation::N3, parse_turtle),
    (Representation::Json, parse_rdf_json),
    (Representation::NTriples, parse_ntriples),
];

fn check_description(description: &ConceptDescription) {
    let want = expected(description.triples());
    for (kind, read) in MACHINE_READERS {
        let body = text(serialize(description, kind).unwrap());
        if kind == Representation::RdfXml {
            check_well_formed(&body).unwrap();
        }
        let got = read(&body).unwrap_or_else(|e| panic!("{kind} for {}: {e}\n{body}", description.concept));
        assert_eq!(got, want, "{kind} for {}", description.concept);
    }
    let page = text(serialize(description, Representation::XhtmlRdfa).unwrap());
    check_well_formed(&page).unwrap();
    let got = extract_rdfa(&page).unwrap_or_else(|e| panic!("RDFa for {}: {e}\n{page}", description.concept));
    assert_eq!(got, want, "RDFa for {}", description.concept);
}

#[test]
fn every_fixture_concept_agrees_across_formats() {
    for scheme in [false, true] {
        let conversion = fixture_conversion(scheme);
        let subjects = conversion.graph.subjects();
        assert_eq!(subjects.len(), 11);
        for concept in subjects {
            check_description(&ConceptDescription::from_graph(concept, &conversion.graph));
        }
    }
}

#[test]
fn whole_graph_outputs_reparse() {
    let conversion = fixture_conversion(true);
    let want = expected(conversion.graph.iter().cloned());
    for (kind, read) in MACHINE_READERS {
        let body = text(serialize(&conversion.graph, kind).unwrap());
        assert_eq!(read(&body).unwrap(), want, "{kind}");
    }
}

#[test]
fn serialization_is_deterministic() {
    let a = fixture_conversion(false);
    let b = fixture_conversion(false);
    for kind in [Representation::RdfXml, Representation::N3, Representation::Json, Representation::NTriples] {
        assert_eq!(serialize(&a.graph, kind).unwrap(), serialize(&b.graph, kind).unwrap());
    }
}

#[test]
fn minimal_page_has_two_statements() {
    let concept = Iri::new("http://lcsh.info/sh00000001#concept").unwrap();
    let graph: Graph = [
        Triple::new(concept.clone(), vocab::RDF_TYPE.clone(), vocab::SKOS_CONCEPT.clone()),
        Triple::new(
            concept.clone(),
            vocab::SKOS_PREF_LABEL.clone(),
            Literal::with_language("Fish <& chips>", "en").unwrap(),
        ),
    ]
    .into_iter()
    .collect();
    let page = render_xhtml_rdfa(&ConceptDescription::from_graph(concept, &graph), &PageConfig::default());
    let got = extract_rdfa(&page).unwrap();
    assert_eq!(got.len(), 2);
    assert_eq!(got, expected(graph.iter().cloned()));
    assert!(page.contains("<title>Fish &lt;&amp; chips&gt;</title>"));
}

#[test]
fn broader_links_are_clickable() {
    let conversion = fixture_conversion(false);
    let www = Iri::new("http://lcsh.info/sh85148236#concept").unwrap();
    let page = render_xhtml_rdfa(&ConceptDescription::from_graph(www, &conversion.graph), &PageConfig::default());
    assert!(page.contains(r#"rel="skos:broader" href="http://lcsh.info/sh93000202#concept""#), "{page}");
    assert!(page.contains("<title>World Wide Web</title>"));
    let alt = page.find("Alternate labels").unwrap();
    let links = page.find("Semantic relations").unwrap();
    let notes = page.find("Notes").unwrap();
    assert!(alt < links && links < notes);
}
