use std::collections::BTreeSet;
use std::fs;

use marcskos::convert::{convert, Conversion, ConversionConfig};
use marcskos::marc::parse_marcxml;
use marcskos::rdf::{vocab, Graph, Iri, Literal, Term, Triple};
use marcskos::serialize::parse_ntriples;
use marcskos::store::{IndexOrder, TripleStore};

fn fixture() -> Conversion {
    let xml = fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/authorities.xml")).unwrap();
    let config = ConversionConfig::new("http://lcsh.info/")
        .unwrap()
        .with_scheme(Iri::new("http://lcsh.info/lcsh").unwrap());
    convert(parse_marcxml(xml.as_slice()), &config).unwrap()
}

fn load(dir: &std::path::Path, graph: &Graph) -> TripleStore {
    let mut store = TripleStore::create(dir).unwrap();
    assert_eq!(store.bulk_insert(graph.iter().cloned()).unwrap(), graph.len());
    drop(store);
    TripleStore::open(dir).unwrap()
}

#[test]
fn all_bind_patterns_agree_with_the_graph() {
    let conversion = fixture();
    let graph = &conversion.graph;
    let dir = tempfile::tempdir().unwrap();
    let store = load(dir.path(), graph);

    let unknown_iri = Iri::new("http://example.org/unknown").unwrap();
    let mut subjects: BTreeSet<Iri> = graph.iter().map(|t| t.subject.clone()).collect();
    let mut predicates: BTreeSet<Iri> = graph.iter().map(|t| t.predicate.clone()).collect();
    let mut objects: BTreeSet<Term> = graph.iter().map(|t| t.object.clone()).collect();
    subjects.insert(unknown_iri.clone());
    predicates.insert(unknown_iri.clone());
    objects.insert(Term::Iri(unknown_iri));
    objects.insert(Term::Literal(Literal::plain("World Wide Web")));

    let mut checked = 0usize;
    for bound in 0u8..8 {
        let (bs, bp, bo) = (bound & 4 != 0, bound & 2 != 0, bound & 1 != 0);
        let ss: Vec<Option<&Iri>> = if bs { subjects.iter().map(Some).collect() } else { vec![None] };
        let ps: Vec<Option<&Iri>> = if bp { predicates.iter().map(Some).collect() } else { vec![None] };
        let os: Vec<Option<&Term>> = if bo { objects.iter().map(Some).collect() } else { vec![None] };
        for s in &ss {
            for p in &ps {
                for o in &os {
                    let o = *o;
                    let matches = store.match_pattern(*s, *p, o);
                    assert_eq!(matches.index_order(), IndexOrder::for_pattern(bs, bp, bo));
                    let want = graph.match_pattern(*s, *p, o);
                    assert_eq!(matches.len(), want.len());
                    let mut got: Vec<Triple> = matches.collect();
                    got.sort();
                    // Results follow the chosen index; compare as sets.
                    assert_eq!(got, want, "pattern {s:?} {p:?} {o:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1_000, "{checked}");
}

#[test]
fn store_level_inversion_and_lookups() {
    let conversion = fixture();
    let dir = tempfile::tempdir().unwrap();
    let store = load(dir.path(), &conversion.graph);
    let narrower = store.match_pattern(None, Some(&vocab::SKOS_NARROWER), None).len();
    let broader = store.match_pattern(None, Some(&vocab::SKOS_BROADER), None).len();
    assert_eq!(narrower, broader);
    assert!(broader > 0);

    let www = Iri::new("http://lcsh.info/sh85148236#concept").unwrap();
    assert_eq!(store.lookup_by_pref_label("World Wide Web"), std::slice::from_ref(&www));
    assert!(store.lookup_by_pref_label("world wide web").is_empty());
    assert!(store.lookup_by_pref_label("No Such Heading").is_empty());
    let description: Vec<Triple> = store.match_pattern(Some(&www), None, None).collect();
    assert_eq!(description, conversion.graph.match_pattern(Some(&www), None, None));
    for (_, concepts) in store.labels().iter() {
        for c in concepts {
            assert!(store.match_pattern(Some(c), None, None).len() > 0);
        }
    }
}

#[test]
fn dump_load_dump_is_a_fixed_point() {
    let conversion = fixture();
    let first_dir = tempfile::tempdir().unwrap();
    let store = load(first_dir.path(), &conversion.graph);
    let mut first = Vec::new();
    assert_eq!(store.dump(&mut first).unwrap(), conversion.graph.len());

    let parsed: Graph = parse_ntriples(first.as_slice()).map(Result::unwrap).collect();
    assert_eq!(parsed, conversion.graph);

    let second_dir = tempfile::tempdir().unwrap();
    let reloaded = load(second_dir.path(), &parsed);
    let mut second = Vec::new();
    reloaded.dump(&mut second).unwrap();
    assert_eq!(first, second);
    assert_eq!(reloaded.stats(), store.stats());
    assert_eq!(reloaded.checksum(), store.checksum());
}

#[test]
fn empty_store_dumps_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let store = TripleStore::create(dir.path()).unwrap();
    let mut out = Vec::new();
    assert_eq!(store.dump(&mut out).unwrap(), 0);
    assert!(out.is_empty());
    assert_eq!(store.match_pattern(None, None, None).len(), 0);
}
