use std::collections::{BTreeSet, HashSet};
use std::fs;

use proptest::prelude::*;

use marcskos::convert::{convert, map_record, Conversion, ConversionConfig, Converter, Execution, Lccn};
use marcskos::marc::{parse_marcxml, AuthorityRecord};
use marcskos::rdf::{vocab, Graph, Iri, Literal, Term, Triple};
use marcskos::serialize::{parse_ntriples_str, serialize, Representation};
use marcskos::synthetic::random_records;

fn config() -> ConversionConfig {
    ConversionConfig::new("http://lcsh.info/").unwrap()
}

fn run(records: &[AuthorityRecord]) -> Conversion {
    convert(records.iter().cloned().map(Ok), &config()).unwrap()
}

fn fixture_records() -> Vec<AuthorityRecord> {
    let xml = fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/authorities.xml")).unwrap();
    parse_marcxml(xml.as_slice()).map(Result::unwrap).collect()
}

fn pairs(graph: &Graph, predicate: &Iri) -> BTreeSet<(String, String)> {
    graph
        .iter()
        .filter(|t| &t.predicate == predicate)
        .map(|t| {
            let o = t.object.as_iri().expect("link objects are IRIs");
            (t.subject.as_str().to_owned(), o.as_str().to_owned())
        })
        .collect()
}

/// Broader and narrower links are exact mutual inverses.
fn check_inversion(graph: &Graph) -> Result<(), String> {
    let broader = pairs(graph, &vocab::SKOS_BROADER);
    let narrower_flipped: BTreeSet<_> = pairs(graph, &vocab::SKOS_NARROWER)
        .into_iter()
        .map(|(a, b)| (b, a))
        .collect();
    if broader == narrower_flipped {
        Ok(())
    } else {
        Err(format!(
            "{} broader vs {} narrower links differ",
            broader.len(),
            narrower_flipped.len()
        ))
    }
}

/// Every typed concept has one prefLabel; every link target is a typed concept.
fn check_labels_and_closure(graph: &Graph) -> Result<(), String> {
    let concept = Term::Iri(vocab::SKOS_CONCEPT.clone());
    let typed: HashSet<&str> = graph
        .iter()
        .filter(|t| t.predicate == *vocab::RDF_TYPE && t.object == concept)
        .map(|t| t.subject.as_str())
        .collect();
    let mut labels = std::collections::HashMap::new();
    for t in graph.iter().filter(|t| t.predicate == *vocab::SKOS_PREF_LABEL) {
        *labels.entry(t.subject.as_str()).or_insert(0) += 1;
    }
    for s in &typed {
        if labels.get(s) != Some(&1) {
            return Err(format!("{s} has {:?} prefLabels", labels.get(s)));
        }
    }
    for t in graph.iter() {
        let link = [&*vocab::SKOS_BROADER, &*vocab::SKOS_NARROWER, &*vocab::SKOS_RELATED];
        if link.contains(&&t.predicate) {
            let target = t.object.as_iri().ok_or("literal link target")?;
            if !typed.contains(target.as_str()) {
                return Err(format!("dangling link {} -> {target}", t.subject));
            }
        }
    }
    Ok(())
}

#[test]
fn fixture_graph_invariants() {
    let conversion = run(&fixture_records());
    check_inversion(&conversion.graph).unwrap();
    check_labels_and_closure(&conversion.graph).unwrap();
}

#[test]
fn ten_thousand_random_records() {
    let records = random_records(20_080_601, 10_000);
    let started = std::time::Instant::now();
    let conversion = run(&records);
    assert!(started.elapsed().as_secs() < 30);
    let graph = &conversion.graph;
    assert!(pairs(graph, &vocab::SKOS_BROADER).len() > 5_000, "corpus exercises linking");
    assert!(!conversion.report.unresolved_refs.is_empty());
    assert!(!conversion.report.skipped_records.is_empty());
    check_inversion(graph).unwrap();
    check_labels_and_closure(graph).unwrap();
    assert!(conversion.report.concepts_out <= conversion.report.records_in);
}

#[test]
fn conversion_is_deterministic_and_execution_independent() {
    let records = random_records(99, 3_000);
    let a = run(&records);
    let b = run(&records);
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.report, b.report);

    let mut sequential = Converter::new(config()).with_execution(Execution::Sequential);
    sequential.ingest("", records.iter().cloned().map(Ok)).unwrap();
    let sequential = sequential.finish();
    assert_eq!(sequential.graph, a.graph);
    assert_eq!(sequential.report, a.report);
}

#[test]
fn unresolved_refs_emit_nothing() {
    let conversion = run(&random_records(5, 2_000));
    for r in &conversion.report.unresolved_refs {
        let candidates = conversion.labels.lookup(&r.target_label);
        assert_ne!(candidates.len(), 1, "{r:?} was resolvable");
    }
}

/// Drops records whose control number repeats an earlier one.
fn without_duplicates(records: Vec<AuthorityRecord>) -> Vec<AuthorityRecord> {
    let mut seen = HashSet::new();
    records
        .into_iter()
        .filter(|r| match map_record(r, &config()) {
            Ok(m) => seen.insert(m.lccn),
            Err(_) => true,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_corpora_keep_invariants(seed in any::<u64>(), count in 1usize..300) {
        let conversion = run(&random_records(seed, count));
        prop_assert_eq!(check_inversion(&conversion.graph), Ok(()));
        prop_assert_eq!(check_labels_and_closure(&conversion.graph), Ok(()));
        prop_assert_eq!(conversion.report.triples_out, conversion.graph.len());
    }

    #[test]
    fn input_order_does_not_matter(seed in any::<u64>(), count in 1usize..200, shuffle in any::<u64>()) {
        let records = without_duplicates(random_records(seed, count));
        let mut permuted = records.clone();
        let n = permuted.len();
        // Fisher-Yates driven by a simple LCG, independent of the generator's RNG.
        let mut state = shuffle | 1;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            permuted.swap(i, j);
        }
        prop_assert_eq!(run(&records).graph, run(&permuted).graph);
    }

    #[test]
    fn lccn_normalization_is_canonical(prefix in "[a-z]{0,3}", digits in "[0-9]{8,10}", pad in " {0,3}") {
        let raw = format!("{pad}{}{pad}{}{pad}/rev", prefix.to_uppercase(), digits);
        let lccn = Lccn::normalize(&raw).unwrap();
        prop_assert_eq!(lccn.as_str(), format!("{prefix}{digits}"));
        prop_assert_eq!(Lccn::normalize(lccn.as_str()).unwrap(), lccn);
    }

    #[test]
    fn ntriples_round_trip(
        items in prop::collection::vec(
            ("[a-z]{1,6}", "[a-z]{1,4}", prop_oneof![
                "\\PC{0,20}".prop_map(|s| Term::Literal(Literal::plain(s))),
                "[ -~\n\r\t]{0,12}".prop_map(|s| Term::Literal(Literal::plain(s))),
                "[a-z]{1,8}".prop_map(|s| Term::Literal(Literal::with_language(s, "en-gb").unwrap())),
                "[a-z]{1,8}".prop_map(|s| Term::Iri(Iri::new(format!("http://x.org/{s}")).unwrap())),
            ]),
            0..40,
        )
    ) {
        let graph: Graph = items
            .into_iter()
            .map(|(s, p, o)| {
                Triple::new(
                    Iri::new(format!("http://x.org/{s}#c")).unwrap(),
                    Iri::new(format!("http://x.org/p/{p}")).unwrap(),
                    o,
                )
            })
            .collect();
        let text = String::from_utf8(serialize(&graph, Representation::NTriples).unwrap()).unwrap();
        let parsed: Graph = parse_ntriples_str(&text).unwrap().into_iter().collect();
        prop_assert_eq!(&parsed, &graph);
        let again = String::from_utf8(serialize(&parsed, Representation::NTriples).unwrap()).unwrap();
        prop_assert_eq!(again, text);
    }
}
