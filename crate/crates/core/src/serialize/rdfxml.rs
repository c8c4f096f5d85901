//! RDF/XML: one `rdf:Description` per subject.

use std::collections::BTreeMap;

use super::{escape_xml, group, SerializeError};
use crate::rdf::{vocab, Term, Triple};

/// Namespaces outside the fixed prefix table get `ns1`, `ns2`, ... in sorted order.
pub(crate) fn extra_namespaces<'a>(
    predicates: impl IntoIterator<Item = &'a str>,
) -> Result<BTreeMap<String, String>, SerializeError> {
    let mut extra = BTreeMap::new();
    for p in predicates {
        if vocab::compact(p).is_some() {
            continue;
        }
        let (ns, _) = vocab::split_iri(p)
            .ok_or_else(|| SerializeError::UnqualifiablePredicate(p.to_owned()))?;
        extra.entry(ns.to_owned()).or_insert_with(String::new);
    }
    for (i, prefix) in extra.values_mut().enumerate() {
        *prefix = format!("ns{}", i + 1);
    }
    Ok(extra)
}

pub(crate) fn qname(iri: &str, extra: &BTreeMap<String, String>) -> String {
    if let Some((prefix, local)) = vocab::compact(iri) {
        return format!("{prefix}:{local}");
    }
    let (ns, local) = vocab::split_iri(iri).expect("checked by extra_namespaces");
    format!("{}:{local}", extra[ns])
}

pub(super) fn write(triples: &[Triple]) -> Result<String, SerializeError> {
    let extra = extra_namespaces(triples.iter().map(|t| t.predicate.as_str()))?;
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<rdf:RDF");
    for (prefix, ns) in vocab::PREFIXES {
        out.push_str(&format!("\n    xmlns:{prefix}=\"{ns}\""));
    }
    for (ns, prefix) in &extra {
        out.push_str(&format!("\n    xmlns:{prefix}=\""));
        escape_xml(ns, &mut out);
        out.push('"');
    }
    out.push_str(">\n");
    for (subject, preds) in group(triples) {
        out.push_str("  <rdf:Description rdf:about=\"");
        escape_xml(subject.as_str(), &mut out);
        out.push_str("\">\n");
        for (predicate, objects) in preds {
            let name = qname(predicate.as_str(), &extra);
            for object in objects {
                out.push_str("    <");
                out.push_str(&name);
                match object {
                    Term::Iri(iri) => {
                        out.push_str(" rdf:resource=\"");
                        escape_xml(iri.as_str(), &mut out);
                        out.push_str("\"/>\n");
                    }
                    Term::Literal(lit) => {
                        if let Some(lang) = lit.language() {
                            out.push_str(" xml:lang=\"");
                            out.push_str(lang);
                            out.push('"');
                        } else if let Some(dt) = lit.datatype() {
                            out.push_str(" rdf:datatype=\"");
                            escape_xml(dt.as_str(), &mut out);
                            out.push('"');
                        }
                        out.push('>');
                        escape_xml(lit.lexical(), &mut out);
                        out.push_str("</");
                        out.push_str(&name);
                        out.push_str(">\n");
                    }
                }
            }
        }
        out.push_str("  </rdf:Description>\n");
    }
    out.push_str("</rdf:RDF>\n");
    Ok(out)
}
