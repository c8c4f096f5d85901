//! `text/n3` output restricted to the Turtle-compatible subset: `@prefix`
//! directives, full IRIs for subjects, `;` and `,` grouping.

use super::group;
use super::ntriples::{escape_string, push_iri};
use crate::rdf::{vocab, Iri, Term, Triple};

fn push_name(iri: &Iri, out: &mut String) {
    if *iri == *vocab::RDF_TYPE {
        out.push('a');
        return;
    }
    match vocab::compact(iri.as_str()) {
        Some((prefix, local)) => {
            out.push_str(prefix);
            out.push(':');
            out.push_str(local);
        }
        None => push_iri(iri, out),
    }
}

fn push_object(term: &Term, out: &mut String) {
    match term {
        Term::Iri(iri) => match vocab::compact(iri.as_str()) {
            Some((prefix, local)) => {
                out.push_str(prefix);
                out.push(':');
                out.push_str(local);
            }
            None => push_iri(iri, out),
        },
        Term::Literal(lit) => {
            out.push('"');
            escape_string(lit.lexical(), out);
            out.push('"');
            if let Some(lang) = lit.language() {
                out.push('@');
                out.push_str(lang);
            } else if let Some(dt) = lit.datatype() {
                out.push_str("^^");
                push_iri(dt, out);
            }
        }
    }
}

pub(super) fn write(triples: &[Triple]) -> String {
    let mut out = String::new();
    for (prefix, ns) in vocab::PREFIXES {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }
    for (subject, preds) in group(triples) {
        out.push('\n');
        push_iri(subject, &mut out);
        for (i, (predicate, objects)) in preds.iter().enumerate() {
            out.push_str(if i == 0 { "\n    " } else { " ;\n    " });
            push_name(predicate, &mut out);
            for (j, object) in objects.iter().enumerate() {
                out.push_str(if j == 0 { " " } else { ",\n        " });
                push_object(object, &mut out);
            }
        }
        out.push_str(" .\n");
    }
    out
}
