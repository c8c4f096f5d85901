//! RDF/JSON: `{ subject: { predicate: [ {type, value, lang?, datatype?} ] } }`.

use serde_json::{Map, Value};

use super::group;
use crate::rdf::{Term, Triple};

fn object_value(term: &Term) -> Value {
    let mut obj = Map::new();
    match term {
        Term::Iri(iri) => {
            obj.insert("type".into(), "uri".into());
            obj.insert("value".into(), iri.as_str().into());
        }
        Term::Literal(lit) => {
            obj.insert("type".into(), "literal".into());
            obj.insert("value".into(), lit.lexical().into());
            if let Some(lang) = lit.language() {
                obj.insert("lang".into(), lang.into());
            }
            if let Some(dt) = lit.datatype() {
                obj.insert("datatype".into(), dt.as_str().into());
            }
        }
    }
    Value::Object(obj)
}

pub(super) fn write(triples: &[Triple]) -> String {
    let mut root = Map::new();
    for (subject, preds) in group(triples) {
        let mut by_predicate = Map::new();
        for (predicate, objects) in preds {
            by_predicate.insert(
                predicate.as_str().to_owned(),
                Value::Array(objects.into_iter().map(object_value).collect()),
            );
        }
        root.insert(subject.as_str().to_owned(), Value::Object(by_predicate));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize");
    text.push('\n');
    text
}
