//! XHTML+RDFa page for one concept.
//!
//! The concept's container carries `about` and `typeof`; literal values are elements
//! with `property` (plus `xml:lang` or `datatype` when needed) and IRI values are
//! `<a rel href>` links pointing at the target concept, so a browser follows them to
//! the target's document. Sections appear in the order: preferred label, alternate
//! labels, semantic links, notes, other properties.

use std::collections::BTreeMap;

use super::rdfxml::{extra_namespaces, qname};
use super::{escape_xml, ConceptDescription};
use crate::rdf::{vocab, Iri, Term};

#[derive(Debug, Clone, Default)]
pub struct PageConfig {
    /// Appended to the `<title>` after the preferred label.
    pub site_name: Option<String>,
    /// Display text for linked concepts, usually their preferred labels.
    pub link_labels: BTreeMap<Iri, String>,
}

const SECTIONS: [(&str, &[&str]); 3] = [
    ("Alternate labels", &["altLabel"]),
    ("Semantic relations", &["broader", "narrower", "related"]),
    (
        "Notes",
        &[
            "note",
            "editorialNote",
            "definition",
            "scopeNote",
            "example",
            "changeNote",
            "historyNote",
        ],
    ),
];

fn section_headings(local: &str) -> &'static str {
    match local {
        "altLabel" => "Alternate label",
        "broader" => "Broader",
        "narrower" => "Narrower",
        "related" => "Related",
        "note" => "Note",
        "editorialNote" => "Editorial note",
        "definition" => "Definition",
        "scopeNote" => "Scope note",
        "example" => "Example",
        "changeNote" => "Change note",
        "historyNote" => "History note",
        _ => "",
    }
}

struct Page<'a> {
    out: String,
    extra: BTreeMap<String, String>,
    config: &'a PageConfig,
}

impl Page<'_> {
    fn push_text(&mut self, s: &str) {
        escape_xml(s, &mut self.out);
    }

    fn curie(&self, iri: &Iri) -> String {
        qname(iri.as_str(), &self.extra)
    }

    fn value(&mut self, tag: &str, predicate: &Iri, object: &Term) {
        let curie = self.curie(predicate);
        match object {
            Term::Literal(lit) => {
                self.out.push_str(&format!("<{tag} property=\"{curie}\""));
                if let Some(lang) = lit.language() {
                    self.out.push_str(&format!(" xml:lang=\"{lang}\""));
                } else if let Some(dt) = lit.datatype() {
                    let dt_curie = if dt.as_str().starts_with(vocab::XSD_NS) {
                        format!("xsd:{}", &dt.as_str()[vocab::XSD_NS.len()..])
                    } else {
                        self.curie(dt)
                    };
                    self.out.push_str(&format!(" datatype=\"{dt_curie}\""));
                }
                self.out.push('>');
                self.push_text(lit.lexical());
                self.out.push_str(&format!("</{tag}>"));
            }
            Term::Iri(iri) => {
                self.out.push_str(&format!("<{tag}><a rel=\"{curie}\" href=\""));
                self.push_text(iri.as_str());
                self.out.push_str("\">");
                let label = self
                    .config
                    .link_labels
                    .get(iri)
                    .cloned()
                    .unwrap_or_else(|| iri.as_str().to_owned());
                self.push_text(&label);
                self.out.push_str(&format!("</a></{tag}>"));
            }
        }
    }
}

pub fn render_xhtml_rdfa(description: &ConceptDescription, config: &PageConfig) -> String {
    let predicates = description
        .properties
        .iter()
        .map(|(p, _)| p.as_str())
        .chain(description.properties.iter().filter_map(|(_, o)| {
            o.as_literal()
                .and_then(|l| l.datatype())
                .filter(|dt| !dt.as_str().starts_with(vocab::XSD_NS))
                .map(|dt| dt.as_str())
        }))
        .filter(|p| vocab::split_iri(p).is_some());
    let extra = extra_namespaces(predicates).unwrap_or_default();
    let renderable = |p: &Iri| vocab::split_iri(p.as_str()).is_some();

    let is_concept_type = |p: &Iri, o: &Term| {
        *p == *vocab::RDF_TYPE && o.as_iri() == Some(&*vocab::SKOS_CONCEPT)
    };
    let typed = description
        .properties
        .iter()
        .any(|(p, o)| is_concept_type(p, o));
    let pref = description
        .objects(&vocab::SKOS_PREF_LABEL)
        .find_map(|o| o.as_literal())
        .cloned();
    let title = pref
        .as_ref()
        .map(|l| l.lexical().to_owned())
        .unwrap_or_else(|| description.concept.as_str().to_owned());

    let mut page = Page {
        out: String::with_capacity(4096),
        extra,
        config,
    };
    page.out.push_str(concat!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
        "<!DOCTYPE html PUBLIC \"-//W3C//DTD XHTML+RDFa 1.0//EN\" ",
        "\"http://www.w3.org/MarkUp/DTD/xhtml-rdfa-1.dtd\">\n",
        "<html xmlns=\"http://www.w3.org/1999/xhtml\" version=\"XHTML+RDFa 1.0\""
    ));
    for (prefix, ns) in vocab::PREFIXES {
        page.out.push_str(&format!("\n      xmlns:{prefix}=\"{ns}\""));
    }
    page.out.push_str(&format!("\n      xmlns:xsd=\"{}\"", vocab::XSD_NS));
    for (ns, prefix) in page.extra.clone() {
        page.out.push_str(&format!("\n      xmlns:{prefix}=\""));
        page.push_text(&ns);
        page.out.push('"');
    }
    page.out.push_str(">\n<head>\n<title>");
    page.push_text(&title);
    if let Some(site) = &config.site_name {
        page.out.push_str(" | ");
        page.push_text(site);
    }
    page.out.push_str("</title>\n</head>\n<body>\n<div id=\"");
    page.push_text(description.concept.fragment().unwrap_or("concept"));
    page.out.push_str("\" about=\"");
    page.push_text(description.concept.as_str());
    page.out.push('"');
    if typed {
        page.out.push_str(" typeof=\"skos:Concept\"");
    }
    page.out.push_str(">\n");

    let mut used = vec![false; description.properties.len()];
    if let Some(pref) = &pref {
        let i = description
            .properties
            .iter()
            .position(|(p, o)| *p == *vocab::SKOS_PREF_LABEL && o.as_literal() == Some(pref))
            .expect("preferred label is a property");
        used[i] = true;
        page.value("h1", &vocab::SKOS_PREF_LABEL, &Term::Literal(pref.clone()));
        page.out.push('\n');
    } else {
        page.out.push_str("<h1>");
        page.push_text(&title);
        page.out.push_str("</h1>\n");
    }
    for (i, (p, o)) in description.properties.iter().enumerate() {
        if is_concept_type(p, o) || !renderable(p) {
            used[i] = true;
        }
    }

    for (heading, locals) in SECTIONS {
        let mut rows = Vec::new();
        for local in locals {
            let predicate = format!("{}{local}", vocab::SKOS_NS);
            for (i, (p, _)) in description.properties.iter().enumerate() {
                if !used[i] && p.as_str() == predicate {
                    rows.push(i);
                }
            }
        }
        if rows.is_empty() {
            continue;
        }
        page.out.push_str("<h2>");
        page.push_text(heading);
        page.out.push_str("</h2>\n<dl>\n");
        for i in rows {
            used[i] = true;
            let (p, o) = &description.properties[i];
            let local = vocab::split_iri(p.as_str()).map(|(_, l)| l).unwrap_or("");
            page.out.push_str("<dt>");
            page.push_text(section_headings(local));
            page.out.push_str("</dt>");
            page.value("dd", p, o);
            page.out.push('\n');
        }
        page.out.push_str("</dl>\n");
    }

    let rest: Vec<usize> = (0..used.len()).filter(|&i| !used[i]).collect();
    if !rest.is_empty() {
        page.out.push_str("<h2>Other properties</h2>\n<dl>\n");
        for i in rest {
            let (p, o) = &description.properties[i];
            let curie = page.curie(p);
            page.out.push_str("<dt>");
            page.push_text(&curie);
            page.out.push_str("</dt>");
            page.value("dd", p, o);
            page.out.push('\n');
        }
        page.out.push_str("</dl>\n");
    }
    page.out.push_str("</div>\n</body>\n</html>\n");
    page.out
}
