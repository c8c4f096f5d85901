//! Request routing, independent of the HTTP transport.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use marcskos::convert::Lccn;
use marcskos::rdf::{vocab, Iri, Term};
use marcskos::serialize::{render_xhtml_rdfa, serialize, ConceptDescription, PageConfig, Representation};
use marcskos::store::{DumpReader, TripleStore};
use thiserror::Error;

use crate::negotiate::{negotiate, supported_types_text};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("the store does not record a base URI; pass one explicitly")]
    MissingBaseUri,
    #[error("invalid base URI {0:?}")]
    InvalidBaseUri(String),
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Overrides the base URI recorded in the store manifest.
    pub base_uri: Option<String>,
    /// Overrides the fragment recorded in the store manifest.
    pub fragment: Option<String>,
    pub site_name: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Request {
    pub method: String,
    /// Path and optional query string, as sent.
    pub target: String,
    pub headers: Vec<(String, String)>,
}

impl Request {
    pub fn new(method: &str, target: &str) -> Self {
        Request {
            method: method.to_owned(),
            target: target.to_owned(),
            headers: Vec::new(),
        }
    }

    pub fn with_header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.to_owned(), value.to_owned()));
        self
    }

    /// First header with this name, compared case-insensitively.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

pub enum Body {
    Empty,
    Bytes(Vec<u8>),
    Stream(Box<dyn Read + Send>),
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Body::Empty => f.write_str("Empty"),
            Body::Bytes(b) => write!(f, "Bytes({} bytes)", b.len()),
            Body::Stream(_) => f.write_str("Stream"),
        }
    }
}

#[derive(Debug)]
pub struct Response {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Body,
}

impl Response {
    fn new(status: u16) -> Self {
        Response {
            status,
            headers: Vec::new(),
            body: Body::Empty,
        }
    }

    fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_owned(), value.into()));
        self
    }

    fn text(status: u16, text: impl Into<String>) -> Self {
        Response::new(status)
            .header("Content-Type", "text/plain; charset=utf-8")
            .with_body(text.into().into_bytes())
    }

    fn with_body(mut self, bytes: Vec<u8>) -> Self {
        self.body = Body::Bytes(bytes);
        self
    }

    pub fn header_value(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// Reads the whole body; streams are drained.
    pub fn into_bytes(self) -> std::io::Result<Vec<u8>> {
        match self.body {
            Body::Empty => Ok(Vec::new()),
            Body::Bytes(b) => Ok(b),
            Body::Stream(mut r) => {
                let mut out = Vec::new();
                r.read_to_end(&mut out)?;
                Ok(out)
            }
        }
    }
}

/// Read-only linked-data view of a store.
pub struct Service {
    store: Arc<TripleStore>,
    base_uri: String,
    fragment: String,
    site_name: Option<String>,
}

impl fmt::Debug for Service {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Service")
            .field("base_uri", &self.base_uri)
            .field("fragment", &self.fragment)
            .finish()
    }
}

impl Service {
    pub fn new(store: Arc<TripleStore>, config: ServiceConfig) -> Result<Service, ServiceError> {
        let base_uri = config
            .base_uri
            .or_else(|| store.meta().base_uri.clone())
            .ok_or(ServiceError::MissingBaseUri)?;
        if !base_uri.ends_with('/') || Iri::new(&base_uri).is_err() {
            return Err(ServiceError::InvalidBaseUri(base_uri));
        }
        let fragment = config
            .fragment
            .or_else(|| store.meta().fragment.clone())
            .unwrap_or_else(|| "concept".to_owned());
        Ok(Service {
            store,
            base_uri,
            fragment,
            site_name: config.site_name,
        })
    }

    pub fn store(&self) -> &Arc<TripleStore> {
        &self.store
    }

    pub fn base_uri(&self) -> &str {
        &self.base_uri
    }

    /// The concept IRI served at `/{lccn}`.
    pub fn concept_iri(&self, lccn: &str) -> Option<Iri> {
        Iri::new(format!("{}{}#{}", self.base_uri, lccn, self.fragment)).ok()
    }

    pub fn handle(&self, request: &Request) -> Response {
        let head = match request.method.as_str() {
            "GET" => false,
            "HEAD" => true,
            _ => return Response::text(405, "Only GET and HEAD are supported.\n").header("Allow", "GET, HEAD"),
        };
        let mut response = self.route(request);
        if head {
            response.body = Body::Empty;
        }
        response
    }

    fn route(&self, request: &Request) -> Response {
        let (path, query) = match request.target.split_once('?') {
            Some((p, q)) => (p, q),
            None => (request.target.as_str(), ""),
        };
        match path {
            "/label" => self.label_lookup(query),
            "/data.nt" => self.full_dump(request),
            _ => {
                let Some(segment) = path.strip_prefix('/').filter(|s| !s.contains('/')) else {
                    return not_found();
                };
                let (lccn, forced) = match segment.rsplit_once('.') {
                    Some((stem, ext)) => match forced_representation(ext) {
                        Some(r) => (stem, Some(r)),
                        None => return not_found(),
                    },
                    None => (segment, None),
                };
                if !Lccn::is_valid(lccn) {
                    return not_found();
                }
                self.concept(request, lccn, forced)
            }
        }
    }

    fn label_lookup(&self, query: &str) -> Response {
        let label = form_urlencoded::parse(query.as_bytes())
            .find(|(k, _)| k == "q")
            .map(|(_, v)| v.into_owned())
            .unwrap_or_default();
        let uris: Vec<&str> = self
            .store
            .lookup_by_pref_label(&label)
            .iter()
            .map(Iri::as_str)
            .collect();
        let body = serde_json::to_vec(&uris).expect("strings serialize");
        Response::new(200)
            .header("Content-Type", "application/json")
            .with_body(body)
    }

    fn full_dump(&self, request: &Request) -> Response {
        let etag = format!("\"{}-dump\"", self.store.checksum());
        if matches_etag(request, &etag) {
            return Response::new(304).header("ETag", etag);
        }
        let mut response = Response::new(200)
            .header("Content-Type", Representation::NTriples.media_type())
            .header("ETag", etag);
        if request.method == "GET" {
            response.body = Body::Stream(Box::new(DumpReader::new(Arc::clone(&self.store))));
        }
        response
    }

    fn concept(&self, request: &Request, lccn: &str, forced: Option<Representation>) -> Response {
        let Some(concept) = self.concept_iri(lccn) else {
            return not_found();
        };
        let description =
            ConceptDescription::new(concept.clone(), &self.store.match_pattern(Some(&concept), None, None).collect::<Vec<_>>());
        if description.is_empty() {
            return not_found();
        }
        let (representation, negotiated) = match forced {
            Some(r) => (r, false),
            None => match negotiate(request.header("Accept")) {
                Ok(r) => (r, true),
                Err(_) => {
                    return Response::text(406, supported_types_text()).header("Vary", "Accept");
                }
            },
        };
        let etag = format!(
            "\"{}-{}-{}\"",
            &self.store.checksum()[..16.min(self.store.checksum().len())],
            lccn,
            representation.extension()
        );
        let mut response = if matches_etag(request, &etag) {
            Response::new(304)
        } else {
            let body = match representation {
                Representation::XhtmlRdfa => Ok(render_xhtml_rdfa(&description, &self.page_config(&description)).into_bytes()),
                other => serialize(&description, other),
            };
            match body {
                Ok(bytes) => Response::new(200)
                    .header("Content-Type", representation.media_type())
                    .with_body(bytes),
                Err(e) => return Response::text(500, format!("{e}\n")),
            }
        };
        response = response.header("ETag", etag);
        if negotiated {
            response = response.header("Vary", "Accept");
        }
        response
    }

    fn page_config(&self, description: &ConceptDescription) -> PageConfig {
        let mut link_labels = BTreeMap::new();
        for (_, object) in &description.properties {
            let Term::Iri(target) = object else { continue };
            if let Some(label) = self
                .store
                .match_pattern(Some(target), Some(&vocab::SKOS_PREF_LABEL), None)
                .find_map(|t| t.object.as_literal().map(|l| l.lexical().to_owned()))
            {
                link_labels.insert(target.clone(), label);
            }
        }
        PageConfig {
            site_name: self.site_name.clone(),
            link_labels,
        }
    }
}

fn forced_representation(ext: &str) -> Option<Representation> {
    match ext {
        "rdf" | "n3" | "json" | "html" => Representation::from_extension(ext),
        _ => None,
    }
}

fn not_found() -> Response {
    Response::text(404, "Not found.\n")
}

fn matches_etag(request: &Request, etag: &str) -> bool {
    request.header("If-None-Match").is_some_and(|v| {
        v.split(',')
            .map(str::trim)
            .any(|candidate| candidate == "*" || candidate == etag || candidate.strip_prefix("W/") == Some(etag))
    })
}
