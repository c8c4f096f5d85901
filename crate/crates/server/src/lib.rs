//! Linked-data HTTP service over a read-only triple store.
//!
//! Routes:
//!
//! | path | response |
//! |---|---|
//! | `/{lccn}` | concept description, representation chosen from `Accept` |
//! | `/{lccn}.rdf`, `.n3`, `.json`, `.html` | forced representation; the suffix beats `Accept` |
//! | `/label?q=text` | JSON array of concept URIs whose preferred label matches |
//! | `/data.nt` | every triple as sorted N-Triples, streamed |
//!
//! [`Service`] maps requests to responses without any I/O; [`Server`] puts it behind
//! HTTP/1.1 and writes one JSON object per request to the log.

mod http;
mod negotiate;
mod service;

pub use http::{RequestLog, RunningServer, Server, ServerError, ShutdownHandle};
pub use negotiate::{
    negotiate, parse_accept, supported_types_text, MediaRange, NotAcceptable, DEFAULT_REPRESENTATION,
    NEGOTIATION_TABLE,
};
pub use service::{Body, Request, Response, Service, ServiceConfig, ServiceError};
