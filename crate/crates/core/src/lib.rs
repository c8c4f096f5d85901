//! Conversion of MARC21 authority records into SKOS concept schemes.

pub mod convert;
pub mod label;
pub mod marc;
pub mod rdf;
pub mod serialize;
pub mod store;
pub mod synthetic;
