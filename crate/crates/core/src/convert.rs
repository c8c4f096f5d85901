//! MARC authority records to SKOS.
//!
//! Pass 1 maps each record independently ([`map_record`]) into its concept triples and
//! the textual 5XX references it makes. Pass 2 resolves those references through the
//! preferred-label index, emitting `skos:broader` together with the inverse
//! `skos:narrower`, or `skos:related`. References that do not resolve to exactly one
//! concept are reported and emit nothing.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::label::{label_key, LabelIndex};
use crate::marc::{AuthorityRecord, DataField, MarcError};
use crate::rdf::{vocab, Graph, Iri, Literal, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("cannot normalize control number {0:?}")]
    Normalization(String),
    #[error("heading field {0} has no subfield $a")]
    EmptyHeading(String),
    #[error("malformed date {0:?}")]
    MalformedDate(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A normalized LCCN: optional lowercase alphabetic prefix of up to three letters
/// followed by 8 to 10 digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lccn(String);

impl Lccn {
    pub fn normalize(raw: &str) -> Result<Lccn, ConvertError> {
        let mut s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(slash) = s.find('/') {
            s.truncate(slash);
        }
        let s = s.to_ascii_lowercase();
        if Lccn::is_valid(&s) {
            Ok(Lccn(s))
        } else {
            Err(ConvertError::Normalization(raw.to_owned()))
        }
    }

    /// Whether `s` is already in normalized form.
    pub fn is_valid(s: &str) -> bool {
        let prefix = s.bytes().take_while(|b| b.is_ascii_lowercase()).count();
        let digits = &s[prefix..];
        prefix <= 3
            && (8..=10).contains(&digits.len())
            && digits.bytes().all(|b| b.is_ascii_digit())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Lccn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionConfig {
    base_uri: String,
    fragment: String,
    pub scheme_uri: Option<Iri>,
    pub subdivision_separator: String,
    pub century_pivot: u8,
    /// Also map chronological (148) and genre/form (155) headings and their 4XX/5XX partners.
    pub extended_tags: bool,
}

impl ConversionConfig {
    pub fn new(base_uri: &str) -> Result<Self, ConvertError> {
        if !base_uri.ends_with('/') {
            return Err(ConvertError::Config(format!(
                "base URI {base_uri:?} must end with '/'"
            )));
        }
        Iri::new(base_uri).map_err(|e| ConvertError::Config(e.to_string()))?;
        Ok(ConversionConfig {
            base_uri: base_uri.to_owned(),
            fragment: "concept".to_owned(),
            scheme_uri: None,
            subdivision_separator: "--".to_owned(),
            century_pivot: 50,
            extended_tags: false,
        })
    }

    pub fn with_fragment(mut self, fragment: &str) -> Result<Self, ConvertError> {
        if fragment.contains('#') || fragment.chars().any(char::is_whitespace) {
            return Err(ConvertError::Config(format!("invalid fragment {fragment:?}")));
        }
        self.fragment = fragment.to_owned();
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: Iri) -> Self {
        self.scheme_uri = Some(scheme);
        self
    }

    pub fn with_pivot(mut self, pivot: u8) -> Result<Self, ConvertError> {
        if pivot > 99 {
            return Err(ConvertError::Config(format!("century pivot {pivot} is not a 2-digit year")));
        }
        self.century_pivot = pivot;
        Ok(self)
    }

    pub fn with_extended_tags(mut self, on: bool) -> Self {
        self.extended_tags = on;
        self
    }

    pub fn base_uri(&self) -> &str {
        &self.base_uri
    }

    pub fn fragment(&self) -> &str {
        &self.fragment
    }

    fn heading_tags(&self) -> &'static [&'static str] {
        if self.extended_tags {
            &["148", "150", "151", "155"]
        } else {
            &["150", "151"]
        }
    }

    fn alt_tags(&self) -> &'static [&'static str] {
        if self.extended_tags {
            &["448", "450", "451", "455"]
        } else {
            &["450", "451"]
        }
    }

    fn see_also_tags(&self) -> &'static [&'static str] {
        if self.extended_tags {
            &["548", "550", "551", "555"]
        } else {
            &["550", "551"]
        }
    }
}

/// `{base_uri}{lccn}#{fragment}`.
pub fn mint_concept_uri(lccn: &Lccn, config: &ConversionConfig) -> Iri {
    Iri::new(format!("{}{}#{}", config.base_uri, lccn, config.fragment))
        .expect("base URI and LCCN are validated")
}

const HEADING_CODES: [char; 6] = ['a', 'b', 'v', 'x', 'y', 'z'];

/// Flattens a heading field: `$a`, then each `$b` after a space, then each `$v $x $y $z`
/// subdivision in document order after the subdivision separator.
pub fn build_label(field: &DataField, config: &ConversionConfig) -> Result<Literal, ConvertError> {
    let base = field
        .subfield('a')
        .filter(|a| !a.is_empty())
        .ok_or_else(|| ConvertError::EmptyHeading(field.tag.clone()))?;
    let mut label = base.to_owned();
    for (_, b) in field.subfield_values(&['b']) {
        label.push(' ');
        label.push_str(b);
    }
    for (_, sub) in field.subfield_values(&HEADING_CODES[2..]) {
        label.push_str(&config.subdivision_separator);
        label.push_str(sub);
    }
    Ok(Literal::plain(label))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Broader,
    Related,
}

/// A textual see-also reference awaiting pass-2 resolution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HeadingRef {
    pub source_concept: Iri,
    pub target_label: String,
    pub relation: Relation,
    pub source_tag: String,
}

/// Output of [`map_record`] for a record that yields a concept.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedRecord {
    pub lccn: Lccn,
    pub concept: Iri,
    pub pref_label: String,
    pub triples: Vec<Triple>,
    pub refs: Vec<HeadingRef>,
    /// Fields dropped because of local defects: (tag, reason).
    pub defects: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Skip {
    #[error("no authorized heading")]
    NoHeading,
    #[error("no control number in 010 or 001")]
    NoControlNumber,
    #[error(transparent)]
    Invalid(#[from] ConvertError),
    #[error("duplicate control number {0}")]
    DuplicateLccn(String),
}

fn join_subfields(field: &DataField, codes: &[char]) -> Option<String> {
    let parts = field.subfield_values(codes);
    if parts.is_empty() {
        return None;
    }
    Some(parts.iter().map(|(_, v)| *v).collect::<Vec<_>>().join(" "))
}

/// Note-like fields: tag, predicate, subfield codes joined with single spaces.
fn documentation_rules() -> [(&'static str, &'static Iri, &'static [char]); 8] {
    [
        ("667", &vocab::SKOS_NOTE, &['a']),
        ("670", &vocab::DCTERMS_SOURCE, &['a', 'b', 'u']),
        ("675", &vocab::SKOS_EDITORIAL_NOTE, &['a']),
        ("678", &vocab::SKOS_DEFINITION, &['a', 'b', 'u']),
        ("680", &vocab::SKOS_SCOPE_NOTE, &['a', 'i']),
        ("681", &vocab::SKOS_EXAMPLE, &['a', 'i']),
        ("682", &vocab::SKOS_CHANGE_NOTE, &['a', 'i']),
        ("688", &vocab::SKOS_HISTORY_NOTE, &['a']),
    ]
}

/// Control number from 010 `$a`, falling back to 001 when there is no 010.
fn control_number(record: &AuthorityRecord) -> Result<Lccn, Skip> {
    match record.fields("010").next() {
        Some(f010) => {
            let raw = f010.subfield('a').ok_or(Skip::NoControlNumber)?;
            Ok(Lccn::normalize(raw)?)
        }
        None => {
            let raw = record.control("001").ok_or(Skip::NoControlNumber)?;
            Ok(Lccn::normalize(raw)?)
        }
    }
}

/// Applies the field mapping to one record. Pure; safe to run in parallel.
pub fn map_record(record: &AuthorityRecord, config: &ConversionConfig) -> Result<MappedRecord, Skip> {
    let heading = record
        .data_fields
        .iter()
        .find(|df| config.heading_tags().contains(&df.tag.as_str()))
        .ok_or(Skip::NoHeading)?;
    let lccn = control_number(record)?;
    let pref = build_label(heading, config)?;
    let concept = mint_concept_uri(&lccn, config);

    let mut triples = Vec::new();
    let mut refs = Vec::new();
    let mut defects = Vec::new();
    let mut emit = |p: &Iri, o: crate::rdf::Term| triples.push(Triple::new(concept.clone(), p.clone(), o));

    emit(&vocab::RDF_TYPE, vocab::SKOS_CONCEPT.clone().into());
    if let Some(scheme) = &config.scheme_uri {
        emit(&vocab::SKOS_IN_SCHEME, scheme.clone().into());
    }
    let pref_label = pref.lexical().to_owned();
    emit(&vocab::SKOS_PREF_LABEL, pref.into());

    let documentation = documentation_rules();
    for field in &record.data_fields {
        let tag = field.tag.as_str();
        if config.alt_tags().contains(&tag) {
            match build_label(field, config) {
                Ok(alt) => emit(&vocab::SKOS_ALT_LABEL, alt.into()),
                Err(e) => defects.push((field.tag.clone(), e.to_string())),
            }
        } else if config.see_also_tags().contains(&tag) {
            let relation = match field.subfield('w').and_then(|w| w.chars().next()) {
                Some('g') => Some(Relation::Broader),
                Some('h') => None,
                _ => Some(Relation::Related),
            };
            let Some(relation) = relation else { continue };
            match build_label(field, config) {
                Ok(target) => refs.push(HeadingRef {
                    source_concept: concept.clone(),
                    target_label: label_key(target.lexical()),
                    relation,
                    source_tag: field.tag.clone(),
                }),
                Err(e) => defects.push((field.tag.clone(), e.to_string())),
            }
        } else if let Some((_, predicate, codes)) = documentation.iter().find(|(t, _, _)| *t == tag) {
            match join_subfields(field, codes) {
                Some(text) => emit(predicate, Literal::plain(text).into()),
                None => defects.push((field.tag.clone(), "no mapped subfields".to_owned())),
            }
        } else if tag == "053" {
            match field.subfield('a') {
                Some(class) => emit(&vocab::DCTERMS_LCC, Literal::plain(class).into()),
                None => defects.push((field.tag.clone(), "no subfield $a".to_owned())),
            }
        }
    }

    if let Some(f008) = record.control("008") {
        match map_created_date(f008, config.century_pivot) {
            Ok(date) => emit(&vocab::DCTERMS_CREATED, date.into()),
            Err(e) => defects.push(("008".to_owned(), e.to_string())),
        }
    }
    if let Some(f005) = record.control("005") {
        match map_modified_date(f005) {
            Ok(date) => emit(&vocab::DCTERMS_MODIFIED, date.into()),
            Err(e) => defects.push(("005".to_owned(), e.to_string())),
        }
    }

    Ok(MappedRecord {
        lccn,
        concept,
        pref_label,
        triples,
        refs,
        defects,
    })
}

fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400) => 29,
        2 => 28,
        _ => 0,
    }
}

fn digits(s: &str) -> Option<u32> {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

/// 008 positions 0-5 (`yymmdd`) as an `xsd:date`; `yy >= pivot` means 19yy, else 20yy.
pub fn map_created_date(field_008: &str, pivot: u8) -> Result<Literal, ConvertError> {
    let bad = || ConvertError::MalformedDate(field_008.to_owned());
    let head = field_008.get(..6).ok_or_else(bad)?;
    let yy = digits(&head[0..2]).ok_or_else(bad)?;
    let month = digits(&head[2..4]).ok_or_else(bad)?;
    let day = digits(&head[4..6]).ok_or_else(bad)?;
    let year = if yy >= u32::from(pivot) { 1900 + yy } else { 2000 + yy };
    if day == 0 || day > days_in_month(year, month) {
        return Err(bad());
    }
    Ok(Literal::typed(
        format!("{year:04}-{month:02}-{day:02}"),
        vocab::XSD_DATE.clone(),
    ))
}

/// 005 (`yyyymmddhhmmss.f`) as an `xsd:dateTime`; the fraction is dropped.
pub fn map_modified_date(field_005: &str) -> Result<Literal, ConvertError> {
    let bad = || ConvertError::MalformedDate(field_005.to_owned());
    let (main, fraction) = match field_005.split_once('.') {
        Some((main, frac)) => (main, Some(frac)),
        None => (field_005, None),
    };
    if main.len() != 14 || fraction.is_some_and(|f| digits(f).is_none()) {
        return Err(bad());
    }
    let part = |r: std::ops::Range<usize>| digits(&main[r]).ok_or_else(bad);
    let (year, month, day) = (part(0..4)?, part(4..6)?, part(6..8)?);
    let (hour, minute, second) = (part(8..10)?, part(10..12)?, part(12..14)?);
    if day == 0 || day > days_in_month(year, month) || hour > 23 || minute > 59 || second > 60 {
        return Err(bad());
    }
    Ok(Literal::typed(
        format!("{year:04}-{month:02}-{day:02}T{hour:02}:{minute:02}:{second:02}"),
        vocab::XSD_DATE_TIME.clone(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRecord {
    pub source: String,
    pub position: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldDefect {
    pub source: String,
    pub position: usize,
    pub tag: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConversionReport {
    pub records_in: usize,
    pub concepts_out: usize,
    pub triples_out: usize,
    /// References that matched no concept, or more than one.
    pub unresolved_refs: Vec<HeadingRef>,
    pub ambiguous_refs: usize,
    pub skipped_records: Vec<SkippedRecord>,
    pub field_defects: Vec<FieldDefect>,
}

impl fmt::Display for ConversionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records in:       {}", self.records_in)?;
        writeln!(f, "concepts out:     {}", self.concepts_out)?;
        writeln!(f, "triples out:      {}", self.triples_out)?;
        writeln!(
            f,
            "unresolved refs:  {} ({} ambiguous)",
            self.unresolved_refs.len(),
            self.ambiguous_refs
        )?;
        writeln!(f, "skipped records:  {}", self.skipped_records.len())?;
        write!(f, "field defects:    {}", self.field_defects.len())
    }
}

/// How pass 1 maps records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Maps records on the rayon pool; falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Records mapped per parallel batch; bounds pass-1 buffering.
const BATCH: usize = 2048;

/// Result of a finished conversion.
#[derive(Debug, Clone)]
pub struct Conversion {
    pub graph: Graph,
    pub labels: LabelIndex,
    pub report: ConversionReport,
}

/// Incremental two-pass converter: feed record sources with [`Converter::ingest`],
/// then resolve links with [`Converter::finish`].
pub struct Converter {
    config: ConversionConfig,
    execution: Execution,
    graph: Graph,
    labels: LabelIndex,
    minted: HashSet<Lccn>,
    refs: Vec<HeadingRef>,
    report: ConversionReport,
}

impl Converter {
    pub fn new(config: ConversionConfig) -> Self {
        Converter {
            config,
            execution: Execution::default(),
            graph: Graph::new(),
            labels: LabelIndex::new(),
            minted: HashSet::new(),
            refs: Vec::new(),
            report: ConversionReport::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn config(&self) -> &ConversionConfig {
        &self.config
    }

    /// Pass 1 over one source. Record-level parse errors are reported as skips; a fatal
    /// parse error stops ingestion and is returned (records before it are kept).
    pub fn ingest<I>(&mut self, source: &str, records: I) -> Result<(), MarcError>
    where
        I: IntoIterator<Item = Result<AuthorityRecord, MarcError>>,
    {
        let mut batch: Vec<(usize, AuthorityRecord)> = Vec::with_capacity(BATCH);
        let mut position = 0;
        for item in records {
            match item {
                Ok(record) => {
                    position += 1;
                    batch.push((position, record));
                    if batch.len() == BATCH {
                        self.map_batch(source, &mut batch);
                    }
                }
                Err(MarcError::Record(e)) => {
                    position += 1;
                    self.map_batch(source, &mut batch);
                    self.report.records_in += 1;
                    self.report.skipped_records.push(SkippedRecord {
                        source: source.to_owned(),
                        position: e.position,
                        reason: format!("line {}: {}", e.line, e.reason),
                    });
                }
                Err(fatal) => {
                    self.map_batch(source, &mut batch);
                    return Err(fatal);
                }
            }
        }
        self.map_batch(source, &mut batch);
        Ok(())
    }

    fn map_batch(&mut self, source: &str, batch: &mut Vec<(usize, AuthorityRecord)>) {
        if batch.is_empty() {
            return;
        }
        let config = &self.config;
        let mapped: Vec<(usize, Result<MappedRecord, Skip>)> = match self.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                batch
                    .par_iter()
                    .map(|(pos, rec)| (*pos, map_record(rec, config)))
                    .collect()
            }
            _ => batch
                .iter()
                .map(|(pos, rec)| (*pos, map_record(rec, config)))
                .collect(),
        };
        batch.clear();
        for (position, result) in mapped {
            self.integrate(source, position, result);
        }
    }

    fn integrate(&mut self, source: &str, position: usize, result: Result<MappedRecord, Skip>) {
        self.report.records_in += 1;
        let result = result.and_then(|m| {
            if self.minted.contains(&m.lccn) {
                Err(Skip::DuplicateLccn(m.lccn.to_string()))
            } else {
                Ok(m)
            }
        });
        match result {
            Ok(m) => {
                self.minted.insert(m.lccn);
                self.labels.insert(&m.pref_label, m.concept);
                self.graph.extend(m.triples);
                self.refs.extend(m.refs);
                self.report.concepts_out += 1;
                for (tag, reason) in m.defects {
                    self.report.field_defects.push(FieldDefect {
                        source: source.to_owned(),
                        position,
                        tag,
                        reason,
                    });
                }
            }
            Err(skip) => self.report.skipped_records.push(SkippedRecord {
                source: source.to_owned(),
                position,
                reason: skip.to_string(),
            }),
        }
    }

    /// Pass 2: resolve references and materialize inverse narrower links.
    pub fn finish(mut self) -> Conversion {
        for r in std::mem::take(&mut self.refs) {
            let targets = self.labels.lookup(&r.target_label);
            match targets {
                [target] => {
                    let target = target.clone();
                    match r.relation {
                        Relation::Broader => {
                            self.graph.insert(Triple::new(
                                r.source_concept.clone(),
                                vocab::SKOS_BROADER.clone(),
                                target.clone(),
                            ));
                            self.graph.insert(Triple::new(
                                target,
                                vocab::SKOS_NARROWER.clone(),
                                r.source_concept,
                            ));
                        }
                        Relation::Related => {
                            self.graph.insert(Triple::new(
                                r.source_concept,
                                vocab::SKOS_RELATED.clone(),
                                target,
                            ));
                        }
                    }
                }
                [] => self.report.unresolved_refs.push(r),
                _ => {
                    self.report.ambiguous_refs += 1;
                    self.report.unresolved_refs.push(r);
                }
            }
        }
        self.report.triples_out = self.graph.len();
        Conversion {
            graph: self.graph,
            labels: self.labels,
            report: self.report,
        }
    }
}

/// Converts a single record stream with default execution.
pub fn convert<I>(records: I, config: &ConversionConfig) -> Result<Conversion, MarcError>
where
    I: IntoIterator<Item = Result<AuthorityRecord, MarcError>>,
{
    let mut converter = Converter::new(config.clone());
    converter.ingest("", records)?;
    Ok(converter.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marc::ControlField;
    use crate::rdf::Term;

    fn config() -> ConversionConfig {
        ConversionConfig::new("http://lcsh.info/").unwrap()
    }

    fn record(control: &[(&str, &str)], fields: Vec<DataField>) -> AuthorityRecord {
        AuthorityRecord {
            leader: "00000nz  a2200000n  4500".into(),
            control_fields: control
                .iter()
                .map(|(t, v)| ControlField {
                    tag: (*t).into(),
                    value: (*v).into(),
                })
                .collect(),
            data_fields: fields,
            warnings: vec![],
        }
    }

    #[test]
    fn lccn_normalization() {
        assert_eq!(Lccn::normalize("sh 85148236 ").unwrap().as_str(), "sh85148236");
        assert_eq!(Lccn::normalize("n  79021164").unwrap().as_str(), "n79021164");
        assert_eq!(
            Lccn::normalize("sh2002000569/test").unwrap().as_str(),
            "sh2002000569"
        );
        assert_eq!(Lccn::normalize("SH85148236").unwrap().as_str(), "sh85148236");
        assert!(Lccn::normalize("x1").is_err());
        assert!(Lccn::normalize("abcd12345678").is_err());
        assert!(Lccn::normalize("sh1234567").is_err());
        assert!(Lccn::normalize("").is_err());
    }

    #[test]
    fn minting() {
        let lccn = Lccn::normalize("sh85148236").unwrap();
        let uri = mint_concept_uri(&lccn, &config());
        assert_eq!(uri.as_str(), "http://lcsh.info/sh85148236#concept");
        assert_eq!(mint_concept_uri(&lccn, &config()), uri);
        assert!(ConversionConfig::new("http://lcsh.info").is_err());
        assert!(config().with_fragment("a#b").is_err());
    }

    #[test]
    fn labels() {
        let c = config();
        let df = DataField::new("150", &[('a', "Drama"), ('y', "17th century")]);
        assert_eq!(build_label(&df, &c).unwrap().lexical(), "Drama--17th century");
        let df = DataField::new("150", &[('a', "World Wide Web")]);
        assert_eq!(build_label(&df, &c).unwrap().lexical(), "World Wide Web");
        let df = DataField::new("151", &[('a', "Cueva de La Griega (Spain)")]);
        let lit = build_label(&df, &c).unwrap();
        assert_eq!(lit.lexical(), "Cueva de La Griega (Spain)");
        assert_eq!(lit.language(), None);
        let df = DataField::new(
            "151",
            &[('a', "Paris (France)"), ('b', "Left Bank"), ('x', "History"), ('z', "Maps")],
        );
        assert_eq!(
            build_label(&df, &c).unwrap().lexical(),
            "Paris (France) Left Bank--History--Maps"
        );
        let df = DataField::new("150", &[('x', "History")]);
        assert_eq!(
            build_label(&df, &c),
            Err(ConvertError::EmptyHeading("150".into()))
        );
    }

    #[test]
    fn dates() {
        let d = map_created_date("860211n| acannaabn          |a aaa      ", 50).unwrap();
        assert_eq!(d.lexical(), "1986-02-11");
        assert_eq!(d.datatype(), Some(&*vocab::XSD_DATE));
        assert_eq!(map_created_date("020101", 50).unwrap().lexical(), "2002-01-01");
        assert_eq!(map_created_date("500101", 50).unwrap().lexical(), "1950-01-01");
        assert_eq!(map_created_date("490101", 50).unwrap().lexical(), "2049-01-01");
        assert!(map_created_date("86021", 50).is_err());
        assert!(map_created_date("86x211", 50).is_err());
        assert!(map_created_date("861311", 50).is_err());
        let m = map_modified_date("20080506093000.0").unwrap();
        assert_eq!(m.lexical(), "2008-05-06T09:30:00");
        assert_eq!(m.datatype(), Some(&*vocab::XSD_DATE_TIME));
        assert_eq!(
            map_modified_date("20080506093000").unwrap().lexical(),
            "2008-05-06T09:30:00"
        );
        assert!(map_modified_date("2008050609300.0").is_err());
        assert!(map_modified_date("20080506253000.0").is_err());
        assert!(map_modified_date("20080506093000.x").is_err());
    }

    #[test]
    fn map_record_world_wide_web() {
        let rec = record(
            &[],
            vec![
                DataField::new("010", &[('a', "sh 85148236 ")]),
                DataField::new("150", &[('a', "World Wide Web")]),
                DataField::new("550", &[('w', "g"), ('a', "Hypermedia")]),
                DataField::new("550", &[('a', "Internet")]),
                DataField::new("550", &[('w', "h"), ('a', "Something")]),
            ],
        );
        let m = map_record(&rec, &config()).unwrap();
        assert_eq!(m.concept.as_str(), "http://lcsh.info/sh85148236#concept");
        let prefs: Vec<_> = m
            .triples
            .iter()
            .filter(|t| t.predicate == *vocab::SKOS_PREF_LABEL)
            .collect();
        assert_eq!(prefs.len(), 1);
        assert_eq!(prefs[0].object, Term::Literal(Literal::plain("World Wide Web")));
        assert_eq!(m.refs.len(), 2);
        assert_eq!(m.refs[0].relation, Relation::Broader);
        assert_eq!(m.refs[0].target_label, "Hypermedia");
        assert_eq!(m.refs[1].relation, Relation::Related);
        assert_eq!(m.refs[1].target_label, "Internet");
        assert_eq!(m.triples.len(), 2);
    }

    #[test]
    fn control_number_sources() {
        let heading = || DataField::new("150", &[('a', "X")]);
        let rec = record(&[("001", "sh00000011")], vec![heading()]);
        assert_eq!(map_record(&rec, &config()).unwrap().lccn.as_str(), "sh00000011");
        let rec = record(
            &[("001", "sh00000011")],
            vec![DataField::new("010", &[('a', "sh00000022")]), heading()],
        );
        assert_eq!(map_record(&rec, &config()).unwrap().lccn.as_str(), "sh00000022");
        let rec = record(&[], vec![heading()]);
        assert_eq!(map_record(&rec, &config()), Err(Skip::NoControlNumber));
        let rec = record(&[("001", "bogus")], vec![heading()]);
        assert!(matches!(map_record(&rec, &config()), Err(Skip::Invalid(_))));
        let rec = record(&[("001", "sh00000011")], vec![]);
        assert_eq!(map_record(&rec, &config()), Err(Skip::NoHeading));
    }

    #[test]
    fn extended_tags_flag() {
        let rec = record(
            &[("001", "sh00000033")],
            vec![
                DataField::new("155", &[('a', "Detective and mystery films")]),
                DataField::new("455", &[('a', "Mystery films")]),
            ],
        );
        assert_eq!(map_record(&rec, &config()), Err(Skip::NoHeading));
        let m = map_record(&rec, &config().with_extended_tags(true)).unwrap();
        assert_eq!(m.pref_label, "Detective and mystery films");
        assert!(m.triples.iter().any(|t| t.predicate == *vocab::SKOS_ALT_LABEL));
    }

    #[test]
    fn two_pass_linking() {
        let a = record(
            &[("001", "sh00000001")],
            vec![DataField::new("150", &[('a', "B-heading")])],
        );
        let b = record(
            &[("001", "sh00000002")],
            vec![
                DataField::new("150", &[('a', "Child")]),
                DataField::new("550", &[('w', "g"), ('a', "B-heading.")]),
                DataField::new("550", &[('w', "g"), ('a', "Nonexistent")]),
            ],
        );
        let out = convert(vec![Ok(a), Ok(b)], &config()).unwrap();
        let ua = Iri::new("http://lcsh.info/sh00000001#concept").unwrap();
        let ub = Iri::new("http://lcsh.info/sh00000002#concept").unwrap();
        assert!(out
            .graph
            .contains(&Triple::new(ub.clone(), vocab::SKOS_BROADER.clone(), ua.clone())));
        assert!(out
            .graph
            .contains(&Triple::new(ua, vocab::SKOS_NARROWER.clone(), ub)));
        assert_eq!(
            out.graph
                .match_pattern(None, Some(&vocab::SKOS_BROADER), None)
                .len(),
            1
        );
        assert_eq!(out.report.unresolved_refs.len(), 1);
        assert_eq!(out.report.unresolved_refs[0].target_label, "Nonexistent");
        assert_eq!(out.report.triples_out, out.graph.len());
    }

    #[test]
    fn duplicate_lccn_first_wins() {
        let first = record(&[("001", "sh00000001")], vec![DataField::new("150", &[('a', "First")])]);
        let second = record(&[("001", "sh 00000001")], vec![DataField::new("150", &[('a', "Second")])]);
        let out = convert(vec![Ok(first), Ok(second)], &config()).unwrap();
        assert_eq!(out.report.records_in, 2);
        assert_eq!(out.report.concepts_out, 1);
        assert_eq!(out.report.skipped_records.len(), 1);
        assert_eq!(out.report.skipped_records[0].position, 2);
        assert_eq!(out.labels.lookup("First").len(), 1);
        assert!(out.labels.lookup("Second").is_empty());
    }

    #[test]
    fn ambiguous_reference_is_not_guessed() {
        let recs = vec![
            record(&[("001", "sh00000001")], vec![DataField::new("150", &[('a', "Same")])]),
            record(&[("001", "sh00000002")], vec![DataField::new("151", &[('a', "Same")])]),
            record(
                &[("001", "sh00000003")],
                vec![
                    DataField::new("150", &[('a', "Other")]),
                    DataField::new("550", &[('a', "Same")]),
                ],
            ),
        ];
        let out = convert(recs.into_iter().map(Ok), &config()).unwrap();
        assert_eq!(out.report.ambiguous_refs, 1);
        assert_eq!(out.report.unresolved_refs.len(), 1);
        assert!(out
            .graph
            .match_pattern(None, Some(&vocab::SKOS_RELATED), None)
            .is_empty());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let recs: Vec<_> = (0..5000)
            .map(|i| {
                record(
                    &[("001", &format!("sh{:08}", i))],
                    vec![
                        DataField::new("150", &[('a', &format!("Heading {i}"))]),
                        DataField::new("550", &[('w', "g"), ('a', &format!("Heading {}", i / 2))]),
                    ],
                )
            })
            .collect();
        let seq = {
            let mut c = Converter::new(config()).with_execution(Execution::Sequential);
            c.ingest("s", recs.iter().cloned().map(Ok)).unwrap();
            c.finish()
        };
        let par = {
            let mut c = Converter::new(config()).with_execution(Execution::Parallel);
            c.ingest("s", recs.iter().cloned().map(Ok)).unwrap();
            c.finish()
        };
        assert_eq!(seq.graph, par.graph);
        assert_eq!(seq.report, par.report);
    }
}
