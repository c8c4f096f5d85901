//! MARC21 authority records read from MARCXML (the MARC21 slim schema).
//!
//! [`MarcXmlReader`] streams records one at a time out of any [`BufRead`]; memory use is
//! bounded by the largest single record. A structural defect inside a record yields a
//! [`RecordError`] and parsing resumes at the next record. XML syntax errors are fatal.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, BufRead, Read, Write};

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;
use thiserror::Error;

pub const MARC_SLIM_NS: &str = "http://www.loc.gov/MARC21/slim";
pub const LEADER_LEN: usize = 24;

/// Tags of authorized-heading fields an authority record may carry at most once.
pub const AUTHORIZED_HEADING_TAGS: [&str; 4] = ["148", "150", "151", "155"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subfield {
    pub code: char,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataField {
    pub tag: String,
    pub indicator1: char,
    pub indicator2: char,
    pub subfields: Vec<Subfield>,
}

impl DataField {
    pub fn new(tag: impl Into<String>, subfields: &[(char, &str)]) -> Self {
        DataField {
            tag: tag.into(),
            indicator1: ' ',
            indicator2: ' ',
            subfields: subfields
                .iter()
                .map(|&(code, value)| Subfield {
                    code,
                    value: value.to_owned(),
                })
                .collect(),
        }
    }

    /// Subfields whose code is in `codes`, in document order.
    pub fn subfield_values<'a>(&'a self, codes: &[char]) -> Vec<(char, &'a str)> {
        self.subfields
            .iter()
            .filter(|sf| codes.contains(&sf.code))
            .map(|sf| (sf.code, sf.value.as_str()))
            .collect()
    }

    /// Value of the first subfield with this code.
    pub fn subfield(&self, code: char) -> Option<&str> {
        self.subfields
            .iter()
            .find(|sf| sf.code == code)
            .map(|sf| sf.value.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlField {
    pub tag: String,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field<'a> {
    Control(&'a ControlField),
    Data(&'a DataField),
}

impl<'a> Field<'a> {
    pub fn tag(&self) -> &'a str {
        match self {
            Field::Control(cf) => &cf.tag,
            Field::Data(df) => &df.tag,
        }
    }

    pub fn as_data(&self) -> Option<&'a DataField> {
        match self {
            Field::Data(df) => Some(df),
            Field::Control(_) => None,
        }
    }

    pub fn as_control(&self) -> Option<&'a ControlField> {
        match self {
            Field::Control(cf) => Some(cf),
            Field::Data(_) => None,
        }
    }
}

/// One authority record. Equality ignores parse warnings.
#[derive(Debug, Clone, Default)]
pub struct AuthorityRecord {
    pub leader: String,
    pub control_fields: Vec<ControlField>,
    pub data_fields: Vec<DataField>,
    pub warnings: Vec<String>,
}

impl PartialEq for AuthorityRecord {
    fn eq(&self, other: &Self) -> bool {
        self.leader == other.leader
            && self.control_fields == other.control_fields
            && self.data_fields == other.data_fields
    }
}

impl Eq for AuthorityRecord {}

impl AuthorityRecord {
    /// First field with `tag`, control fields being checked for tags below `010`.
    pub fn first_field(&self, tag: &str) -> Option<Field<'_>> {
        if is_control_tag(tag) {
            self.control_fields
                .iter()
                .find(|cf| cf.tag == tag)
                .map(Field::Control)
        } else {
            self.data_fields
                .iter()
                .find(|df| df.tag == tag)
                .map(Field::Data)
        }
    }

    pub fn control(&self, tag: &str) -> Option<&str> {
        self.control_fields
            .iter()
            .find(|cf| cf.tag == tag)
            .map(|cf| cf.value.as_str())
    }

    pub fn fields<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a DataField> + 'a {
        self.data_fields.iter().filter(move |df| df.tag == tag)
    }

    /// Checks the per-record invariants on tags and field multiplicity.
    pub fn validate(&self) -> Result<(), String> {
        for cf in &self.control_fields {
            if !is_numeric_tag(&cf.tag) || !is_control_tag(&cf.tag) {
                return Err(format!("invalid control field tag {:?}", cf.tag));
            }
        }
        for df in &self.data_fields {
            if !is_numeric_tag(&df.tag) || is_control_tag(&df.tag) {
                return Err(format!("invalid data field tag {:?}", df.tag));
            }
        }
        if self.fields("010").count() > 1 {
            return Err("more than one 010 field".into());
        }
        let headings = self
            .data_fields
            .iter()
            .filter(|df| AUTHORIZED_HEADING_TAGS.contains(&df.tag.as_str()))
            .count();
        if headings > 1 {
            return Err(format!("{headings} authorized heading fields"));
        }
        Ok(())
    }
}

fn is_numeric_tag(tag: &str) -> bool {
    tag.len() == 3 && tag.bytes().all(|b| b.is_ascii_digit())
}

fn is_control_tag(tag: &str) -> bool {
    tag < "010"
}

/// Strips leading/trailing whitespace and collapses internal runs to one space.
pub fn collapse_whitespace(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for word in value.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// A defect confined to one `record` element.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("record {position} (line {line}): {reason}")]
pub struct RecordError {
    /// 1-based ordinal of the `record` element in the document.
    pub position: usize,
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum MarcError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("XML syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: u64,
        column: u64,
        message: String,
    },
    #[error("not a MARCXML document: {0}")]
    NotMarcXml(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl MarcError {
    /// Fatal errors end the record sequence.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, MarcError::Record(_))
    }
}

/// Counts newlines in consumed bytes so byte offsets can be mapped to line/column.
struct LineTracker<R> {
    inner: R,
    consumed: u64,
    newlines: u64,
    recent: VecDeque<u64>,
}

const RECENT_NEWLINES: usize = 256;

impl<R: BufRead> LineTracker<R> {
    fn new(inner: R) -> Self {
        LineTracker {
            inner,
            consumed: 0,
            newlines: 0,
            recent: VecDeque::with_capacity(RECENT_NEWLINES),
        }
    }

    /// 1-based (line, column) of a byte offset at or before the consumed position.
    fn locate(&self, offset: u64) -> (u64, u64) {
        let after = self.recent.iter().rev().take_while(|&&nl| nl >= offset).count() as u64;
        let line = self.newlines - after + 1;
        let line_start = self
            .recent
            .iter()
            .rev()
            .find(|&&nl| nl < offset)
            .map(|nl| nl + 1)
            .unwrap_or(0);
        (line, offset.saturating_sub(line_start) + 1)
    }
}

impl<R: BufRead> Read for LineTracker<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = {
            let available = self.fill_buf()?;
            let n = available.len().min(buf.len());
            buf[..n].copy_from_slice(&available[..n]);
            n
        };
        self.consume(n);
        Ok(n)
    }
}

impl<R: BufRead> BufRead for LineTracker<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        if let Ok(buf) = self.inner.fill_buf() {
            for (i, &b) in buf[..amt.min(buf.len())].iter().enumerate() {
                if b == b'\n' {
                    self.newlines += 1;
                    if self.recent.len() == RECENT_NEWLINES {
                        self.recent.pop_front();
                    }
                    self.recent.push_back(self.consumed + i as u64);
                }
            }
        }
        self.consumed += amt as u64;
        self.inner.consume(amt);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Elem {
    Collection,
    Record,
    Leader,
    ControlField,
    DataField,
    Subfield,
    Other,
}

/// Record under construction, plus the first defect found in it.
struct Pending {
    position: usize,
    line: u64,
    record: AuthorityRecord,
    text: String,
    subfield_code: Option<char>,
    error: Option<String>,
    /// Element nesting depth inside the record; 0 means directly in `record`.
    depth: usize,
}

impl Pending {
    fn fail(&mut self, reason: impl Into<String>) {
        if self.error.is_none() {
            self.error = Some(reason.into());
        }
    }
}

/// Streaming MARCXML reader yielding one item per `record` element.
pub struct MarcXmlReader<R: BufRead> {
    reader: NsReader<LineTracker<R>>,
    buf: Vec<u8>,
    stack: Vec<Elem>,
    pending: Option<Pending>,
    records_seen: usize,
    done: bool,
}

/// Parses MARCXML from a buffered byte stream.
pub fn parse_marcxml<R: BufRead>(input: R) -> MarcXmlReader<R> {
    MarcXmlReader::new(input)
}

impl<R: BufRead> MarcXmlReader<R> {
    pub fn new(input: R) -> Self {
        let mut reader = NsReader::from_reader(LineTracker::new(input));
        reader.config_mut().expand_empty_elements = true;
        MarcXmlReader {
            reader,
            buf: Vec::with_capacity(1024),
            stack: Vec::new(),
            pending: None,
            records_seen: 0,
            done: false,
        }
    }

    fn locate(&self, offset: u64) -> (u64, u64) {
        self.reader.get_ref().locate(offset)
    }

    fn fatal_syntax(&mut self, err: quick_xml::Error) -> MarcError {
        self.done = true;
        let (line, column) = self.locate(self.reader.error_position());
        MarcError::Syntax {
            line,
            column,
            message: err.to_string(),
        }
    }

    /// The element kind by local name, plus the namespace when it is not the MARC one.
    fn classify(ns: &ResolveResult<'_>, local: &str) -> (Elem, Option<String>) {
        let foreign = match ns {
            ResolveResult::Bound(ns) if ns.as_ref() == MARC_SLIM_NS => None,
            ResolveResult::Unbound => None,
            ResolveResult::Bound(ns) => Some(ns.as_ref().to_owned()),
            ResolveResult::Unknown(prefix) => Some(format!("{prefix}:")),
        };
        let elem = match local {
            "collection" => Elem::Collection,
            "record" => Elem::Record,
            "leader" => Elem::Leader,
            "controlfield" => Elem::ControlField,
            "datafield" => Elem::DataField,
            "subfield" => Elem::Subfield,
            _ => Elem::Other,
        };
        (elem, foreign)
    }

    fn next_item(&mut self) -> Option<Result<AuthorityRecord, MarcError>> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            let start_offset = self.reader.buffer_position();
            let (ns, event) = match self.reader.read_resolved_event_into(&mut self.buf) {
                Ok(ev) => ev,
                Err(err) => return Some(Err(self.fatal_syntax(err))),
            };
            match event {
                Event::Start(start) => {
                    let local = start.local_name().as_ref().to_owned();
                    let classified = Self::classify(&ns, &local);
                    let start = start.into_owned();
                    if let Some(item) = self.on_start(classified, &start, start_offset) {
                        return Some(item);
                    }
                }
                Event::End(_) => {
                    if let Some(item) = self.on_end() {
                        return Some(item);
                    }
                }
                Event::Text(text) => {
                    let content = text.xml10_content().into_owned();
                    self.on_text(&content);
                }
                Event::CData(cdata) => {
                    let content = cdata.xml10_content().into_owned();
                    self.on_text(&content);
                }
                Event::GeneralRef(r) => {
                    let resolved = match r.resolve_char_ref() {
                        Ok(Some(c)) => Some(c.to_string()),
                        Ok(None) => resolve_predefined_entity(&r).map(str::to_owned),
                        Err(_) => None,
                    };
                    match resolved {
                        Some(s) => self.on_text(&s),
                        None => {
                            let name = r.xml10_content().into_owned();
                            match self.pending.as_mut() {
                                Some(p) => p.fail(format!("unknown entity &{name};")),
                                None => {
                                    self.done = true;
                                    let (line, column) = self.locate(start_offset);
                                    return Some(Err(MarcError::Syntax {
                                        line,
                                        column,
                                        message: format!("unknown entity &{name};"),
                                    }));
                                }
                            }
                        }
                    }
                }
                Event::Eof => {
                    self.done = true;
                    if self.pending.is_some() || !self.stack.is_empty() {
                        let (line, column) = self.locate(self.reader.buffer_position());
                        return Some(Err(MarcError::Syntax {
                            line,
                            column,
                            message: "unexpected end of document".into(),
                        }));
                    }
                    return None;
                }
                Event::Empty(_)
                | Event::Comment(_)
                | Event::Decl(_)
                | Event::PI(_)
                | Event::DocType(_) => {}
            }
        }
    }

    fn on_start(
        &mut self,
        (elem, foreign): (Elem, Option<String>),
        start: &BytesStart<'_>,
        offset: u64,
    ) -> Option<Result<AuthorityRecord, MarcError>> {
        if let Some(p) = self.pending.as_mut() {
            p.depth += 1;
            let parent = *self.stack.last().unwrap_or(&Elem::Other);
            let elem = match foreign {
                None => elem,
                Some(ns) => {
                    p.fail(format!("element in foreign namespace {ns}"));
                    Elem::Other
                }
            };
            self.stack.push(elem);
            if p.error.is_some() {
                return None;
            }
            match (parent, elem) {
                (Elem::Record, Elem::Leader) | (Elem::Record, Elem::ControlField) => {
                    p.text.clear();
                    if elem == Elem::ControlField {
                        match attr(start, "tag") {
                            Some(tag) if is_numeric_tag(&tag) && is_control_tag(&tag) => {
                                p.record.control_fields.push(ControlField {
                                    tag,
                                    value: String::new(),
                                })
                            }
                            Some(tag) => p.fail(format!("invalid control field tag {tag:?}")),
                            None => p.fail("controlfield without tag"),
                        }
                    }
                }
                (Elem::Record, Elem::DataField) => {
                    let tag = match attr(start, "tag") {
                        Some(tag) if is_numeric_tag(&tag) && !is_control_tag(&tag) => tag,
                        Some(tag) => {
                            p.fail(format!("invalid data field tag {tag:?}"));
                            return None;
                        }
                        None => {
                            p.fail("datafield without tag");
                            return None;
                        }
                    };
                    let ind = |name: &str| -> Result<char, String> {
                        match attr(start, name) {
                            None => Ok(' '),
                            Some(v) => {
                                let mut chars = v.chars();
                                match (chars.next(), chars.next()) {
                                    (None, _) => Ok(' '),
                                    (Some(c), None) => Ok(c),
                                    _ => Err(format!("indicator {name} {v:?} is not one character")),
                                }
                            }
                        }
                    };
                    match (ind("ind1"), ind("ind2")) {
                        (Ok(indicator1), Ok(indicator2)) => p.record.data_fields.push(DataField {
                            tag,
                            indicator1,
                            indicator2,
                            subfields: Vec::new(),
                        }),
                        (Err(e), _) | (_, Err(e)) => p.fail(e),
                    }
                }
                (Elem::DataField, Elem::Subfield) => {
                    p.text.clear();
                    let code = attr(start, "code").and_then(|c| {
                        let mut chars = c.chars();
                        match (chars.next(), chars.next()) {
                            (Some(ch), None) if ch.is_ascii_alphanumeric() => Some(ch),
                            _ => None,
                        }
                    });
                    match code {
                        Some(code) => p.subfield_code = Some(code),
                        None => p.fail("subfield with missing or invalid code"),
                    }
                }
                (_, other) => p.fail(format!("unexpected element {other:?} in record")),
            }
            return None;
        }

        let top = self.stack.is_empty();
        match (elem, foreign) {
            (Elem::Collection, None) if top => {
                self.stack.push(Elem::Collection);
                None
            }
            (Elem::Record, foreign) if top || self.stack == [Elem::Collection] => {
                self.records_seen += 1;
                let (line, _) = self.locate(offset);
                let mut pending = Pending {
                    position: self.records_seen,
                    line,
                    record: AuthorityRecord::default(),
                    text: String::new(),
                    subfield_code: None,
                    error: None,
                    depth: 0,
                };
                if let Some(ns) = foreign {
                    pending.fail(format!("record in unknown namespace {ns}"));
                }
                self.pending = Some(pending);
                self.stack.push(Elem::Record);
                None
            }
            (elem, foreign) if top => {
                self.done = true;
                Some(Err(MarcError::NotMarcXml(match foreign {
                    Some(ns) => format!("root element in namespace {ns}"),
                    None => format!("unexpected root element {elem:?}"),
                })))
            }
            _ => {
                // Non-record content inside the collection is skipped.
                self.stack.push(Elem::Other);
                None
            }
        }
    }

    fn on_text(&mut self, content: &str) {
        if let Some(p) = self.pending.as_mut() {
            match self.stack.last() {
                Some(Elem::Leader) | Some(Elem::ControlField) | Some(Elem::Subfield) => {
                    p.text.push_str(content)
                }
                _ => {
                    if !content.trim().is_empty() {
                        p.fail("unexpected text in record");
                    }
                }
            }
        }
    }

    fn on_end(&mut self) -> Option<Result<AuthorityRecord, MarcError>> {
        let elem = self.stack.pop()?;
        let p = self.pending.as_mut()?;
        if p.depth > 0 {
            p.depth -= 1;
            if p.error.is_some() {
                return None;
            }
            match elem {
                Elem::Leader => {
                    p.record.leader = std::mem::take(&mut p.text);
                }
                Elem::ControlField => {
                    if let Some(cf) = p.record.control_fields.last_mut() {
                        cf.value = std::mem::take(&mut p.text);
                    }
                }
                Elem::Subfield => {
                    let value = collapse_whitespace(&p.text);
                    p.text.clear();
                    if let (Some(code), Some(df)) =
                        (p.subfield_code.take(), p.record.data_fields.last_mut())
                    {
                        if !value.is_empty() {
                            df.subfields.push(Subfield { code, value });
                        }
                    }
                }
                _ => {}
            }
            return None;
        }
        // End of the record element itself.
        let mut p = self.pending.take()?;
        if p.error.is_none() {
            let leader_len = p.record.leader.chars().count();
            if leader_len < LEADER_LEN {
                p.record
                    .warnings
                    .push(format!("leader has {leader_len} characters, padded to {LEADER_LEN}"));
                p.record
                    .leader
                    .extend(std::iter::repeat_n(' ', LEADER_LEN - leader_len));
            } else if leader_len > LEADER_LEN {
                p.record
                    .warnings
                    .push(format!("leader has {leader_len} characters, truncated to {LEADER_LEN}"));
                p.record.leader = p.record.leader.chars().take(LEADER_LEN).collect();
            }
            if let Err(reason) = p.record.validate() {
                p.error = Some(reason);
            }
        }
        Some(match p.error {
            Some(reason) => Err(MarcError::Record(RecordError {
                position: p.position,
                line: p.line,
                reason,
            })),
            None => Ok(p.record),
        })
    }
}

impl<R: BufRead> Iterator for MarcXmlReader<R> {
    type Item = Result<AuthorityRecord, MarcError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_item()
    }
}

fn attr(start: &BytesStart<'_>, name: &str) -> Option<String> {
    start
        .try_get_attribute(name)
        .ok()
        .flatten()
        .and_then(|a| a.normalized_value(quick_xml::XmlVersion::Implicit1_0).ok().map(|v| v.into_owned()))
}

fn escape_xml(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

/// Writes records as canonical MARCXML: one `collection` in the slim namespace,
/// two-space indentation, attributes in `tag`, `ind1`, `ind2`, `code` order.
pub struct MarcXmlWriter<W: Write> {
    out: W,
    scratch: String,
}

impl<W: Write> MarcXmlWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
        writeln!(out, r#"<collection xmlns="{MARC_SLIM_NS}">"#)?;
        Ok(MarcXmlWriter {
            out,
            scratch: String::new(),
        })
    }

    pub fn write_record(&mut self, record: &AuthorityRecord) -> io::Result<()> {
        let s = &mut self.scratch;
        s.clear();
        s.push_str("  <record>\n    <leader>");
        escape_xml(&record.leader, s);
        s.push_str("</leader>\n");
        for cf in &record.control_fields {
            s.push_str("    <controlfield tag=\"");
            escape_xml(&cf.tag, s);
            s.push_str("\">");
            escape_xml(&cf.value, s);
            s.push_str("</controlfield>\n");
        }
        for df in &record.data_fields {
            s.push_str("    <datafield tag=\"");
            escape_xml(&df.tag, s);
            s.push_str("\" ind1=\"");
            escape_xml(&df.indicator1.to_string(), s);
            s.push_str("\" ind2=\"");
            escape_xml(&df.indicator2.to_string(), s);
            s.push_str("\">\n");
            for sf in &df.subfields {
                s.push_str("      <subfield code=\"");
                escape_xml(&sf.code.to_string(), s);
                s.push_str("\">");
                escape_xml(&sf.value, s);
                s.push_str("</subfield>\n");
            }
            s.push_str("    </datafield>\n");
        }
        s.push_str("  </record>\n");
        self.out.write_all(s.as_bytes())
    }

    pub fn get_mut(&mut self) -> &mut W {
        &mut self.out
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.write_all(b"</collection>\n")?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Serializes records to a canonical MARCXML string.
pub fn to_marcxml<'a>(records: impl IntoIterator<Item = &'a AuthorityRecord>) -> String {
    let mut w = MarcXmlWriter::new(Vec::new()).expect("writing to memory");
    for r in records {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.finish().expect("writing to memory")).expect("utf-8 output")
}

impl fmt::Display for Subfield {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${} {}", self.code, self.value)
    }
}
