//! N-Triples writer and line-oriented reader.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::rdf::{Iri, Literal, Term, Triple};

pub(crate) fn escape_iri(iri: &str, out: &mut String) {
    for c in iri.chars() {
        match c {
            '\u{0}'..='\u{20}' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// Escapes a string body for N-Triples and Turtle double-quoted literals.
pub(crate) fn escape_string(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\u{0}'..='\u{1F}' | '\u{7F}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

pub(crate) fn push_iri(iri: &Iri, out: &mut String) {
    out.push('<');
    escape_iri(iri.as_str(), out);
    out.push('>');
}

pub(crate) fn push_term(term: &Term, out: &mut String) {
    match term {
        Term::Iri(iri) => push_iri(iri, out),
        Term::Literal(lit) => push_literal(lit, out),
    }
}

fn push_literal(lit: &Literal, out: &mut String) {
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

/// Appends one N-Triples line, including the trailing newline.
pub fn push_triple(triple: &Triple, out: &mut String) {
    push_iri(&triple.subject, out);
    out.push(' ');
    push_iri(&triple.predicate, out);
    out.push(' ');
    push_term(&triple.object, out);
    out.push_str(" .\n");
}

pub fn format_triple(triple: &Triple) -> String {
    let mut s = String::new();
    push_triple(triple, &mut s);
    s
}

/// Writes triples in the order given; returns the number written.
pub fn write_ntriples<'a, W: Write>(
    triples: impl IntoIterator<Item = &'a Triple>,
    out: &mut W,
) -> io::Result<usize> {
    let mut line = String::with_capacity(256);
    let mut count = 0;
    for t in triples {
        line.clear();
        push_triple(t, &mut line);
        out.write_all(line.as_bytes())?;
        count += 1;
    }
    Ok(count)
}

#[derive(Debug, Error)]
pub enum NTriplesError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Streaming reader; yields one item per non-blank, non-comment line. A syntax error
/// on one line does not stop the following lines from being read.
pub struct NTriplesReader<R> {
    input: R,
    line: String,
    line_no: usize,
    failed: bool,
}

pub fn parse_ntriples<R: BufRead>(input: R) -> NTriplesReader<R> {
    NTriplesReader {
        input,
        line: String::new(),
        line_no: 0,
        failed: false,
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<Triple, NTriplesError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.line.clear();
            match self.input.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
            self.line_no += 1;
            match parse_line(&self.line) {
                Ok(None) => continue,
                Ok(Some(t)) => return Some(Ok(t)),
                Err(message) => {
                    return Some(Err(NTriplesError::Syntax {
                        line: self.line_no,
                        message,
                    }))
                }
            }
        }
    }
}

/// Parses a whole document, failing on the first bad line.
pub fn parse_ntriples_str(text: &str) -> Result<Vec<Triple>, NTriplesError> {
    parse_ntriples(text.as_bytes()).collect()
}

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.rest.starts_with(c) {
            self.rest = &self.rest[c.len_utf8()..];
            true
        } else {
            false
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.rest = &self.rest[c.len_utf8()..];
        Some(c)
    }

    fn hex(&mut self, digits: usize) -> Result<char, String> {
        if self.rest.len() < digits || !self.rest.is_char_boundary(digits) {
            return Err("truncated \\u escape".into());
        }
        let (h, rest) = self.rest.split_at(digits);
        let code = u32::from_str_radix(h, 16).map_err(|_| format!("bad hex escape {h:?}"))?;
        self.rest = rest;
        char::from_u32(code).ok_or_else(|| format!("escape {h} is not a character"))
    }

    fn iri(&mut self) -> Result<Iri, String> {
        if !self.eat('<') {
            return match self.peek() {
                Some('_') => Err("blank nodes are not supported".into()),
                Some(c) => Err(format!("expected '<', found {c:?}")),
                None => Err("unexpected end of line".into()),
            };
        }
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => value.push(self.hex(4)?),
                    Some('U') => value.push(self.hex(8)?),
                    _ => return Err("invalid escape in IRI".into()),
                },
                Some(c) => value.push(c),
                None => return Err("unterminated IRI".into()),
            }
        }
        Iri::new(&value).map_err(|e| e.to_string())
    }

    fn literal(&mut self) -> Result<Literal, String> {
        self.eat('"');
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('t') => value.push('\t'),
                    Some('b') => value.push('\u{8}'),
                    Some('n') => value.push('\n'),
                    Some('r') => value.push('\r'),
                    Some('f') => value.push('\u{c}'),
                    Some('"') => value.push('"'),
                    Some('\'') => value.push('\''),
                    Some('\\') => value.push('\\'),
                    Some('u') => value.push(self.hex(4)?),
                    Some('U') => value.push(self.hex(8)?),
                    _ => return Err("invalid escape in literal".into()),
                },
                Some('\n') | Some('\r') | None => return Err("unterminated literal".into()),
                Some(c) => value.push(c),
            }
        }
        if self.eat('@') {
            let end = self
                .rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                .unwrap_or(self.rest.len());
            let lang = &self.rest[..end];
            self.rest = &self.rest[end..];
            Literal::with_language(value, lang).map_err(|e| e.to_string())
        } else if self.rest.starts_with("^^") {
            self.rest = &self.rest[2..];
            Ok(Literal::typed(value, self.iri()?))
        } else {
            Ok(Literal::plain(value))
        }
    }
}

/// Parses one term written by `push_term`; the whole input must be consumed.
pub(crate) fn parse_term(text: &str) -> Result<Term, String> {
    let mut cur = Cursor { rest: text };
    let term: Term = match cur.peek() {
        Some('"') => cur.literal()?.into(),
        _ => cur.iri()?.into(),
    };
    if !cur.rest.is_empty() {
        return Err(format!("trailing content {:?}", cur.rest));
    }
    Ok(term)
}

fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor {
        rest: line.trim_end_matches(['\n', '\r']),
    };
    cur.skip_ws();
    if cur.rest.is_empty() || cur.rest.starts_with('#') {
        return Ok(None);
    }
    let subject = cur.iri()?;
    cur.skip_ws();
    let predicate = cur.iri()?;
    cur.skip_ws();
    let object: Term = match cur.peek() {
        Some('"') => cur.literal()?.into(),
        _ => cur.iri()?.into(),
    };
    cur.skip_ws();
    if !cur.eat('.') {
        return Err("expected '.' at end of triple".into());
    }
    cur.skip_ws();
    if !(cur.rest.is_empty() || cur.rest.starts_with('#')) {
        return Err(format!("trailing content {:?}", cur.rest));
    }
    Ok(Some(Triple::new(subject, predicate, object)))
}
