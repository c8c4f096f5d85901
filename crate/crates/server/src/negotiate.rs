//! Accept-header negotiation.

use marcskos::serialize::Representation;
use thiserror::Error;

/// Supported media ranges in preference order. Earlier entries win ties.
pub const NEGOTIATION_TABLE: [(&str, Representation); 7] = [
    ("application/rdf+xml", Representation::RdfXml),
    ("text/n3", Representation::N3),
    ("text/rdf+n3", Representation::N3),
    ("application/xhtml+xml", Representation::XhtmlRdfa),
    ("text/html", Representation::XhtmlRdfa),
    ("application/json", Representation::Json),
    ("*/*", Representation::XhtmlRdfa),
];

pub const DEFAULT_REPRESENTATION: Representation = Representation::XhtmlRdfa;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no supported representation is acceptable: {reason}")]
pub struct NotAcceptable {
    pub reason: String,
}

impl NotAcceptable {
    fn new(reason: impl Into<String>) -> Self {
        NotAcceptable {
            reason: reason.into(),
        }
    }
}

/// Plain-text body listing the media types a client may ask for.
pub fn supported_types_text() -> String {
    let mut out = String::from("Supported media types:\n");
    for (media, _) in NEGOTIATION_TABLE.iter().filter(|(m, _)| *m != "*/*") {
        out.push_str(media);
        out.push('\n');
    }
    out
}

/// One `type/subtype;q=x` element of an Accept header.
#[derive(Debug, Clone, PartialEq)]
pub struct MediaRange {
    pub media_type: String,
    /// Thousandths, 0..=1000.
    pub quality: u16,
}

fn parse_quality(value: &str) -> Option<u16> {
    // qvalue = ( "0" [ "." 0*3DIGIT ] ) / ( "1" [ "." 0*3("0") ] )
    let (int, frac) = match value.split_once('.') {
        Some((i, f)) => (i, f),
        None => (value, ""),
    };
    if frac.len() > 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let frac_value: u16 = format!("{frac:0<3}").parse().ok()?;
    match int {
        "0" => Some(frac_value),
        "1" if frac_value == 0 => Some(1000),
        _ => None,
    }
}

/// Parses an Accept header into media ranges. Parameters other than `q` are ignored.
pub fn parse_accept(header: &str) -> Result<Vec<MediaRange>, NotAcceptable> {
    let mut ranges = Vec::new();
    for element in header.split(',') {
        let element = element.trim();
        if element.is_empty() {
            continue;
        }
        let mut parts = element.split(';');
        let media_type = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
        let valid = media_type
            .split_once('/')
            .is_some_and(|(t, s)| !t.is_empty() && !s.is_empty() && !(t == "*" && s != "*"));
        if !valid {
            return Err(NotAcceptable::new(format!("malformed media range {element:?}")));
        }
        let mut quality = 1000;
        for param in parts {
            let Some((name, value)) = param.split_once('=') else {
                return Err(NotAcceptable::new(format!("malformed parameter in {element:?}")));
            };
            if name.trim().eq_ignore_ascii_case("q") {
                quality = parse_quality(value.trim())
                    .ok_or_else(|| NotAcceptable::new(format!("bad q-value in {element:?}")))?;
            }
        }
        ranges.push(MediaRange {
            media_type,
            quality,
        });
    }
    if ranges.is_empty() {
        return Err(NotAcceptable::new("empty Accept header"));
    }
    Ok(ranges)
}

/// Picks the representation for a request. No header, or a blank one, means the default.
pub fn negotiate(accept: Option<&str>) -> Result<Representation, NotAcceptable> {
    let Some(header) = accept.filter(|h| !h.trim().is_empty()) else {
        return Ok(DEFAULT_REPRESENTATION);
    };
    let ranges = parse_accept(header)?;
    let mut best: Option<(u16, Representation)> = None;
    for (media, representation) in NEGOTIATION_TABLE {
        // A type listed several times takes its highest q.
        let Some(q) = ranges.iter().filter(|r| r.media_type == media).map(|r| r.quality).max() else {
            continue;
        };
        if q > 0 && best.is_none_or(|(b, _)| q > b) {
            best = Some((q, representation));
        }
    }
    best.map(|(_, r)| r)
        .ok_or_else(|| NotAcceptable::new(format!("nothing acceptable in {header:?}")))
}
