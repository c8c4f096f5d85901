//! Seeded generators of synthetic authority records for tests and benchmarks.
//!
//! [`random_records`] produces irregular corpora: shared labels, dangling and ambiguous
//! references, defective dates and control numbers. [`scale_record`] produces uniform
//! records of about ten triples each, and [`MarcXmlStream`] renders any record
//! iterator as a MARCXML byte stream without materializing the document.

use std::io::{self, Read};

use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::marc::{AuthorityRecord, ControlField, DataField, MarcXmlWriter};

pub const LEADER: &str = "00000nz  a2200000n  4500";

const WORDS: [&str; 64] = [
    "Agriculture", "Algebra", "Architecture", "Art", "Astronomy", "Ballads", "Banking",
    "Biology", "Botany", "Bridges", "Canals", "Cartography", "Ceramics", "Chemistry",
    "Children", "Cities", "Climate", "Coins", "Comedy", "Computers", "Cooking", "Dance",
    "Drama", "Economics", "Education", "Engineering", "Ethics", "Fables", "Farming",
    "Fishing", "Folklore", "Forests", "Geology", "Glass", "History", "Horses", "Hymns",
    "Industry", "Islands", "Journalism", "Law", "Libraries", "Linguistics", "Logic",
    "Maps", "Medicine", "Mining", "Music", "Navigation", "Optics", "Painting",
    "Philosophy", "Physics", "Poetry", "Railroads", "Religion", "Rivers", "Sculpture",
    "Ships", "Sociology", "Textiles", "Theater", "Weaving", "Zoology",
];

const SUBDIVISIONS: [(char, &str); 8] = [
    ('x', "History"),
    ('x', "Study and teaching"),
    ('y', "17th century"),
    ('y', "20th century"),
    ('z', "France"),
    ('z', "Spain"),
    ('v', "Periodicals"),
    ('v', "Bibliography"),
];

fn lccn_for(i: usize) -> String {
    format!("sh{:08}", 85_000_000 + i)
}

fn leader_and_controls(record: &mut AuthorityRecord, lccn: Option<&str>, created: &str, modified: &str) {
    record.leader = LEADER.to_owned();
    if let Some(lccn) = lccn {
        record.control_fields.push(ControlField {
            tag: "001".into(),
            value: lccn.to_owned(),
        });
    }
    record.control_fields.push(ControlField {
        tag: "005".into(),
        value: modified.to_owned(),
    });
    record.control_fields.push(ControlField {
        tag: "008".into(),
        value: format!("{created}i| anannbabn          |a ana      "),
    });
}

/// An irregular corpus of `count` records, identical for identical seeds.
///
/// Roughly: 3% carry only an 001 control number, 1% an unparseable LCCN, 1% repeat an
/// earlier LCCN, 2% have no authorized heading, 2% a malformed 008. References point
/// at other records' headings (sometimes with a trailing period),
/// and about one in eight names a heading that does not exist.
pub fn random_records(seed: u64, count: usize) -> Vec<AuthorityRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let headings: Vec<Vec<(char, String)>> = (0..count)
        .map(|_| {
            let words = rng.random_range(1..=3);
            let a: Vec<&str> = (0..words).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
            let mut subfields = vec![('a', a.join(" "))];
            if rng.random_bool(0.1) {
                subfields.push(('b', (*WORDS.choose(&mut rng).unwrap()).to_owned()));
            }
            for _ in 0..rng.random_range(0..=2) {
                let (code, value) = *SUBDIVISIONS.choose(&mut rng).unwrap();
                subfields.push((code, value.to_owned()));
            }
            subfields
        })
        .collect();

    let mut records = Vec::with_capacity(count);
    for (i, heading) in headings.iter().enumerate() {
        let mut record = AuthorityRecord::default();
        let lccn = if i > 0 && rng.random_bool(0.01) {
            lccn_for(rng.random_range(0..i))
        } else if rng.random_bool(0.01) {
            format!("bogus{i}")
        } else {
            lccn_for(i)
        };
        let only_001 = rng.random_bool(0.03);
        let created = if rng.random_bool(0.02) {
            "xx0101".to_owned()
        } else {
            format!(
                "{:02}{:02}{:02}",
                rng.random_range(0..100),
                rng.random_range(1..=12),
                rng.random_range(1..=28)
            )
        };
        let modified = format!(
            "{}{:02}{:02}{:02}{:02}{:02}.0",
            rng.random_range(1990..2010),
            rng.random_range(1..=12),
            rng.random_range(1..=28),
            rng.random_range(0..24),
            rng.random_range(0..60),
            rng.random_range(0..60)
        );
        leader_and_controls(&mut record, only_001.then_some(lccn.as_str()), &created, &modified);
        if !only_001 {
            let spaced = format!("{} {}", &lccn[..2], &lccn[2..]);
            record.data_fields.push(field("010", &[('a', spaced)]));
        }
        if rng.random_bool(0.3) {
            let class = format!("Q{}", rng.random_range(1..999));
            record.data_fields.push(field("053", &[('a', class)]));
        }
        let geographic = rng.random_bool(0.2);
        if !rng.random_bool(0.02) {
            record
                .data_fields
                .push(field(if geographic { "151" } else { "150" }, heading));
        }
        for _ in 0..rng.random_range(0..=3) {
            let words = rng.random_range(1..=3);
            let a: Vec<&str> = (0..words).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
            let tag = if geographic { "451" } else { "450" };
            record.data_fields.push(field(tag, &[('a', a.join(" "))]));
        }
        for _ in 0..rng.random_range(0..=4) {
            let mut subfields = Vec::new();
            match rng.random_range(0..10) {
                0..=3 => subfields.push(('w', "g".to_owned())),
                4 => subfields.push(('w', "h".to_owned())),
                5 => subfields.push(('w', "a".to_owned())),
                _ => {}
            }
            if rng.random_bool(0.12) {
                subfields.push(('a', format!("Nonexistent heading {}", rng.random_range(0..1000))));
            } else {
                let target = &headings[rng.random_range(0..count)];
                let mut copy = target.clone();
                if rng.random_bool(0.1) {
                    if let Some(last) = copy.last_mut() {
                        last.1.push('.');
                    }
                }
                subfields.extend(copy);
            }
            let tag = if rng.random_bool(0.8) { "550" } else { "551" };
            record.data_fields.push(field(tag, &subfields));
        }
        let notes: [(&str, &[char]); 8] = [
            ("667", &['a']),
            ("670", &['a', 'b', 'u']),
            ("675", &['a']),
            ("678", &['a', 'b']),
            ("680", &['i', 'a']),
            ("681", &['i', 'a']),
            ("682", &['i', 'a']),
            ("688", &['a']),
        ];
        for (tag, codes) in notes {
            if rng.random_bool(0.15) {
                let subfields: Vec<(char, String)> = codes
                    .iter()
                    .map(|&c| (c, format!("{} note {}", WORDS.choose(&mut rng).unwrap(), i)))
                    .collect();
                record.data_fields.push(field(tag, &subfields));
            }
        }
        records.push(record);
    }
    records
}

fn field(tag: &str, subfields: &[(char, String)]) -> DataField {
    let borrowed: Vec<(char, &str)> = subfields.iter().map(|(c, v)| (*c, v.as_str())).collect();
    DataField::new(tag, &borrowed)
}

fn scale_label(i: usize) -> String {
    format!("{} topic {i}", WORDS[i % WORDS.len()])
}

/// Record `i` of a uniform corpus. Every record has a preferred label, two alternate
/// labels, a scope note, created and modified dates and a classification number; every
/// record but the first names record `(i - 1) / 2` as its broader heading. With `n`
/// records this converts to `10n - 2` triples when no scheme is configured.
pub fn scale_record(i: usize) -> AuthorityRecord {
    let mut record = AuthorityRecord::default();
    let created = format!("{:02}{:02}{:02}", 70 + i % 30, 1 + i % 12, 1 + i % 28);
    let modified = format!("2008{:02}{:02}{:02}3000.0", 1 + i % 12, 1 + i % 28, i % 24);
    leader_and_controls(&mut record, None, &created, &modified);
    let label = scale_label(i);
    record
        .data_fields
        .push(DataField::new("010", &[('a', &lccn_for(i))]));
    record
        .data_fields
        .push(DataField::new("053", &[('a', &format!("QA{}", i % 10_000))]));
    record.data_fields.push(DataField::new("150", &[('a', &label)]));
    record
        .data_fields
        .push(DataField::new("450", &[('a', &format!("{label} (variant)"))]));
    record
        .data_fields
        .push(DataField::new("450", &[('a', &format!("Topic {i}"))]));
    if i > 0 {
        let parent = scale_label((i - 1) / 2);
        record
            .data_fields
            .push(DataField::new("550", &[('w', "g"), ('a', &parent)]));
    }
    record.data_fields.push(DataField::new(
        "680",
        &[('i', "Here are entered works on"), ('a', &label)],
    ));
    record
}

/// `count` uniform records, generated on demand.
pub fn scale_records(count: usize) -> impl Iterator<Item = AuthorityRecord> {
    (0..count).map(scale_record)
}

/// A MARCXML document produced record by record from an iterator.
pub struct MarcXmlStream<I> {
    records: I,
    writer: Option<MarcXmlWriter<Vec<u8>>>,
    pending: Vec<u8>,
    offset: usize,
}

impl<I: Iterator<Item = AuthorityRecord>> MarcXmlStream<I> {
    pub fn new(records: I) -> Self {
        MarcXmlStream {
            records,
            writer: Some(MarcXmlWriter::new(Vec::new()).expect("writing to memory")),
            pending: Vec::new(),
            offset: 0,
        }
    }
}

impl<I: Iterator<Item = AuthorityRecord>> Read for MarcXmlStream<I> {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        while self.offset == self.pending.len() {
            let Some(writer) = self.writer.as_mut() else {
                return Ok(0);
            };
            self.pending.clear();
            self.offset = 0;
            match self.records.next() {
                Some(record) => {
                    writer.write_record(&record)?;
                    std::mem::swap(&mut self.pending, writer.get_mut());
                }
                None => {
                    let writer = self.writer.take().expect("checked above");
                    self.pending = writer.finish()?;
                }
            }
        }
        let available = &self.pending[self.offset..];
        let n = available.len().min(out.len());
        out[..n].copy_from_slice(&available[..n]);
        self.offset += n;
        Ok(n)
    }
}
