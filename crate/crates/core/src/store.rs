//! On-disk triple store: a term dictionary plus SPO, POS and OSP indexes.
//!
//! A store directory at generation `g` holds:
//!
//! - `dict.g`: one term per line in N-Triples syntax; line `i` is term id `i`.
//!   Ids are append-only, so a term keeps its id for the lifetime of the store.
//! - `spo.g`, `pos.g`, `osp.g`: little-endian `u32` id triples (12 bytes each) in
//!   the named position order, sorted by the lexical order of the terms.
//! - `manifest`: `key=value` lines with the format version, counts, generation and a
//!   SHA-256 over the four files above.
//!
//! A bulk load writes generation `g + 1` next to the current one and then renames
//! `manifest.tmp` over `manifest`. A load interrupted before the rename leaves
//! generation `g` in effect.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::label::LabelIndex;
use crate::rdf::{vocab, Graph, Iri, Term, Triple};
use crate::serialize::ntriples::{parse_term, push_term, push_triple};

pub const FORMAT_VERSION: u32 = 1;
pub const CHECKSUM_ALGORITHM: &str = "sha256";

const MANIFEST: &str = "manifest";
const MANIFEST_TMP: &str = "manifest.tmp";
const DATA_FILES: [&str; 4] = ["dict", "spo", "pos", "osp"];
const ENTRY_BYTES: usize = 12;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store format version {found:?} is not supported (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },
    #[error("corrupt store at {}: {reason}", path.display())]
    CorruptStore { path: PathBuf, reason: String },
    #[error("{} exists and is not an empty directory", .0.display())]
    NotEmpty(PathBuf),
    #[error("store is open read-only")]
    ReadOnly,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Conversion settings recorded in the manifest so readers can map an LCCN back to
/// its concept IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoreMeta {
    pub base_uri: Option<String>,
    pub fragment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct StoreStats {
    pub triples: usize,
    pub concepts: usize,
    pub terms: usize,
    pub predicates: BTreeMap<String, usize>,
}

impl fmt::Display for StoreStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "triples: {}", self.triples)?;
        writeln!(f, "concepts: {}", self.concepts)?;
        writeln!(f, "terms: {}", self.terms)?;
        for (predicate, count) in &self.predicates {
            writeln!(f, "  {predicate} {count}")?;
        }
        Ok(())
    }
}

type Ids = [u32; 3];

/// Position order of an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOrder {
    Spo,
    Pos,
    Osp,
}

impl IndexOrder {
    /// The index whose key prefix covers every bound position.
    pub fn for_pattern(s: bool, p: bool, o: bool) -> IndexOrder {
        match (s, p, o) {
            (true, _, false) | (true, true, true) | (false, false, false) => IndexOrder::Spo,
            (false, true, _) => IndexOrder::Pos,
            (_, false, true) => IndexOrder::Osp,
        }
    }

    fn key(self, t: Ids) -> Ids {
        match self {
            IndexOrder::Spo => t,
            IndexOrder::Pos => [t[1], t[2], t[0]],
            IndexOrder::Osp => [t[2], t[0], t[1]],
        }
    }

    fn triple(self, k: Ids) -> Ids {
        match self {
            IndexOrder::Spo => k,
            IndexOrder::Pos => [k[2], k[0], k[1]],
            IndexOrder::Osp => [k[1], k[2], k[0]],
        }
    }
}

pub struct TripleStore {
    dir: PathBuf,
    writable: bool,
    meta: StoreMeta,
    generation: u64,
    checksum: String,
    terms: Vec<Term>,
    ids: HashMap<Term, u32>,
    rank: Vec<u32>,
    /// Entries of each index are stored in key order.
    spo: Vec<Ids>,
    pos: Vec<Ids>,
    osp: Vec<Ids>,
    labels: LabelIndex,
}

impl fmt::Debug for TripleStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TripleStore")
            .field("dir", &self.dir)
            .field("generation", &self.generation)
            .field("triples", &self.spo.len())
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl TripleStore {
    pub fn create(path: impl AsRef<Path>) -> Result<TripleStore, StoreError> {
        TripleStore::create_with(path, StoreMeta::default())
    }

    /// Creates an empty store. `path` must not exist or be an empty directory.
    pub fn create_with(path: impl AsRef<Path>, meta: StoreMeta) -> Result<TripleStore, StoreError> {
        let dir = path.as_ref().to_path_buf();
        if dir.exists() {
            if !dir.is_dir() || fs::read_dir(&dir)?.next().is_some() {
                return Err(StoreError::NotEmpty(dir));
            }
        } else {
            fs::create_dir_all(&dir)?;
        }
        let mut store = TripleStore {
            dir,
            writable: true,
            meta,
            generation: 0,
            checksum: String::new(),
            terms: Vec::new(),
            ids: HashMap::new(),
            rank: Vec::new(),
            spo: Vec::new(),
            pos: Vec::new(),
            osp: Vec::new(),
            labels: LabelIndex::new(),
        };
        store.checksum = store.write_generation(0, &[], &[], &[], &[])?;
        store.publish(0, 0, 0, &store.checksum.clone())?;
        Ok(store)
    }

    /// Opens an existing store for reading.
    pub fn open(path: impl AsRef<Path>) -> Result<TripleStore, StoreError> {
        TripleStore::load(path.as_ref(), false)
    }

    /// Opens an existing store for further bulk loads.
    pub fn open_writable(path: impl AsRef<Path>) -> Result<TripleStore, StoreError> {
        TripleStore::load(path.as_ref(), true)
    }

    fn load(dir: &Path, writable: bool) -> Result<TripleStore, StoreError> {
        let corrupt = |reason: String| StoreError::CorruptStore {
            path: dir.to_path_buf(),
            reason,
        };
        let manifest = match fs::read_to_string(dir.join(MANIFEST)) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(corrupt("no manifest".into()))
            }
            Err(e) => return Err(e.into()),
        };
        let fields: HashMap<&str, &str> = manifest
            .lines()
            .filter_map(|line| line.split_once('='))
            .collect();
        let field = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| corrupt(format!("manifest has no {key}= line")))
        };
        let version = field("version")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(StoreError::VersionMismatch {
                found: version.to_owned(),
                expected: FORMAT_VERSION,
            });
        }
        let algorithm = field("checksum_algorithm")?;
        if algorithm != CHECKSUM_ALGORITHM {
            return Err(corrupt(format!("unsupported checksum algorithm {algorithm:?}")));
        }
        let number = |key: &str| -> Result<u64, StoreError> {
            field(key)?
                .parse()
                .map_err(|_| corrupt(format!("manifest {key}= is not a number")))
        };
        let generation = number("generation")?;
        let triple_count = number("triples")? as usize;
        let term_count = number("terms")? as usize;
        let expected_checksum = field("checksum")?.to_owned();
        let meta = StoreMeta {
            base_uri: fields.get("base_uri").map(|s| s.to_string()),
            fragment: fields.get("fragment").map(|s| s.to_string()),
        };

        let mut hasher = Sha256::new();
        let mut blobs = Vec::with_capacity(4);
        for name in DATA_FILES {
            let file = dir.join(format!("{name}.{generation}"));
            let bytes = fs::read(&file).map_err(|e| match e.kind() {
                io::ErrorKind::NotFound => corrupt(format!("missing {}", file.display())),
                _ => e.into(),
            })?;
            hasher.update(&bytes);
            blobs.push(bytes);
        }
        let actual = hex::encode(hasher.finalize());
        if actual != expected_checksum {
            return Err(corrupt(format!(
                "checksum mismatch: manifest {expected_checksum}, data {actual}"
            )));
        }

        let dict = String::from_utf8(std::mem::take(&mut blobs[0]))
            .map_err(|_| corrupt("dictionary is not UTF-8".into()))?;
        let mut terms = Vec::with_capacity(term_count);
        for (i, line) in dict.lines().enumerate() {
            let term = parse_term(line)
                .map_err(|e| corrupt(format!("dictionary line {}: {e}", i + 1)))?;
            terms.push(term);
        }
        if terms.len() != term_count {
            return Err(corrupt(format!(
                "manifest lists {term_count} terms, dictionary has {}",
                terms.len()
            )));
        }
        let mut indexes = Vec::with_capacity(3);
        for (name, bytes) in DATA_FILES[1..].iter().zip(&blobs[1..]) {
            if bytes.len() != triple_count * ENTRY_BYTES {
                return Err(corrupt(format!(
                    "{name} index holds {} bytes, expected {}",
                    bytes.len(),
                    triple_count * ENTRY_BYTES
                )));
            }
            let entries = decode_entries(bytes);
            if entries.iter().flatten().any(|&id| id as usize >= term_count) {
                return Err(corrupt(format!("{name} index refers to an unknown term")));
            }
            indexes.push(entries);
        }
        let osp = indexes.pop().unwrap_or_default();
        let pos = indexes.pop().unwrap_or_default();
        let spo = indexes.pop().unwrap_or_default();
        let is_iri = |id: u32| matches!(terms[id as usize], Term::Iri(_));
        if !spo.iter().all(|t| is_iri(t[0]) && is_iri(t[1])) {
            return Err(corrupt("a subject or predicate is a literal".into()));
        }

        let ids = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let rank = ranks(&terms);
        let mut store = TripleStore {
            dir: dir.to_path_buf(),
            writable,
            meta,
            generation,
            checksum: actual,
            terms,
            ids,
            rank,
            spo,
            pos,
            osp,
            labels: LabelIndex::new(),
        };
        store.labels = store.build_labels();
        Ok(store)
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn meta(&self) -> &StoreMeta {
        &self.meta
    }

    /// Hex SHA-256 of the current generation, as recorded in the manifest.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn is_writable(&self) -> bool {
        self.writable
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Dictionary id of a term, if the store has seen it.
    pub fn term_id(&self, term: &Term) -> Option<u32> {
        self.ids.get(term).copied()
    }

    /// Set-inserts `triples` and commits them as one new generation. Returns the
    /// number of triples that were not already present.
    pub fn bulk_insert<I>(&mut self, triples: I) -> Result<usize, StoreError>
    where
        I: IntoIterator<Item = Triple>,
    {
        if !self.writable {
            return Err(StoreError::ReadOnly);
        }
        let old_terms = self.terms.len();
        let mut fresh: Vec<Ids> = self.spo.clone();
        for t in triples {
            let s = self.intern(Term::Iri(t.subject));
            let p = self.intern(Term::Iri(t.predicate));
            let o = self.intern(t.object);
            fresh.push([s, p, o]);
        }
        let result = self.commit(fresh);
        if result.is_err() {
            for term in self.terms.drain(old_terms..) {
                self.ids.remove(&term);
            }
        }
        result
    }

    fn intern(&mut self, term: Term) -> u32 {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = u32::try_from(self.terms.len()).expect("term dictionary exceeds u32 ids");
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    /// Sorts and deduplicates `spo`, writes it as the next generation and publishes it.
    fn commit(&mut self, mut spo: Vec<Ids>) -> Result<usize, StoreError> {
        let rank = ranks(&self.terms);
        sort_index(&mut spo, &rank);
        spo.dedup();
        let added = spo.len() - self.spo.len();
        if added == 0 {
            return Ok(0);
        }
        let pos = build_index(&spo, IndexOrder::Pos, &rank);
        let osp = build_index(&spo, IndexOrder::Osp, &rank);
        let generation = self.generation + 1;
        let checksum = self.write_generation(generation, &self.terms, &spo, &pos, &osp)?;
        self.publish(generation, spo.len(), self.terms.len(), &checksum)?;
        self.remove_stale(generation);

        self.generation = generation;
        self.checksum = checksum;
        self.rank = rank;
        self.spo = spo;
        self.pos = pos;
        self.osp = osp;
        self.labels = self.build_labels();
        Ok(added)
    }

    /// Writes and syncs the data files of one generation; returns their checksum.
    fn write_generation(
        &self,
        generation: u64,
        terms: &[Term],
        spo: &[Ids],
        pos: &[Ids],
        osp: &[Ids],
    ) -> Result<String, StoreError> {
        let mut hasher = Sha256::new();
        let mut line = String::with_capacity(256);
        let mut dict = Vec::with_capacity(terms.len() * 48);
        for term in terms {
            line.clear();
            push_term(term, &mut line);
            line.push('\n');
            dict.extend_from_slice(line.as_bytes());
        }
        self.write_synced(&format!("dict.{generation}"), &dict, &mut hasher)?;
        drop(dict);
        for (name, entries) in [("spo", spo), ("pos", pos), ("osp", osp)] {
            let bytes = encode_entries(entries);
            self.write_synced(&format!("{name}.{generation}"), &bytes, &mut hasher)?;
        }
        Ok(hex::encode(hasher.finalize()))
    }

    fn write_synced(&self, name: &str, bytes: &[u8], hasher: &mut Sha256) -> io::Result<()> {
        hasher.update(bytes);
        let mut file = File::create(self.dir.join(name))?;
        file.write_all(bytes)?;
        file.sync_all()
    }

    /// Atomically points the manifest at `generation`.
    fn publish(
        &self,
        generation: u64,
        triples: usize,
        terms: usize,
        checksum: &str,
    ) -> Result<(), StoreError> {
        let mut text = format!(
            "version={FORMAT_VERSION}\ngeneration={generation}\ntriples={triples}\nterms={terms}\n"
        );
        if let Some(base) = &self.meta.base_uri {
            text.push_str(&format!("base_uri={base}\n"));
        }
        if let Some(fragment) = &self.meta.fragment {
            text.push_str(&format!("fragment={fragment}\n"));
        }
        text.push_str(&format!(
            "checksum_algorithm={CHECKSUM_ALGORITHM}\nchecksum={checksum}\n"
        ));
        let tmp = self.dir.join(MANIFEST_TMP);
        let mut file = File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
        drop(file);
        fs::rename(&tmp, self.dir.join(MANIFEST))?;
        if let Ok(dir) = File::open(&self.dir) {
            let _ = dir.sync_all();
        }
        Ok(())
    }

    /// Best-effort removal of data files from other generations.
    fn remove_stale(&self, keep: u64) {
        let Ok(entries) = fs::read_dir(&self.dir) else {
            return;
        };
        for entry in entries.flatten() {
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            let Some((stem, generation)) = name.split_once('.') else {
                continue;
            };
            if DATA_FILES.contains(&stem) && generation.parse::<u64>().is_ok_and(|g| g != keep) {
                let _ = fs::remove_file(entry.path());
            }
        }
    }

    fn build_labels(&self) -> LabelIndex {
        let mut labels = LabelIndex::new();
        for t in self.match_pattern(None, Some(&vocab::SKOS_PREF_LABEL), None) {
            if let Term::Literal(lit) = &t.object {
                labels.insert(lit.lexical(), t.subject);
            }
        }
        labels
    }

    fn iri(&self, id: u32) -> Iri {
        match &self.terms[id as usize] {
            Term::Iri(iri) => iri.clone(),
            Term::Literal(_) => unreachable!("subjects and predicates are checked on load"),
        }
    }

    fn decode(&self, t: Ids) -> Triple {
        Triple::new(self.iri(t[0]), self.iri(t[1]), self.terms[t[2] as usize].clone())
    }

    fn index(&self, order: IndexOrder) -> &[Ids] {
        match order {
            IndexOrder::Spo => &self.spo,
            IndexOrder::Pos => &self.pos,
            IndexOrder::Osp => &self.osp,
        }
    }

    /// Lazily yields the triples matching every bound position, in the order of the
    /// index chosen by [`IndexOrder::for_pattern`].
    pub fn match_pattern(&self, s: Option<&Iri>, p: Option<&Iri>, o: Option<&Term>) -> Matches<'_> {
        let order = IndexOrder::for_pattern(s.is_some(), p.is_some(), o.is_some());
        let empty = Matches {
            store: self,
            order,
            entries: [].iter(),
        };
        let lookup = |term: Option<Term>| match term {
            None => Ok(None),
            Some(t) => self.ids.get(&t).map(|&id| Some(id)).ok_or(()),
        };
        let Ok(s) = lookup(s.cloned().map(Term::Iri)) else {
            return empty;
        };
        let Ok(p) = lookup(p.cloned().map(Term::Iri)) else {
            return empty;
        };
        let Ok(o) = lookup(o.cloned()) else {
            return empty;
        };
        let bound = match order {
            IndexOrder::Spo => [s, p, o],
            IndexOrder::Pos => [p, o, s],
            IndexOrder::Osp => [o, s, p],
        };
        let want: Vec<u32> = bound
            .iter()
            .map_while(|id| id.map(|id| self.rank[id as usize]))
            .collect();
        let index = self.index(order);
        let n = want.len();
        let key = |e: &Ids| [self.rank[e[0] as usize], self.rank[e[1] as usize], self.rank[e[2] as usize]];
        let lo = index.partition_point(|e| key(e)[..n] < want[..]);
        let hi = lo + index[lo..].partition_point(|e| key(e)[..n] <= want[..]);
        Matches {
            store: self,
            order,
            entries: index[lo..hi].iter(),
        }
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.match_pattern(Some(&triple.subject), Some(&triple.predicate), Some(&triple.object))
            .next()
            .is_some()
    }

    /// Concepts whose preferred label has the same key as `label`; sorted.
    pub fn lookup_by_pref_label(&self, label: &str) -> &[Iri] {
        self.labels.lookup(label)
    }

    pub fn labels(&self) -> &LabelIndex {
        &self.labels
    }

    /// Writes every triple as sorted N-Triples; returns the count written.
    pub fn dump<W: Write>(&self, out: W) -> io::Result<usize> {
        let mut out = BufWriter::with_capacity(1 << 16, out);
        let mut line = String::with_capacity(256);
        for &t in &self.spo {
            line.clear();
            push_triple(&self.decode(t), &mut line);
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(self.spo.len())
    }

    /// Copies the store into an in-memory graph.
    pub fn to_graph(&self) -> Graph {
        self.match_pattern(None, None, None).collect()
    }

    pub fn stats(&self) -> StoreStats {
        let mut predicates = BTreeMap::new();
        for run in self.pos.chunk_by(|a, b| a[0] == b[0]) {
            predicates.insert(self.iri(run[0][0]).as_str().to_owned(), run.len());
        }
        let concepts = self
            .match_pattern(
                None,
                Some(&vocab::RDF_TYPE),
                Some(&Term::Iri(vocab::SKOS_CONCEPT.clone())),
            )
            .count();
        StoreStats {
            triples: self.spo.len(),
            concepts,
            terms: self.terms.len(),
            predicates,
        }
    }
}

/// Iterator returned by [`TripleStore::match_pattern`].
pub struct Matches<'a> {
    store: &'a TripleStore,
    order: IndexOrder,
    entries: std::slice::Iter<'a, Ids>,
}

impl Matches<'_> {
    pub fn index_order(&self) -> IndexOrder {
        self.order
    }
}

impl Iterator for Matches<'_> {
    type Item = Triple;

    fn next(&mut self) -> Option<Triple> {
        let key = *self.entries.next()?;
        Some(self.store.decode(self.order.triple(key)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.entries.size_hint()
    }
}

impl ExactSizeIterator for Matches<'_> {}

/// A `Read` over the sorted N-Triples dump of a shared store, produced a chunk at a
/// time.
pub struct DumpReader {
    store: Arc<TripleStore>,
    next: usize,
    buf: String,
    offset: usize,
}

impl DumpReader {
    const CHUNK: usize = 512;

    pub fn new(store: Arc<TripleStore>) -> DumpReader {
        DumpReader {
            store,
            next: 0,
            buf: String::new(),
            offset: 0,
        }
    }
}

impl Read for DumpReader {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        while self.offset == self.buf.len() {
            let total = self.store.spo.len();
            if self.next >= total {
                return Ok(0);
            }
            self.buf.clear();
            self.offset = 0;
            let end = (self.next + Self::CHUNK).min(total);
            for &t in &self.store.spo[self.next..end] {
                push_triple(&self.store.decode(t), &mut self.buf);
            }
            self.next = end;
        }
        let pending = &self.buf.as_bytes()[self.offset..];
        let n = pending.len().min(out.len());
        out[..n].copy_from_slice(&pending[..n]);
        self.offset += n;
        Ok(n)
    }
}

fn ranks(terms: &[Term]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..terms.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| terms[a as usize].cmp(&terms[b as usize]));
    let mut rank = vec![0; terms.len()];
    for (r, &id) in order.iter().enumerate() {
        rank[id as usize] = r as u32;
    }
    rank
}

fn sort_index(entries: &mut [Ids], rank: &[u32]) {
    entries.sort_unstable_by_key(|e| [rank[e[0] as usize], rank[e[1] as usize], rank[e[2] as usize]]);
}

fn build_index(spo: &[Ids], order: IndexOrder, rank: &[u32]) -> Vec<Ids> {
    let mut entries: Vec<Ids> = spo.iter().map(|&t| order.key(t)).collect();
    sort_index(&mut entries, rank);
    entries
}

fn encode_entries(entries: &[Ids]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(entries.len() * ENTRY_BYTES);
    for id in entries.iter().flatten() {
        bytes.extend_from_slice(&id.to_le_bytes());
    }
    bytes
}

fn decode_entries(bytes: &[u8]) -> Vec<Ids> {
    bytes
        .chunks_exact(ENTRY_BYTES)
        .map(|c| {
            let id = |i: usize| u32::from_le_bytes([c[i], c[i + 1], c[i + 2], c[i + 3]]);
            [id(0), id(4), id(8)]
        })
        .collect()
}
