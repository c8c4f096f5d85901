//! The `marcskos` command line.
//!
//! Reports and diagnostics go to standard error; data (N-Triples, lookup results,
//! statistics) goes to standard output, so commands compose in pipelines.
//!
//! Exit codes: 0 success (record-level defects are warnings), 1 fatal error (unreadable
//! input, malformed XML, bad store, bind failure), 2 usage error or, for `lookup`, no match.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use marcskos::convert::{Conversion, ConversionConfig, ConversionReport, Converter, Execution};
use marcskos::marc::parse_marcxml;
use marcskos::rdf::{Graph, Iri};
use marcskos::serialize::{parse_ntriples, write_ntriples};
use marcskos::store::{StoreMeta, TripleStore};
use marcskos_server::{RequestLog, Server, Service, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "marcskos", version, about = "MARC21 authority records to SKOS linked data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert MARCXML authority files to SKOS, into a store or an N-Triples file.
    Convert(ConvertArgs),
    /// Load an N-Triples file into a store.
    Load(LoadArgs),
    /// Serve a store as linked data over HTTP.
    Serve(ServeArgs),
    /// Print the URIs of concepts whose preferred label matches.
    Lookup(LookupArgs),
    /// Write every triple of a store as sorted N-Triples.
    Dump(DumpArgs),
    /// Print triple, concept and per-predicate counts.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["store", "out"])))]
pub struct ConvertArgs {
    /// MARCXML input files.
    #[arg(long = "in", value_name = "FILE", num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// Create a store in this (absent or empty) directory.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Write N-Triples here; `-` is standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Prefix of every concept URI; must end with `/`.
    #[arg(long)]
    pub base_uri: String,
    /// Emit `skos:inScheme` links to this concept scheme.
    #[arg(long)]
    pub scheme_uri: Option<String>,
    #[arg(long, default_value = "concept")]
    pub fragment: String,
    /// Also map 148/155 headings and their 4XX/5XX fields.
    #[arg(long)]
    pub extended_tags: bool,
    /// Two-digit years below this are read as 20xx, others as 19xx.
    #[arg(long, default_value_t = 50)]
    pub pivot: u8,
    #[arg(long, value_enum, default_value = "text")]
    pub report: ReportFormat,
    /// Map records on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct LoadArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// N-Triples input; `-` is standard input.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Base URI recorded for serving, when creating the store.
    #[arg(long)]
    pub base_uri: Option<String>,
    #[arg(long)]
    pub fragment: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: String,
    /// Append one JSON object per request to this file.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Overrides the base URI recorded in the store.
    #[arg(long)]
    pub base_uri: Option<String>,
    /// Shown in page titles.
    #[arg(long)]
    pub site_name: Option<String>,
}

#[derive(Debug, Args)]
pub struct LookupArgs {
    #[arg(long)]
    pub store: PathBuf,
    pub label: String,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// `-` is standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Fatal(String),
    #[error("no concept has the preferred label {0:?}")]
    NoMatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Fatal(_) => 1,
            CliError::Usage(_) | CliError::NoMatch(_) => 2,
        }
    }
}

/// A closed downstream pipe (`marcskos dump | head`) ends output quietly.
fn write_result<T: Default>(context: impl std::fmt::Display, r: io::Result<T>) -> Result<T, CliError> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(T::default()),
        other => other.map_err(|e| fatal(context, e)),
    }
}

fn fatal(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Fatal(format!("{context}: {e}"))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Convert(a) => convert(a),
        Command::Load(a) => load(a),
        Command::Serve(a) => serve(a),
        Command::Lookup(a) => lookup(a),
        Command::Dump(a) => dump(a),
        Command::Stats(a) => stats(a),
    }
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn output(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if is_stdio(path) {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(path).map_err(|e| fatal(path.display(), e))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn conversion_config(args: &ConvertArgs) -> Result<ConversionConfig, CliError> {
    let usage = |e: marcskos::convert::ConvertError| CliError::Usage(e.to_string());
    let mut config = ConversionConfig::new(&args.base_uri)
        .map_err(usage)?
        .with_fragment(&args.fragment)
        .map_err(usage)?
        .with_pivot(args.pivot)
        .map_err(usage)?
        .with_extended_tags(args.extended_tags);
    if let Some(scheme) = &args.scheme_uri {
        let iri = Iri::new(scheme).map_err(|e| CliError::Usage(format!("--scheme-uri: {e}")))?;
        config = config.with_scheme(iri);
    }
    Ok(config)
}

fn print_report(report: &ConversionReport, format: ReportFormat) {
    let mut err = io::stderr().lock();
    match format {
        ReportFormat::Json => {
            let _ = serde_json::to_writer_pretty(&mut err, report);
            let _ = writeln!(err);
        }
        ReportFormat::Text => {
            let _ = writeln!(err, "{report}");
            for s in &report.skipped_records {
                let _ = writeln!(err, "skipped: {} record {}: {}", s.source, s.position, s.reason);
            }
            for d in &report.field_defects {
                let _ = writeln!(err, "defect: {} record {} field {}: {}", d.source, d.position, d.tag, d.reason);
            }
            for r in &report.unresolved_refs {
                let _ = writeln!(err, "unresolved: {} -> {:?} ({:?})", r.source_concept, r.target_label, r.relation);
            }
        }
    }
}

/// Runs both conversion passes over the input files.
pub fn convert_files(inputs: &[PathBuf], config: ConversionConfig, execution: Execution) -> Result<Conversion, CliError> {
    let mut converter = Converter::new(config).with_execution(execution);
    for path in inputs {
        let file = File::open(path).map_err(|e| fatal(path.display(), e))?;
        let source = path.display().to_string();
        converter
            .ingest(&source, parse_marcxml(BufReader::new(file)))
            .map_err(|e| fatal(&source, e))?;
    }
    Ok(converter.finish())
}

fn store_meta(base_uri: Option<String>, fragment: Option<String>) -> StoreMeta {
    StoreMeta { base_uri, fragment }
}

fn write_store(path: &Path, meta: StoreMeta, graph: &Graph) -> Result<TripleStore, CliError> {
    let mut store = TripleStore::create_with(path, meta).map_err(|e| fatal(path.display(), e))?;
    store
        .bulk_insert(graph.iter().cloned())
        .map_err(|e| fatal(path.display(), e))?;
    Ok(store)
}

fn convert(args: ConvertArgs) -> Result<(), CliError> {
    let config = conversion_config(&args)?;
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    // Claim the store directory before the (possibly long) conversion.
    let store = match &args.store {
        Some(dir) => {
            let meta = store_meta(Some(args.base_uri.clone()), Some(args.fragment.clone()));
            Some(TripleStore::create_with(dir, meta).map_err(|e| fatal(dir.display(), e))?)
        }
        None => None,
    };
    let conversion = convert_files(&args.inputs, config, execution)?;
    if let (Some(mut store), Some(dir)) = (store, &args.store) {
        store
            .bulk_insert(conversion.graph.iter().cloned())
            .map_err(|e| fatal(dir.display(), e))?;
    }
    if let Some(path) = &args.out {
        let mut out = output(path)?;
        write_result(
            path.display(),
            write_ntriples(&conversion.graph, &mut out).and_then(|_| out.flush()),
        )?;
    }
    print_report(&conversion.report, args.report);
    Ok(())
}

fn load(args: LoadArgs) -> Result<(), CliError> {
    let input: Box<dyn BufRead> = if is_stdio(&args.input) {
        Box::new(io::stdin().lock())
    } else {
        let file = File::open(&args.input).map_err(|e| fatal(args.input.display(), e))?;
        Box::new(BufReader::new(file))
    };
    let source = args.input.display().to_string();
    let mut graph = Graph::new();
    for item in parse_ntriples(input) {
        graph.insert(item.map_err(|e| fatal(&source, e))?);
    }
    let exists = args.store.join("manifest").exists();
    let added = if exists {
        let mut store = TripleStore::open_writable(&args.store).map_err(|e| fatal(args.store.display(), e))?;
        store
            .bulk_insert(graph.iter().cloned())
            .map_err(|e| fatal(args.store.display(), e))?
    } else {
        write_store(&args.store, store_meta(args.base_uri, args.fragment), &graph)?;
        graph.len()
    };
    eprintln!("loaded {added} new triples from {} triples read", graph.len());
    Ok(())
}

fn open_store(path: &Path) -> Result<TripleStore, CliError> {
    TripleStore::open(path).map_err(|e| fatal(path.display(), e))
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let store = Arc::new(open_store(&args.store)?);
    let config = ServiceConfig {
        base_uri: args.base_uri,
        fragment: None,
        site_name: args.site_name,
    };
    let service = Service::new(store, config).map_err(|e| fatal(args.store.display(), e))?;
    let log = args
        .log
        .as_ref()
        .map(RequestLog::open)
        .transpose()
        .map_err(|e| CliError::Fatal(e.to_string()))?;
    let server = Server::bind(&args.listen, service, log).map_err(|e| CliError::Fatal(e.to_string()))?;
    let handle = server.shutdown_handle();
    ctrlc::set_handler(move || handle.shutdown()).map_err(|e| fatal("signal handler", e))?;
    eprintln!("listening on http://{}/", server.local_addr());
    server.run().map_err(|e| fatal("server", e))?;
    eprintln!("shut down");
    Ok(())
}

fn lookup(args: LookupArgs) -> Result<(), CliError> {
    let store = open_store(&args.store)?;
    let found = store.lookup_by_pref_label(&args.label);
    if found.is_empty() {
        return Err(CliError::NoMatch(args.label));
    }
    let mut out = io::stdout().lock();
    let text: String = found.iter().map(|iri| format!("{iri}\n")).collect();
    write_result("stdout", out.write_all(text.as_bytes()))
}

fn dump(args: DumpArgs) -> Result<(), CliError> {
    let store = open_store(&args.store)?;
    let mut out = output(&args.out)?;
    let count = write_result(
        args.out.display(),
        store.dump(&mut out).and_then(|n| out.flush().map(|_| n)),
    )?;
    eprintln!("{count} triples");
    Ok(())
}

fn stats(args: StatsArgs) -> Result<(), CliError> {
    let store = open_store(&args.store)?;
    let stats = store.stats();
    let text = if args.json {
        format!("{}\n", serde_json::to_string_pretty(&stats).expect("stats serialize"))
    } else {
        stats.to_string()
    };
    write_result("stdout", io::stdout().lock().write_all(text.as_bytes()))
}
