//! `turkic` command-line interface. Exit codes are listed in `docs/cli.md`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use turkic_core::doc_model::{from_conllu, from_json, Document};
use turkic_core::metrics::{
    self, BpeAdapter, CharAdapter, IdentityAdapter, SubwordTokenizerAdapter,
};
use turkic_core::pipeline::{
    OutputFormat, Pipeline, PipelineConfig, PipelineError, PlanError, ProcessorRegistry,
};
use turkic_core::registry::{
    self, load_manifest, Cache, CatalogFilter, CatalogManifest, DefaultFetcher, DownloadStatus,
    Quality, RegistryError,
};
use turkic_core::scripts::{detect, detect_segments, normalize, Script, ScriptError};
use turkic_core::tokenize::{tokenize_sentences, TokenizerRules};
use turkic_core::transliterate::{TranslitError, Transliterator};

mod exit {
    pub const GENERIC: u8 = 1;
    pub const NO_ALPHABETIC: u8 = 2;
    pub const UNSUPPORTED_PAIR: u8 = 3;
    pub const UNMAPPABLE: u8 = 4;
    pub const MISSING_BACKEND: u8 = 5;
    pub const CHECKSUM: u8 = 6;
    pub const PARSE: u8 = 7;
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<ScriptError> for CliError {
    fn from(e: ScriptError) -> Self {
        let code = match e {
            ScriptError::NoAlphabeticContent => exit::NO_ALPHABETIC,
            _ => exit::GENERIC,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<TranslitError> for CliError {
    fn from(e: TranslitError) -> Self {
        let code = match e {
            TranslitError::UnsupportedPair { .. } => exit::UNSUPPORTED_PAIR,
            TranslitError::UnmappableCharacter { .. } => exit::UNMAPPABLE,
            TranslitError::Table(_) => exit::GENERIC,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        let code = match e {
            PlanError::MissingBackend { .. } => exit::MISSING_BACKEND,
            PlanError::NoTranslitRoute { .. } => exit::UNSUPPORTED_PAIR,
            _ => exit::GENERIC,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Plan(p) => p.into(),
            PipelineError::Translit(t) => t.into(),
            PipelineError::NoAlphabeticContent => CliError::new(exit::NO_ALPHABETIC, e.to_string()),
            PipelineError::NoTranslitRoute { .. } => {
                CliError::new(exit::UNSUPPORTED_PAIR, e.to_string())
            }
            PipelineError::Encoding { .. } => CliError::new(exit::PARSE, e.to_string()),
            _ => CliError::new(exit::GENERIC, e.to_string()),
        }
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        let code = match e {
            RegistryError::ChecksumMismatch { .. } => exit::CHECKSUM,
            RegistryError::Syntax { .. }
            | RegistryError::Schema { .. }
            | RegistryError::UnsupportedSchemaVersion(_) => exit::PARSE,
            _ => exit::GENERIC,
        };
        CliError::new(code, e.to_string())
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "turkic",
    version,
    about = "Script-aware text processing for Turkic languages"
)]
struct Cli {
    /// Tab-separated, stable output for scripts.
    #[arg(long, global = true)]
    porcelain: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dominant script and confidence.
    Detect(DetectArgs),
    /// Single-script runs, one per line.
    Segment(IoArgs),
    /// Convert text between scripts.
    Translit(TranslitArgs),
    /// One token per line, blank line between sentences.
    Tokenize(TokenizeArgs),
    /// Run a processing pipeline.
    Run(RunArgs),
    /// Convert documents between CoNLL-U and JSON.
    Convert(ConvertArgs),
    /// Inspect, download and verify catalog models.
    Catalog(CatalogArgs),
    /// Tokenizer fertility per language.
    Fertility(FertilityArgs),
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input file; stdin when absent or `-`.
    input: Option<PathBuf>,
    /// Output file; stdout when absent or `-`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    io: IoArgs,
    /// List single-script segments instead.
    #[arg(long)]
    segments: bool,
}

#[derive(Args, Debug)]
struct TranslitArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long)]
    lang: String,
    #[arg(long, value_parser = parse_script)]
    from: Script,
    #[arg(long, value_parser = parse_script)]
    to: Script,
    /// Fail on characters without a mapping instead of copying them.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct TokenizeArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long)]
    lang: String,
    /// Script of the input; detected when absent.
    #[arg(long, value_parser = parse_script)]
    script: Option<Script>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DocFormat {
    Conllu,
    Json,
}

impl From<DocFormat> for OutputFormat {
    fn from(f: DocFormat) -> Self {
        match f {
            DocFormat::Conllu => OutputFormat::Conllu,
            DocFormat::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("fmt").args(["format", "json", "conllu"]).multiple(false)))]
struct RunArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long)]
    lang: String,
    /// Comma-separated processor names.
    #[arg(long, value_delimiter = ',', default_value = "tokenize")]
    processors: Vec<String>,
    /// Declared input script; detected when absent.
    #[arg(long, value_parser = parse_script)]
    script: Option<Script>,
    #[arg(long, value_enum)]
    format: Option<DocFormat>,
    /// Shorthand for `--format json`.
    #[arg(long)]
    json: bool,
    /// Shorthand for `--format conllu`.
    #[arg(long)]
    conllu: bool,
    /// Treat every input line as a separate document.
    #[arg(long)]
    per_line: bool,
    /// Worker threads for per-line mode.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Backend override, e.g. `morph=apertium`; repeatable.
    #[arg(long = "backend", value_parser = parse_kv)]
    backends: Vec<(String, String)>,
    #[command(flatten)]
    catalog: CatalogSource,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum)]
    from: DocFormat,
    #[arg(long, value_enum)]
    to: DocFormat,
}

#[derive(Args, Debug, Clone)]
struct CatalogSource {
    /// Catalog manifest path or URL; the bundled catalog when absent.
    #[arg(long, env = "TURKIC_CATALOG", global = true)]
    catalog: Option<String>,
    /// Cache root.
    #[arg(long, env = registry::CACHE_ENV, global = true)]
    cache_dir: Option<PathBuf>,
}

impl CatalogSource {
    fn manifest(&self) -> Result<CatalogManifest, CliError> {
        match &self.catalog {
            Some(src) => Ok(load_manifest(src)?),
            None => Ok(CatalogManifest::bundled()),
        }
    }

    fn cache(&self) -> Cache {
        match &self.cache_dir {
            Some(dir) => Cache::new(dir),
            None => Cache::from_env(),
        }
    }
}

#[derive(Args, Debug)]
struct CatalogArgs {
    #[command(subcommand)]
    action: CatalogAction,
    #[command(flatten)]
    source: CatalogSource,
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    /// List catalog entries matching the filters.
    List(CatalogFilterArgs),
    /// Fetch and verify models for a language.
    Download {
        #[arg(long)]
        lang: String,
        #[arg(long, value_delimiter = ',', required = true)]
        processors: Vec<String>,
        #[arg(long, value_parser = parse_script)]
        script: Option<Script>,
    },
    /// Re-hash every cached file.
    Verify,
}

#[derive(Args, Debug)]
struct CatalogFilterArgs {
    #[arg(long)]
    lang: Option<String>,
    #[arg(long, value_parser = parse_script)]
    script: Option<Script>,
    #[arg(long)]
    processor: Option<String>,
    #[arg(long)]
    quality: Option<Quality>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AdapterKind {
    Identity,
    Char,
    ToyBpe,
    Bpe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Tsv,
    Json,
}

#[derive(Args, Debug)]
struct FertilityArgs {
    /// Lines of `lang<TAB>sentence` (extra middle columns are ignored).
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value = "identity", value_delimiter = ',')]
    adapter: Vec<AdapterKind>,
    /// `merges.txt` for `--adapter bpe`.
    #[arg(long)]
    merges: Option<PathBuf>,
    /// Optional `vocab.json` checked against the merges.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Apply merges over UTF-8 bytes (GPT-2 style).
    #[arg(long)]
    byte_level: bool,
    #[arg(long, value_enum, default_value = "tsv")]
    format: TableFormat,
}

fn parse_script(s: &str) -> Result<Script, String> {
    s.parse::<Script>().map_err(|e| e.to_string())
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected processor=backend, got `{s}`"))
}

fn is_stdio(p: &Option<PathBuf>) -> Option<&Path> {
    p.as_deref().filter(|p| p.as_os_str() != "-")
}

fn read_input(io: &IoArgs) -> Result<String, CliError> {
    let mut bytes = Vec::new();
    match is_stdio(&io.input) {
        Some(path) => {
            bytes = std::fs::read(path)
                .map_err(|e| CliError::new(exit::GENERIC, format!("{}: {e}", path.display())))?;
        }
        None => {
            std::io::stdin()
                .read_to_end(&mut bytes)
                .map_err(|e| CliError::new(exit::GENERIC, format!("stdin: {e}")))?;
        }
    }
    String::from_utf8(bytes).map_err(|e| {
        CliError::new(
            exit::PARSE,
            format!(
                "input is not valid UTF-8 (byte offset {})",
                e.utf8_error().valid_up_to()
            ),
        )
    })
}

fn write_output(io: &IoArgs, content: &str) -> CliResult {
    let fail = |e: std::io::Error| CliError::new(exit::GENERIC, format!("writing output: {e}"));
    match is_stdio(&io.output) {
        Some(path) => {
            let dir = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
            tmp.write_all(content.as_bytes()).map_err(fail)?;
            tmp.persist(path).map_err(|e| fail(e.error))?;
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes()).map_err(fail)?;
            out.flush().map_err(fail)
        }
    }
}

fn trim_newline(s: &str) -> &str {
    s.strip_suffix('\n')
        .map(|s| s.strip_suffix('\r').unwrap_or(s))
        .unwrap_or(s)
}

fn cmd_detect(args: &DetectArgs, porcelain: bool) -> CliResult {
    let text = normalize(&read_input(&args.io)?);
    if args.segments {
        return write_segments(&text, &args.io, porcelain);
    }
    let d = detect(&text)?;
    let sep = if porcelain { '\t' } else { ' ' };
    write_output(&args.io, &format!("{}{sep}{:.2}\n", d.script, d.confidence))
}

fn write_segments(text: &str, io: &IoArgs, porcelain: bool) -> CliResult {
    let segments = detect_segments(text);
    if segments.is_empty() {
        return Err(ScriptError::NoAlphabeticContent.into());
    }
    let mut out = String::new();
    for s in segments {
        if porcelain {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                s.script, s.start_char, s.end_char, s.text
            ));
        } else {
            out.push_str(&format!(
                "{} [{}..{}) {:?}\n",
                s.script, s.start_char, s.end_char, s.text
            ));
        }
    }
    write_output(io, &out)
}

fn cmd_translit(args: &TranslitArgs) -> CliResult {
    let text = read_input(&args.io)?;
    let mut t = Transliterator::new(&args.lang, args.from, args.to)?;
    if args.strict {
        t = t.strict();
    }
    let out = t.transliterate(&text)?;
    write_output(&args.io, &out)
}

fn cmd_tokenize(args: &TokenizeArgs, porcelain: bool) -> CliResult {
    let text = normalize(&read_input(&args.io)?);
    let script = match args.script {
        Some(s) => s,
        None => match detect(&text) {
            Ok(d) => d.script,
            Err(_) => turkic_core::scripts::lookup_language(&args.lang)?.default_script,
        },
    };
    let rules = TokenizerRules::for_language(&args.lang, script);
    let mut blocks = Vec::new();
    for sent in tokenize_sentences(&text, &rules) {
        let mut block = String::new();
        for tok in &sent.tokens {
            if porcelain {
                let (s, e) = (tok.start_char.unwrap_or(0), tok.end_char.unwrap_or(0));
                block.push_str(&format!("{s}\t{e}\t{}\n", tok.text));
            } else {
                block.push_str(&tok.text);
                block.push('\n');
            }
        }
        blocks.push(block);
    }
    write_output(&args.io, &blocks.join("\n"))
}

fn cmd_run(args: &RunArgs, porcelain: bool) -> CliResult {
    let format: OutputFormat = match (args.format, args.json, args.conllu) {
        (Some(f), _, _) => f.into(),
        (None, true, _) => OutputFormat::Json,
        _ => OutputFormat::Conllu,
    };
    let mut config = PipelineConfig::new(&args.lang, &args.processors);
    config.script = args.script;
    for (p, b) in &args.backends {
        config = config.with_backend(p, b);
    }
    let manifest = Arc::new(args.catalog.manifest()?);
    let pipeline = Pipeline::new(&config, manifest, Arc::new(ProcessorRegistry::new()))?
        .with_cache(args.catalog.cache())
        .with_jobs(args.jobs);

    let text = read_input(&args.io)?;
    let (rendered, summary) = pipeline.process_text(&text, format, args.per_line)?;
    write_output(&args.io, &rendered)?;
    if args.per_line || is_stdio(&args.io.output).is_some() {
        let line = if porcelain {
            format!(
                "{}\t{}\t{}\t{}\t{}",
                summary.documents,
                summary.sentences,
                summary.tokens,
                summary.words,
                summary.failures
            )
        } else {
            format!(
                "documents={} sentences={} tokens={} words={} failures={}",
                summary.documents,
                summary.sentences,
                summary.tokens,
                summary.words,
                summary.failures
            )
        };
        eprintln!("{line}");
        for e in &summary.errors {
            eprintln!("line {}: {}", e.line, e.message);
        }
    }
    if summary.failures > 0 {
        return Err(CliError::new(
            exit::GENERIC,
            format!("{} input line(s) failed", summary.failures),
        ));
    }
    Ok(())
}

fn cmd_convert(args: &ConvertArgs) -> CliResult {
    let text = read_input(&args.io)?;
    let docs: Vec<Document> = match args.from {
        DocFormat::Conllu => {
            vec![from_conllu(&text).map_err(|e| CliError::new(exit::PARSE, e.to_string()))?]
        }
        DocFormat::Json => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| from_json(l).map_err(|e| CliError::new(exit::PARSE, e.to_string())))
            .collect::<Result<_, _>>()?,
    };
    let out: String = docs
        .iter()
        .map(|d| OutputFormat::from(args.to).serialize(d))
        .collect();
    write_output(&args.io, &out)
}

fn cmd_catalog(args: &CatalogArgs, porcelain: bool) -> CliResult {
    let manifest = args.source.manifest()?;
    match &args.action {
        CatalogAction::List(f) => {
            let filter = CatalogFilter {
                lang: f.lang.clone(),
                script: f.script,
                processor: f.processor.clone(),
                quality: f.quality,
            };
            let mut out = String::new();
            for e in registry::discover(&manifest, &filter) {
                if porcelain {
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                        e.lang, e.script, e.processor, e.backend, e.version, e.quality, e.license
                    ));
                } else {
                    out.push_str(&format!(
                        "{:<4} {:<4} {:<10} {:<10} {:<6} {:<10} {}\n",
                        e.lang, e.script, e.processor, e.backend, e.version, e.quality, e.license
                    ));
                }
            }
            print!("{out}");
            Ok(())
        }
        CatalogAction::Download {
            lang,
            processors,
            script,
        } => {
            let cache = args.source.cache();
            let procs: Vec<&str> = processors.iter().map(String::as_str).collect();
            let outcomes =
                registry::download(&manifest, &cache, &DefaultFetcher, lang, &procs, *script)?;
            for o in outcomes {
                let status = match o.status {
                    DownloadStatus::Fetched => "fetched",
                    DownloadStatus::Cached => "cached",
                };
                let sep = if porcelain { "\t" } else { " " };
                println!("{status}{sep}{}", o.path.display());
            }
            Ok(())
        }
        CatalogAction::Verify => {
            let report = registry::verify_cache(&args.source.cache(), &manifest);
            let sep = if porcelain { "\t" } else { " " };
            for (label, paths) in [
                ("ok", &report.ok),
                ("corrupt", &report.corrupt),
                ("orphaned", &report.orphaned),
            ] {
                for p in paths {
                    println!("{label}{sep}{}", p.display());
                }
            }
            if report.corrupt.is_empty() {
                Ok(())
            } else {
                Err(CliError::new(
                    exit::CHECKSUM,
                    format!("{} corrupt cache file(s)", report.corrupt.len()),
                ))
            }
        }
    }
}

fn cmd_fertility(args: &FertilityArgs) -> CliResult {
    let text = read_input(&args.io)?;
    let mut corpus: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(CliError::new(
                exit::PARSE,
                format!("line {}: expected lang<TAB>sentence", i + 1),
            ));
        }
        corpus
            .entry(cols[0].to_string())
            .or_default()
            .push(cols[cols.len() - 1].to_string());
    }
    let mut adapters: Vec<Box<dyn SubwordTokenizerAdapter>> = Vec::new();
    for kind in &args.adapter {
        adapters.push(match kind {
            AdapterKind::Identity => Box::new(IdentityAdapter),
            AdapterKind::Char => Box::new(CharAdapter),
            AdapterKind::ToyBpe => Box::new(BpeAdapter::toy_latin()),
            AdapterKind::Bpe => {
                let merges = args
                    .merges
                    .as_deref()
                    .ok_or_else(|| CliError::new(exit::GENERIC, "--adapter bpe needs --merges"))?;
                let bpe = BpeAdapter::from_files(merges, args.vocab.as_deref(), args.byte_level)
                    .map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;
                Box::new(bpe)
            }
        });
    }
    let refs: Vec<&dyn SubwordTokenizerAdapter> = adapters.iter().map(|a| a.as_ref()).collect();
    let cells = metrics::compare(&corpus, &refs)
        .map_err(|e| CliError::new(exit::GENERIC, e.to_string()))?;
    for c in &cells {
        if let Err(e) = &c.result {
            eprintln!("{} / {}: {e}", c.lang, c.tokenizer);
        }
    }
    let out = match args.format {
        TableFormat::Tsv => metrics::to_tsv(&cells),
        TableFormat::Json => format!("{}\n", metrics::to_json(&cells)),
    };
    write_output(&args.io, &out)
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Detect(a) => cmd_detect(a, cli.porcelain),
        Command::Segment(io) => {
            let text = normalize(&read_input(io)?);
            write_segments(trim_newline(&text), io, cli.porcelain)
        }
        Command::Translit(a) => cmd_translit(a),
        Command::Tokenize(a) => cmd_tokenize(a, cli.porcelain),
        Command::Run(a) => cmd_run(a, cli.porcelain),
        Command::Convert(a) => cmd_convert(a),
        Command::Catalog(a) => cmd_catalog(a, cli.porcelain),
        Command::Fertility(a) => cmd_fertility(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::GENERIC } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
