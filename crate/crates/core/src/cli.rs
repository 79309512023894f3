//! Command-line front end: one binary, one subcommand per pipeline stage.
//!
//! Every subcommand that writes files also writes a key-value run manifest
//! next to its outputs. The manifest records the toolkit version, seed,
//! every resolved parameter, input digests, a configuration hash and the
//! equivalent command line. The worker count is left out on purpose since
//! outputs do not depend on it.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::augment::mlm::{
    augment_corpus_mlm, HttpBackend, MaskFiller, MlmConfig, StatisticalBackend, DEFAULT_MASK_RATE,
};
use crate::augment::w2v::{augment_corpus_w2v, AugmentationConfig};
use crate::bpe::{learn_bpe_traced, BpeModel, DEFAULT_MARKER, DEFAULT_MERGES};
use crate::corpus::{
    describe, load_parallel_with, read_lines, write_lines, write_parallel, CleanPolicy, Corpus, CorpusError,
    CorpusStats, Side, Split, DEFAULT_MAX_TOKENS,
};
use crate::embeddings::EmbeddingTable;
use crate::metrics::{report, BleuOptions, ScoreOptions};
use crate::parallel::{Workers, WORKERS_ENV};
use crate::tfidf::{TfidfModel, DEFAULT_POOL_FRACTION};
use crate::tokenize::clean_and_tokenize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A failure tagged with the pipeline module it came from.
#[derive(Debug, Error)]
#[error("{module}: {message}")]
pub struct CliError {
    pub module: &'static str,
    pub message: String,
}

fn fail<E: Display>(module: &'static str) -> impl FnOnce(E) -> CliError {
    move |e| CliError {
        module,
        message: e.to_string(),
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "mtaug", version, about = "Parallel-corpus augmentation, BPE and MT scoring")]
struct Cli {
    /// Worker threads for per-sentence stages [default: available cores]
    #[arg(long, global = true, env = "MTAUG_WORKERS")]
    workers: Option<usize>,

    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean aligned corpora and write them per domain and split
    Ingest(IngestArgs),
    /// Count aligned pairs per domain and split
    Stats(StatsArgs),
    /// Augment one side of a parallel corpus
    #[command(subcommand)]
    Augment(AugmentCommand),
    /// Learn, apply or revert byte-pair encoding
    #[command(subcommand)]
    Bpe(BpeCommand),
    /// Score hypotheses against references with BLEU, chrF and METEOR
    Score(ScoreArgs),
}

#[derive(Debug, Subcommand)]
enum AugmentCommand {
    /// Embedding-neighbor replacement plus TF-IDF insertion
    W2v(W2vArgs),
    /// Masked-token filling
    Mlm(MlmArgs),
}

#[derive(Debug, Subcommand)]
enum BpeCommand {
    Learn(BpeLearnArgs),
    Apply(BpeApplyArgs),
    Revert(BpeRevertArgs),
}

/// `domain,split,source-file,target-file`
#[derive(Debug, Clone)]
struct SetSpec {
    domain: String,
    split: Split,
    src: PathBuf,
    tgt: PathBuf,
}

impl FromStr for SetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.splitn(4, ',').collect();
        let [domain, split, src, tgt] = parts[..] else {
            return Err("expected domain,split,source-file,target-file".into());
        };
        if domain.is_empty() || domain.contains(char::is_whitespace) {
            return Err(format!("bad domain name {domain:?}"));
        }
        Ok(Self {
            domain: domain.to_owned(),
            split: split.parse().map_err(|e: CorpusError| e.to_string())?,
            src: src.into(),
            tgt: tgt.into(),
        })
    }
}

impl Display for SetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.domain,
            self.split,
            self.src.display(),
            self.tgt.display()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Source,
    Target,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Source => Side::Source,
            SideArg::Target => Side::Target,
        }
    }
}

impl SideArg {
    fn as_str(self) -> &'static str {
        match self {
            SideArg::Source => "source",
            SideArg::Target => "target",
        }
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long = "set", required = true, value_name = "DOMAIN,SPLIT,SRC,TGT")]
    sets: Vec<SetSpec>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Drop pairs with more tokens than this on either side
    #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
    max_tokens: usize,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "set", required = true, value_name = "DOMAIN,SPLIT,SRC,TGT")]
    sets: Vec<SetSpec>,
    /// Count pairs surviving cleaning instead of raw line pairs
    #[arg(long)]
    clean: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
    max_tokens: usize,
    /// Write `<prefix>.stats` and `<prefix>.manifest`
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairInput {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tgt: PathBuf,
    #[arg(long, value_enum, default_value = "source")]
    side: SideArg,
    #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
    max_tokens: usize,
    /// Writes `<prefix>.<lang>` for both sides plus `.report` and `.manifest`
    #[arg(long, value_name = "PREFIX")]
    out_prefix: PathBuf,
}

#[derive(Debug, Args)]
struct W2vArgs {
    #[command(flatten)]
    io: PairInput,
    /// Word vectors in text format with a "<count> <dim>" header
    #[arg(long)]
    vectors: PathBuf,
    /// Only read the first N vectors
    #[arg(long)]
    max_vectors: Option<usize>,
    #[arg(long, default_value_t = 0.85)]
    threshold: f64,
    #[arg(long, default_value_t = 5)]
    candidates: usize,
    #[arg(long, default_value_t = 2)]
    max_accepted: usize,
    #[arg(long, default_value_t = DEFAULT_POOL_FRACTION)]
    pool_fraction: f64,
    #[arg(long, default_value_t = 5)]
    knn: usize,
}

#[derive(Debug, Args)]
struct MlmArgs {
    #[command(flatten)]
    io: PairInput,
    /// `statistical` or `http:<base-url>`
    #[arg(long, default_value = "statistical")]
    backend: String,
    #[arg(long, default_value_t = DEFAULT_MASK_RATE)]
    rate: f64,
    /// Concurrent requests to an HTTP backend
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    #[arg(long, default_value_t = 30)]
    timeout_secs: u64,
}

#[derive(Debug, Args)]
struct BpeLearnArgs {
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MERGES)]
    merges: usize,
    #[arg(long, default_value = DEFAULT_MARKER)]
    marker: String,
    #[arg(long)]
    model: PathBuf,
    /// Tokenize input lines instead of splitting on whitespace
    #[arg(long)]
    tokenize: bool,
}

#[derive(Debug, Args)]
struct BpeApplyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    tokenize: bool,
}

#[derive(Debug, Args)]
struct BpeRevertArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    lowercase: bool,
    /// Add-one smoothing for BLEU orders above 1
    #[arg(long)]
    bleu_smooth: bool,
    /// Write `<prefix>.score` and `<prefix>.manifest`
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
}

enum Param {
    Value(String),
    Switch(bool),
}

/// Key-value record of one run.
pub struct Manifest {
    subcommand: &'static str,
    seed: u64,
    params: Vec<(&'static str, Param)>,
    inputs: Vec<(String, PathBuf)>,
}

fn shell_quote(s: &str) -> String {
    let plain = !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_./:,@=+-".contains(c));
    if plain {
        s.to_owned()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn file_sha256(path: &Path) -> std::io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl Manifest {
    fn new(subcommand: &'static str, seed: u64) -> Self {
        Self {
            subcommand,
            seed,
            params: Vec::new(),
            inputs: Vec::new(),
        }
    }

    fn value(&mut self, flag: &'static str, v: impl Display) -> &mut Self {
        self.params.push((flag, Param::Value(v.to_string())));
        self
    }

    fn path(&mut self, flag: &'static str, p: &Path) -> &mut Self {
        self.value(flag, p.display())
    }

    fn switch(&mut self, flag: &'static str, on: bool) -> &mut Self {
        self.params.push((flag, Param::Switch(on)));
        self
    }

    fn input(&mut self, name: impl Into<String>, p: &Path) -> &mut Self {
        self.inputs.push((name.into(), p.to_path_buf()));
        self
    }

    fn command_line(&self) -> String {
        let mut parts = vec!["mtaug".to_owned(), self.subcommand.to_owned()];
        parts.push(format!("--seed {}", self.seed));
        for (flag, param) in &self.params {
            match param {
                Param::Value(v) => parts.push(format!("--{flag} {}", shell_quote(v))),
                Param::Switch(true) => parts.push(format!("--{flag}")),
                Param::Switch(false) => {}
            }
        }
        parts.join(" ")
    }

    /// Renders the manifest. Parameter keys may repeat for multi-valued flags.
    pub fn render(&self) -> CliResult<String> {
        let mut config = format!(
            "version={VERSION}\nsubcommand={}\nseed={}\n",
            self.subcommand, self.seed
        );
        for (flag, param) in &self.params {
            match param {
                Param::Value(v) => config.push_str(&format!("param.{flag}={v}\n")),
                Param::Switch(on) => config.push_str(&format!("param.{flag}={on}\n")),
            }
        }
        let hash = hex::encode(Sha256::digest(config.as_bytes()));
        let mut out = config;
        for (name, path) in &self.inputs {
            let digest = file_sha256(path).map_err(|e| CliError {
                module: "manifest",
                message: format!("{}: {e}", path.display()),
            })?;
            out.push_str(&format!("input.{name}.sha256={digest}\n"));
        }
        out.push_str(&format!("config_hash={hash}\n"));
        out.push_str(&format!("command={}\n", self.command_line()));
        Ok(out)
    }

    fn write(&self, path: &Path) -> CliResult {
        write_text(path, &self.render()?, "manifest")
    }
}

fn write_text(path: &Path, text: &str, module: &'static str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError {
        module,
        message: format!("{}: {e}", path.display()),
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// `<prefix>.<lang>` for each side, or `.src` / `.tgt` when the tags clash.
fn side_paths(prefix: &Path, corpus: &Corpus) -> (PathBuf, PathBuf) {
    if corpus.source_lang == corpus.target_lang {
        (with_suffix(prefix, "src"), with_suffix(prefix, "tgt"))
    } else {
        (
            with_suffix(prefix, &corpus.source_lang),
            with_suffix(prefix, &corpus.target_lang),
        )
    }
}

fn resolve_workers(requested: Option<usize>) -> CliResult<Workers> {
    let n = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError {
            module: "workers",
            message: format!("worker count must be at least 1 (check {WORKERS_ENV})"),
        });
    }
    Workers::new(n).map_err(fail("workers"))
}

fn ingest(args: &IngestArgs, seed: u64) -> CliResult {
    fs::create_dir_all(&args.out_dir).map_err(fail("ingest"))?;
    let policy = CleanPolicy {
        max_tokens: args.max_tokens,
    };
    let mut groups: BTreeMap<(String, &'static str), Corpus> = BTreeMap::new();
    let mut report = String::new();
    let mut manifest = Manifest::new("ingest", seed);
    for (i, set) in args.sets.iter().enumerate() {
        let loaded = load_parallel_with(&set.src, &set.tgt, &set.domain, set.split, policy).map_err(fail("corpus"))?;
        report.push_str(&format!(
            "set.{i}={set}\nset.{i}.line_pairs={}\nset.{i}.dropped_empty={}\nset.{i}.dropped_too_long={}\nset.{i}.kept={}\n",
            loaded.line_pairs,
            loaded.dropped_empty,
            loaded.dropped_too_long,
            loaded.corpus.len()
        ));
        manifest
            .value("set", set)
            .input(format!("set.{i}.src"), &set.src)
            .input(format!("set.{i}.tgt"), &set.tgt);
        let key = (set.domain.clone(), set.split.as_str());
        match groups.get_mut(&key) {
            Some(existing) => existing.extend(loaded.corpus),
            None => {
                groups.insert(key, loaded.corpus);
            }
        }
    }
    let mut stats = CorpusStats::default();
    for ((domain, split), corpus) in &groups {
        let (src, tgt) = side_paths(&args.out_dir.join(format!("{domain}.{split}")), corpus);
        write_parallel(corpus, &src, &tgt).map_err(fail("corpus"))?;
        stats.merge(&describe(corpus));
    }
    report.push_str(&stats.render_kv());
    write_text(&args.out_dir.join("ingest.report"), &report, "ingest")?;
    manifest
        .path("out-dir", &args.out_dir)
        .value("max-tokens", args.max_tokens);
    manifest.write(&args.out_dir.join("ingest.manifest"))?;
    print!("{}", stats.render_text());
    Ok(())
}

fn stats(args: &StatsArgs, seed: u64) -> CliResult {
    let mut stats = CorpusStats::default();
    let mut manifest = Manifest::new("stats", seed);
    for (i, set) in args.sets.iter().enumerate() {
        let count = if args.clean {
            let policy = CleanPolicy {
                max_tokens: args.max_tokens,
            };
            load_parallel_with(&set.src, &set.tgt, &set.domain, set.split, policy)
                .map_err(fail("corpus"))?
                .corpus
                .len()
        } else {
            let src = read_lines(&set.src).map_err(fail("corpus"))?.len();
            let tgt = read_lines(&set.tgt).map_err(fail("corpus"))?.len();
            if src != tgt {
                return Err(fail("corpus")(CorpusError::Alignment {
                    src_path: set.src.clone(),
                    src_lines: src,
                    tgt_path: set.tgt.clone(),
                    tgt_lines: tgt,
                }));
            }
            src
        };
        stats
            .domains
            .entry(set.domain.clone())
            .or_default()
            .bump(set.split, count);
        manifest
            .value("set", set)
            .input(format!("set.{i}.src"), &set.src)
            .input(format!("set.{i}.tgt"), &set.tgt);
    }
    print!("{}", stats.render_text());
    if let Some(prefix) = &args.out {
        manifest
            .switch("clean", args.clean)
            .value("max-tokens", args.max_tokens)
            .path("out", prefix);
        write_text(&with_suffix(prefix, "stats"), &stats.render_kv(), "stats")?;
        manifest.write(&with_suffix(prefix, "manifest"))?;
    }
    Ok(())
}

fn load_pair_input(io: &PairInput) -> CliResult<(Corpus, String)> {
    let policy = CleanPolicy {
        max_tokens: io.max_tokens,
    };
    let loaded = load_parallel_with(&io.src, &io.tgt, "input", Split::Train, policy).map_err(fail("corpus"))?;
    let summary = format!(
        "input_line_pairs={}\ninput_dropped_empty={}\ninput_dropped_too_long={}\ninput_pairs={}\n",
        loaded.line_pairs,
        loaded.dropped_empty,
        loaded.dropped_too_long,
        loaded.corpus.len()
    );
    Ok((loaded.corpus, summary))
}

fn pair_manifest(manifest: &mut Manifest, io: &PairInput) {
    manifest
        .path("src", &io.src)
        .path("tgt", &io.tgt)
        .value("side", io.side.as_str())
        .value("max-tokens", io.max_tokens)
        .path("out-prefix", &io.out_prefix)
        .input("src", &io.src)
        .input("tgt", &io.tgt);
}

fn write_augmented(io: &PairInput, out: &Corpus, report: &str, manifest: &Manifest) -> CliResult {
    let (src, tgt) = side_paths(&io.out_prefix, out);
    write_parallel(out, &src, &tgt).map_err(fail("corpus"))?;
    write_text(&with_suffix(&io.out_prefix, "report"), report, "augment")?;
    manifest.write(&with_suffix(&io.out_prefix, "manifest"))
}

fn augment_w2v(args: &W2vArgs, seed: u64, workers: &Workers) -> CliResult {
    let side = Side::from(args.io.side);
    let cfg = AugmentationConfig {
        n_candidates: args.candidates,
        knn: args.knn,
        sim_threshold: args.threshold,
        max_accepted_per_sentence: args.max_accepted,
        seed,
    };
    cfg.validate().map_err(fail("w2v"))?;
    let (corpus, input_summary) = load_pair_input(&args.io)?;
    let (table, issues) = EmbeddingTable::load_limited(&args.vectors, args.max_vectors).map_err(fail("embeddings"))?;
    let tfidf = TfidfModel::fit(&corpus.side_tokens(side), args.pool_fraction).map_err(fail("tfidf"))?;
    let (out, w2v_report) = augment_corpus_w2v(&corpus, side, &table, &tfidf, &cfg, workers).map_err(fail("w2v"))?;

    let mut report = input_summary;
    report.push_str(&format!(
        "vectors_loaded={}\nvector_rows_skipped={}\ntfidf_vocab={}\ntfidf_pool={}\n",
        table.len(),
        issues.len(),
        tfidf.vocab_size(),
        tfidf.pool().len()
    ));
    report.push_str(&w2v_report.render_kv());
    report.push_str(&format!("output_pairs={}\n", out.len()));

    let mut manifest = Manifest::new("augment w2v", seed);
    pair_manifest(&mut manifest, &args.io);
    manifest
        .path("vectors", &args.vectors)
        .input("vectors", &args.vectors)
        .value("threshold", args.threshold)
        .value("candidates", args.candidates)
        .value("max-accepted", args.max_accepted)
        .value("pool-fraction", args.pool_fraction)
        .value("knn", args.knn);
    if let Some(n) = args.max_vectors {
        manifest.value("max-vectors", n);
    }
    write_augmented(&args.io, &out, &report, &manifest)?;
    eprintln!("w2v: {} pairs in, {} pairs out", corpus.len(), out.len());
    Ok(())
}

fn augment_mlm(args: &MlmArgs, seed: u64, workers: &Workers) -> CliResult {
    let side = Side::from(args.io.side);
    let (corpus, input_summary) = load_pair_input(&args.io)?;
    let cfg = MlmConfig { rate: args.rate, seed };
    let (backend, pool): (Box<dyn MaskFiller>, Option<Workers>) = if args.backend == "statistical" {
        let trained = StatisticalBackend::train(&corpus.side_tokens(side)).map_err(fail("mlm"))?;
        (Box::new(trained), None)
    } else if let Some(url) = args.backend.strip_prefix("http:") {
        if args.max_in_flight == 0 {
            return Err(fail("mlm")("in-flight limit must be at least 1"));
        }
        let client = HttpBackend::new(url, Duration::from_secs(args.timeout_secs));
        (
            Box::new(client),
            Some(Workers::new(args.max_in_flight).map_err(fail("workers"))?),
        )
    } else {
        return Err(fail("mlm")(format!(
            "unknown backend {:?} (expected statistical or http:<url>)",
            args.backend
        )));
    };
    let (out, mlm_report) = augment_corpus_mlm(&corpus, side, backend.as_ref(), &cfg, pool.as_ref().unwrap_or(workers))
        .map_err(fail("mlm"))?;

    let mut report = input_summary;
    report.push_str(&mlm_report.render_kv());
    report.push_str(&format!("output_pairs={}\n", out.len()));

    let mut manifest = Manifest::new("augment mlm", seed);
    pair_manifest(&mut manifest, &args.io);
    manifest
        .value("backend", &args.backend)
        .value("rate", args.rate)
        .value("max-in-flight", args.max_in_flight)
        .value("timeout-secs", args.timeout_secs);
    write_augmented(&args.io, &out, &report, &manifest)?;
    eprintln!("mlm: {} pairs in, {} pairs out", corpus.len(), out.len());
    Ok(())
}

fn split_line(line: &str, tokenize: bool) -> Vec<String> {
    if tokenize {
        clean_and_tokenize(line)
    } else {
        line.split_whitespace().map(str::to_owned).collect()
    }
}

fn bpe_learn(args: &BpeLearnArgs, seed: u64) -> CliResult {
    let mut manifest = Manifest::new("bpe learn", seed);
    let mut sentences = Vec::new();
    for (i, path) in args.inputs.iter().enumerate() {
        for line in read_lines(path).map_err(fail("corpus"))? {
            sentences.push(split_line(&line, args.tokenize));
        }
        manifest.path("input", path).input(format!("input.{i}"), path);
    }
    let (model, _) = learn_bpe_traced(&sentences, args.merges, &args.marker).map_err(fail("bpe"))?;
    model.save(&args.model).map_err(fail("bpe"))?;
    manifest
        .value("merges", args.merges)
        .value("marker", &args.marker)
        .path("model", &args.model)
        .switch("tokenize", args.tokenize);
    manifest.write(&with_suffix(&args.model, "manifest"))?;
    eprintln!("bpe: learned {} merges", model.merges().len());
    Ok(())
}

fn bpe_apply(args: &BpeApplyArgs, seed: u64, workers: &Workers) -> CliResult {
    let model = BpeModel::load(&args.model).map_err(fail("bpe"))?;
    let lines = read_lines(&args.input).map_err(fail("corpus"))?;
    let out = workers.map_indexed(lines.len(), |i| {
        model.apply(&split_line(&lines[i], args.tokenize)).join(" ")
    });
    write_lines(&args.output, out.iter().map(String::as_str)).map_err(fail("corpus"))?;
    let mut manifest = Manifest::new("bpe apply", seed);
    manifest
        .path("model", &args.model)
        .path("input", &args.input)
        .path("output", &args.output)
        .switch("tokenize", args.tokenize)
        .input("model", &args.model)
        .input("input", &args.input);
    manifest.write(&with_suffix(&args.output, "manifest"))
}

fn bpe_revert(args: &BpeRevertArgs, seed: u64, workers: &Workers) -> CliResult {
    let model = BpeModel::load(&args.model).map_err(fail("bpe"))?;
    let lines = read_lines(&args.input).map_err(fail("corpus"))?;
    let out = workers.map_indexed(lines.len(), |i| {
        let subwords: Vec<&str> = lines[i].split_whitespace().collect();
        model
            .revert(&subwords)
            .map(|words| words.join(" "))
            .map_err(|e| format!("{}:{}: {e}", args.input.display(), i + 1))
    });
    let out: Vec<String> = out.into_iter().collect::<Result<_, _>>().map_err(fail("bpe"))?;
    write_lines(&args.output, out.iter().map(String::as_str)).map_err(fail("corpus"))?;
    let mut manifest = Manifest::new("bpe revert", seed);
    manifest
        .path("model", &args.model)
        .path("input", &args.input)
        .path("output", &args.output)
        .input("model", &args.model)
        .input("input", &args.input);
    manifest.write(&with_suffix(&args.output, "manifest"))
}

fn score(args: &ScoreArgs, seed: u64) -> CliResult {
    let options = ScoreOptions {
        lowercase: args.lowercase,
        bleu: BleuOptions {
            add_one_smoothing: args.bleu_smooth,
            ..BleuOptions::new()
        },
        ..ScoreOptions::default()
    };
    let result = report(&args.hyp, &args.reference, &options).map_err(fail("metrics"))?;
    print!("{}", result.render_text());
    if let Some(prefix) = &args.out {
        write_text(&with_suffix(prefix, "score"), &result.render_kv(), "metrics")?;
        let mut manifest = Manifest::new("score", seed);
        manifest
            .path("hyp", &args.hyp)
            .path("ref", &args.reference)
            .switch("lowercase", args.lowercase)
            .switch("bleu-smooth", args.bleu_smooth)
            .path("out", prefix)
            .input("hyp", &args.hyp)
            .input("ref", &args.reference);
        manifest.write(&with_suffix(prefix, "manifest"))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> CliResult {
    let seed = cli.seed;
    match &cli.command {
        Command::Ingest(a) => ingest(a, seed),
        Command::Stats(a) => stats(a, seed),
        Command::Score(a) => score(a, seed),
        Command::Bpe(BpeCommand::Learn(a)) => bpe_learn(a, seed),
        Command::Bpe(BpeCommand::Apply(a)) => bpe_apply(a, seed, &resolve_workers(cli.workers)?),
        Command::Bpe(BpeCommand::Revert(a)) => bpe_revert(a, seed, &resolve_workers(cli.workers)?),
        Command::Augment(AugmentCommand::W2v(a)) => augment_w2v(a, seed, &resolve_workers(cli.workers)?),
        Command::Augment(AugmentCommand::Mlm(a)) => augment_mlm(a, seed, &resolve_workers(cli.workers)?),
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
///
/// Returns 0 on success, 2 on a usage error and 1 when a stage fails.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mtaug: error[{}]: {}", e.module, e.message);
            1
        }
    }
}
