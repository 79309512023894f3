//! Aligned parallel corpora: loading, cleaning, statistics and serialization.
//!
//! A corpus lives on disk as two UTF-8 files with one sentence per line,
//! where line `i` of the source file translates line `i` of the target file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::tokenize::{clean_and_tokenize, normalize_whitespace};

/// Pairs with more tokens than this on either side are dropped on load.
pub const DEFAULT_MAX_TOKENS: usize = 250;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: io::Error },
    #[error(
        "line count mismatch: {} has {src_lines} lines but {} has {tgt_lines}",
        src_path.display(),
        tgt_path.display()
    )]
    Alignment {
        src_path: PathBuf,
        src_lines: usize,
        tgt_path: PathBuf,
        tgt_lines: usize,
    },
    #[error("{}:{line}: invalid UTF-8", path.display())]
    Encoding { path: PathBuf, line: usize },
    #[error("unknown split {0:?} (expected train, dev or test)")]
    UnknownSplit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" | "valid" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(CorpusError::UnknownSplit(other.to_owned())),
        }
    }
}

/// Which half of a sentence pair an operation works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

/// One aligned translation pair.
///
/// The raw fields hold whitespace-normalized text with its original casing;
/// the token fields are always the tokenization of the raw fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source_raw: String,
    pub target_raw: String,
    pub source_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub domain: String,
    pub split: Split,
}

impl SentencePair {
    pub fn new(source: &str, target: &str, domain: &str, split: Split) -> Self {
        let source_raw = normalize_whitespace(source);
        let target_raw = normalize_whitespace(target);
        Self {
            source_tokens: clean_and_tokenize(&source_raw),
            target_tokens: clean_and_tokenize(&target_raw),
            source_raw,
            target_raw,
            domain: domain.to_owned(),
            split,
        }
    }

    pub fn raw(&self, side: Side) -> &str {
        match side {
            Side::Source => &self.source_raw,
            Side::Target => &self.target_raw,
        }
    }

    pub fn tokens(&self, side: Side) -> &[String] {
        match side {
            Side::Source => &self.source_tokens,
            Side::Target => &self.target_tokens,
        }
    }

    /// Copy of this pair with `side` replaced by `text`; the other side is
    /// carried over untouched.
    pub fn with_side(&self, side: Side, text: &str) -> Self {
        let raw = normalize_whitespace(text);
        let tokens = clean_and_tokenize(&raw);
        let mut pair = self.clone();
        match side {
            Side::Source => {
                pair.source_raw = raw;
                pair.source_tokens = tokens;
            }
            Side::Target => {
                pair.target_raw = raw;
                pair.target_tokens = tokens;
            }
        }
        pair
    }
}

/// Ordered collection of sentence pairs for one language direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub source_lang: String,
    pub target_lang: String,
    pairs: Vec<SentencePair>,
}

impl Corpus {
    pub fn new(source_lang: &str, target_lang: &str) -> Self {
        Self {
            source_lang: source_lang.to_owned(),
            target_lang: target_lang.to_owned(),
            pairs: Vec::new(),
        }
    }

    pub fn from_pairs(source_lang: &str, target_lang: &str, pairs: Vec<SentencePair>) -> Self {
        Self {
            source_lang: source_lang.to_owned(),
            target_lang: target_lang.to_owned(),
            pairs,
        }
    }

    pub fn push(&mut self, pair: SentencePair) {
        self.pairs.push(pair);
    }

    pub fn extend(&mut self, other: Corpus) {
        self.pairs.extend(other.pairs);
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<SentencePair> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SentencePair> {
        self.pairs.iter()
    }

    /// Token lists of one side, in corpus order.
    pub fn side_tokens(&self, side: Side) -> Vec<Vec<String>> {
        self.pairs.iter().map(|p| p.tokens(side).to_vec()).collect()
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a SentencePair;
    type IntoIter = std::slice::Iter<'a, SentencePair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

/// Filtering applied while loading.
#[derive(Debug, Clone, Copy)]
pub struct CleanPolicy {
    pub max_tokens: usize,
}

impl Default for CleanPolicy {
    fn default() -> Self {
        Self {
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

/// A loaded corpus plus what cleaning removed.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub corpus: Corpus,
    pub line_pairs: usize,
    pub dropped_empty: usize,
    pub dropped_too_long: usize,
}

/// Loads two aligned files with the default cleaning policy.
pub fn load_parallel(
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
    domain: &str,
    split: Split,
) -> Result<Corpus, CorpusError> {
    load_parallel_with(source_path, target_path, domain, split, CleanPolicy::default()).map(|loaded| loaded.corpus)
}

/// Loads two aligned files, dropping pairs where either side is empty or
/// longer than `policy.max_tokens` tokens.
///
/// Language tags are taken from the file extensions (`train.en` gives `en`).
pub fn load_parallel_with(
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
    domain: &str,
    split: Split,
    policy: CleanPolicy,
) -> Result<Loaded, CorpusError> {
    let (src_path, tgt_path) = (source_path.as_ref(), target_path.as_ref());
    let src_lines = read_lines(src_path)?;
    let tgt_lines = read_lines(tgt_path)?;
    if src_lines.len() != tgt_lines.len() {
        return Err(CorpusError::Alignment {
            src_path: src_path.to_path_buf(),
            src_lines: src_lines.len(),
            tgt_path: tgt_path.to_path_buf(),
            tgt_lines: tgt_lines.len(),
        });
    }

    let mut corpus = Corpus::new(&lang_tag(src_path, "src"), &lang_tag(tgt_path, "tgt"));
    let (mut dropped_empty, mut dropped_too_long) = (0, 0);
    for (src, tgt) in src_lines.iter().zip(&tgt_lines) {
        let pair = SentencePair::new(src, tgt, domain, split);
        if pair.source_tokens.is_empty() || pair.target_tokens.is_empty() {
            dropped_empty += 1;
        } else if pair.source_tokens.len() > policy.max_tokens || pair.target_tokens.len() > policy.max_tokens {
            dropped_too_long += 1;
        } else {
            corpus.push(pair);
        }
    }
    Ok(Loaded {
        corpus,
        line_pairs: src_lines.len(),
        dropped_empty,
        dropped_too_long,
    })
}

fn lang_tag(path: &Path, fallback: &str) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .filter(|e| !e.is_empty())
        .unwrap_or(fallback)
        .to_owned()
}

/// Reads a file as UTF-8 lines. A trailing newline does not start a new line
/// and CRLF endings are accepted.
pub fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let bytes = fs::read(path).map_err(|err| CorpusError::Io {
        path: path.to_path_buf(),
        err,
    })?;
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, line)| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            std::str::from_utf8(line)
                .map(str::to_owned)
                .map_err(|_| CorpusError::Encoding {
                    path: path.to_path_buf(),
                    line: i + 1,
                })
        })
        .collect()
}

/// Writes lines joined by LF, each line terminated.
pub fn write_lines<'a, I>(path: &Path, lines: I) -> Result<(), CorpusError>
where
    I: IntoIterator<Item = &'a str>,
{
    let io_err = |err| CorpusError::Io {
        path: path.to_path_buf(),
        err,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for line in lines {
        out.write_all(line.as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Writes both sides of `corpus` with whitespace normalized.
pub fn write_parallel(
    corpus: &Corpus,
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
) -> Result<(), CorpusError> {
    let src: Vec<String> = corpus.iter().map(|p| normalize_whitespace(&p.source_raw)).collect();
    let tgt: Vec<String> = corpus.iter().map(|p| normalize_whitespace(&p.target_raw)).collect();
    write_lines(source_path.as_ref(), src.iter().map(String::as_str))?;
    write_lines(target_path.as_ref(), tgt.iter().map(String::as_str))
}

/// Pair counts for one domain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Dev => self.dev,
            Split::Test => self.test,
        }
    }

    pub fn bump(&mut self, split: Split, by: usize) {
        match split {
            Split::Train => self.train += by,
            Split::Dev => self.dev += by,
            Split::Test => self.test += by,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.dev + self.test
    }
}

/// Per-domain, per-split pair counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub domains: BTreeMap<String, SplitCounts>,
}

impl CorpusStats {
    pub fn count(&self, domain: &str, split: Split) -> usize {
        self.domains.get(domain).map_or(0, |c| c.get(split))
    }

    pub fn split_total(&self, split: Split) -> usize {
        self.domains.values().map(|c| c.get(split)).sum()
    }

    pub fn total(&self) -> usize {
        self.domains.values().map(SplitCounts::total).sum()
    }

    /// Adds another report's counts into this one.
    pub fn merge(&mut self, other: &CorpusStats) {
        for (domain, counts) in &other.domains {
            let entry = self.domains.entry(domain.clone()).or_default();
            for split in Split::ALL {
                entry.bump(split, counts.get(split));
            }
        }
    }

    /// Aligned table, one row per domain plus a total row.
    pub fn render_text(&self) -> String {
        let mut rows: Vec<[String; 5]> = vec![["domain", "train", "dev", "test", "total"].map(String::from)];
        for (domain, c) in &self.domains {
            rows.push([
                domain.clone(),
                c.train.to_string(),
                c.dev.to_string(),
                c.test.to_string(),
                c.total().to_string(),
            ]);
        }
        rows.push([
            "total".to_owned(),
            self.split_total(Split::Train).to_string(),
            self.split_total(Split::Dev).to_string(),
            self.split_total(Split::Test).to_string(),
            self.total().to_string(),
        ]);
        let mut widths = [0usize; 5];
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for row in &rows {
            let mut line = format!("{:<w$}", row[0], w = widths[0]);
            for (cell, w) in row.iter().zip(widths).skip(1) {
                line.push_str(&format!("  {cell:>w$}"));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// `key=value` lines: `<domain>.<split>`, `<domain>.total`,
    /// `total.<split>` and `total`.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        for (domain, c) in &self.domains {
            for split in Split::ALL {
                out.push_str(&format!("{domain}.{split}={}\n", c.get(split)));
            }
            out.push_str(&format!("{domain}.total={}\n", c.total()));
        }
        for split in Split::ALL {
            out.push_str(&format!("total.{split}={}\n", self.split_total(split)));
        }
        out.push_str(&format!("total={}\n", self.total()));
        out
    }
}

/// Counts pairs per domain and split.
pub fn describe(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for pair in corpus {
        stats
            .domains
            .entry(pair.domain.clone())
            .or_default()
            .bump(pair.split, 1);
    }
    stats
}
