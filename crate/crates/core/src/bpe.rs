//! Byte-pair-encoding subword segmentation.
//!
//! Words are split into characters, the last one carrying the end-of-word
//! sentinel `</w>`. Learning greedily merges the most frequent adjacent
//! symbol pair until the merge budget is spent or no pair occurs at least
//! twice. Application replays the merges by priority, and every subword that
//! is not the last of its word gets the continuation marker appended.
//!
//! Literal occurrences of the marker (and of the sentinel and the escape
//! character) inside tokens are escaped before segmentation, so reverting
//! never confuses text with markup.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const DEFAULT_MARKER: &str = "@@";
pub const DEFAULT_MERGES: usize = 20_000;
pub const END_OF_WORD: &str = "</w>";

const ESC: char = '\u{E000}';
const MIN_PAIR_FREQ: u64 = 2;

#[derive(Debug, Error)]
pub enum BpeError {
    #[error("cannot learn from an empty corpus")]
    EmptyCorpus,
    #[error("invalid marker {0:?}")]
    InvalidMarker(String),
    #[error("dangling continuation marker at end of sequence")]
    DanglingMarker,
    #[error("malformed subword sequence: {0}")]
    Malformed(String),
    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: io::Error },
    #[error("model line {line}: {reason}")]
    Format { line: usize, reason: String },
}

/// Ordered merge list plus the continuation marker.
#[derive(Debug, Clone)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    marker: String,
    n_merges: usize,
    symbol_ids: HashMap<String, u32>,
    pair_ranks: HashMap<(u32, u32), (usize, u32)>,
}

impl PartialEq for BpeModel {
    fn eq(&self, other: &Self) -> bool {
        self.merges == other.merges && self.marker == other.marker && self.n_merges == other.n_merges
    }
}

const UNKNOWN_SYMBOL: u32 = u32::MAX;

impl BpeModel {
    /// Builds a model from an explicit merge list.
    pub fn new(merges: Vec<(String, String)>, marker: &str, n_merges: usize) -> Result<Self, BpeError> {
        validate_marker(marker)?;
        if merges.len() > n_merges {
            return Err(BpeError::Malformed(format!(
                "{} merges exceed the budget of {n_merges}",
                merges.len()
            )));
        }
        let mut symbol_ids: HashMap<String, u32> = HashMap::new();
        let mut intern = |s: &str| -> u32 {
            let next = symbol_ids.len() as u32;
            *symbol_ids.entry(s.to_owned()).or_insert(next)
        };
        let mut pair_ranks = HashMap::with_capacity(merges.len());
        for (rank, (left, right)) in merges.iter().enumerate() {
            if left.is_empty() || right.is_empty() {
                return Err(BpeError::Malformed(format!("empty symbol in merge {}", rank + 1)));
            }
            let key = (intern(left), intern(right));
            let merged = intern(&format!("{left}{right}"));
            if pair_ranks.insert(key, (rank, merged)).is_some() {
                return Err(BpeError::Malformed(format!("duplicate merge {left:?} {right:?}")));
            }
        }
        Ok(Self {
            merges,
            marker: marker.to_owned(),
            n_merges,
            symbol_ids,
            pair_ranks,
        })
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }

    pub fn n_merges(&self) -> usize {
        self.n_merges
    }

    /// Segments every token; non-final pieces carry the marker suffix.
    pub fn apply<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len() * 2);
        for token in tokens {
            self.segment_into(token.as_ref(), &mut out);
        }
        out
    }

    /// Segments one word into subword strings, sentinel removed and markers added.
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        let mut out = Vec::new();
        self.segment_into(word, &mut out);
        out
    }

    fn segment_into(&self, word: &str, out: &mut Vec<String>) {
        if word.is_empty() {
            return;
        }
        let mut symbols = initial_symbols(&escape(word, &self.marker));
        let mut ids: Vec<u32> = symbols
            .iter()
            .map(|s| self.symbol_ids.get(s).copied().unwrap_or(UNKNOWN_SYMBOL))
            .collect();
        while ids.len() > 1 {
            let best = ids
                .windows(2)
                .filter_map(|w| {
                    self.pair_ranks
                        .get(&(w[0], w[1]))
                        .map(|&(rank, merged)| (rank, w[0], w[1], merged))
                })
                .min_by_key(|&(rank, ..)| rank);
            let Some((_, left, right, merged)) = best else {
                break;
            };
            let mut i = 0;
            let mut next_ids = Vec::with_capacity(ids.len());
            let mut next_symbols = Vec::with_capacity(ids.len());
            while i < ids.len() {
                if i + 1 < ids.len() && ids[i] == left && ids[i + 1] == right {
                    next_ids.push(merged);
                    next_symbols.push(format!("{}{}", symbols[i], symbols[i + 1]));
                    i += 2;
                } else {
                    next_ids.push(ids[i]);
                    next_symbols.push(std::mem::take(&mut symbols[i]));
                    i += 1;
                }
            }
            ids = next_ids;
            symbols = next_symbols;
        }
        let last = symbols.len() - 1;
        for (i, mut piece) in symbols.into_iter().enumerate() {
            if i == last {
                piece.truncate(piece.len() - END_OF_WORD.len());
            } else {
                piece.push_str(&self.marker);
            }
            out.push(piece);
        }
    }

    /// Inverse of [`apply`](Self::apply).
    pub fn revert<S: AsRef<str>>(&self, subwords: &[S]) -> Result<Vec<String>, BpeError> {
        revert_bpe(subwords, &self.marker)
    }

    /// `#bpe v1 n_merges=<n> marker=<m>` header then one `left right` line per merge.
    pub fn to_text(&self) -> String {
        let mut out = format!("#bpe v1 n_merges={} marker={}\n", self.n_merges, self.marker);
        for (l, r) in &self.merges {
            let _ = writeln!(out, "{l} {r}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, BpeError> {
        let err = |line: usize, reason: String| BpeError::Format { line, reason };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let mut fields = header.split(' ');
        if fields.next() != Some("#bpe") || fields.next() != Some("v1") {
            return Err(err(1, format!("expected \"#bpe v1\" header, found {header:?}")));
        }
        let (mut n_merges, mut marker) = (None, None);
        for field in fields {
            match field.split_once('=') {
                Some(("n_merges", v)) => {
                    n_merges = Some(v.parse::<usize>().map_err(|_| err(1, format!("bad n_merges {v:?}")))?)
                }
                Some(("marker", v)) => marker = Some(v.to_owned()),
                _ => return Err(err(1, format!("unknown header field {field:?}"))),
            }
        }
        let n_merges = n_merges.ok_or_else(|| err(1, "missing n_merges".into()))?;
        let marker = marker.ok_or_else(|| err(1, "missing marker".into()))?;
        let mut merges = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => merges.push((l.to_owned(), r.to_owned())),
                _ => return Err(err(i + 2, format!("expected \"left right\", found {line:?}"))),
            }
        }
        Self::new(merges, &marker, n_merges)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BpeError> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|err| BpeError::Io {
            path: path.to_path_buf(),
            err,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BpeError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|err| BpeError::Io {
            path: path.to_path_buf(),
            err,
        })?;
        Self::from_text(&text)
    }
}

/// Rejects markers that could collide with escaping or the model file format.
fn validate_marker(marker: &str) -> Result<(), BpeError> {
    let bad = marker.is_empty()
        || marker.contains(END_OF_WORD)
        || marker
            .chars()
            .any(|c| c.is_whitespace() || c == ESC || matches!(c, '0' | '1' | '2'));
    if bad {
        Err(BpeError::InvalidMarker(marker.to_owned()))
    } else {
        Ok(())
    }
}

/// Replaces the escape character, the marker and the sentinel with
/// two-character escape sequences, scanning left to right.
fn escape(word: &str, marker: &str) -> String {
    if !word.contains(ESC) && !word.contains(marker) && !word.contains(END_OF_WORD) {
        return word.to_owned();
    }
    let mut out = String::with_capacity(word.len() + 4);
    let mut rest = word;
    while let Some(c) = rest.chars().next() {
        if rest.starts_with(marker) {
            out.push(ESC);
            out.push('1');
            rest = &rest[marker.len()..];
        } else if rest.starts_with(END_OF_WORD) {
            out.push(ESC);
            out.push('2');
            rest = &rest[END_OF_WORD.len()..];
        } else {
            out.push(c);
            if c == ESC {
                out.push('0');
            }
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

fn unescape(word: &str, marker: &str) -> Result<String, BpeError> {
    if !word.contains(ESC) {
        return Ok(word.to_owned());
    }
    let mut out = String::with_capacity(word.len());
    let mut chars = word.chars();
    while let Some(c) = chars.next() {
        if c != ESC {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('0') => out.push(ESC),
            Some('1') => out.push_str(marker),
            Some('2') => out.push_str(END_OF_WORD),
            _ => return Err(BpeError::Malformed(format!("bad escape sequence in {word:?}"))),
        }
    }
    Ok(out)
}

fn initial_symbols(word: &str) -> Vec<String> {
    let mut symbols: Vec<String> = word.chars().map(String::from).collect();
    if let Some(last) = symbols.last_mut() {
        last.push_str(END_OF_WORD);
    }
    symbols
}

/// Joins marker-suffixed fragments back into words.
pub fn revert_bpe<S: AsRef<str>>(subwords: &[S], marker: &str) -> Result<Vec<String>, BpeError> {
    let mut out = Vec::new();
    let mut pending = String::new();
    let mut open = false;
    for piece in subwords {
        let piece = piece.as_ref();
        if let Some(stem) = piece.strip_suffix(marker) {
            if stem.is_empty() {
                return Err(BpeError::Malformed("fragment with only a marker".into()));
            }
            pending.push_str(stem);
            open = true;
        } else {
            pending.push_str(piece);
            out.push(unescape(&std::mem::take(&mut pending), marker)?);
            open = false;
        }
    }
    if open {
        return Err(BpeError::DanglingMarker);
    }
    Ok(out)
}

/// Learns up to `n_merges` merges with the default marker.
pub fn learn_bpe<S: AsRef<[T]>, T: AsRef<str>>(sentences: &[S], n_merges: usize) -> Result<BpeModel, BpeError> {
    learn_bpe_traced(sentences, n_merges, DEFAULT_MARKER).map(|(model, _)| model)
}

struct WordEntry {
    symbols: Vec<u32>,
    count: u64,
}

type Pair = (u32, u32);
/// Count, then the pair's strings reversed so ties pop the smaller pair.
type HeapEntry = (u64, Reverse<(String, String)>, Pair);

/// Learns merges and also returns the pair frequency at the moment each
/// merge was selected.
pub fn learn_bpe_traced<S: AsRef<[T]>, T: AsRef<str>>(
    sentences: &[S],
    n_merges: usize,
    marker: &str,
) -> Result<(BpeModel, Vec<u64>), BpeError> {
    validate_marker(marker)?;
    let mut word_counts: HashMap<String, u64> = HashMap::new();
    for sentence in sentences {
        for token in sentence.as_ref() {
            let token = token.as_ref();
            if !token.is_empty() {
                *word_counts.entry(escape(token, marker)).or_default() += 1;
            }
        }
    }
    if word_counts.is_empty() {
        return Err(BpeError::EmptyCorpus);
    }
    let mut vocab: Vec<(String, u64)> = word_counts.into_iter().collect();
    vocab.sort_unstable();

    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |s: String, names: &mut Vec<String>| -> u32 {
        *ids.entry(s).or_insert_with_key(|k| {
            names.push(k.clone());
            (names.len() - 1) as u32
        })
    };

    let mut words: Vec<WordEntry> = vocab
        .into_iter()
        .map(|(w, count)| WordEntry {
            symbols: initial_symbols(&w).into_iter().map(|s| intern(s, &mut names)).collect(),
            count,
        })
        .collect();

    let mut pair_counts: HashMap<Pair, u64> = HashMap::new();
    let mut pair_words: HashMap<Pair, HashSet<usize>> = HashMap::new();
    for (wi, word) in words.iter().enumerate() {
        for p in word.symbols.windows(2) {
            *pair_counts.entry((p[0], p[1])).or_default() += word.count;
            pair_words.entry((p[0], p[1])).or_default().insert(wi);
        }
    }

    let mut heap: BinaryHeap<HeapEntry> = pair_counts
        .iter()
        .map(|(&pair, &c)| {
            (
                c,
                Reverse((names[pair.0 as usize].clone(), names[pair.1 as usize].clone())),
                pair,
            )
        })
        .collect();

    let mut merges = Vec::new();
    let mut freqs = Vec::new();
    while merges.len() < n_merges {
        let Some((count, Reverse((left, right)), pair)) = heap.pop() else {
            break;
        };
        if pair_counts.get(&pair).copied().unwrap_or(0) != count {
            continue;
        }
        if count < MIN_PAIR_FREQ {
            break;
        }
        let merged = intern(format!("{left}{right}"), &mut names);
        merges.push((left, right));
        freqs.push(count);

        let mut delta: HashMap<Pair, i64> = HashMap::new();
        let mut affected: Vec<usize> = pair_words.remove(&pair).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        for wi in affected {
            let word = &mut words[wi];
            if !word.symbols.windows(2).any(|p| (p[0], p[1]) == pair) {
                continue;
            }
            let c = word.count as i64;
            for p in word.symbols.windows(2) {
                *delta.entry((p[0], p[1])).or_default() -= c;
            }
            word.symbols = merge_pair(&word.symbols, pair, merged);
            for p in word.symbols.windows(2) {
                *delta.entry((p[0], p[1])).or_default() += c;
                pair_words.entry((p[0], p[1])).or_default().insert(wi);
            }
        }
        for (p, d) in delta {
            if d == 0 {
                continue;
            }
            let entry = pair_counts.entry(p).or_default();
            *entry = (*entry as i64 + d) as u64;
            let now = *entry;
            if now == 0 {
                pair_counts.remove(&p);
            } else {
                heap.push((
                    now,
                    Reverse((names[p.0 as usize].clone(), names[p.1 as usize].clone())),
                    p,
                ));
            }
        }
    }
    let model = BpeModel::new(merges, marker, n_merges)?;
    Ok((model, freqs))
}

/// Replaces every non-overlapping occurrence of `pair`, left to right.
fn merge_pair(symbols: &[u32], pair: Pair, merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && (symbols[i], symbols[i + 1]) == pair {
            out.push(merged);
            i += 2;
        } else {
            out.push(symbols[i]);
            i += 1;
        }
    }
    out
}
