//! Per-word TF-IDF statistics and the low-score insertion pool.
//!
//! Every non-empty sentence is one document. For word `w` in document `d`:
//! `tf = count(w, d) / |d|`, `idf = ln(N / df(w))` and the score is their
//! product. A word's summary score is the mean over the documents that
//! contain it; the pool holds the lowest-scoring fraction of the vocabulary.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::Rng;
use thiserror::Error;

pub const DEFAULT_POOL_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum TfidfError {
    #[error("no non-empty sentence to fit on")]
    EmptyCorpus,
    #[error("pool fraction {0} outside (0, 1]")]
    PoolFraction(f64),
    #[error("insertion pool is empty")]
    PoolExhausted,
    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: io::Error },
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordStats {
    pub doc_freq: usize,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    doc_count: usize,
    pool_fraction: f64,
    stats: HashMap<String, WordStats>,
    pool: Vec<String>,
}

impl TfidfModel {
    /// Fits the model on tokenized sentences. Empty sentences are skipped.
    pub fn fit<S: AsRef<[T]>, T: AsRef<str>>(sentences: &[S], pool_fraction: f64) -> Result<Self, TfidfError> {
        check_fraction(pool_fraction)?;
        let mut doc_count = 0usize;
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        // per-document relative term frequencies, kept until idf is known
        let mut term_freqs: Vec<Vec<(String, f64)>> = Vec::new();
        for sentence in sentences {
            let tokens = sentence.as_ref();
            if tokens.is_empty() {
                continue;
            }
            doc_count += 1;
            let mut counts: HashMap<&str, usize> = HashMap::new();
            for t in tokens {
                *counts.entry(t.as_ref()).or_default() += 1;
            }
            let len = tokens.len() as f64;
            let mut doc = Vec::with_capacity(counts.len());
            for (w, c) in counts {
                *doc_freq.entry(w.to_owned()).or_default() += 1;
                doc.push((w.to_owned(), c as f64 / len));
            }
            term_freqs.push(doc);
        }
        if doc_count == 0 {
            return Err(TfidfError::EmptyCorpus);
        }

        let n = doc_count as f64;
        let mut score_sums: HashMap<String, f64> = HashMap::with_capacity(doc_freq.len());
        for doc in term_freqs {
            for (w, tf) in doc {
                let idf = (n / doc_freq[&w] as f64).ln();
                *score_sums.entry(w).or_default() += tf * idf;
            }
        }
        let stats = doc_freq
            .into_iter()
            .map(|(w, df)| {
                let mean_score = score_sums[&w] / df as f64;
                (
                    w,
                    WordStats {
                        doc_freq: df,
                        mean_score,
                    },
                )
            })
            .collect();
        Ok(Self::from_stats(doc_count, pool_fraction, stats))
    }

    fn from_stats(doc_count: usize, pool_fraction: f64, stats: HashMap<String, WordStats>) -> Self {
        let mut ranked: Vec<(&String, f64)> = stats.iter().map(|(w, s)| (w, s.mean_score)).collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        let size = pool_size(pool_fraction, ranked.len());
        let pool = ranked.into_iter().take(size).map(|(w, _)| w.clone()).collect();
        Self {
            doc_count,
            pool_fraction,
            stats,
            pool,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn pool_fraction(&self) -> f64 {
        self.pool_fraction
    }

    pub fn vocab_size(&self) -> usize {
        self.stats.len()
    }

    pub fn stats(&self, word: &str) -> Option<&WordStats> {
        self.stats.get(word)
    }

    pub fn doc_freq(&self, word: &str) -> Option<usize> {
        self.stats.get(word).map(|s| s.doc_freq)
    }

    pub fn idf(&self, word: &str) -> Option<f64> {
        self.doc_freq(word).map(|df| (self.doc_count as f64 / df as f64).ln())
    }

    pub fn mean_score(&self, word: &str) -> Option<f64> {
        self.stats.get(word).map(|s| s.mean_score)
    }

    /// Lowest-scoring words, ascending by score then by word.
    pub fn pool(&self) -> &[String] {
        &self.pool
    }

    /// Uniform draw from the pool.
    pub fn sample_insert_word<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&str, TfidfError> {
        if self.pool.is_empty() {
            return Err(TfidfError::PoolExhausted);
        }
        Ok(&self.pool[rng.random_range(0..self.pool.len())])
    }

    /// Line-oriented serialization: a header then `word doc_freq mean_score`
    /// rows sorted by word.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "#tfidf v1 doc_count={} pool_fraction={}\n",
            self.doc_count, self.pool_fraction
        );
        let mut words: Vec<&String> = self.stats.keys().collect();
        words.sort();
        for w in words {
            let s = &self.stats[w];
            let _ = writeln!(out, "{w} {} {}", s.doc_freq, s.mean_score);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TfidfError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let format_err = |line: usize, reason: &str| TfidfError::Format {
            line,
            reason: reason.to_owned(),
        };
        let mut doc_count = None;
        let mut pool_fraction = None;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("#tfidf") || fields.next() != Some("v1") {
            return Err(format_err(1, "expected \"#tfidf v1\" header"));
        }
        for field in fields {
            match field.split_once('=') {
                Some(("doc_count", v)) => doc_count = v.parse::<usize>().ok(),
                Some(("pool_fraction", v)) => pool_fraction = v.parse::<f64>().ok(),
                _ => return Err(format_err(1, &format!("unknown header field {field:?}"))),
            }
        }
        let doc_count = doc_count.ok_or_else(|| format_err(1, "missing doc_count"))?;
        let pool_fraction = pool_fraction.ok_or_else(|| format_err(1, "missing pool_fraction"))?;
        check_fraction(pool_fraction)?;

        let mut stats = HashMap::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let parts: Vec<&str> = line.split(' ').collect();
            let [word, df, score] = parts[..] else {
                return Err(format_err(line_no, "expected \"word doc_freq mean_score\""));
            };
            let doc_freq: usize = df.parse().map_err(|_| format_err(line_no, "bad doc_freq"))?;
            let mean_score: f64 = score.parse().map_err(|_| format_err(line_no, "bad mean_score"))?;
            if doc_freq == 0 || doc_freq > doc_count {
                return Err(format_err(line_no, "doc_freq outside 1..=doc_count"));
            }
            stats.insert(word.to_owned(), WordStats { doc_freq, mean_score });
        }
        Ok(Self::from_stats(doc_count, pool_fraction, stats))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TfidfError> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|err| TfidfError::Io {
            path: path.to_path_buf(),
            err,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TfidfError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|err| TfidfError::Io {
            path: path.to_path_buf(),
            err,
        })?;
        Self::from_text(&text)
    }
}

fn check_fraction(f: f64) -> Result<(), TfidfError> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(TfidfError::PoolFraction(f))
    }
}

/// `ceil(fraction * vocab)`, computed so that exact products are not pushed
/// up by floating-point noise.
fn pool_size(fraction: f64, vocab: usize) -> usize {
    let raw = fraction * vocab as f64;
    let size = (raw - 1e-9 * raw.max(1.0)).ceil().max(0.0) as usize;
    size.min(vocab)
}
