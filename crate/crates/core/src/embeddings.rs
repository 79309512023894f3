//! Pretrained word vectors in the fastText `.vec` text format.
//!
//! The file starts with a header line `N D` followed by up to `N` rows of
//! `word v1 ... vD`. Rows with the wrong arity or unparsable values are
//! skipped and reported rather than failing the whole load.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: io::Error },
    #[error("malformed header {header:?}: expected \"<count> <dimension>\"")]
    Header { header: String },
    #[error("no usable vectors in {}", path.display())]
    Empty { path: PathBuf },
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("similarity undefined for a zero vector")]
    ZeroVector,
    #[error("no in-vocabulary token in sentence")]
    NoInVocab,
    #[error("{0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("invalid table: {0}")]
    Invalid(String),
}

/// Why a `.vec` row was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub line: usize,
    pub reason: String,
}

/// Immutable word-to-vector map.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    data: Vec<f32>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

/// Neighbors of a query word, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarWordList {
    pub query: String,
    pub neighbors: Vec<(String, f64)>,
}

impl SimilarWordList {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|(w, _)| w.as_str())
    }
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` rows. Later duplicates of a word
    /// are ignored.
    pub fn from_rows<I>(dimension: usize, rows: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        if dimension == 0 {
            return Err(EmbeddingError::Invalid("dimension must be positive".into()));
        }
        let mut table = Self {
            dimension,
            words: Vec::new(),
            data: Vec::new(),
            norms: Vec::new(),
            index: HashMap::new(),
        };
        for (word, vector) in rows {
            if vector.len() != dimension {
                return Err(EmbeddingError::LengthMismatch {
                    left: vector.len(),
                    right: dimension,
                });
            }
            table.insert(word, &vector);
        }
        if table.words.is_empty() {
            return Err(EmbeddingError::Invalid("table is empty".into()));
        }
        Ok(table)
    }

    fn insert(&mut self, word: String, vector: &[f32]) -> bool {
        if self.index.contains_key(&word) {
            return false;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.norms.push(norm(vector));
        self.data.extend_from_slice(vector);
        true
    }

    /// Reads a `.vec` file. Returns the table and the rows that were skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, Vec<RowIssue>), EmbeddingError> {
        Self::load_limited(path, None)
    }

    /// Like [`load`](Self::load) but keeps at most `limit` words.
    pub fn load_limited(path: impl AsRef<Path>, limit: Option<usize>) -> Result<(Self, Vec<RowIssue>), EmbeddingError> {
        let path = path.as_ref();
        let io_err = |err| EmbeddingError::Io {
            path: path.to_path_buf(),
            err,
        };
        let mut lines = BufReader::new(File::open(path).map_err(io_err)?).lines();
        let header = lines.next().transpose().map_err(io_err)?.unwrap_or_default();
        let (count, dimension) = parse_header(&header)?;
        let wanted = limit.map_or(count, |l| l.min(count));

        let mut table = Self {
            dimension,
            words: Vec::with_capacity(wanted),
            data: Vec::with_capacity(wanted.saturating_mul(dimension)),
            norms: Vec::with_capacity(wanted),
            index: HashMap::with_capacity(wanted),
        };
        let mut issues = Vec::new();
        let mut row = Vec::with_capacity(dimension);
        for (i, line) in lines.enumerate() {
            if table.words.len() >= wanted {
                break;
            }
            let line_no = i + 2;
            let line = line.map_err(io_err)?;
            let mut fields = line.split_ascii_whitespace();
            let Some(word) = fields.next() else {
                issues.push(RowIssue {
                    line: line_no,
                    reason: "blank row".into(),
                });
                continue;
            };
            row.clear();
            let mut bad_value = None;
            for field in fields {
                match field.parse::<f32>() {
                    Ok(v) if v.is_finite() => row.push(v),
                    _ => {
                        bad_value = Some(field.to_owned());
                        break;
                    }
                }
            }
            if let Some(field) = bad_value {
                issues.push(RowIssue {
                    line: line_no,
                    reason: format!("unparsable value {field:?}"),
                });
            } else if row.len() != dimension {
                issues.push(RowIssue {
                    line: line_no,
                    reason: format!("expected {dimension} values, found {}", row.len()),
                });
            } else if !table.insert(word.to_owned(), &row) {
                issues.push(RowIssue {
                    line: line_no,
                    reason: format!("duplicate word {word:?}"),
                });
            }
        }
        if table.words.is_empty() {
            return Err(EmbeddingError::Empty {
                path: path.to_path_buf(),
            });
        }
        Ok((table, issues))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Vocabulary in file order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// The `k` words most cosine-similar to `word`, excluding `word` itself.
    ///
    /// Ties are broken by ascending word order; zero vectors never appear.
    pub fn nearest(&self, word: &str, k: usize) -> Result<SimilarWordList, EmbeddingError> {
        self.nearest_where(word, k, |_| true)
    }

    /// [`nearest`](Self::nearest) restricted to candidates accepted by `keep`.
    pub fn nearest_where<F>(&self, word: &str, k: usize, keep: F) -> Result<SimilarWordList, EmbeddingError>
    where
        F: Fn(&str) -> bool,
    {
        let &q = self
            .index
            .get(word)
            .ok_or_else(|| EmbeddingError::OutOfVocabulary(word.to_owned()))?;
        let q_norm = self.norms[q];
        if q_norm == 0.0 {
            return Err(EmbeddingError::ZeroVector);
        }
        let query = self.row(q);

        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for i in 0..self.words.len() {
            if i == q || self.norms[i] == 0.0 || k == 0 {
                continue;
            }
            let score = clamp_unit(dot(query, self.row(i)) / (q_norm * self.norms[i]));
            if best.len() == k && self.rank(best[k - 1], (score, i)) != Ordering::Greater {
                continue;
            }
            if !keep(&self.words[i]) {
                continue;
            }
            let pos = best.partition_point(|&e| self.rank(e, (score, i)) == Ordering::Less);
            best.insert(pos, (score, i));
            best.truncate(k);
        }
        Ok(SimilarWordList {
            query: word.to_owned(),
            neighbors: best.into_iter().map(|(s, i)| (self.words[i].clone(), s)).collect(),
        })
    }

    /// Orders candidates best first: higher score, then smaller word.
    fn rank(&self, a: (f64, usize), b: (f64, usize)) -> Ordering {
        b.0.total_cmp(&a.0).then_with(|| self.words[a.1].cmp(&self.words[b.1]))
    }

    /// Mean vector of the in-vocabulary tokens; out-of-vocabulary tokens are ignored.
    pub fn sentence_vector<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<f64>, EmbeddingError> {
        let mut sum = vec![0.0f64; self.dimension];
        let mut hits = 0usize;
        for token in tokens {
            if let Some(v) = self.vector(token.as_ref()) {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += f64::from(x);
                }
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(EmbeddingError::NoInVocab);
        }
        let n = hits as f64;
        sum.iter_mut().for_each(|s| *s /= n);
        Ok(sum)
    }

    /// Cosine between the mean vectors of two sentences.
    pub fn sentence_similarity<S: AsRef<str>, T: AsRef<str>>(&self, a: &[S], b: &[T]) -> Result<f64, EmbeddingError> {
        let va = self.sentence_vector(a)?;
        let vb = self.sentence_vector(b)?;
        cosine(&va, &vb)
    }
}

fn parse_header(header: &str) -> Result<(usize, usize), EmbeddingError> {
    let bad = || EmbeddingError::Header {
        header: header.to_owned(),
    };
    let mut parts = header.split_ascii_whitespace();
    let count = parts.next().and_then(|p| p.parse::<usize>().ok()).ok_or_else(bad)?;
    let dimension = parts.next().and_then(|p| p.parse::<usize>().ok()).ok_or_else(bad)?;
    if parts.next().is_some() || dimension == 0 {
        return Err(bad());
    }
    Ok((count, dimension))
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

fn norm(v: &[f32]) -> f64 {
    dot(v, v).sqrt()
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Cosine similarity of two equal-length vectors.
pub fn cosine<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut uv, mut uu, mut vv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b): (f64, f64) = (a.into(), b.into());
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok(clamp_unit(uv / (uu.sqrt() * vv.sqrt())))
}
