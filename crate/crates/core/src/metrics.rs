//! Corpus-level BLEU, chrF and exact-match METEOR.
//!
//! All scores are on a 0..=100 scale and computed from statistics summed
//! over every segment, so jointly shuffling hypotheses and references never
//! changes a score.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{read_lines, CorpusError};
use crate::tokenize::tokenize_with;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("no segments to score")]
    Empty,
    #[error("{0}")]
    Corpus(#[from] CorpusError),
}

fn check_lengths(hyps: usize, refs: usize) -> Result<(), MetricError> {
    if hyps != refs {
        return Err(MetricError::LengthMismatch { hyps, refs });
    }
    if hyps == 0 {
        return Err(MetricError::Empty);
    }
    Ok(())
}

fn ngram_counts<T: Eq + Hash>(items: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && items.len() >= n {
        for gram in items.windows(n) {
            *counts.entry(gram).or_default() += 1;
        }
    }
    counts
}

/// Matches clipped by reference counts: `sum min(hyp_count, ref_count)`.
fn clipped_matches<T: Eq + Hash>(hyp: &HashMap<&[T], usize>, reference: &HashMap<&[T], usize>) -> usize {
    hyp.iter()
        .map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0)))
        .sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuOptions {
    pub max_n: usize,
    /// Add one to matches and totals of orders two and up.
    pub add_one_smoothing: bool,
}

impl BleuOptions {
    pub fn new() -> Self {
        Self {
            max_n: 4,
            add_one_smoothing: false,
        }
    }
}

/// Summed BLEU statistics for a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn collect<S: AsRef<str>>(hyps: &[Vec<S>], refs: &[Vec<S>], max_n: usize) -> Result<Self, MetricError> {
        check_lengths(hyps.len(), refs.len())?;
        let mut stats = Self {
            matches: vec![0; max_n],
            totals: vec![0; max_n],
            hyp_len: 0,
            ref_len: 0,
        };
        for (h, r) in hyps.iter().zip(refs) {
            let h: Vec<&str> = h.iter().map(AsRef::as_ref).collect();
            let r: Vec<&str> = r.iter().map(AsRef::as_ref).collect();
            stats.hyp_len += h.len();
            stats.ref_len += r.len();
            for n in 1..=max_n {
                let hc = ngram_counts(&h, n);
                let rc = ngram_counts(&r, n);
                stats.matches[n - 1] += clipped_matches(&hc, &rc);
                stats.totals[n - 1] += h.len().saturating_sub(n - 1);
            }
        }
        Ok(stats)
    }

    /// Modified precision of order `n` (1-based), unsmoothed.
    pub fn precision(&self, n: usize) -> Option<f64> {
        let t = self.totals[n - 1];
        (t > 0).then(|| self.matches[n - 1] as f64 / t as f64)
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len == 0 {
            0.0
        } else if self.hyp_len > self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        }
    }

    /// Geometric mean of the modified precisions times the brevity penalty, ×100.
    ///
    /// Orders for which the hypotheses contain no n-grams at all are left out
    /// of the mean; an order with n-grams but no matches zeroes the score
    /// unless smoothing is on.
    pub fn score(&self, add_one_smoothing: bool) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        let mut orders = 0usize;
        for (i, (&m, &t)) in self.matches.iter().zip(&self.totals).enumerate() {
            if t == 0 {
                continue;
            }
            let (m, t) = if add_one_smoothing && i > 0 {
                (m as f64 + 1.0, t as f64 + 1.0)
            } else {
                (m as f64, t as f64)
            };
            if m == 0.0 {
                return 0.0;
            }
            log_sum += (m / t).ln();
            orders += 1;
        }
        if orders == 0 {
            return 0.0;
        }
        (100.0 * self.brevity_penalty() * (log_sum / orders as f64).exp()).clamp(0.0, 100.0)
    }
}

/// Corpus BLEU over tokenized segments.
pub fn bleu<S: AsRef<str>>(hyps: &[Vec<S>], refs: &[Vec<S>], options: BleuOptions) -> Result<f64, MetricError> {
    Ok(BleuStats::collect(hyps, refs, options.max_n)?.score(options.add_one_smoothing))
}

/// Character n-gram statistics per order, whitespace removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChrfStats {
    pub matches: Vec<usize>,
    pub hyp_totals: Vec<usize>,
    pub ref_totals: Vec<usize>,
}

impl ChrfStats {
    pub fn collect<S: AsRef<str>>(hyps: &[S], refs: &[S], n: usize) -> Result<Self, MetricError> {
        if hyps.len() != refs.len() {
            return Err(MetricError::LengthMismatch {
                hyps: hyps.len(),
                refs: refs.len(),
            });
        }
        let mut stats = Self {
            matches: vec![0; n],
            hyp_totals: vec![0; n],
            ref_totals: vec![0; n],
        };
        for (h, r) in hyps.iter().zip(refs) {
            let h: Vec<char> = h.as_ref().chars().filter(|c| !c.is_whitespace()).collect();
            let r: Vec<char> = r.as_ref().chars().filter(|c| !c.is_whitespace()).collect();
            for order in 1..=n {
                let hc = ngram_counts(&h, order);
                let rc = ngram_counts(&r, order);
                stats.matches[order - 1] += clipped_matches(&hc, &rc);
                stats.hyp_totals[order - 1] += h.len().saturating_sub(order - 1);
                stats.ref_totals[order - 1] += r.len().saturating_sub(order - 1);
            }
        }
        Ok(stats)
    }

    /// F-beta of precision and recall averaged over the orders that occur on
    /// either side, ×100.
    pub fn score(&self, beta: f64) -> f64 {
        let (mut p_sum, mut r_sum, mut orders) = (0.0, 0.0, 0usize);
        for ((&m, &ht), &rt) in self.matches.iter().zip(&self.hyp_totals).zip(&self.ref_totals) {
            if ht == 0 && rt == 0 {
                continue;
            }
            if ht > 0 {
                p_sum += m as f64 / ht as f64;
            }
            if rt > 0 {
                r_sum += m as f64 / rt as f64;
            }
            orders += 1;
        }
        if orders == 0 {
            return 0.0;
        }
        let p = p_sum / orders as f64;
        let r = r_sum / orders as f64;
        let b2 = beta * beta;
        if p + r == 0.0 {
            return 0.0;
        }
        (100.0 * (1.0 + b2) * p * r / (b2 * p + r)).clamp(0.0, 100.0)
    }
}

pub const DEFAULT_CHRF_ORDER: usize = 6;
pub const DEFAULT_CHRF_BETA: f64 = 2.0;

/// Corpus chrF over raw sentences.
pub fn chrf<S: AsRef<str>>(hyps: &[S], refs: &[S], n: usize, beta: f64) -> Result<f64, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    Ok(ChrfStats::collect(hyps, refs, n)?.score(beta))
}

/// One-to-one exact-match alignment between hypothesis and reference tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// `(hyp_index, ref_index)` pairs sorted by hypothesis index.
    pub links: Vec<(usize, usize)>,
    pub chunks: usize,
}

/// Aligns identical tokens, repeatedly taking the longest run of unmatched
/// tokens that appears contiguously on both sides (earliest hypothesis
/// position, then earliest reference position, on ties). This finds the
/// maximum number of matches while keeping the chunk count low.
pub fn align<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> Alignment {
    let h: Vec<&str> = hyp.iter().map(AsRef::as_ref).collect();
    let r: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let mut h_used = vec![false; h.len()];
    let mut r_used = vec![false; r.len()];
    let mut links = Vec::new();
    loop {
        // longest common run ending at (i, j) over unmatched tokens
        let mut best = (0usize, 0usize, 0usize);
        let mut prev = vec![0usize; r.len() + 1];
        for i in 0..h.len() {
            let mut cur = vec![0usize; r.len() + 1];
            for j in 0..r.len() {
                if !h_used[i] && !r_used[j] && h[i] == r[j] {
                    cur[j + 1] = prev[j] + 1;
                    let len = cur[j + 1];
                    let (si, sj) = (i + 1 - len, j + 1 - len);
                    if len > best.0 || (len == best.0 && (si, sj) < (best.1, best.2)) {
                        best = (len, si, sj);
                    }
                }
            }
            prev = cur;
        }
        let (len, si, sj) = best;
        if len == 0 {
            break;
        }
        for k in 0..len {
            h_used[si + k] = true;
            r_used[sj + k] = true;
            links.push((si + k, sj + k));
        }
    }
    links.sort_unstable();
    let chunks = count_chunks(&links);
    Alignment { links, chunks }
}

/// Maximal runs of links adjacent on both sides.
fn count_chunks(links: &[(usize, usize)]) -> usize {
    if links.is_empty() {
        return 0;
    }
    1 + links
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

/// Summed METEOR statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MeteorStats {
    pub matches: usize,
    pub chunks: usize,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl MeteorStats {
    pub fn segment<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> Self {
        let a = align(hyp, reference);
        Self {
            matches: a.links.len(),
            chunks: a.chunks,
            hyp_len: hyp.len(),
            ref_len: reference.len(),
        }
    }

    pub fn add(&mut self, other: Self) {
        self.matches += other.matches;
        self.chunks += other.chunks;
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// `F_mean · (1 − 0.5·(chunks/matches)³)` with `F_mean = 10PR / (R + 9P)`, ×100.
    pub fn score(&self) -> f64 {
        if self.matches == 0 {
            return 0.0;
        }
        let m = self.matches as f64;
        let p = m / self.hyp_len as f64;
        let r = m / self.ref_len as f64;
        let f_mean = 10.0 * p * r / (r + 9.0 * p);
        let penalty = 0.5 * (self.chunks as f64 / m).powi(3);
        (100.0 * f_mean * (1.0 - penalty)).clamp(0.0, 100.0)
    }
}

/// Corpus METEOR (exact matching only).
pub fn meteor<S: AsRef<str>>(hyps: &[Vec<S>], refs: &[Vec<S>]) -> Result<f64, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    let mut total = MeteorStats::default();
    for (h, r) in hyps.iter().zip(refs) {
        total.add(MeteorStats::segment(h, r));
    }
    Ok(total.score())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub bleu: f64,
    pub chrf: f64,
    pub meteor: f64,
    pub segment_count: usize,
}

impl MetricReport {
    pub fn render_text(&self) -> String {
        format!(
            "segments {}\nBLEU     {:.2}\nchrF     {:.2}\nMETEOR   {:.2}\n",
            self.segment_count, self.bleu, self.chrf, self.meteor
        )
    }

    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "segments={}", self.segment_count);
        let _ = writeln!(out, "bleu={}", self.bleu);
        let _ = writeln!(out, "chrf={}", self.chrf);
        let _ = writeln!(out, "meteor={}", self.meteor);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOptions {
    pub lowercase: bool,
    pub bleu: BleuOptions,
    pub chrf_order: usize,
    pub chrf_beta: f64,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            lowercase: false,
            bleu: BleuOptions::new(),
            chrf_order: DEFAULT_CHRF_ORDER,
            chrf_beta: DEFAULT_CHRF_BETA,
        }
    }
}

/// Scores aligned in-memory segments. BLEU and METEOR use tokenized text,
/// chrF the raw lines.
pub fn score_lines<S: AsRef<str>>(hyps: &[S], refs: &[S], options: &ScoreOptions) -> Result<MetricReport, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    let prep = |s: &S| {
        let s = s.as_ref();
        if options.lowercase {
            s.to_lowercase()
        } else {
            s.to_owned()
        }
    };
    let raw_h: Vec<String> = hyps.iter().map(prep).collect();
    let raw_r: Vec<String> = refs.iter().map(prep).collect();
    let tok_h: Vec<Vec<String>> = raw_h.iter().map(|s| tokenize_with(s, false)).collect();
    let tok_r: Vec<Vec<String>> = raw_r.iter().map(|s| tokenize_with(s, false)).collect();
    Ok(MetricReport {
        bleu: bleu(&tok_h, &tok_r, options.bleu)?,
        chrf: chrf(&raw_h, &raw_r, options.chrf_order, options.chrf_beta)?,
        meteor: meteor(&tok_h, &tok_r)?,
        segment_count: hyps.len(),
    })
}

/// Scores a hypothesis file against a reference file, line by line.
pub fn report(
    hyp_path: impl AsRef<Path>,
    ref_path: impl AsRef<Path>,
    options: &ScoreOptions,
) -> Result<MetricReport, MetricError> {
    let hyp_path = hyp_path.as_ref();
    let ref_path = ref_path.as_ref();
    let hyps = read_lines(hyp_path)?;
    let refs = read_lines(ref_path)?;
    if hyps.len() != refs.len() {
        return Err(CorpusError::Alignment {
            src_path: hyp_path.to_path_buf(),
            src_lines: hyps.len(),
            tgt_path: ref_path.to_path_buf(),
            tgt_lines: refs.len(),
        }
        .into());
    }
    score_lines(&hyps, &refs, options)
}
