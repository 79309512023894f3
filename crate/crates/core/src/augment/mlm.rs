//! Masked-language-model augmentation.
//!
//! A fixed share of each sentence's tokens is replaced by a mask sentinel and
//! a [`MaskFiller`] predicts one token per masked position. The built-in
//! [`StatisticalBackend`] is a bigram model with unigram backoff trained on
//! the corpus itself; [`HttpBackend`] talks to any server implementing the
//! `/fill` JSON protocol.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::time::Duration;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AugmentError;
use crate::corpus::{Corpus, SentencePair, Side};
use crate::parallel::Workers;
use crate::rng::{item_rng, Stream};
use crate::tokenize::is_clean_token;

pub const MASK_TOKEN: &str = "<mask>";
pub const DEFAULT_MASK_RATE: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FillError {
    #[error("position {position}: {message}")]
    Position { position: usize, message: String },
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("sentence of {len} tokens exceeds backend limit {limit}")]
    TooLong { len: usize, limit: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum MlmError {
    #[error("mask rate {0} outside (0, 1]")]
    Rate(f64),
    #[error("cannot mask an empty sentence")]
    EmptySentence,
    #[error("cannot train a backend on an empty corpus")]
    EmptyCorpus,
}

/// A sentence with some tokens hidden behind [`MASK_TOKEN`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedSentence {
    pub tokens: Vec<String>,
    pub masked_positions: Vec<usize>,
    pub originals: Vec<String>,
}

/// `max(1, ceil(rate * n))`, never more than `n`.
pub fn mask_budget(n: usize, rate: f64) -> usize {
    let raw = rate * n as f64;
    let count = (raw - 1e-9 * raw.max(1.0)).ceil().max(1.0) as usize;
    count.min(n)
}

/// Masks `mask_budget(len, rate)` distinct positions chosen uniformly.
pub fn mask_tokens<R: Rng + ?Sized>(tokens: &[String], rate: f64, rng: &mut R) -> Result<MaskedSentence, MlmError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(MlmError::Rate(rate));
    }
    if tokens.is_empty() {
        return Err(MlmError::EmptySentence);
    }
    let mut positions = sample(rng, tokens.len(), mask_budget(tokens.len(), rate)).into_vec();
    positions.sort_unstable();
    let mut masked = tokens.to_vec();
    let originals = positions
        .iter()
        .map(|&p| std::mem::replace(&mut masked[p], MASK_TOKEN.to_owned()))
        .collect();
    Ok(MaskedSentence {
        tokens: masked,
        masked_positions: positions,
        originals,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendInfo {
    pub name: String,
    pub max_sentence_length: Option<usize>,
}

/// Predicts one token for every masked position.
pub trait MaskFiller: Send + Sync {
    fn info(&self) -> BackendInfo;

    /// Returns one prediction per entry of `masked.masked_positions`, in order.
    fn fill(&self, masked: &MaskedSentence) -> Result<Vec<String>, FillError>;
}

/// Replaces each mask with the backend's prediction.
pub fn fill_masks(masked: &MaskedSentence, backend: &dyn MaskFiller) -> Result<Vec<String>, FillError> {
    if let Some(limit) = backend.info().max_sentence_length {
        if masked.tokens.len() > limit {
            return Err(FillError::TooLong {
                len: masked.tokens.len(),
                limit,
            });
        }
    }
    let fills = backend.fill(masked)?;
    if fills.len() != masked.masked_positions.len() {
        return Err(FillError::Protocol(format!(
            "{} fills for {} masked positions",
            fills.len(),
            masked.masked_positions.len()
        )));
    }
    let mut out = masked.tokens.clone();
    for (&pos, token) in masked.masked_positions.iter().zip(fills) {
        out[pos] = token;
    }
    Ok(out)
}

/// Bigram model with unigram backoff; ties go to the smaller word.
#[derive(Debug, Clone)]
pub struct StatisticalBackend {
    next_best: HashMap<String, String>,
    unigram_best: String,
}

fn argmax(counts: HashMap<&str, u64>) -> Option<String> {
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(w, _)| w.to_owned())
}

impl StatisticalBackend {
    pub fn train<S: AsRef<[T]>, T: AsRef<str>>(sentences: &[S]) -> Result<Self, MlmError> {
        let mut unigrams: HashMap<&str, u64> = HashMap::new();
        let mut bigrams: HashMap<&str, HashMap<&str, u64>> = HashMap::new();
        for s in sentences {
            let s = s.as_ref();
            for t in s {
                *unigrams.entry(t.as_ref()).or_default() += 1;
            }
            for w in s.windows(2) {
                *bigrams
                    .entry(w[0].as_ref())
                    .or_default()
                    .entry(w[1].as_ref())
                    .or_default() += 1;
            }
        }
        let unigram_best = argmax(unigrams).ok_or(MlmError::EmptyCorpus)?;
        let next_best = bigrams
            .into_iter()
            .filter_map(|(left, nexts)| argmax(nexts).map(|best| (left.to_owned(), best)))
            .collect();
        Ok(Self {
            next_best,
            unigram_best,
        })
    }

    /// Most likely token after `left`, falling back to the most frequent token.
    pub fn predict(&self, left: Option<&str>) -> &str {
        left.and_then(|l| self.next_best.get(l))
            .map_or(self.unigram_best.as_str(), String::as_str)
    }
}

impl MaskFiller for StatisticalBackend {
    fn info(&self) -> BackendInfo {
        BackendInfo {
            name: "statistical-bigram".into(),
            max_sentence_length: None,
        }
    }

    /// Fills left to right, so a mask following another mask conditions on
    /// the earlier prediction.
    fn fill(&self, masked: &MaskedSentence) -> Result<Vec<String>, FillError> {
        let mut working = masked.tokens.clone();
        let mut out = Vec::with_capacity(masked.masked_positions.len());
        for &pos in &masked.masked_positions {
            let left = pos.checked_sub(1).map(|p| working[p].as_str());
            let token = self.predict(left).to_owned();
            working[pos] = token.clone();
            out.push(token);
        }
        Ok(out)
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FillRequest {
    pub tokens: Vec<String>,
    pub masked_positions: Vec<usize>,
    pub mask_token: String,
    pub top_k: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FillCandidate {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PositionFill {
    pub position: usize,
    pub candidates: Vec<FillCandidate>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FillResponse {
    pub fills: Vec<PositionFill>,
}

impl FillRequest {
    pub fn new(masked: &MaskedSentence, top_k: usize) -> Self {
        Self {
            tokens: masked.tokens.clone(),
            masked_positions: masked.masked_positions.clone(),
            mask_token: MASK_TOKEN.to_owned(),
            top_k,
        }
    }
}

/// Checks a response against its request and picks the rank-1 token for
/// each position, in request order. Predictions are lowercased and must be a
/// single clean token.
pub fn resolve_response(request: &FillRequest, response: FillResponse) -> Result<Vec<String>, FillError> {
    let mut by_position: HashMap<usize, Vec<FillCandidate>> = HashMap::new();
    for fill in response.fills {
        if by_position.insert(fill.position, fill.candidates).is_some() {
            return Err(FillError::Protocol(format!(
                "position {} answered twice",
                fill.position
            )));
        }
    }
    let asked: BTreeSet<usize> = request.masked_positions.iter().copied().collect();
    let got: BTreeSet<usize> = by_position.keys().copied().collect();
    if asked != got {
        return Err(FillError::Protocol(format!(
            "answered positions {got:?} differ from requested {asked:?}"
        )));
    }
    request
        .masked_positions
        .iter()
        .map(|&position| {
            let best = by_position[&position]
                .iter()
                .max_by(|a, b| a.score.total_cmp(&b.score).then(std::cmp::Ordering::Greater))
                .ok_or_else(|| FillError::Position {
                    position,
                    message: "no candidates".into(),
                })?;
            let token = best.token.trim().to_lowercase();
            if !is_clean_token(&token) {
                return Err(FillError::Position {
                    position,
                    message: format!("prediction {:?} is not a single token", best.token),
                });
            }
            Ok(token)
        })
        .collect()
}

/// Client for a remote mask-filling server.
pub struct HttpBackend {
    base_url: String,
    agent: ureq::Agent,
    max_sentence_length: Option<usize>,
}

impl HttpBackend {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            base_url: base_url.trim_end_matches('/').to_owned(),
            agent,
            max_sentence_length: None,
        }
    }

    pub fn with_max_sentence_length(mut self, limit: usize) -> Self {
        self.max_sentence_length = Some(limit);
        self
    }

    /// `GET /health`; returns the response body.
    pub fn health(&self) -> Result<String, FillError> {
        let mut resp = self
            .agent
            .get(&format!("{}/health", self.base_url))
            .call()
            .map_err(|e| FillError::Unavailable(e.to_string()))?;
        resp.body_mut()
            .read_to_string()
            .map_err(|e| FillError::Unavailable(e.to_string()))
    }
}

impl MaskFiller for HttpBackend {
    fn info(&self) -> BackendInfo {
        BackendInfo {
            name: format!("http:{}", self.base_url),
            max_sentence_length: self.max_sentence_length,
        }
    }

    fn fill(&self, masked: &MaskedSentence) -> Result<Vec<String>, FillError> {
        let request = FillRequest::new(masked, 1);
        let body = serde_json::to_string(&request).map_err(|e| FillError::Protocol(e.to_string()))?;
        let mut resp = self
            .agent
            .post(&format!("{}/fill", self.base_url))
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| match e {
                ureq::Error::StatusCode(code) => FillError::Protocol(format!("HTTP status {code}")),
                other => FillError::Unavailable(other.to_string()),
            })?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| FillError::Unavailable(e.to_string()))?;
        let response: FillResponse =
            serde_json::from_str(&text).map_err(|e| FillError::Protocol(format!("bad response body: {e}")))?;
        resolve_response(&request, response)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlmConfig {
    pub rate: f64,
    pub seed: u64,
}

impl Default for MlmConfig {
    fn default() -> Self {
        Self {
            rate: DEFAULT_MASK_RATE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MlmReport {
    pub backend: String,
    pub sentences: usize,
    pub augmented: usize,
    pub duplicates: usize,
    pub failed: usize,
    /// First few failures, as `(sentence index, message)`.
    pub failures: Vec<(usize, String)>,
}

const KEPT_FAILURES: usize = 20;

impl MlmReport {
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method=mlm");
        let _ = writeln!(out, "backend={}", self.backend);
        let _ = writeln!(out, "sentences={}", self.sentences);
        let _ = writeln!(out, "augmented={}", self.augmented);
        let _ = writeln!(out, "duplicates={}", self.duplicates);
        let _ = writeln!(out, "failed={}", self.failed);
        for (i, msg) in &self.failures {
            let _ = writeln!(out, "failure.{i}={msg}");
        }
        out
    }
}

enum Outcome {
    Filled(Vec<String>),
    Duplicate,
    Failed(String),
}

/// Adds one masked-and-filled variant per sentence after the originals.
/// Fills identical to the original are dropped.
pub fn augment_corpus_mlm(
    corpus: &Corpus,
    side: Side,
    backend: &dyn MaskFiller,
    cfg: &MlmConfig,
    workers: &Workers,
) -> Result<(Corpus, MlmReport), AugmentError> {
    if !(cfg.rate > 0.0 && cfg.rate <= 1.0) {
        return Err(AugmentError::Config(MlmError::Rate(cfg.rate).to_string()));
    }
    let pairs = corpus.pairs();
    let outcomes = workers.map_indexed(pairs.len(), |i| {
        let original = pairs[i].tokens(side);
        let mut rng = item_rng(cfg.seed, Stream::MaskedLm, i as u64);
        let masked = match mask_tokens(original, cfg.rate, &mut rng) {
            Ok(m) => m,
            Err(e) => return Outcome::Failed(e.to_string()),
        };
        match fill_masks(&masked, backend) {
            Ok(filled) if filled == original => Outcome::Duplicate,
            Ok(filled) => Outcome::Filled(filled),
            Err(e) => Outcome::Failed(e.to_string()),
        }
    });

    let mut report = MlmReport {
        backend: backend.info().name,
        sentences: pairs.len(),
        ..MlmReport::default()
    };
    let mut out = corpus.clone();
    let mut augmented: Vec<SentencePair> = Vec::new();
    for (i, (pair, outcome)) in pairs.iter().zip(outcomes).enumerate() {
        match outcome {
            Outcome::Filled(tokens) => {
                report.augmented += 1;
                augmented.push(pair.with_side(side, &tokens.join(" ")));
            }
            Outcome::Duplicate => report.duplicates += 1,
            Outcome::Failed(msg) => {
                report.failed += 1;
                if report.failures.len() < KEPT_FAILURES {
                    report.failures.push((i, msg));
                }
            }
        }
    }
    for pair in augmented {
        out.push(pair);
    }
    Ok((out, report))
}
