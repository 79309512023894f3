//! Embedding synonym replacement combined with TF-IDF insertion.
//!
//! For each sentence, every candidate replaces one in-vocabulary token with
//! one of its nearest embedding neighbors and then inserts a low-TF-IDF word
//! at a random position. Candidates are scored by sentence similarity to the
//! original; the best ones at or above the threshold become new pairs.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

use rand::Rng;

use super::AugmentError;
use crate::corpus::{Corpus, SentencePair, Side};
use crate::embeddings::EmbeddingTable;
use crate::parallel::Workers;
use crate::rng::{item_rng, Stream};
use crate::tfidf::TfidfModel;
use crate::tokenize::is_clean_token;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationConfig {
    pub n_candidates: usize,
    pub knn: usize,
    pub sim_threshold: f64,
    pub max_accepted_per_sentence: usize,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            n_candidates: 5,
            knn: 5,
            sim_threshold: 0.85,
            max_accepted_per_sentence: 2,
            seed: 0,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.n_candidates == 0 {
            return Err(AugmentError::Config("candidate count must be at least 1".into()));
        }
        if self.knn == 0 {
            return Err(AugmentError::Config("neighbor count must be at least 1".into()));
        }
        if !self.sim_threshold.is_finite() {
            return Err(AugmentError::Config("similarity threshold must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSentence {
    pub tokens: Vec<String>,
    pub similarity: f64,
    /// Index in the original sentence whose token was replaced.
    pub replaced_position: usize,
    /// Index of the inserted word in `tokens`.
    pub inserted_position: usize,
}

/// Why a sentence produced no candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkipReason {
    Empty,
    NoInVocab,
    NoNeighbors,
    EmptyPool,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Empty => "empty",
            SkipReason::NoInVocab => "no_in_vocab",
            SkipReason::NoNeighbors => "no_neighbors",
            SkipReason::EmptyPool => "empty_pool",
        }
    }
}

/// Memoized neighbor lists. Neighbors are restricted to words that are
/// themselves single clean tokens, so augmented text re-tokenizes to the
/// same token sequence.
pub struct NeighborCache<'a> {
    table: &'a EmbeddingTable,
    knn: usize,
    lists: RwLock<HashMap<String, Arc<Vec<String>>>>,
}

impl<'a> NeighborCache<'a> {
    pub fn new(table: &'a EmbeddingTable, knn: usize) -> Self {
        Self {
            table,
            knn,
            lists: RwLock::new(HashMap::new()),
        }
    }

    /// Neighbors of `word`, or `None` when it is out of vocabulary.
    pub fn get(&self, word: &str) -> Option<Arc<Vec<String>>> {
        if !self.table.contains(word) {
            return None;
        }
        if let Some(list) = self.lists.read().expect("neighbor cache poisoned").get(word) {
            return Some(Arc::clone(list));
        }
        let list = self
            .table
            .nearest_where(word, self.knn, is_clean_token)
            .map(|n| n.neighbors.into_iter().map(|(w, _)| w).collect())
            .unwrap_or_default();
        let list = Arc::new(list);
        self.lists
            .write()
            .expect("neighbor cache poisoned")
            .insert(word.to_owned(), Arc::clone(&list));
        Some(list)
    }
}

/// Builds up to `cfg.n_candidates` candidates for one sentence.
pub fn generate_candidates<R: Rng + ?Sized>(
    sentence: &[String],
    table: &EmbeddingTable,
    tfidf: &TfidfModel,
    cfg: &AugmentationConfig,
    rng: &mut R,
) -> Result<Vec<CandidateSentence>, SkipReason> {
    let cache = NeighborCache::new(table, cfg.knn);
    generate_with_cache(sentence, &cache, tfidf, cfg, rng)
}

pub fn generate_with_cache<R: Rng + ?Sized>(
    sentence: &[String],
    neighbors: &NeighborCache<'_>,
    tfidf: &TfidfModel,
    cfg: &AugmentationConfig,
    rng: &mut R,
) -> Result<Vec<CandidateSentence>, SkipReason> {
    if sentence.is_empty() {
        return Err(SkipReason::Empty);
    }
    let lists: Vec<Option<Arc<Vec<String>>>> = sentence.iter().map(|t| neighbors.get(t)).collect();
    if lists.iter().all(Option::is_none) {
        return Err(SkipReason::NoInVocab);
    }
    let eligible: Vec<usize> = lists
        .iter()
        .enumerate()
        .filter(|(_, l)| l.as_ref().is_some_and(|l| !l.is_empty()))
        .map(|(i, _)| i)
        .collect();
    if eligible.is_empty() {
        return Err(SkipReason::NoNeighbors);
    }
    if tfidf.pool().is_empty() {
        return Err(SkipReason::EmptyPool);
    }

    let mut out = Vec::with_capacity(cfg.n_candidates);
    for _ in 0..cfg.n_candidates {
        let pos = eligible[rng.random_range(0..eligible.len())];
        let options = lists[pos].as_ref().expect("eligible position has neighbors");
        let replacement = &options[rng.random_range(0..options.len())];
        let insert_word = tfidf.sample_insert_word(rng).map_err(|_| SkipReason::EmptyPool)?;

        let mut tokens = sentence.to_vec();
        tokens[pos] = replacement.clone();
        let at = rng.random_range(0..=tokens.len());
        tokens.insert(at, insert_word.to_owned());

        // both sides contain an in-vocabulary token; only a zero centroid can fail
        let Ok(similarity) = neighbors.table.sentence_similarity(sentence, &tokens) else {
            continue;
        };
        out.push(CandidateSentence {
            tokens,
            similarity,
            replaced_position: pos,
            inserted_position: at,
        });
    }
    Ok(out)
}

fn qualifies(original: &[String], c: &CandidateSentence, cfg: &AugmentationConfig) -> bool {
    c.similarity >= cfg.sim_threshold && c.tokens != original
}

/// Highest-similarity candidate at or above the threshold that differs from
/// the original; the earliest one wins ties.
pub fn select_best<'c>(
    original: &[String],
    candidates: &'c [CandidateSentence],
    cfg: &AugmentationConfig,
) -> Option<&'c CandidateSentence> {
    candidates
        .iter()
        .filter(|c| qualifies(original, c, cfg))
        .fold(None, |best: Option<&CandidateSentence>, c| match best {
            Some(b) if b.similarity >= c.similarity => Some(b),
            _ => Some(c),
        })
}

/// Up to `max_accepted_per_sentence` qualifying candidates with distinct
/// token sequences, best first.
pub fn select_accepted<'c>(
    original: &[String],
    candidates: &'c [CandidateSentence],
    cfg: &AugmentationConfig,
) -> Vec<&'c CandidateSentence> {
    let mut ranked: Vec<&CandidateSentence> = candidates.iter().filter(|c| qualifies(original, c, cfg)).collect();
    ranked.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));
    let mut seen: HashSet<&[String]> = HashSet::new();
    ranked
        .into_iter()
        .filter(|c| seen.insert(c.tokens.as_slice()))
        .take(cfg.max_accepted_per_sentence)
        .collect()
}

/// Counts from one corpus-level run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct W2vReport {
    pub sentences: usize,
    pub accepted: usize,
    pub sentences_augmented: usize,
    pub sentences_rejected: usize,
    pub candidates_generated: usize,
    pub candidates_below_threshold: usize,
    pub skipped: HashMap<&'static str, usize>,
}

impl W2vReport {
    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }

    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method=w2v_tfidf");
        let _ = writeln!(out, "sentences={}", self.sentences);
        let _ = writeln!(out, "accepted={}", self.accepted);
        let _ = writeln!(out, "sentences_augmented={}", self.sentences_augmented);
        let _ = writeln!(out, "rejected_by_threshold={}", self.sentences_rejected);
        let _ = writeln!(out, "candidates_generated={}", self.candidates_generated);
        let _ = writeln!(out, "candidates_below_threshold={}", self.candidates_below_threshold);
        let _ = writeln!(out, "skipped={}", self.skipped_total());
        let mut reasons: Vec<_> = self.skipped.iter().collect();
        reasons.sort();
        for (reason, n) in reasons {
            let _ = writeln!(out, "skipped.{reason}={n}");
        }
        out
    }
}

enum Outcome {
    Skipped(SkipReason),
    Done {
        generated: usize,
        below: usize,
        accepted: Vec<Vec<String>>,
    },
}

/// Augments one side of `corpus`. The result holds every original pair in
/// order, followed by the accepted augmentations in input order.
pub fn augment_corpus_w2v(
    corpus: &Corpus,
    side: Side,
    table: &EmbeddingTable,
    tfidf: &TfidfModel,
    cfg: &AugmentationConfig,
    workers: &Workers,
) -> Result<(Corpus, W2vReport), AugmentError> {
    cfg.validate()?;
    if side != Side::Source {
        return Err(AugmentError::UnsupportedSide(side));
    }
    let cache = NeighborCache::new(table, cfg.knn);
    let pairs = corpus.pairs();
    let outcomes = workers.map_indexed(pairs.len(), |i| {
        let original = pairs[i].tokens(side);
        let mut rng = item_rng(cfg.seed, Stream::Word2Vec, i as u64);
        match generate_with_cache(original, &cache, tfidf, cfg, &mut rng) {
            Err(reason) => Outcome::Skipped(reason),
            Ok(candidates) => {
                let below = candidates.iter().filter(|c| c.similarity < cfg.sim_threshold).count();
                let accepted = select_accepted(original, &candidates, cfg)
                    .into_iter()
                    .map(|c| c.tokens.clone())
                    .collect();
                Outcome::Done {
                    generated: candidates.len(),
                    below,
                    accepted,
                }
            }
        }
    });

    let mut report = W2vReport {
        sentences: pairs.len(),
        ..W2vReport::default()
    };
    let mut augmented: Vec<SentencePair> = Vec::new();
    for (pair, outcome) in pairs.iter().zip(outcomes) {
        match outcome {
            Outcome::Skipped(reason) => *report.skipped.entry(reason.as_str()).or_default() += 1,
            Outcome::Done {
                generated,
                below,
                accepted,
            } => {
                report.candidates_generated += generated;
                report.candidates_below_threshold += below;
                if accepted.is_empty() {
                    report.sentences_rejected += 1;
                } else {
                    report.sentences_augmented += 1;
                }
                for tokens in accepted {
                    report.accepted += 1;
                    augmented.push(pair.with_side(side, &tokens.join(" ")));
                }
            }
        }
    }
    let mut out = corpus.clone();
    for pair in augmented {
        out.push(pair);
    }
    Ok((out, report))
}
