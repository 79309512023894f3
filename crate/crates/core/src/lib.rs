//! Corpus augmentation and evaluation toolkit for low-resource machine
//! translation.
//!
//! The crate covers the full data path around an NMT system without training
//! one: ingesting aligned corpora, augmenting the source side (embedding
//! synonym replacement with TF-IDF insertion, or masked-LM filling),
//! BPE segmentation, and BLEU / chrF / METEOR scoring of hypothesis files.

pub mod augment;
pub mod bpe;
pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod metrics;
pub mod parallel;
pub mod rng;
pub mod tfidf;
pub mod tokenize;
