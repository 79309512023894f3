#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mtaug::corpus::{Corpus, SentencePair, Split};
use mtaug::embeddings::EmbeddingTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn vocab(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// Source sentences of 3..=14 words drawn with a skew towards low word ids,
/// targets unique per line.
pub fn synthetic_lines(n: usize, vocab_size: usize, seed: u64) -> (Vec<String>, Vec<String>) {
    let words = vocab(vocab_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut src = Vec::with_capacity(n);
    let mut tgt = Vec::with_capacity(n);
    for i in 0..n {
        let len = rng.random_range(3..=14);
        let sentence: Vec<&str> = (0..len)
            .map(|_| {
                let r: f64 = rng.random();
                words[((r * r) * vocab_size as f64) as usize].as_str()
            })
            .collect();
        src.push(sentence.join(" "));
        tgt.push(format!("lengo {i} ni sentensi ya {}", len));
    }
    (src, tgt)
}

pub fn synthetic_corpus(n: usize, vocab_size: usize, seed: u64) -> Corpus {
    let (src, tgt) = synthetic_lines(n, vocab_size, seed);
    let pairs = src
        .iter()
        .zip(&tgt)
        .map(|(s, t)| SentencePair::new(s, t, "synthetic", Split::Train))
        .collect();
    Corpus::from_pairs("en", "sw", pairs)
}

/// Random vectors; components in (0, 1] when `positive`, else in [-1, 1].
pub fn random_rows(words: &[String], dim: usize, positive: bool, seed: u64) -> Vec<(String, Vec<f32>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    words
        .iter()
        .map(|w| {
            let v = (0..dim)
                .map(|_| {
                    if positive {
                        rng.random_range(0.01f32..=1.0)
                    } else {
                        rng.random_range(-1.0f32..=1.0)
                    }
                })
                .collect();
            (w.clone(), v)
        })
        .collect()
}

pub fn random_table(words: &[String], dim: usize, positive: bool, seed: u64) -> EmbeddingTable {
    EmbeddingTable::from_rows(dim, random_rows(words, dim, positive, seed)).unwrap()
}

pub fn write_vectors(path: &Path, rows: &[(String, Vec<f32>)]) {
    let dim = rows.first().map_or(0, |r| r.1.len());
    let mut out = format!("{} {dim}\n", rows.len());
    for (w, v) in rows {
        out.push_str(w);
        for x in v {
            let _ = write!(out, " {x:.6}");
        }
        out.push('\n');
    }
    fs::write(path, out).unwrap();
}

pub fn write_lines(path: &Path, lines: &[String]) {
    let mut body = lines.join("\n");
    if !lines.is_empty() {
        body.push('\n');
    }
    fs::write(path, body).unwrap();
}

/// Writes a 100-pair toy corpus and matching vectors; returns `(src, tgt, vectors)`.
pub fn toy_files(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf, PathBuf) {
    let (src, tgt) = synthetic_lines(n, 200, seed);
    let (sp, tp, vp) = (dir.join("toy.en"), dir.join("toy.sw"), dir.join("toy.vec"));
    write_lines(&sp, &src);
    write_lines(&tp, &tgt);
    write_vectors(&vp, &random_rows(&vocab(200), 16, false, seed ^ 0xabc));
    (sp, tp, vp)
}

pub fn mtaug(args: &[&str], workers: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtaug"))
        .args(args)
        .env("MTAUG_WORKERS", workers.to_string())
        .output()
        .expect("spawn mtaug")
}

pub fn mtaug_ok(args: &[&str], workers: usize) -> Output {
    let out = mtaug(args, workers);
    assert!(
        out.status.success(),
        "mtaug {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Runs ingest, both augmenters, BPE learn/apply/revert and scoring into `out`.
pub fn run_pipeline(src: &Path, tgt: &Path, vectors: &Path, out: &Path, seed: u64, workers: usize) {
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let seed = seed.to_string();
    let ingest = out.join("ingest");
    mtaug_ok(
        &[
            "ingest",
            "--set",
            &format!("toy,train,{},{}", s(src), s(tgt)),
            "--out-dir",
            &s(&ingest),
        ],
        workers,
    );
    let (isrc, itgt) = (ingest.join("toy.train.en"), ingest.join("toy.train.sw"));
    let w2v = out.join("w2v");
    mtaug_ok(
        &[
            "augment",
            "w2v",
            "--src",
            &s(&isrc),
            "--tgt",
            &s(&itgt),
            "--vectors",
            &s(vectors),
            "--seed",
            &seed,
            "--threshold",
            "0.5",
            "--out-prefix",
            &s(&w2v),
        ],
        workers,
    );
    let mlm = out.join("mlm");
    mtaug_ok(
        &[
            "augment",
            "mlm",
            "--src",
            &s(&isrc),
            "--tgt",
            &s(&itgt),
            "--backend",
            "statistical",
            "--seed",
            &seed,
            "--out-prefix",
            &s(&mlm),
        ],
        workers,
    );
    let model = out.join("bpe.model");
    let aug_src = out.join("w2v.en");
    mtaug_ok(
        &[
            "bpe",
            "learn",
            "--input",
            &s(&aug_src),
            "--merges",
            "300",
            "--model",
            &s(&model),
        ],
        workers,
    );
    let seg = out.join("w2v.bpe.en");
    mtaug_ok(
        &[
            "bpe",
            "apply",
            "--model",
            &s(&model),
            "--input",
            &s(&aug_src),
            "--output",
            &s(&seg),
        ],
        workers,
    );
    let back = out.join("w2v.restored.en");
    mtaug_ok(
        &[
            "bpe",
            "revert",
            "--model",
            &s(&model),
            "--input",
            &s(&seg),
            "--output",
            &s(&back),
        ],
        workers,
    );
    mtaug_ok(
        &[
            "score",
            "--hyp",
            &s(&out.join("mlm.en")),
            "--ref",
            &s(&out.join("mlm.en")),
            "--out",
            &s(&out.join("self")),
        ],
        workers,
    );
    mtaug_ok(
        &[
            "score",
            "--hyp",
            &s(&back),
            "--ref",
            &s(&aug_src),
            "--out",
            &s(&out.join("bpe_roundtrip")),
        ],
        workers,
    );
}

/// Every regular file under `dir`, relative path to bytes, sorted.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push((path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}
