//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test --test acceptance`.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::*;
use mtaug::augment::mlm::{
    augment_corpus_mlm, mask_tokens, BackendInfo, FillError, MaskFiller, MaskedSentence, MlmConfig, StatisticalBackend,
};
use mtaug::augment::w2v::{augment_corpus_w2v, AugmentationConfig};
use mtaug::bpe::{learn_bpe, BpeModel, DEFAULT_MERGES};
use mtaug::corpus::{Corpus, Side};
use mtaug::embeddings::EmbeddingTable;
use mtaug::metrics::{bleu, chrf, meteor, BleuOptions, BleuStats};
use mtaug::parallel::Workers;
use mtaug::rng::{item_rng, Stream};
use mtaug::tfidf::TfidfModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Case = (&'static str, Vec<(&'static str, &'static str)>, f64);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn workers() -> Workers {
    Workers::new(std::thread::available_parallelism().map_or(2, |n| n.get())).unwrap()
}

fn mean_vector(table: &EmbeddingTable, tokens: &[String]) -> Option<Vec<f64>> {
    let mut sum = vec![0.0f64; table.dimension()];
    let mut n = 0;
    for t in tokens {
        if let Some(v) = table.vector(t) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += x as f64;
            }
            n += 1;
        }
    }
    (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn index_by_target(corpus: &Corpus) -> HashMap<&str, usize> {
    corpus
        .iter()
        .enumerate()
        .map(|(i, p)| (p.target_raw.as_str(), i))
        .collect()
}

fn mask_budget_oracle(n: usize) -> usize {
    ((15 * n).div_ceil(100)).max(1)
}

fn augmentation_invariants() -> Outcome {
    let start = Instant::now();
    let corpus = synthetic_corpus(1000, 500, 17);
    let table = random_table(&vocab(500), 50, false, 18);
    let tfidf = TfidfModel::fit(&corpus.side_tokens(Side::Source), 0.10).unwrap();
    let cfg = AugmentationConfig {
        seed: 19,
        ..AugmentationConfig::default()
    };
    let pool = workers();
    let (w2v, report) =
        augment_corpus_w2v(&corpus, Side::Source, &table, &tfidf, &cfg, &pool).map_err(|e| e.to_string())?;
    ensure!(
        w2v.pairs()[..1000] == *corpus.pairs(),
        "originals not preserved in order"
    );
    let by_target = index_by_target(&corpus);
    let accepted = &w2v.pairs()[1000..];
    ensure!(!accepted.is_empty(), "no candidate accepted, suite would be vacuous");
    ensure!(accepted.len() == report.accepted, "report disagrees with output");
    for pair in accepted {
        let &i = by_target
            .get(pair.target_raw.as_str())
            .ok_or("augmented pair with unknown target")?;
        let orig = &corpus.pairs()[i];
        ensure!(pair.target_raw == orig.target_raw, "(a) target side changed");
        ensure!(
            pair.source_tokens != orig.source_tokens,
            "(b) candidate equals original"
        );
        ensure!(
            pair.source_tokens.len() == orig.source_tokens.len() + 1,
            "(c) {} tokens from {}",
            pair.source_tokens.len(),
            orig.source_tokens.len()
        );
        let sim = cos(
            &mean_vector(&table, &orig.source_tokens).unwrap(),
            &mean_vector(&table, &pair.source_tokens).unwrap(),
        );
        ensure!(sim >= 0.85 - 1e-9, "(b) accepted candidate with similarity {sim}");
    }

    let backend = StatisticalBackend::train(&corpus.side_tokens(Side::Source)).unwrap();
    let mcfg = MlmConfig {
        seed: 19,
        ..MlmConfig::default()
    };
    let (mlm, mreport) =
        augment_corpus_mlm(&corpus, Side::Source, &backend, &mcfg, &pool).map_err(|e| e.to_string())?;
    ensure!(mlm.pairs()[..1000] == *corpus.pairs(), "MLM originals not preserved");
    ensure!(mreport.augmented > 0, "MLM produced nothing");
    for pair in &mlm.pairs()[1000..] {
        let i = by_target[pair.target_raw.as_str()];
        let orig = &corpus.pairs()[i];
        ensure!(pair.target_raw == orig.target_raw, "(a) MLM target side changed");
        ensure!(
            pair.source_tokens.len() == orig.source_tokens.len(),
            "(d) MLM length changed"
        );
        let masked = mask_tokens(&orig.source_tokens, 0.15, &mut item_rng(19, Stream::MaskedLm, i as u64)).unwrap();
        ensure!(
            masked.masked_positions.len() == mask_budget_oracle(orig.source_tokens.len()),
            "(d) mask budget {} for length {}",
            masked.masked_positions.len(),
            orig.source_tokens.len()
        );
        let eligible: BTreeSet<usize> = masked.masked_positions.iter().copied().collect();
        for (k, (a, b)) in pair.source_tokens.iter().zip(&orig.source_tokens).enumerate() {
            ensure!(a == b || eligible.contains(&k), "(d) unmasked position {k} changed");
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 30.0, "took {secs:.1}s");
    Ok(format!(
        "w2v accepted {}, mlm augmented {}, {secs:.1}s",
        accepted.len(),
        mreport.augmented
    ))
}

/// Always answers with a token absent from the corpus.
struct Novel;

impl MaskFiller for Novel {
    fn info(&self) -> BackendInfo {
        BackendInfo {
            name: "novel".into(),
            max_sentence_length: None,
        }
    }

    fn fill(&self, masked: &MaskedSentence) -> Result<Vec<String>, FillError> {
        Ok(vec!["zzznovel".to_owned(); masked.masked_positions.len()])
    }
}

fn growth_ratios() -> Outcome {
    let n = 200;
    let corpus = synthetic_corpus(n, 200, 23);
    // all components positive, so every cosine is above 0
    let table = random_table(&vocab(200), 16, true, 24);
    let tfidf = TfidfModel::fit(&corpus.side_tokens(Side::Source), 0.10).unwrap();
    let cfg = AugmentationConfig {
        sim_threshold: 0.0,
        seed: 25,
        ..AugmentationConfig::default()
    };
    let pool = workers();
    let (w2v, _) = augment_corpus_w2v(&corpus, Side::Source, &table, &tfidf, &cfg, &pool).map_err(|e| e.to_string())?;
    ensure!(w2v.len() == 3 * n, "w2v produced {} from {n}", w2v.len());
    let (mlm, _) =
        augment_corpus_mlm(&corpus, Side::Source, &Novel, &MlmConfig::default(), &pool).map_err(|e| e.to_string())?;
    ensure!(mlm.len() == 2 * n, "mlm produced {} from {n}", mlm.len());
    let stat = StatisticalBackend::train(&corpus.side_tokens(Side::Source)).unwrap();
    let (natural, _) =
        augment_corpus_mlm(&corpus, Side::Source, &stat, &MlmConfig::default(), &pool).map_err(|e| e.to_string())?;
    Ok(format!(
        "w2v {:.2}x, mlm {:.2}x (statistical backend without forcing {:.2}x)",
        w2v.len() as f64 / n as f64,
        mlm.len() as f64 / n as f64,
        natural.len() as f64 / n as f64
    ))
}

fn ws(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

fn seg(pairs: &[(&str, &str)]) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    (
        pairs.iter().map(|p| ws(p.0)).collect(),
        pairs.iter().map(|p| ws(p.1)).collect(),
    )
}

fn metric_oracles() -> Outcome {
    let close = |name: &str, got: f64, want: f64| -> Result<(), String> {
        if (got - want).abs() <= 1e-4 {
            Ok(())
        } else {
            Err(format!("{name}: got {got}, expected {want}"))
        }
    };
    let opts = BleuOptions::new();
    let bleu_cases: Vec<Case> = vec![
        (
            "identity",
            vec![("the cat sat on the mat", "the cat sat on the mat")],
            100.0,
        ),
        ("disjoint", vec![("a b c d", "w x y z")], 0.0),
        // p1..p4 = 5/6, 3/5, 2/4, 1/3
        (
            "one substitution",
            vec![("the cat sat on the mat", "the cat sat on a mat")],
            100.0 * (1.0f64 / 12.0).powf(0.25),
        ),
        // all precisions 1, BP = exp(1 - 6/4)
        (
            "brevity",
            vec![("the cat sat on", "the cat sat on the mat")],
            100.0 * (-0.5f64).exp(),
        ),
        // corpus counts 9/10, 6/8, 4/6, 2/4
        (
            "corpus",
            vec![("a b c d", "a b c d"), ("a b c d e f", "a b c d x f")],
            100.0 * 0.225f64.powf(0.25),
        ),
        ("clipped", vec![("the the the the", "the cat")], 0.0),
    ];
    for (name, pairs, want) in &bleu_cases {
        let (h, r) = seg(pairs);
        close(&format!("bleu {name}"), bleu(&h, &r, opts).unwrap(), *want)?;
    }
    let (h, r) = seg(&[("the the the the", "the cat")]);
    let p1 = BleuStats::collect(&h, &r, 4).unwrap().precision(1).unwrap();
    close("bleu clipped unigram precision", p1, 0.25)?;

    let chrf_cases: Vec<Case> = vec![
        ("identity", vec![("the cat sat", "the cat sat")], 100.0),
        ("disjoint", vec![("abc", "xyz")], 0.0),
        // orders 1..3: P = R = (2/3 + 1/2 + 0) / 3
        ("one shared bigram", vec![("abx", "yab")], 100.0 * 7.0 / 18.0),
        // P = (1 + 1 + 0) / 3, R = (2/3 + 1/2 + 0) / 3, F2 = 5PR / (4P + R)
        ("short hypothesis", vec![("ab", "abc")], 100.0 * 630.0 / 1485.0),
        ("whitespace ignored", vec![("a b", "ab")], 100.0),
        // order 1: 3/4, order 2: 1/2
        ("corpus", vec![("ab", "ab"), ("xy", "xz")], 62.5),
    ];
    for (name, pairs, want) in &chrf_cases {
        let h: Vec<&str> = pairs.iter().map(|p| p.0).collect();
        let r: Vec<&str> = pairs.iter().map(|p| p.1).collect();
        close(&format!("chrf {name}"), chrf(&h, &r, 6, 2.0).unwrap(), *want)?;
    }

    let meteor_cases: Vec<Case> = vec![
        ("62.5", vec![("the cat sat", "the cat mat")], 62.5),
        (
            "identity of ten",
            vec![("a b c d e f g h i j", "a b c d e f g h i j")],
            100.0 * (1.0 - 0.5 * 0.001),
        ),
        ("no matches", vec![("a b", "c d")], 0.0),
        ("swapped", vec![("b a", "a b")], 50.0),
        // P = 1, R = 1/3, F = 10/28, penalty 0.5 / 8
        (
            "short hypothesis",
            vec![("the cat", "the cat sat on the mat")],
            100.0 * (10.0 / 28.0) * 0.9375,
        ),
        // 4 matches, 2 chunks over 5 + 5 tokens
        ("corpus", vec![("the cat sat", "the cat mat"), ("a b", "a b")], 75.0),
    ];
    for (name, pairs, want) in &meteor_cases {
        let (h, r) = seg(pairs);
        close(&format!("meteor {name}"), meteor(&h, &r).unwrap(), *want)?;
    }
    Ok(format!(
        "{} BLEU, {} chrF, {} METEOR cases",
        bleu_cases.len() + 1,
        chrf_cases.len(),
        meteor_cases.len()
    ))
}

fn tfidf_and_knn_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let words = vocab(25);
    for trial in 0..200 {
        let n_docs = rng.random_range(1..=10);
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|_| {
                (0..rng.random_range(1..=8))
                    .map(|_| words[rng.random_range(0..25)].clone())
                    .collect()
            })
            .collect();
        let model = TfidfModel::fit(&docs, 0.10).unwrap();
        let vocabulary: BTreeSet<&String> = docs.iter().flatten().collect();
        ensure!(model.vocab_size() == vocabulary.len(), "trial {trial}: vocabulary size");
        let mut ranked = Vec::new();
        for &w in &vocabulary {
            let df = docs.iter().filter(|d| d.contains(w)).count();
            let idf = (n_docs as f64 / df as f64).ln();
            let mut total = 0.0;
            for d in &docs {
                let c = d.iter().filter(|t| *t == w).count();
                if c > 0 {
                    total += c as f64 / d.len() as f64 * idf;
                }
            }
            let mean = total / df as f64;
            ensure!(model.doc_freq(w) == Some(df), "trial {trial}: df of {w}");
            ensure!((model.idf(w).unwrap() - idf).abs() <= 1e-9, "trial {trial}: idf of {w}");
            ensure!(
                (model.mean_score(w).unwrap() - mean).abs() <= 1e-9,
                "trial {trial}: score of {w}"
            );
            ranked.push((mean, w.clone()));
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let size = ranked.len().div_ceil(10);
        let expected: BTreeSet<&String> = ranked[..size].iter().map(|r| &r.1).collect();
        let got: BTreeSet<&String> = model.pool().iter().collect();
        // ties at the cut may legitimately swap words of equal score
        let boundary = ranked[size - 1].0;
        let same_scores = expected
            .symmetric_difference(&got)
            .all(|w| (model.mean_score(w).unwrap() - boundary).abs() <= 1e-12);
        ensure!(
            got.len() == size && same_scores,
            "trial {trial}: pool {got:?} vs {expected:?}"
        );
    }

    let mut queries = 0;
    for (size, dim) in [(10, 4), (100, 8), (1000, 16), (10_000, 32)] {
        let rows = random_rows(&vocab(size), dim, false, size as u64);
        let table = EmbeddingTable::from_rows(dim, rows.clone()).unwrap();
        let vecs: Vec<Vec<f64>> = rows.iter().map(|r| r.1.iter().map(|&x| x as f64).collect()).collect();
        for q in (0..size).step_by((size / 10).max(1)).take(10) {
            let k = 7.min(size - 1);
            let mut all: Vec<(f64, &str)> = (0..size)
                .filter(|&i| i != q)
                .map(|i| (cos(&vecs[q], &vecs[i]), rows[i].0.as_str()))
                .collect();
            all.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
            let got = table.nearest(&rows[q].0, k).unwrap();
            let want: BTreeSet<&str> = all[..k].iter().map(|a| a.1).collect();
            let have: BTreeSet<&str> = got.words().collect();
            ensure!(
                want == have,
                "{size}-word table, query {}: {have:?} vs {want:?}",
                rows[q].0
            );
            for ((s, _), (score, _)) in got.neighbors.iter().map(|(w, s)| (*s, w)).zip(&all[..k]) {
                ensure!((s - score).abs() <= 1e-9, "score {s} vs {score}");
            }
            queries += 1;
        }
    }
    Ok(format!("200 TF-IDF corpora, {queries} k-NN queries"))
}

fn fuzz_sentences(n: usize, seed: u64) -> Vec<Vec<String>> {
    let alphabet: Vec<char> = "abcdefghijklmnoprstuwyz0129-'.,@<>/éßü中\u{E000}".chars().collect();
    let specials = ["@@", "</w>", "a@@", "@@b", "x</w>y", "\u{E000}1", "@", "@@@"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..rng.random_range(1..=12))
                .map(|_| {
                    if rng.random_bool(0.05) {
                        specials[rng.random_range(0..specials.len())].to_owned()
                    } else {
                        // skew towards the first letters so merges are frequent
                        (0..rng.random_range(1..=8))
                            .map(|_| {
                                let r: f64 = rng.random();
                                alphabet[(r * r * r * alphabet.len() as f64) as usize]
                            })
                            .collect()
                    }
                })
                .collect()
        })
        .collect()
}

fn reference_learn(sentences: &[Vec<String>], n_merges: usize) -> Vec<(String, String)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for w in sentences.iter().flatten() {
        *counts.entry(w.clone()).or_default() += 1;
    }
    let mut vocab: Vec<(Vec<String>, u64)> = counts
        .into_iter()
        .map(|(w, c)| {
            let mut syms: Vec<String> = w.chars().map(String::from).collect();
            syms.last_mut().unwrap().push_str("</w>");
            (syms, c)
        })
        .collect();
    let mut merges = Vec::new();
    while merges.len() < n_merges {
        let mut pairs: HashMap<(String, String), u64> = HashMap::new();
        for (syms, c) in &vocab {
            for p in syms.windows(2) {
                *pairs.entry((p[0].clone(), p[1].clone())).or_default() += c;
            }
        }
        let Some((best, freq)) = pairs
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        else {
            break;
        };
        if freq < 2 {
            break;
        }
        for (syms, _) in &mut vocab {
            let mut out = Vec::new();
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == best.0 && syms[i + 1] == best.1 {
                    out.push(format!("{}{}", best.0, best.1));
                    i += 2;
                } else {
                    out.push(syms[i].clone());
                    i += 1;
                }
            }
            *syms = out;
        }
        merges.push(best);
    }
    merges
}

fn bpe_laws() -> Outcome {
    let fifty = ws("low lower lowest newer newest wider widest low low lower \
                    new new newer newest wide wider wide low lowest newest \
                    slow slower slowest show shown shower low new wide widen \
                    lower newer wider slow show new low newest lowest widest \
                    slow slowly newly lowly wide wise wisest lows news shows");
    ensure!(fifty.len() == 50, "fixture has {} words", fifty.len());
    let corpus = vec![fifty];
    let learned = learn_bpe(&corpus, 10).map_err(|e| e.to_string())?;
    let reference = reference_learn(&corpus, 10);
    ensure!(
        learned.merges() == reference.as_slice(),
        "{:?} vs {reference:?}",
        learned.merges()
    );

    let fuzz = fuzz_sentences(100_000, 41);
    let model = learn_bpe(&fuzz, DEFAULT_MERGES).map_err(|e| e.to_string())?;
    ensure!(
        model.merges().len() <= DEFAULT_MERGES,
        "{} merges",
        model.merges().len()
    );
    let model = BpeModel::from_text(&model.to_text()).map_err(|e| e.to_string())?;
    let pool = workers();
    let mismatches: usize = pool
        .map_indexed(fuzz.len(), |i| {
            let segmented = model.apply(&fuzz[i]);
            usize::from(model.revert(&segmented).ok().as_ref() != Some(&fuzz[i]))
        })
        .into_iter()
        .sum();
    ensure!(mismatches == 0, "{mismatches} round-trip mismatches");
    Ok(format!(
        "{} merges learned, 100000 sentences, 0 mismatches",
        model.merges().len()
    ))
}

fn determinism() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let (src, tgt, vec) = toy_files(dir.path(), 1000, 43);
    let out = dir.path().join("run");
    let mut snapshots = Vec::new();
    for w in [1, 4, 8] {
        let _ = fs::remove_dir_all(&out);
        fs::create_dir(&out).map_err(|e| e.to_string())?;
        run_pipeline(&src, &tgt, &vec, &out, 44, w);
        snapshots.push(snapshot(&out));
    }
    for (w, snap) in [4, 8].iter().zip(&snapshots[1..]) {
        ensure!(snap.len() == snapshots[0].len(), "workers {w}: different file set");
        for ((name, a), (_, b)) in snapshots[0].iter().zip(snap) {
            ensure!(a == b, "workers {w}: {} differs", name.display());
        }
    }
    Ok(format!("{} files identical across 1/4/8 workers", snapshots[0].len()))
}

const TABLE1: [(&str, [(&str, usize); 3]); 2] = [
    ("jw300", [("train", 907_842), ("dev", 5_179), ("test", 5_315)]),
    ("tanzil", [("train", 87_645), ("dev", 3_505), ("test", 3_509)]),
];

fn check_table1(dir: &Path, out: &Path) -> Outcome {
    let mut args = vec!["stats".to_owned()];
    for (domain, splits) in TABLE1 {
        for (split, _) in splits {
            let base = dir.join(format!("{domain}.{split}"));
            args.push("--set".into());
            args.push(format!("{domain},{split},{}.en,{}.sw", base.display(), base.display()));
        }
    }
    args.push("--out".into());
    args.push(out.to_str().unwrap().into());
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let result = mtaug(&argv, 4);
    ensure!(
        result.status.success(),
        "stats failed: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let kv = fs::read_to_string(out.with_extension("stats")).map_err(|e| e.to_string())?;
    for (domain, splits) in TABLE1 {
        for (split, want) in splits {
            let key = format!("{domain}.{split}=");
            let got = kv
                .lines()
                .find_map(|l| l.strip_prefix(&key))
                .ok_or(format!("missing {key}"))?;
            ensure!(got == want.to_string(), "{domain} {split}: {got} vs {want}");
        }
    }
    Ok(String::new())
}

fn table1_counts() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    for (domain, splits) in TABLE1 {
        for (split, n) in splits {
            let lines: Vec<String> = (0..n).map(|i| format!("{domain} {split} {i}")).collect();
            let base = dir.path().join(format!("{domain}.{split}"));
            write_lines(&base.with_extension(format!("{split}.en")), &lines);
            write_lines(&base.with_extension(format!("{split}.sw")), &lines);
        }
    }
    check_table1(dir.path(), &dir.path().join("synthetic"))?;
    match std::env::var_os("MTAUG_TABLE1_DIR") {
        Some(real) => {
            check_table1(Path::new(&real), &dir.path().join("real"))?;
            Ok("synthetic and supplied files match".into())
        }
        None => Ok("synthetic files match; set MTAUG_TABLE1_DIR to check the original splits".into()),
    }
}

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("augmentation invariants", augmentation_invariants),
        ("growth ratios", growth_ratios),
        ("metric oracles", metric_oracles),
        ("tf-idf and k-nn oracles", tfidf_and_knn_oracles),
        ("bpe laws", bpe_laws),
        ("determinism across worker counts", determinism),
        ("table 1 ingestion counts", table1_counts),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.1}s] {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1}s] {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
