//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see the lines on success).

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chunklo::bloom::{
    collapse_verb, cross_validate, majority_baseline, train_mlp, BloomClass, BloomVerb, MlpModel,
    TrainConfig, TrainExample,
};
use chunklo::chunkers::{
    find_segments, semantic_chunk, syntactic_chunk, SemanticParams, SyntacticParams,
};
use chunklo::eval::{boundary_f1, weighted_f1};
use chunklo::keyphrase::{
    combined_score, grid_search_weights, FactorScores, RatedCandidate, TuningChunk, WeightVector,
};

use common::*;

fn report(n: usize, desc: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {n:02} [PASS] {desc}");
    } else {
        println!("criterion {n:02} [FAIL] {desc}");
        for f in &failures {
            println!("    {f}");
        }
        panic!("criterion {n} failed ({} problems)", failures.len());
    }
}

#[test]
fn criterion_01_boundary_f1_worked_example() {
    let start = Instant::now();
    let got = boundary_f1(&[1, 4, 4], &[1, 3, 4]).unwrap();
    let mut failures = Vec::new();
    if got != (0.5, 0.5, 0.5) {
        failures.push(format!("expected (0.5, 0.5, 0.5), got {got:?}"));
    }
    if start.elapsed().as_millis() >= 1 {
        failures.push(format!("took {:?}, bound 1ms", start.elapsed()));
    }
    report(
        1,
        "boundary_f1([1,4,4],[1,3,4]) = (0.5, 0.5, 0.5) exactly",
        failures,
    );
}

// Independent recursive oracle for the divide-and-conquer splitter. Sums are
// taken from a prefix-sum table rather than running updates, and the cosine
// is recomputed locally.
fn oracle_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

fn oracle_segments(
    vectors: &[Vec<f64>],
    offset: usize,
    p: &SemanticParams,
    out: &mut Vec<usize>,
    failures: &mut Vec<String>,
) {
    let n = vectors.len();
    if n <= p.min_par_to_stop {
        return;
    }
    let dim = vectors[0].len();
    let mut prefix = vec![vec![0.0f64; dim]; n + 1];
    for (i, v) in vectors.iter().enumerate() {
        for d in 0..dim {
            prefix[i + 1][d] = prefix[i][d] + v[d];
        }
    }
    let x = (n / p.trim_par).max(1);
    let y = (n * (p.trim_par - 1)).div_ceil(p.trim_par).min(n - 1);
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in x..=y {
        let top = &prefix[i];
        let bot: Vec<f64> = (0..dim).map(|d| prefix[n][d] - prefix[i][d]).collect();
        let c = oracle_cosine(top, &bot);
        if c < best {
            best = c;
            best_i = i;
        }
    }
    // Boundaries stay clear of the partition edges by the trim margin.
    let margin = n / p.trim_par;
    if best_i < margin || n - best_i < margin {
        failures.push(format!(
            "boundary {best_i} violates trim margin {margin} in partition of {n}"
        ));
    }
    out.push(offset + best_i);
    oracle_segments(&vectors[..best_i], offset, p, out, failures);
    oracle_segments(&vectors[best_i..], offset + best_i, p, out, failures);
}

#[test]
fn criterion_02_find_segments_matches_exhaustive_scan() {
    let start = Instant::now();
    let p = SemanticParams::default();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let n = rng.gen_range(16..=512);
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let got = find_segments(&vectors, 0, &p).unwrap();
        let mut expected = Vec::new();
        oracle_segments(&vectors, 0, &p, &mut expected, &mut failures);
        expected.sort_unstable();
        if got != expected {
            failures.push(format!(
                "case {case} (n={n}): implementation {got:?} != oracle {expected:?}"
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 10.0 {
        failures.push(format!("took {elapsed:?}, bound 10s"));
    }
    report(
        2,
        "find_segments equals the exhaustive window-scan oracle on 200 seeded sequences",
        failures,
    );
}

#[test]
fn criterion_03_semantic_recovers_topic_join() {
    let start = Instant::now();
    let table = test_table();
    let stoplist = test_stoplist();
    let p = SemanticParams::default();
    let mut hits = 0;
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let doc = two_topic_doc(&format!("join{seed}"), 300 + seed, 80);
        let b = semantic_chunk(&doc, &table, &stoplist, &p).unwrap();
        if b.line_starts.iter().any(|&s| (s as i64 - 80).abs() <= 8) {
            hits += 1;
        } else {
            failures.push(format!("seed {seed}: boundaries {:?}", b.line_starts));
        }
    }
    let mut problems = Vec::new();
    if hits < 18 {
        problems.push(format!("only {hits}/20 within ±8 lines of the join"));
        problems.extend(failures);
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 5.0 {
        problems.push(format!("took {elapsed:?}, bound 5s"));
    }
    report(
        3,
        "semantic chunker recovers the topic join within ±8 lines in >= 18/20 fixtures",
        problems,
    );
}

#[test]
fn criterion_04_syntactic_recovery_is_exact() {
    let start = Instant::now();
    let p = SyntacticParams::default();
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let (doc, gold_pages) = formal_doc(&format!("formal{seed}"), 400 + seed);
        let b = syntactic_chunk(&doc, &p).unwrap();
        let (precision, recall, f1) = boundary_f1(&b.page_starts, &gold_pages).unwrap();
        if f1 != 1.0 {
            failures.push(format!(
                "seed {seed}: P={precision} R={recall} F1={f1}, system {:?} gold {:?}",
                b.page_starts, gold_pages
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 2.0 {
        failures.push(format!("took {elapsed:?}, bound 2s"));
    }
    report(
        4,
        "syntactic chunker scores boundary F1 = 1.0 on 20 formal fixtures",
        failures,
    );
}

// Independent lattice evaluation for the grid search: own enumeration, own
// ranking comparator, own objective.
fn oracle_objective(chunks: &[TuningChunk], w: &WeightVector, k: usize) -> f64 {
    let mut total = 0.0;
    for chunk in chunks {
        let mut scored: Vec<(f64, f64, &str, f64)> = chunk
            .candidates
            .iter()
            .map(|c| {
                (
                    combined_score(&c.factors, w),
                    c.factors.alpha,
                    c.text.as_str(),
                    c.rating,
                )
            })
            .collect();
        scored.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| b.1.total_cmp(&a.1))
                .then_with(|| a.2.cmp(b.2))
        });
        let take = k.min(scored.len());
        total += scored[..take].iter().map(|s| s.3).sum::<f64>() / take as f64;
    }
    total / chunks.len() as f64
}

fn oracle_grid(chunks: &[TuningChunk], k: usize, m: usize) -> WeightVector {
    let mut best: Option<(f64, WeightVector)> = None;
    for ia in 0..=m {
        for ib in 0..=(m - ia) {
            for ig in 0..=(m - ia - ib) {
                for ip in 0..=(m - ia - ib - ig) {
                    let it = m - ia - ib - ig - ip;
                    let w = WeightVector::new(
                        ia as f64 / m as f64,
                        ib as f64 / m as f64,
                        ig as f64 / m as f64,
                        ip as f64 / m as f64,
                        it as f64 / m as f64,
                    )
                    .unwrap();
                    let objective = oracle_objective(chunks, &w, k);
                    match &best {
                        Some((b, _)) if objective <= *b => {}
                        _ => best = Some((objective, w)),
                    }
                }
            }
        }
    }
    best.unwrap().1
}

fn factors(alpha: f64, beta: f64, gamma: f64, phi: f64, theta: f64) -> FactorScores {
    FactorScores {
        alpha,
        beta,
        gamma,
        phi,
        theta,
    }
}

fn rated(text: &str, f: FactorScores, rating: f64) -> RatedCandidate {
    RatedCandidate {
        text: text.into(),
        factors: f,
        rating,
    }
}

struct TuningFixture {
    name: &'static str,
    chunks: Vec<TuningChunk>,
    expected: Option<[f64; 5]>,
}

/// Annotation sets where the rating tracks one factor and every other factor
/// is anti-correlated, plus a constant set and a seeded mixed set.
fn tuning_fixtures() -> Vec<TuningFixture> {
    let single_factor = |pick: usize| -> Vec<TuningChunk> {
        let f = |value: f64, others: f64| {
            let mut arr = [others; 5];
            arr[pick] = value;
            factors(arr[0], arr[1], arr[2], arr[3], arr[4])
        };
        (0..3)
            .map(|j| TuningChunk {
                chunk_id: format!("doc.{j}"),
                candidates: vec![
                    rated("top", f(1.0, 0.0), 3.0),
                    rated("decoy", f(0.8, 1.0), 2.2),
                    rated("mid", f(0.3, 1.0), 1.6),
                    rated("low", f(0.0, 0.9), 1.0),
                ],
            })
            .collect()
    };
    let mut expected_beta = [0.0; 5];
    expected_beta[1] = 1.0;
    let mut expected_alpha = [0.0; 5];
    expected_alpha[0] = 1.0;
    let mut expected_theta = [0.0; 5];
    expected_theta[4] = 1.0;

    let constant = vec![TuningChunk {
        chunk_id: "doc.0".into(),
        candidates: vec![
            rated("a", factors(0.2, 0.4, 0.6, 0.8, 1.0), 2.0),
            rated("b", factors(1.0, 0.8, 0.6, 0.4, 0.2), 2.0),
            rated("c", factors(0.5, 0.5, 0.5, 0.5, 0.5), 2.0),
        ],
    }];

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mixed: Vec<TuningChunk> = (0..4)
        .map(|j| TuningChunk {
            chunk_id: format!("mixed.{j}"),
            candidates: (0..6)
                .map(|i| {
                    rated(
                        &format!("kp{i}"),
                        factors(
                            rng.gen_range(0.0..1.0),
                            rng.gen_range(0.0..1.0),
                            rng.gen_range(0.0..1.0),
                            rng.gen_range(0.0..1.0),
                            rng.gen_range(0.0..1.0),
                        ),
                        1.0 + 2.0 * rng.gen_range(0.0..1.0f64),
                    )
                })
                .collect(),
        })
        .collect();

    vec![
        TuningFixture {
            name: "rating-tracks-beta",
            chunks: single_factor(1),
            expected: Some(expected_beta),
        },
        TuningFixture {
            name: "rating-tracks-alpha",
            chunks: single_factor(0),
            expected: Some(expected_alpha),
        },
        TuningFixture {
            name: "rating-tracks-theta",
            chunks: single_factor(4),
            expected: Some(expected_theta),
        },
        TuningFixture {
            name: "constant-ratings",
            chunks: constant,
            expected: Some([0.0, 0.0, 0.0, 0.0, 1.0]),
        },
        TuningFixture {
            name: "seeded-mixed",
            chunks: mixed,
            expected: None,
        },
    ]
}

#[test]
fn criterion_05_grid_search_matches_lattice_oracle() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for fixture in tuning_fixtures() {
        let k = 1;
        let name = fixture.name;
        let got = grid_search_weights(&fixture.chunks, k, 0.25).unwrap();
        let oracle = oracle_grid(&fixture.chunks, k, 4);
        if got.components() != oracle.components() {
            failures.push(format!(
                "{name}: implementation {:?} != oracle {:?}",
                got.components(),
                oracle.components()
            ));
        }
        if let Some(exp) = fixture.expected {
            if got.components() != exp {
                failures.push(format!(
                    "{name}: expected {exp:?}, got {:?}",
                    got.components()
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 5.0 {
        failures.push(format!("took {elapsed:?}, bound 5s"));
    }
    report(
        5,
        "grid search matches an independent exhaustive lattice evaluation on 5 annotation sets",
        failures,
    );
}

#[test]
fn criterion_06_bloom_verb_mapping() {
    let expected: [(BloomVerb, BloomClass); 10] = [
        (BloomVerb::Identify, BloomClass::Knowledge),
        (BloomVerb::Define, BloomClass::Knowledge),
        (BloomVerb::Recall, BloomClass::Knowledge),
        (BloomVerb::Recognize, BloomClass::Knowledge),
        (BloomVerb::Select, BloomClass::Knowledge),
        (BloomVerb::List, BloomClass::Knowledge),
        (BloomVerb::Describe, BloomClass::Understand),
        (BloomVerb::Explain, BloomClass::Understand),
        (BloomVerb::Outline, BloomClass::Analyze),
        (BloomVerb::Determine, BloomClass::Apply),
    ];
    let mut failures = Vec::new();
    for (verb, class) in expected {
        if collapse_verb(verb) != class {
            failures.push(format!(
                "{verb} -> {}, expected {class}",
                collapse_verb(verb)
            ));
        }
    }
    let mut sizes = [0usize; 4];
    for verb in BloomVerb::ALL {
        sizes[verb.collapse().index()] += 1;
    }
    if sizes != [6, 2, 1, 1] {
        failures.push(format!("preimage sizes {sizes:?}, expected [6, 2, 1, 1]"));
    }
    report(
        6,
        "all 10 Bloom verbs map to their classes (6/2/1/1)",
        failures,
    );
}

#[test]
fn criterion_07_mlp_gradient_check() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let eps = 1e-4;
    for batch_seed in 0..20u64 {
        let classes = if batch_seed % 2 == 0 { 4 } else { 10 };
        let mut rng = ChaCha8Rng::seed_from_u64(700 + batch_seed);
        let examples: Vec<TrainExample> = (0..10)
            .map(|i| TrainExample {
                features: (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                label: i % classes,
                chunk_id: "c".into(),
            })
            .collect();
        let refs: Vec<&TrainExample> = examples.iter().collect();
        let cfg = TrainConfig {
            hidden1: 10,
            hidden2: 7,
            seed: 7000 + batch_seed,
            ..TrainConfig::default()
        };
        let model = MlpModel::init(12, &cfg, classes).unwrap();
        let grads = model.batch_gradients(&refs);
        let mut max_rel = 0.0f64;
        for idx in 0..model.param_count() {
            let orig = model.param(idx);
            let mut plus = model.clone();
            plus.set_param(idx, orig + eps);
            let mut minus = model.clone();
            minus.set_param(idx, orig - eps);
            let numeric = (plus.batch_loss(&refs) - minus.batch_loss(&refs)) / (2.0 * eps);
            let analytic = MlpModel::gradient_at(&grads, &model, idx);
            let denom = analytic.abs().max(numeric.abs());
            if denom > 1e-6 {
                max_rel = max_rel.max((analytic - numeric).abs() / denom);
            }
        }
        if max_rel > 1e-4 {
            failures.push(format!("batch {batch_seed}: max relative error {max_rel}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 5.0 {
        failures.push(format!("took {elapsed:?}, bound 5s"));
    }
    report(
        7,
        "analytic gradients match central differences within 1e-4 on 20 seeded batches",
        failures,
    );
}

#[test]
fn criterion_08_mlp_beats_majority_baseline() {
    let start = Instant::now();
    let examples = blob_examples(100, 16, 10.0, 800);
    let cfg = TrainConfig {
        seed: 8,
        ..TrainConfig::default()
    };
    let cv = cross_validate(&examples, 10, &cfg, 2).unwrap();
    let baseline = majority_baseline(&examples, 2).unwrap();
    let mut failures = Vec::new();
    if cv < baseline + 0.10 {
        failures.push(format!(
            "CV F1 {cv:.4} vs baseline {baseline:.4}: margin < 0.10"
        ));
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 30.0 {
        failures.push(format!("took {elapsed:?}, bound 30s"));
    }
    report(
        8,
        "10-fold CV weighted F1 exceeds the majority baseline by >= 0.10 on the separable fixture",
        failures,
    );
}

#[test]
fn criterion_09_weighted_f1_hand_computed() {
    let mut failures = Vec::new();
    let golds = vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2];
    let preds = vec![0, 0, 1, 0, 1, 1, 0, 2, 2, 1];
    let got = weighted_f1(&preds, &golds, 3).unwrap();
    let expected = 249.0 / 350.0;
    if (got - expected).abs() > 1e-12 {
        failures.push(format!("3-class fixture: got {got}, hand value {expected}"));
    }
    let constant = weighted_f1(&[0, 0, 0, 0], &[0, 0, 1, 1], 2).unwrap();
    if (constant - 1.0 / 3.0).abs() > 1e-12 {
        failures.push(format!(
            "balanced constant fixture: got {constant}, hand value 1/3"
        ));
    }
    report(
        9,
        "weighted F1 equals hand-computed confusion-matrix values",
        failures,
    );
}

#[test]
fn criterion_10_throughput_bounds() {
    use chunklo::chunkers::hybrid_chunk;
    use chunklo::ingest::{Document, DocumentLine};

    let table = test_table();
    let stoplist = test_stoplist();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);

    // 10,000-line fontless document: topic blocks of 100 lines.
    let fontless = {
        let lines = (0..10_000)
            .map(|i| DocumentLine {
                index: i,
                page: (1 + i / 40) as u32,
                text: if (i / 100) % 2 == 0 {
                    topic_line(&mut rng, &TOPIC_BANK)
                } else {
                    topic_line(&mut rng, &TOPIC_BIO)
                },
                font_size: None,
            })
            .collect();
        Document::new("big-fontless", lines).unwrap()
    };
    let t = Instant::now();
    semantic_chunk(&fontless, &table, &stoplist, &SemanticParams::default()).unwrap();
    let semantic_secs = t.elapsed().as_secs_f64();
    if semantic_secs > 2.0 {
        failures.push(format!(
            "semantic chunking took {semantic_secs:.3}s, bound 2s"
        ));
    }

    // The same scale with fonts, for the structure-driven methods.
    let fonted = {
        let mut lines: Vec<DocumentLine> = Vec::new();
        for section in 0..15 {
            lines.push(DocumentLine {
                index: lines.len(),
                page: 0,
                text: format!("Section {section} settlement"),
                font_size: Some(18.0),
            });
            for _ in 0..665 {
                lines.push(DocumentLine {
                    index: lines.len(),
                    page: 0,
                    text: topic_line(&mut rng, &TOPIC_BANK),
                    font_size: Some(12.0),
                });
            }
        }
        for line in &mut lines {
            line.page = (1 + line.index / 40) as u32;
        }
        Document::new("big-fonted", lines).unwrap()
    };
    let t = Instant::now();
    syntactic_chunk(&fonted, &SyntacticParams::default()).unwrap();
    let syntactic_secs = t.elapsed().as_secs_f64();
    if syntactic_secs > 2.0 {
        failures.push(format!(
            "syntactic chunking took {syntactic_secs:.3}s, bound 2s"
        ));
    }
    let t = Instant::now();
    hybrid_chunk(&fonted, &table, &stoplist, &SemanticParams::default()).unwrap();
    let hybrid_secs = t.elapsed().as_secs_f64();
    if hybrid_secs > 2.0 {
        failures.push(format!("hybrid chunking took {hybrid_secs:.3}s, bound 2s"));
    }

    // Keyphrase + rerank + verb prediction on one chunk within 0.5s.
    use chunklo::keyphrase::{
        rank_candidates, score_candidates, BackgroundCorpus, FactorContext, GraphExtractor,
        KeyphraseExtractor, NgramTable,
    };
    let dir = tempfile::tempdir().unwrap();
    let model = train_test_model(&dir.path().join("model.txt"), 10, 16, 99);
    let chunk_text: String = (0..150)
        .map(|_| format!("{}\n", topic_line(&mut rng, &TOPIC_BANK)))
        .collect();
    let extractor = GraphExtractor::new(stoplist.clone());
    let background = BackgroundCorpus::empty();
    let ngrams = NgramTable::empty();
    let siblings: Vec<String> = Vec::new();
    let titles: Vec<String> = Vec::new();
    let weights = WeightVector::uniform();

    let t = Instant::now();
    let candidates = extractor.extract(&chunk_text, 10).unwrap();
    let ctx = FactorContext {
        siblings: &siblings,
        titles: &titles,
        background: &background,
        ngrams: &ngrams,
        stoplist: &stoplist,
    };
    let scored = score_candidates(&candidates, &chunk_text, &ctx);
    let ranked = rank_candidates(scored, &weights, 5);
    chunklo::bloom::generate_objectives(&chunk_text, &ranked, &model, &table, &stoplist).unwrap();
    let per_chunk_secs = t.elapsed().as_secs_f64();
    if per_chunk_secs > 0.5 {
        failures.push(format!(
            "keyphrase+rerank+verb took {per_chunk_secs:.3}s, bound 0.5s"
        ));
    }

    report(
        10,
        "10k-line chunking <= 2s per method; keyphrase+rerank+verb <= 0.5s per chunk",
        failures,
    );
}

#[test]
fn criterion_11_pipeline_determinism() {
    use chunklo::pipeline::{run_pipeline, PipelineConfig, WeightsSpec, COURSE_RECORDS_FILE};
    use std::fs;

    let dir = tempfile::tempdir().unwrap();
    let docs_dir = dir.path().join("docs");
    fs::create_dir_all(&docs_dir).unwrap();
    let mut docs = Vec::new();
    for seed in 0..2u64 {
        let (doc, _) = formal_doc(&format!("det{seed}"), 1100 + seed);
        docs.push(write_doc(&docs_dir, &doc));
    }
    docs.push(write_doc(&docs_dir, &two_topic_doc("det-plain", 1111, 80)));

    let model_path = dir.path().join("model.txt");
    train_test_model(&model_path, 10, 16, 1177);

    let run = |out: &std::path::Path, jobs: usize| {
        let cfg = PipelineConfig {
            embeddings: Some(data_path("vectors_8d.txt")),
            stoplist: Some(data_path("stoplist.txt")),
            model: Some(model_path.clone()),
            weights: WeightsSpec::Fixed(WeightVector::new(0.0, 0.5, 0.0, 0.5, 0.0).unwrap()),
            out_dir: out.to_path_buf(),
            jobs,
            ..PipelineConfig::default()
        };
        let output = run_pipeline(&cfg, &docs).unwrap();
        assert!(
            output.failures.is_empty(),
            "failures: {:?}",
            output.failures
        );
    };

    let out_a = dir.path().join("run_a");
    let out_b = dir.path().join("run_b");
    let out_c = dir.path().join("run_c");
    run(&out_a, 1);
    run(&out_b, 1);
    run(&out_c, 3);

    let mut failures = Vec::new();
    let read_sorted = |out: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out.join("chunks"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.push((
            COURSE_RECORDS_FILE.to_string(),
            fs::read(out.join(COURSE_RECORDS_FILE)).unwrap(),
        ));
        files.sort();
        files
    };
    let a = read_sorted(&out_a);
    let b = read_sorted(&out_b);
    let c = read_sorted(&out_c);
    if a != b {
        failures.push("repeat run differs from first run".to_string());
    }
    if a != c {
        failures.push("jobs=3 run differs from jobs=1 run".to_string());
    }

    // Serialized models are byte-identical across retrains with one seed.
    let model_path2 = dir.path().join("model2.txt");
    train_test_model(&model_path2, 10, 16, 1177);
    if fs::read(&model_path).unwrap() != fs::read(&model_path2).unwrap() {
        failures.push("retrained model bytes differ".to_string());
    }

    report(
        11,
        "identical config and seed produce byte-identical manifests, records, and models",
        failures,
    );
}

#[test]
fn separable_fixture_trains_with_default_config() {
    // Companion to criterion 8: defaults reach high training accuracy.
    let examples = blob_examples(100, 16, 10.0, 801);
    let outcome = train_mlp(&examples, &TrainConfig::default(), 2).unwrap();
    let correct = examples
        .iter()
        .filter(|e| outcome.model.predict(&e.features).unwrap().0 == e.label)
        .count();
    let accuracy = correct as f64 / examples.len() as f64;
    assert!(accuracy >= 0.95, "training accuracy {accuracy}");
    for pair in outcome.epoch_losses.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-3, "epoch loss rose: {pair:?}");
    }
}
