//! Shared fixtures for the integration and acceptance suites. Word lists
//! mirror the bundled test embedding table `data/vectors_8d.txt`.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chunklo::bloom::{train_mlp, MlpModel, TrainConfig, TrainExample};
use chunklo::embeddings::EmbeddingTable;
use chunklo::ingest::{Document, DocumentLine, Stoplist};

pub const TOPIC_BANK: [&str; 20] = [
    "payment",
    "bank",
    "credit",
    "debit",
    "transfer",
    "account",
    "clearing",
    "settlement",
    "cheque",
    "deposit",
    "loan",
    "interest",
    "balance",
    "branch",
    "ledger",
    "currency",
    "invoice",
    "remittance",
    "wire",
    "teller",
];

pub const TOPIC_BIO: [&str; 20] = [
    "cell", "protein", "enzyme", "molecule", "tissue", "neuron", "membrane", "glucose", "bacteria",
    "virus", "antibody", "genome", "receptor", "hormone", "synapse", "plasma", "nucleus",
    "ribosome", "lipid", "peptide",
];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

pub fn test_table() -> EmbeddingTable {
    EmbeddingTable::load(&data_path("vectors_8d.txt"), 1000).expect("bundled table loads")
}

pub fn test_stoplist() -> Stoplist {
    Stoplist::load(&data_path("stoplist.txt")).expect("bundled stoplist loads")
}

/// A sentence-ish line built from topic words with stopword filler.
pub fn topic_line(rng: &mut ChaCha8Rng, words: &[&str]) -> String {
    let n = rng.gen_range(3..=6);
    let mut parts: Vec<String> = Vec::new();
    for i in 0..n {
        if i > 0 && rng.gen_bool(0.3) {
            parts.push(["the", "and", "of"][rng.gen_range(0..3)].to_string());
        }
        parts.push(words[rng.gen_range(0..words.len())].to_string());
    }
    format!("{}.", parts.join(" "))
}

/// A fontless document: `half` lines of banking vocabulary followed by
/// `half` lines of biology vocabulary. The true topic boundary is at `half`.
pub fn two_topic_doc(id: &str, seed: u64, half: usize) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines = (0..2 * half)
        .map(|i| DocumentLine {
            index: i,
            page: (1 + i / 40) as u32,
            text: if i < half {
                topic_line(&mut rng, &TOPIC_BANK)
            } else {
                topic_line(&mut rng, &TOPIC_BIO)
            },
            font_size: None,
        })
        .collect();
    Document::new(id, lines).expect("fixture document is valid")
}

/// A formal document: size-18 one-line headings over size-12 bodies, 3–20
/// sections, headings at least two characters. Returns the document and its
/// gold chunk-start pages (one per heading; the first heading is line 0).
pub fn formal_doc(id: &str, seed: u64) -> (Document, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sections = rng.gen_range(4..=12);
    let mut lines: Vec<DocumentLine> = Vec::new();
    let mut heading_lines = Vec::new();
    for s in 0..sections {
        heading_lines.push(lines.len());
        let heading = format!(
            "Section {} {}",
            s + 1,
            TOPIC_BANK[rng.gen_range(0..TOPIC_BANK.len())]
        );
        lines.push(DocumentLine {
            index: lines.len(),
            page: 0, // assigned below
            text: heading,
            font_size: Some(18.0),
        });
        let body_lines = rng.gen_range(4..=12);
        for _ in 0..body_lines {
            lines.push(DocumentLine {
                index: lines.len(),
                page: 0,
                text: topic_line(&mut rng, &TOPIC_BANK),
                font_size: Some(12.0),
            });
        }
    }
    for line in &mut lines {
        line.page = (1 + line.index / 10) as u32;
    }
    let gold_pages = heading_lines.iter().map(|&l| lines[l].page).collect();
    let doc = Document::new(id, lines).expect("fixture document is valid");
    (doc, gold_pages)
}

/// Standard normal via Box-Muller.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Two Gaussian blobs (unit variance) separated by `separation`, spread over
/// 20 chunk ids for chunk-level cross-validation.
pub fn blob_examples(
    n_per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Vec<TrainExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = separation / (dim as f64).sqrt();
    let mut examples = Vec::with_capacity(2 * n_per_class);
    for i in 0..n_per_class {
        let a: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
        let b: Vec<f64> = (0..dim).map(|_| shift + gaussian(&mut rng)).collect();
        examples.push(TrainExample {
            features: a,
            label: 0,
            chunk_id: format!("chunk{}", i % 20),
        });
        examples.push(TrainExample {
            features: b,
            label: 1,
            chunk_id: format!("chunk{}", i % 20),
        });
    }
    examples
}

/// Train and save a small verb model over synthetic featurize-shaped data.
pub fn train_test_model(path: &Path, classes: usize, input_dim: usize, seed: u64) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let examples: Vec<TrainExample> = (0..classes * 12)
        .map(|i| TrainExample {
            features: (0..input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            label: i % classes,
            chunk_id: format!("c{}", i % 10),
        })
        .collect();
    let cfg = TrainConfig {
        hidden1: 16,
        hidden2: 8,
        epochs: 8,
        seed,
        ..TrainConfig::default()
    };
    let outcome = train_mlp(&examples, &cfg, classes).expect("fixture model trains");
    outcome.model.save(path).expect("fixture model saves");
    outcome.model
}

/// Write a document as a line-record file and return the path.
pub fn write_doc(dir: &Path, doc: &Document) -> PathBuf {
    let path = dir.join(format!("{}.jsonl", doc.id));
    chunklo::ingest::write_lines(doc, &path).expect("fixture doc writes");
    path
}
