//! Pre-trained word vectors and the vector arithmetic used by the semantic
//! and hybrid chunkers and the Bloom verb classifier.
//!
//! The table is loaded from the word-vector text format (optional
//! `count dim` header, then one `word v1 … vd` line each, assumed ordered by
//! frequency) and is immutable afterwards. A tiny table for deterministic
//! tests ships in `data/vectors_8d.txt`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub type Vector = Vec<f64>;

/// Fixed word-vector table. Only the first `vocab_limit` entries of the file
/// are retained.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vocab_limit: usize,
    entries: HashMap<String, Vector>,
}

pub const DEFAULT_VOCAB_LIMIT: usize = 1000;

impl EmbeddingTable {
    pub fn load(path: &Path, vocab_limit: usize) -> Result<Self> {
        if vocab_limit == 0 {
            return Err(Error::arg("vocab_limit must be >= 1"));
        }
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = HashMap::new();
        let mut dim = 0usize;
        let mut first_entry = true;
        for (lineno, raw) in contents.lines().enumerate() {
            let lineno = lineno + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split_whitespace().collect();
            // A leading "count dim" header is allowed and skipped.
            if first_entry
                && fields.len() == 2
                && fields[0].parse::<usize>().is_ok()
                && fields[1].parse::<usize>().is_ok()
            {
                first_entry = false;
                continue;
            }
            first_entry = false;
            if fields.len() < 2 {
                return Err(Error::parse(path, lineno, "expected `word v1 … vd`"));
            }
            let word = fields[0].to_string();
            let values: std::result::Result<Vector, _> =
                fields[1..].iter().map(|v| v.parse::<f64>()).collect();
            let values =
                values.map_err(|e| Error::parse(path, lineno, format!("bad vector value: {e}")))?;
            if dim == 0 {
                dim = values.len();
            } else if values.len() != dim {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected {dim} components, found {}", values.len()),
                ));
            }
            entries.entry(word).or_insert(values);
            if entries.len() >= vocab_limit {
                break;
            }
        }
        if entries.is_empty() {
            return Err(Error::parse(path, 1, "no vector entries"));
        }
        Ok(EmbeddingTable {
            dim,
            vocab_limit,
            entries,
        })
    }

    /// Build a table directly, mostly for tests.
    pub fn from_entries(entries: Vec<(String, Vector)>, vocab_limit: usize) -> Result<Self> {
        if vocab_limit == 0 {
            return Err(Error::arg("vocab_limit must be >= 1"));
        }
        let mut map = HashMap::new();
        let mut dim = 0usize;
        for (word, vec) in entries.into_iter().take(vocab_limit) {
            if dim == 0 {
                dim = vec.len();
            } else if vec.len() != dim {
                return Err(Error::arg(format!(
                    "vector for {word} has {} components, expected {dim}",
                    vec.len()
                )));
            }
            map.entry(word).or_insert(vec);
        }
        if map.is_empty() {
            return Err(Error::arg("no vector entries"));
        }
        Ok(EmbeddingTable {
            dim,
            vocab_limit,
            entries: map,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vocab_limit(&self) -> usize {
        self.vocab_limit
    }

    pub fn get(&self, word: &str) -> Option<&Vector> {
        self.entries.get(word)
    }
}

/// Component-wise mean of the vectors for in-vocabulary tokens (duplicates
/// counted). Returns the zero vector when no token is in vocabulary.
pub fn mean_bow(tokens: &[String], table: &EmbeddingTable) -> Vector {
    let mut sum = vec![0.0; table.dim()];
    let mut count = 0usize;
    for token in tokens {
        if let Some(v) = table.get(token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            count += 1;
        }
    }
    if count > 0 {
        for s in &mut sum {
            *s /= count as f64;
        }
    }
    sum
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::arg(format!(
            "cosine length mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(cosine_unchecked(u, v))
}

/// Equal lengths assumed; used in hot loops where the invariant holds by
/// construction.
pub(crate) fn cosine_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot / (nu.sqrt() * nv.sqrt())
}

pub fn vector_add(u: &[f64], v: &[f64]) -> Result<Vector> {
    if u.len() != v.len() {
        return Err(Error::arg("vector_add length mismatch"));
    }
    Ok(u.iter().zip(v).map(|(a, b)| a + b).collect())
}

pub fn vector_sub(u: &[f64], v: &[f64]) -> Result<Vector> {
    if u.len() != v.len() {
        return Err(Error::arg("vector_sub length mismatch"));
    }
    Ok(u.iter().zip(v).map(|(a, b)| a - b).collect())
}

pub(crate) fn add_assign(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

pub(crate) fn sub_assign(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a -= b;
    }
}
