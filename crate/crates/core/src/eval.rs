//! Evaluation metrics: chunk-boundary F1 over starting pages, P@N for
//! keyphrase selection, mean ratings, and weighted F1 for verb prediction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gold keyphrases are those whose mean annotator rating reaches this value.
pub const RATING_THRESHOLD: f64 = 1.5;

/// Precision/recall/F1 over chunk starting pages. The first boundary of each
/// list is dropped (it is always the document's first page) and duplicates
/// are penalized: matching is over multisets, so a page occurring twice in
/// the system list can match at most as many gold occurrences.
pub fn boundary_f1(system: &[u32], gold: &[u32]) -> Result<(f64, f64, f64)> {
    if system.is_empty() || gold.is_empty() {
        return Err(Error::arg("boundary lists must be non-empty"));
    }
    let sys = &system[1..];
    let gld = &gold[1..];
    if sys.is_empty() && gld.is_empty() {
        return Ok((1.0, 1.0, 1.0));
    }
    if sys.is_empty() || gld.is_empty() {
        return Ok((0.0, 0.0, 0.0));
    }
    let count = |pages: &[u32]| {
        let mut m: HashMap<u32, usize> = HashMap::new();
        for &p in pages {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    };
    let sys_counts = count(sys);
    let gold_counts = count(gld);
    let matched: usize = sys_counts
        .iter()
        .map(|(page, &c)| c.min(gold_counts.get(page).copied().unwrap_or(0)))
        .sum();
    let precision = matched as f64 / sys.len() as f64;
    let recall = matched as f64 / gld.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((precision, recall, f1))
}

/// Fraction of the system's top-N keyphrases whose mean rating reaches the
/// threshold. Unrated keyphrases count as below threshold.
pub fn p_at_n(
    system_top_n: &[String],
    rated: &HashMap<String, f64>,
    threshold: f64,
) -> Result<f64> {
    if system_top_n.is_empty() {
        return Err(Error::arg("p_at_n needs a non-empty system list"));
    }
    let hits = system_top_n
        .iter()
        .filter(|kp| rated.get(*kp).is_some_and(|&r| r >= threshold))
        .count();
    Ok(hits as f64 / system_top_n.len() as f64)
}

pub fn mean_rating(ratings: &[f64]) -> Result<f64> {
    if ratings.is_empty() {
        return Err(Error::arg("mean_rating needs at least one rating"));
    }
    Ok(ratings.iter().sum::<f64>() / ratings.len() as f64)
}

/// Per-class F1 averaged with weights equal to each class's share of true
/// instances.
pub fn weighted_f1(predictions: &[usize], golds: &[usize], classes: usize) -> Result<f64> {
    if predictions.len() != golds.len() {
        return Err(Error::arg(format!(
            "prediction/gold length mismatch: {} vs {}",
            predictions.len(),
            golds.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::arg("weighted_f1 needs at least one example"));
    }
    if predictions.iter().chain(golds).any(|&c| c >= classes) {
        return Err(Error::arg("class index out of range"));
    }
    let n = golds.len() as f64;
    let mut f1_sum = 0.0;
    for class in 0..classes {
        let tp = predictions
            .iter()
            .zip(golds)
            .filter(|&(&p, &g)| p == class && g == class)
            .count() as f64;
        let pred_c = predictions.iter().filter(|&&p| p == class).count() as f64;
        let true_c = golds.iter().filter(|&&g| g == class).count() as f64;
        let precision = if pred_c > 0.0 { tp / pred_c } else { 0.0 };
        let recall = if true_c > 0.0 { tp / true_c } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        f1_sum += (true_c / n) * f1;
    }
    Ok(f1_sum)
}

/// Per-document boundary evaluation record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocEval {
    pub doc_id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// A boundary-evaluation report: one record per document plus the mean.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    pub docs: Vec<DocEval>,
}

impl EvalReport {
    pub fn mean_f1(&self) -> f64 {
        if self.docs.is_empty() {
            return 0.0;
        }
        self.docs.iter().map(|d| d.f1).sum::<f64>() / self.docs.len() as f64
    }

    pub fn mean_precision(&self) -> f64 {
        if self.docs.is_empty() {
            return 0.0;
        }
        self.docs.iter().map(|d| d.precision).sum::<f64>() / self.docs.len() as f64
    }

    pub fn mean_recall(&self) -> f64 {
        if self.docs.is_empty() {
            return 0.0;
        }
        self.docs.iter().map(|d| d.recall).sum::<f64>() / self.docs.len() as f64
    }

    /// Line-delimited records: one per document, then an aggregate record.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.docs {
            out.push_str(&serde_json::to_string(doc).expect("doc eval serializes"));
            out.push('\n');
        }
        out.push_str(
            &serde_json::to_string(&serde_json::json!({
                "aggregate": true,
                "documents": self.docs.len(),
                "precision": self.mean_precision(),
                "recall": self.mean_recall(),
                "f1": self.mean_f1(),
            }))
            .expect("aggregate serializes"),
        );
        out.push('\n');
        out
    }

    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>9} {:>9} {:>9}\n",
            "document", "precision", "recall", "f1"
        ));
        for doc in &self.docs {
            out.push_str(&format!(
                "{:<24} {:>9.3} {:>9.3} {:>9.3}\n",
                doc.doc_id, doc.precision, doc.recall, doc.f1
            ));
        }
        out.push_str(&format!(
            "{:<24} {:>9.3} {:>9.3} {:>9.3}\n",
            "mean",
            self.mean_precision(),
            self.mean_recall(),
            self.mean_f1()
        ));
        out
    }
}
