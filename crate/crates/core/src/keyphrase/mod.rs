//! Keyphrase candidates and the five-factor re-ranking score.
//!
//! Every candidate gets factor scores in [0, 1] computed within its chunk:
//!
//! * `alpha` — the extractor's own score,
//! * `beta` — n-gram TF-IDF against a background corpus,
//! * `gamma` — inverse chunk frequency over the chunk's siblings,
//! * `phi` — normalized rank by external n-gram log-likelihood,
//! * `theta` — token overlap with section titles,
//!
//! combined as Σ wᵢfᵢ with the weights on the simplex.

mod extract;
mod tune;

pub use extract::{GraphExtractor, KeyphraseExtractor};
pub use tune::{grid_search_weights, RatedCandidate, TuningChunk, DEFAULT_GRID_STEP};

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{content_tokens, tokenize, Stoplist};

/// A candidate keyphrase with the extractor score.
#[derive(Debug, Clone, PartialEq)]
pub struct Keyphrase {
    pub text: String,
    /// Extractor importance in [0, 1]; 1 = most important.
    pub alpha: f64,
}

/// The five factor scores for one candidate within one chunk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorScores {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub theta: f64,
}

impl FactorScores {
    pub fn zero() -> Self {
        FactorScores {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            phi: 0.0,
            theta: 0.0,
        }
    }
}

/// Non-negative factor weights summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector {
    pub w_alpha: f64,
    pub w_beta: f64,
    pub w_gamma: f64,
    pub w_phi: f64,
    pub w_theta: f64,
}

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl WeightVector {
    pub fn new(w_alpha: f64, w_beta: f64, w_gamma: f64, w_phi: f64, w_theta: f64) -> Result<Self> {
        let w = WeightVector {
            w_alpha,
            w_beta,
            w_gamma,
            w_phi,
            w_theta,
        };
        let components = w.components();
        if components.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(Error::arg("weights must lie in [0, 1]"));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::arg(format!("weights must sum to 1, got {sum}")));
        }
        Ok(w)
    }

    pub fn uniform() -> Self {
        WeightVector {
            w_alpha: 0.2,
            w_beta: 0.2,
            w_gamma: 0.2,
            w_phi: 0.2,
            w_theta: 0.2,
        }
    }

    pub fn components(&self) -> [f64; 5] {
        [
            self.w_alpha,
            self.w_beta,
            self.w_gamma,
            self.w_phi,
            self.w_theta,
        ]
    }

    /// Parse "w_alpha,w_beta,w_gamma,w_phi,w_theta".
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(Error::arg(format!(
                "expected 5 comma-separated weights, got {s:?}"
            )));
        }
        let mut vals = [0.0; 5];
        for (slot, p) in vals.iter_mut().zip(&parts) {
            *slot = p
                .parse::<f64>()
                .map_err(|e| Error::arg(format!("bad weight {p:?}: {e}")))?;
        }
        WeightVector::new(vals[0], vals[1], vals[2], vals[3], vals[4])
    }
}

impl std::fmt::Display for WeightVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.w_alpha, self.w_beta, self.w_gamma, self.w_phi, self.w_theta
        )
    }
}

impl Default for WeightVector {
    fn default() -> Self {
        WeightVector::uniform()
    }
}

/// Weighted factor combination Σ wᵢfᵢ.
pub fn combined_score(f: &FactorScores, w: &WeightVector) -> f64 {
    w.w_alpha * f.alpha
        + w.w_beta * f.beta
        + w.w_gamma * f.gamma
        + w.w_phi * f.phi
        + w.w_theta * f.theta
}

/// Document frequencies over a background corpus, for the TF-IDF factor.
#[derive(Debug, Clone)]
pub struct BackgroundCorpus {
    doc_count: usize,
    df: HashMap<String, usize>,
}

const BACKGROUND_MAX_NGRAM: usize = 4;

impl BackgroundCorpus {
    /// A corpus carrying no signal: every keyphrase gets idf 0.
    pub fn empty() -> Self {
        BackgroundCorpus {
            doc_count: 1,
            df: HashMap::new(),
        }
    }

    pub fn new(doc_count: usize, df: HashMap<String, usize>) -> Result<Self> {
        if doc_count == 0 {
            return Err(Error::arg("background corpus needs doc_count >= 1"));
        }
        if df.values().any(|&v| v > doc_count) {
            return Err(Error::arg("df value exceeds doc_count"));
        }
        Ok(BackgroundCorpus { doc_count, df })
    }

    /// Index a directory of plain-text documents: every n-gram of length 1–4
    /// counts once per document containing it.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::arg(format!(
                "background corpus dir {} is empty",
                dir.display()
            )));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for path in &paths {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let tokens = tokenize(&text);
            let mut seen: HashSet<String> = HashSet::new();
            for n in 1..=BACKGROUND_MAX_NGRAM {
                for window in tokens.windows(n) {
                    seen.insert(window.join(" "));
                }
            }
            for gram in seen {
                *df.entry(gram).or_insert(0) += 1;
            }
        }
        BackgroundCorpus::new(paths.len(), df)
    }

    /// Load a precomputed table: a `doc_count<TAB>N` header line, then one
    /// `ngram<TAB>df` line per entry.
    pub fn load(path: &Path) -> Result<Self> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = contents.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing doc_count header"))?;
        let doc_count = match header.split('\t').collect::<Vec<_>>().as_slice() {
            ["doc_count", n] => n
                .parse::<usize>()
                .map_err(|e| Error::parse(path, 1, format!("bad doc_count: {e}")))?,
            _ => return Err(Error::parse(path, 1, "header must be `doc_count<TAB>N`")),
        };
        let mut df = HashMap::new();
        for (lineno, raw) in lines {
            if raw.trim().is_empty() {
                continue;
            }
            let (gram, count) = raw
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno + 1, "expected `ngram<TAB>df`"))?;
            let count = count
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad df: {e}")))?;
            df.insert(gram.to_string(), count);
        }
        BackgroundCorpus::new(doc_count, df)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut grams: Vec<(&String, &usize)> = self.df.iter().collect();
        grams.sort();
        let mut out = format!("doc_count\t{}\n", self.doc_count);
        for (gram, count) in grams {
            out.push_str(&format!("{gram}\t{count}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn df(&self, gram: &str) -> usize {
        self.df.get(gram).copied().unwrap_or(0)
    }
}

/// External n-gram log-likelihoods, loaded from a tab-separated table.
#[derive(Debug, Clone, Default)]
pub struct NgramTable {
    entries: HashMap<String, f64>,
}

impl NgramTable {
    pub fn empty() -> Self {
        NgramTable::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (String, f64)>>(entries: I) -> Self {
        NgramTable {
            entries: entries.into_iter().collect(),
        }
    }

    /// Load `ngram<TAB>log_likelihood` lines.
    pub fn load(path: &Path) -> Result<Self> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = HashMap::new();
        for (lineno, raw) in contents.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let (gram, ll) = raw
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno + 1, "expected `ngram<TAB>loglik`"))?;
            let ll = ll
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad log-likelihood: {e}")))?;
            entries.insert(gram.to_string(), ll);
        }
        Ok(NgramTable { entries })
    }

    pub fn get(&self, gram: &str) -> Option<f64> {
        self.entries.get(gram).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// SME annotation: usefulness ratings (1–3) and an optional verb label for
/// one (chunk, keyphrase) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub chunk_id: String,
    pub keyphrase: String,
    pub ratings: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verb: Option<String>,
}

impl AnnotationRecord {
    pub fn mean_rating(&self) -> f64 {
        self.ratings.iter().sum::<f64>() / self.ratings.len() as f64
    }
}

/// Load line-delimited annotation records, validating the rating range.
pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, raw) in contents.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = serde_json::from_str(raw)
            .map_err(|e| Error::parse(path, lineno + 1, format!("bad annotation: {e}")))?;
        if rec.ratings.is_empty() {
            return Err(Error::parse(path, lineno + 1, "ratings must be non-empty"));
        }
        if rec.ratings.iter().any(|&r| !(1.0..=3.0).contains(&r)) {
            return Err(Error::parse(path, lineno + 1, "ratings must lie in [1, 3]"));
        }
        records.push(rec);
    }
    Ok(records)
}

/// Count occurrences of `needle` as a contiguous token subsequence.
fn count_token_matches(haystack: &[String], needle: &[String]) -> usize {
    if needle.is_empty() || needle.len() > haystack.len() {
        return 0;
    }
    haystack
        .windows(needle.len())
        .filter(|w| *w == needle)
        .count()
}

/// Raw TF-IDF of a keyphrase treated as one n-gram unit: term frequency in
/// the chunk times ln(doc_count / (1 + df)), floored at zero. Per-chunk
/// min-max normalization happens in [`score_candidates`].
pub fn beta_tfidf(kp: &Keyphrase, chunk_text: &str, bg: &BackgroundCorpus) -> f64 {
    beta_tfidf_tokens(&kp.text, &tokenize(chunk_text), bg)
}

fn beta_tfidf_tokens(kp_text: &str, chunk_tokens: &[String], bg: &BackgroundCorpus) -> f64 {
    let kp_tokens = tokenize(kp_text);
    let tf = count_token_matches(chunk_tokens, &kp_tokens) as f64;
    let idf = (bg.doc_count() as f64 / (1.0 + bg.df(kp_text) as f64)).ln();
    (tf * idf).max(0.0)
}

/// Raw inverse chunk frequency: ln(S / (1 + s)) with S = siblings + 1 and s
/// the number of sibling chunks containing the keyphrase. Normalization and
/// the single-chunk case are handled in [`score_candidates`].
pub fn gamma_icf(kp: &Keyphrase, sibling_chunks: &[String]) -> f64 {
    let sibling_tokens: Vec<Vec<String>> = sibling_chunks.iter().map(|s| tokenize(s)).collect();
    gamma_icf_tokens(&kp.text, &sibling_tokens)
}

fn gamma_icf_tokens(kp_text: &str, sibling_tokens: &[Vec<String>]) -> f64 {
    let kp_tokens = tokenize(kp_text);
    let total = sibling_tokens.len() as f64 + 1.0;
    let containing = sibling_tokens
        .iter()
        .filter(|toks| count_token_matches(toks, &kp_tokens) > 0)
        .count() as f64;
    (total / (1.0 + containing)).ln()
}

/// Normalized-rank scores by descending log-likelihood. Absent entries rank
/// last; all ties break by ascending text. Returns scores aligned with the
/// input order: 1 − (rank−1)/(K−1), or 1.0 for a single candidate.
pub fn phi_ngram(candidates: &[Keyphrase], table: &NgramTable) -> Vec<f64> {
    let k = candidates.len();
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![1.0];
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let la = table.get(&candidates[a].text);
        let lb = table.get(&candidates[b].text);
        match (la, lb) {
            (Some(x), Some(y)) => y
                .total_cmp(&x)
                .then_with(|| candidates[a].text.cmp(&candidates[b].text)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => candidates[a].text.cmp(&candidates[b].text),
        }
    });
    let mut scores = vec![0.0; k];
    for (rank, &idx) in order.iter().enumerate() {
        scores[idx] = 1.0 - rank as f64 / (k - 1) as f64;
    }
    scores
}

/// Fraction of the keyphrase's content tokens that appear in any section
/// title; 0 when there are no titles or no content tokens.
pub fn theta_title_overlap(kp: &Keyphrase, section_titles: &[String], stoplist: &Stoplist) -> f64 {
    if section_titles.is_empty() {
        return 0.0;
    }
    let kp_tokens: HashSet<String> = content_tokens(&kp.text, stoplist).into_iter().collect();
    if kp_tokens.is_empty() {
        return 0.0;
    }
    let title_tokens: HashSet<String> = section_titles
        .iter()
        .flat_map(|t| content_tokens(t, stoplist))
        .collect();
    let hits = kp_tokens
        .iter()
        .filter(|t| title_tokens.contains(*t))
        .count();
    hits as f64 / kp_tokens.len() as f64
}

/// Min-max normalize to [0, 1]; all-equal inputs map to all 1.0.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![1.0; values.len()];
    }
    values.iter().map(|v| (v - min) / (max - min)).collect()
}

/// Everything a chunk's factor computation needs besides the candidates.
#[derive(Debug, Clone, Copy)]
pub struct FactorContext<'a> {
    pub siblings: &'a [String],
    pub titles: &'a [String],
    pub background: &'a BackgroundCorpus,
    pub ngrams: &'a NgramTable,
    pub stoplist: &'a Stoplist,
}

/// Compute all five factors for a chunk's candidate set, normalized within
/// the chunk.
pub fn score_candidates(
    candidates: &[Keyphrase],
    chunk_text: &str,
    ctx: &FactorContext,
) -> Vec<(Keyphrase, FactorScores)> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let chunk_tokens = tokenize(chunk_text);
    let sibling_tokens: Vec<Vec<String>> = ctx.siblings.iter().map(|s| tokenize(s)).collect();

    let beta_raw: Vec<f64> = candidates
        .iter()
        .map(|kp| beta_tfidf_tokens(&kp.text, &chunk_tokens, ctx.background))
        .collect();
    let betas = min_max_normalize(&beta_raw);

    let gammas = if sibling_tokens.is_empty() {
        vec![0.0; candidates.len()]
    } else {
        let gamma_raw: Vec<f64> = candidates
            .iter()
            .map(|kp| gamma_icf_tokens(&kp.text, &sibling_tokens))
            .collect();
        min_max_normalize(&gamma_raw)
    };

    let phis = phi_ngram(candidates, ctx.ngrams);

    candidates
        .iter()
        .enumerate()
        .map(|(i, kp)| {
            let scores = FactorScores {
                alpha: kp.alpha,
                beta: betas[i],
                gamma: gammas[i],
                phi: phis[i],
                theta: theta_title_overlap(kp, ctx.titles, ctx.stoplist),
            };
            (kp.clone(), scores)
        })
        .collect()
}

/// A candidate with its factors and combined score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredKeyphrase {
    pub text: String,
    pub factors: FactorScores,
    pub score: f64,
}

/// Order scored candidates by combined score (descending), breaking ties by
/// descending alpha and then text, and keep the top k.
pub fn rank_candidates(
    scored: Vec<(Keyphrase, FactorScores)>,
    w: &WeightVector,
    k: usize,
) -> Vec<ScoredKeyphrase> {
    let mut ranked: Vec<ScoredKeyphrase> = scored
        .into_iter()
        .map(|(kp, factors)| ScoredKeyphrase {
            score: combined_score(&factors, w),
            text: kp.text,
            factors,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| b.factors.alpha.total_cmp(&a.factors.alpha))
            .then_with(|| a.text.cmp(&b.text))
    });
    ranked.truncate(k);
    ranked
}

/// Candidates extracted beyond `k` so re-ranking has room to reorder.
pub const DEFAULT_CANDIDATE_POOL: usize = 10;

/// Extract, score, and re-rank: the full candidate-selection path for one
/// chunk.
pub fn rank_keyphrases(
    extractor: &dyn KeyphraseExtractor,
    chunk_text: &str,
    ctx: &FactorContext,
    w: &WeightVector,
    k: usize,
) -> Result<Vec<ScoredKeyphrase>> {
    if k == 0 {
        return Err(Error::arg("k must be >= 1"));
    }
    let pool = k.max(DEFAULT_CANDIDATE_POOL);
    let candidates = extractor.extract(chunk_text, pool)?;
    let scored = score_candidates(&candidates, chunk_text, ctx);
    Ok(rank_candidates(scored, w, k))
}
