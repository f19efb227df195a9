//! Grid search for the factor weights: enumerate every weight vector on the
//! step lattice of the simplex and keep the one maximizing the mean rating of
//! the top-k keyphrases it selects per chunk.

use crate::error::{Error, Result};
use crate::keyphrase::{combined_score, FactorScores, WeightVector};

pub const DEFAULT_GRID_STEP: f64 = 0.05;

/// One annotated candidate: its per-chunk factor scores and the mean SME
/// rating.
#[derive(Debug, Clone)]
pub struct RatedCandidate {
    pub text: String,
    pub factors: FactorScores,
    pub rating: f64,
}

/// All annotated candidates of one chunk.
#[derive(Debug, Clone)]
pub struct TuningChunk {
    pub chunk_id: String,
    pub candidates: Vec<RatedCandidate>,
}

fn top_k_mean_rating(chunk: &TuningChunk, w: &WeightVector, k: usize) -> f64 {
    let mut order: Vec<usize> = (0..chunk.candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let ca = &chunk.candidates[a];
        let cb = &chunk.candidates[b];
        combined_score(&cb.factors, w)
            .total_cmp(&combined_score(&ca.factors, w))
            .then_with(|| cb.factors.alpha.total_cmp(&ca.factors.alpha))
            .then_with(|| ca.text.cmp(&cb.text))
    });
    let take = k.min(order.len());
    order[..take]
        .iter()
        .map(|&i| chunk.candidates[i].rating)
        .sum::<f64>()
        / take as f64
}

/// Mean over chunks of the top-k mean rating: the objective the grid search
/// maximizes.
pub fn tuning_objective(chunks: &[TuningChunk], w: &WeightVector, k: usize) -> f64 {
    chunks
        .iter()
        .map(|c| top_k_mean_rating(c, w, k))
        .sum::<f64>()
        / chunks.len() as f64
}

/// Exhaustive search over the step lattice of the weight simplex. Ties go to
/// the lexicographically smallest vector in (α, β, γ, φ, θ) order.
pub fn grid_search_weights(chunks: &[TuningChunk], k: usize, step: f64) -> Result<WeightVector> {
    if chunks.is_empty() {
        return Err(Error::arg("grid search needs at least one annotated chunk"));
    }
    if k == 0 {
        return Err(Error::arg("k must be >= 1"));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::arg("step must lie in (0, 1]"));
    }
    let m = (1.0 / step).round();
    if ((1.0 / step) - m).abs() > 1e-9 {
        return Err(Error::arg(format!("step {step} must divide 1")));
    }
    let m = m as usize;
    for chunk in chunks {
        if chunk.candidates.len() < k {
            return Err(Error::arg(format!(
                "chunk {} has {} annotated keyphrases, need at least {k}",
                chunk.chunk_id,
                chunk.candidates.len()
            )));
        }
    }

    let mut best: Option<(f64, WeightVector)> = None;
    // Lexicographic enumeration; strict improvement keeps the first (and
    // therefore smallest) maximizer.
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
                    .expect("lattice point lies on the simplex");
                    let objective = tuning_objective(chunks, &w, k);
                    match &best {
                        Some((b, _)) if objective <= *b => {}
                        _ => best = Some((objective, w)),
                    }
                }
            }
        }
    }
    Ok(best.expect("lattice is non-empty").1)
}
