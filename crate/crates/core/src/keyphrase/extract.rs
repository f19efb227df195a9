//! Default keyphrase extractor: a damped graph-centrality ranker over the
//! token co-occurrence graph, standing in for an external keyphrase service.
//! Any service can be substituted through [`KeyphraseExtractor`].

use crate::error::{Error, Result};
use crate::ingest::{tokenize, Stoplist};
use crate::keyphrase::Keyphrase;

/// Pluggable candidate-keyphrase source. Implementations must return at most
/// `k` phrases with `alpha` scores normalized so the best is 1.0.
pub trait KeyphraseExtractor: Send + Sync {
    fn extract(&self, text: &str, k: usize) -> Result<Vec<Keyphrase>>;
}

/// Co-occurrence-graph extractor. Content tokens become nodes, tokens
/// adjacent within a window of 2 are linked, nodes are ranked by damped
/// iterative centrality, and adjacent top-ranked tokens merge into phrases.
#[derive(Debug, Clone)]
pub struct GraphExtractor {
    stoplist: Stoplist,
    damping: f64,
    max_iterations: usize,
    tolerance: f64,
    max_phrase_len: usize,
}

impl GraphExtractor {
    pub fn new(stoplist: Stoplist) -> Self {
        GraphExtractor {
            stoplist,
            damping: 0.85,
            max_iterations: 50,
            tolerance: 1e-6,
            max_phrase_len: 4,
        }
    }
}

impl KeyphraseExtractor for GraphExtractor {
    fn extract(&self, text: &str, k: usize) -> Result<Vec<Keyphrase>> {
        if k == 0 {
            return Err(Error::arg("k must be >= 1"));
        }
        let raw_tokens = tokenize(text);
        let content: Vec<&String> = raw_tokens
            .iter()
            .filter(|t| !self.stoplist.contains(t))
            .collect();
        if content.is_empty() {
            return Ok(Vec::new());
        }

        // Nodes in first-occurrence order keep everything deterministic.
        let mut index_of = std::collections::HashMap::new();
        let mut nodes: Vec<&str> = Vec::new();
        for &t in &content {
            index_of.entry(t.as_str()).or_insert_with(|| {
                nodes.push(t.as_str());
                nodes.len() - 1
            });
        }
        let n = nodes.len();

        // Undirected edges between adjacent content tokens, weighted by
        // co-occurrence count. BTreeMap keeps summation order (and therefore
        // float rounding) deterministic.
        let mut edges: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
        for pair in content.windows(2) {
            let a = index_of[pair[0].as_str()];
            let b = index_of[pair[1].as_str()];
            if a == b {
                continue;
            }
            *edges[a].entry(b).or_insert(0.0) += 1.0;
            *edges[b].entry(a).or_insert(0.0) += 1.0;
        }
        let out_weight: Vec<f64> = edges.iter().map(|e| e.values().sum()).collect();

        // Damped centrality iteration.
        let mut scores = vec![1.0; n];
        for _ in 0..self.max_iterations {
            let mut next = vec![0.0; n];
            for (v, incoming) in edges.iter().enumerate() {
                let mut acc = 0.0;
                for (&u, &w) in incoming {
                    if out_weight[u] > 0.0 {
                        acc += w / out_weight[u] * scores[u];
                    }
                }
                next[v] = (1.0 - self.damping) + self.damping * acc;
            }
            let delta = scores
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            scores = next;
            if delta < self.tolerance {
                break;
            }
        }

        // Top third of nodes (at least one) are phrase candidates.
        let mut ranked: Vec<usize> = (0..n).collect();
        ranked.sort_by(|&a, &b| {
            scores[b]
                .total_cmp(&scores[a])
                .then_with(|| nodes[a].cmp(nodes[b]))
        });
        let keep = n.div_ceil(3);
        let top: std::collections::HashSet<usize> = ranked[..keep.max(1)].iter().copied().collect();

        // Merge runs of adjacent top-ranked tokens in the original sequence,
        // capped at max_phrase_len.
        let mut phrases: Vec<(String, f64)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut run: Vec<usize> = Vec::new();
        let flush = |run: &mut Vec<usize>,
                     phrases: &mut Vec<(String, f64)>,
                     seen: &mut std::collections::HashSet<String>| {
            for piece in run.chunks(self.max_phrase_len) {
                let text = piece
                    .iter()
                    .map(|&i| nodes[i])
                    .collect::<Vec<_>>()
                    .join(" ");
                if seen.insert(text.clone()) {
                    let score = piece.iter().map(|&i| scores[i]).sum();
                    phrases.push((text, score));
                }
            }
            run.clear();
        };
        for t in &raw_tokens {
            match index_of.get(t.as_str()) {
                Some(&i) if top.contains(&i) => run.push(i),
                _ => flush(&mut run, &mut phrases, &mut seen),
            }
        }
        flush(&mut run, &mut phrases, &mut seen);

        phrases.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        phrases.truncate(k);
        let max_score = phrases.first().map(|p| p.1).unwrap_or(1.0);
        Ok(phrases
            .into_iter()
            .map(|(text, score)| Keyphrase {
                text,
                alpha: if max_score > 0.0 {
                    score / max_score
                } else {
                    1.0
                },
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extractor() -> GraphExtractor {
        GraphExtractor::new(Stoplist::from_words([
            "the", "a", "of", "in", "and", "to", "is", "are", "for", "this", "we", "at",
        ]))
    }

    #[test]
    fn repeated_phrase_ranks_high() {
        let text = "The ach transaction flow starts at the bank. Every ach transaction flow \
                    is cleared in the network. We describe the ach transaction flow for \
                    settlement and the fees charged. Some filler sentences talk about weather, \
                    lunch menus, and office chairs. The ach transaction flow ends at the \
                    receiving bank.";
        let top = extractor().extract(text, 3).unwrap();
        assert!(
            top.iter().any(|kp| kp.text.contains("ach")),
            "top-3 {:?} lacks an ach phrase",
            top
        );
    }

    #[test]
    fn empty_text_gives_no_phrases() {
        assert!(extractor().extract("", 5).unwrap().is_empty());
        assert!(extractor().extract("the of and", 5).unwrap().is_empty());
    }

    #[test]
    fn k1_alpha_is_one() {
        let top = extractor()
            .extract("payments clear payments settle payments", 1)
            .unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].alpha, 1.0);
    }

    #[test]
    fn k_zero_is_an_error() {
        assert!(extractor().extract("words", 0).is_err());
    }

    #[test]
    fn alpha_normalized_and_descending() {
        let text = "clearing house rules govern clearing house membership and clearing \
                    operations while settlement windows bound settlement risk";
        let top = extractor().extract(text, 5).unwrap();
        assert!(!top.is_empty());
        assert_eq!(top[0].alpha, 1.0);
        for pair in top.windows(2) {
            assert!(pair[0].alpha >= pair[1].alpha);
        }
        for kp in &top {
            assert!(kp.text.split(' ').count() <= 4);
        }
    }

    #[test]
    fn deterministic_across_calls() {
        let text = "interbank settlement requires clearing metadata plus ledger entries \
                    for interbank settlement confirmation";
        let a = extractor().extract(text, 5).unwrap();
        let b = extractor().extract(text, 5).unwrap();
        assert_eq!(a, b);
    }
}
