//! Bloom's-taxonomy verbs, the verb classifier, and learning-objective
//! assembly. An objective is a verb plus a keyphrase ("describe ach
//! payments"); the verb comes from a small MLP over the concatenated mean
//! embeddings of the chunk text and the keyphrase.

mod mlp;

pub use mlp::{
    cross_validate, cross_validate_with, majority_baseline, train_mlp, Gradients, MlpModel,
    TrainConfig, TrainExample, TrainOutcome,
};

use serde::{Deserialize, Serialize};

use crate::embeddings::{mean_bow, EmbeddingTable, Vector};
use crate::error::{Error, Result};
use crate::ingest::{content_tokens, Stoplist};
use crate::keyphrase::ScoredKeyphrase;

/// The ten Bloom's verbs used for objective generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BloomVerb {
    Identify,
    Define,
    Recall,
    Recognize,
    Select,
    List,
    Describe,
    Explain,
    Outline,
    Determine,
}

/// The four collapsed parent classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BloomClass {
    Knowledge,
    Understand,
    Analyze,
    Apply,
}

impl BloomVerb {
    pub const ALL: [BloomVerb; 10] = [
        BloomVerb::Identify,
        BloomVerb::Define,
        BloomVerb::Recall,
        BloomVerb::Recognize,
        BloomVerb::Select,
        BloomVerb::List,
        BloomVerb::Describe,
        BloomVerb::Explain,
        BloomVerb::Outline,
        BloomVerb::Determine,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BloomVerb::Identify => "identify",
            BloomVerb::Define => "define",
            BloomVerb::Recall => "recall",
            BloomVerb::Recognize => "recognize",
            BloomVerb::Select => "select",
            BloomVerb::List => "list",
            BloomVerb::Describe => "describe",
            BloomVerb::Explain => "explain",
            BloomVerb::Outline => "outline",
            BloomVerb::Determine => "determine",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|v| v.as_str() == s)
            .copied()
            .ok_or_else(|| Error::arg(format!("unknown Bloom verb {s:?}")))
    }

    /// Class index within [`BloomVerb::ALL`].
    pub fn index(&self) -> usize {
        Self::ALL
            .iter()
            .position(|v| v == self)
            .expect("verb in ALL")
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::arg(format!("verb index {i} out of range")))
    }

    pub fn collapse(&self) -> BloomClass {
        match self {
            BloomVerb::Identify
            | BloomVerb::Define
            | BloomVerb::Recall
            | BloomVerb::Recognize
            | BloomVerb::Select
            | BloomVerb::List => BloomClass::Knowledge,
            BloomVerb::Describe | BloomVerb::Explain => BloomClass::Understand,
            BloomVerb::Outline => BloomClass::Analyze,
            BloomVerb::Determine => BloomClass::Apply,
        }
    }
}

impl std::fmt::Display for BloomVerb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl BloomClass {
    pub const ALL: [BloomClass; 4] = [
        BloomClass::Knowledge,
        BloomClass::Understand,
        BloomClass::Analyze,
        BloomClass::Apply,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BloomClass::Knowledge => "knowledge",
            BloomClass::Understand => "understand",
            BloomClass::Analyze => "analyze",
            BloomClass::Apply => "apply",
        }
    }

    pub fn index(&self) -> usize {
        Self::ALL
            .iter()
            .position(|c| c == self)
            .expect("class in ALL")
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::arg(format!("class index {i} out of range")))
    }
}

impl std::fmt::Display for BloomClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Map a verb to its parent class.
pub fn collapse_verb(verb: BloomVerb) -> BloomClass {
    verb.collapse()
}

/// The verb slot of a learning objective: a fine-grained verb from a
/// 10-class model, or a parent class from a 4-class model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveVerb {
    Verb(BloomVerb),
    Class(BloomClass),
}

impl ObjectiveVerb {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectiveVerb::Verb(v) => v.as_str(),
            ObjectiveVerb::Class(c) => c.as_str(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if let Ok(v) = BloomVerb::parse(s) {
            return Ok(ObjectiveVerb::Verb(v));
        }
        BloomClass::ALL
            .iter()
            .find(|c| c.as_str() == s)
            .map(|&c| ObjectiveVerb::Class(c))
            .ok_or_else(|| Error::arg(format!("unknown verb label {s:?}")))
    }
}

impl std::fmt::Display for ObjectiveVerb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ObjectiveVerb {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ObjectiveVerb {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ObjectiveVerb::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A generated learning objective: verb + keyphrase, with the keyphrase's
/// combined score and the classifier's confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningObjective {
    pub verb: ObjectiveVerb,
    pub keyphrase: String,
    pub score: f64,
    pub verb_confidence: f64,
}

impl LearningObjective {
    pub fn render(&self) -> String {
        format!("{} {}", self.verb, self.keyphrase)
    }
}

/// Classifier features: mean embedding of the document (or chunk) tokens
/// concatenated with the mean embedding of the keyphrase tokens. Length 2d.
pub fn featurize(doc_tokens: &[String], kp_tokens: &[String], table: &EmbeddingTable) -> Vector {
    let mut features = mean_bow(doc_tokens, table);
    features.extend(mean_bow(kp_tokens, table));
    features
}

/// Predict a verb for each ranked keyphrase and emit objectives in keyphrase
/// order.
pub fn generate_objectives(
    chunk_text: &str,
    ranked: &[ScoredKeyphrase],
    model: &MlpModel,
    table: &EmbeddingTable,
    stoplist: &Stoplist,
) -> Result<Vec<LearningObjective>> {
    let doc_tokens = content_tokens(chunk_text, stoplist);
    let mut objectives = Vec::with_capacity(ranked.len());
    for kp in ranked {
        let kp_tokens = content_tokens(&kp.text, stoplist);
        let features = featurize(&doc_tokens, &kp_tokens, table);
        let (label, probs) = model.predict(&features)?;
        let verb = match model.num_classes() {
            10 => ObjectiveVerb::Verb(BloomVerb::from_index(label)?),
            4 => ObjectiveVerb::Class(BloomClass::from_index(label)?),
            n => return Err(Error::arg(format!("model has unsupported class count {n}"))),
        };
        objectives.push(LearningObjective {
            verb,
            keyphrase: kp.text.clone(),
            score: kp.score,
            verb_confidence: probs[label],
        });
    }
    Ok(objectives)
}
