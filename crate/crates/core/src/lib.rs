//! Segment instructional documents into chunks and label each chunk with a
//! learning objective ("Bloom's verb + keyphrase").
//!
//! The library is organized as a pipeline:
//!
//! 1. [`ingest`] loads documents into a normalized line-record model.
//! 2. [`chunkers`] finds chunk boundaries three ways: by heading font size
//!    (syntactic), by topical shift over word embeddings (semantic), or over
//!    font groups (hybrid).
//! 3. [`keyphrase`] extracts candidate keyphrases and re-ranks them with a
//!    five-factor weighted score whose weights live on the simplex.
//! 4. [`bloom`] pairs each selected keyphrase with a Bloom's-taxonomy verb
//!    predicted by a small feed-forward network.
//! 5. [`eval`] implements boundary F1, P@N, and weighted F1.
//! 6. [`pipeline`] orchestrates the stages, persists metadata as
//!    line-delimited records, and answers objective queries.
//!
//! Everything is deterministic given fixed seeds and inputs; shared state
//! (embedding tables, models, weights) is immutable after load.

pub mod bloom;
pub mod chunkers;
pub mod embeddings;
mod error;
pub mod eval;
pub mod ingest;
pub mod keyphrase;
pub mod pipeline;

pub use error::{Error, Result};
pub use ingest::{Document, DocumentLine, Stoplist};
