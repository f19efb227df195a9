//! The three chunking algorithms and chunk materialization.
//!
//! * `syntactic_chunk` groups lines by font size and picks the largest size
//!   whose qualifying groups produce a plausible number of section headings.
//! * `semantic_chunk` recursively splits the per-line mean-embedding sequence
//!   at the index of maximum cosine distance between the two sides.
//! * `hybrid_chunk` runs the same divide-and-conquer over font-group vectors
//!   so that boundaries always land on structural edges.
//!
//! All three return `ChunkBoundaries`: sorted chunk-start line indices (first
//! always 0) plus the derived start pages used by page-level evaluation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embeddings::{
    add_assign, cosine_unchecked, mean_bow, sub_assign, EmbeddingTable, Vector,
};
use crate::error::{Error, Result};
use crate::ingest::{content_tokens, Document, Stoplist};

/// A maximal run of consecutive lines sharing one font size.
#[derive(Debug, Clone, PartialEq)]
pub struct FontGroup {
    pub start: usize,
    /// Inclusive end index.
    pub end: usize,
    pub font_size: f64,
}

impl FontGroup {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Syntactic-chunker hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntacticParams {
    /// Inclusive [min, max] lines a heading font group may span.
    pub font_group_lines: (usize, usize),
    /// Inclusive [min, max] number of chunks a font size must produce.
    pub n_chunks: (usize, usize),
    /// Minimum non-whitespace characters in a chunk's starting line.
    pub min_section_title_length: usize,
}

impl Default for SyntacticParams {
    fn default() -> Self {
        SyntacticParams {
            font_group_lines: (1, 3),
            n_chunks: (3, 20),
            min_section_title_length: 2,
        }
    }
}

impl SyntacticParams {
    pub fn validate(&self) -> Result<()> {
        if self.font_group_lines.0 > self.font_group_lines.1
            || self.font_group_lines.0 == 0
            || self.n_chunks.0 > self.n_chunks.1
            || self.min_section_title_length == 0
        {
            return Err(Error::arg("bad syntactic parameters"));
        }
        Ok(())
    }
}

/// Semantic/hybrid-chunker hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticParams {
    /// Partitions at or below this many lines are not split further.
    pub min_par_to_stop: usize,
    /// Proportion of starting and ending lines to ignore when searching for a
    /// boundary: the window is [n/trim_par, n·(1 − 1/trim_par)].
    pub trim_par: usize,
}

impl Default for SemanticParams {
    fn default() -> Self {
        SemanticParams {
            min_par_to_stop: 80,
            trim_par: 4,
        }
    }
}

impl SemanticParams {
    pub fn validate(&self) -> Result<()> {
        if self.trim_par < 2 {
            return Err(Error::arg("trim_par must be >= 2"));
        }
        if self.min_par_to_stop < 2 * self.trim_par {
            return Err(Error::arg(
                "min_par_to_stop must be >= 2 * trim_par so the search window is non-empty",
            ));
        }
        Ok(())
    }
}

/// Chunk-start boundaries for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkBoundaries {
    pub doc_id: String,
    /// Strictly increasing; first entry is always 0.
    pub line_starts: Vec<usize>,
    /// Page of each start line.
    pub page_starts: Vec<u32>,
}

impl ChunkBoundaries {
    /// Build from start lines, deriving pages from the document. The starts
    /// must be strictly increasing, in range, and begin with 0.
    pub fn from_line_starts(doc: &Document, line_starts: Vec<usize>) -> Result<Self> {
        if line_starts.first() != Some(&0) {
            return Err(Error::arg("first chunk boundary must be line 0"));
        }
        for pair in line_starts.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::arg("chunk boundaries must be strictly increasing"));
            }
        }
        if let Some(&last) = line_starts.last() {
            if last >= doc.lines.len() {
                return Err(Error::arg("chunk boundary past end of document"));
            }
        }
        let page_starts = line_starts.iter().map(|&l| doc.page_of(l)).collect();
        Ok(ChunkBoundaries {
            doc_id: doc.id.clone(),
            line_starts,
            page_starts,
        })
    }

    pub fn chunk_count(&self) -> usize {
        self.line_starts.len()
    }
}

/// A materialized document slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub doc_id: String,
    pub ordinal: usize,
    pub start_line: usize,
    /// Inclusive.
    pub end_line: usize,
    /// Member lines, each suffixed with a newline, so chunk texts concatenate
    /// back to the document text exactly.
    pub text: String,
}

impl Chunk {
    pub fn id(&self) -> String {
        format!("{}.{}", self.doc_id, self.ordinal)
    }
}

/// Group consecutive lines by equal font size. Requires font information.
pub fn build_font_groups(doc: &Document) -> Result<Vec<FontGroup>> {
    if !doc.has_fonts {
        return Err(Error::MissingFonts(doc.id.clone()));
    }
    let mut groups: Vec<FontGroup> = Vec::new();
    for line in &doc.lines {
        let size = line.font_size.expect("has_fonts checked");
        match groups.last_mut() {
            Some(g) if g.font_size == size => g.end = line.index,
            _ => groups.push(FontGroup {
                start: line.index,
                end: line.index,
                font_size: size,
            }),
        }
    }
    Ok(groups)
}

fn title_length(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count()
}

/// Chunk by heading font size. For each candidate size, qualifying groups are
/// those of that size whose length fits `font_group_lines` and whose first
/// line is long enough to be a title; the largest size producing an in-range
/// number of chunks wins. Falls back to a single chunk when none qualifies.
pub fn syntactic_chunk(doc: &Document, p: &SyntacticParams) -> Result<ChunkBoundaries> {
    p.validate()?;
    let groups = build_font_groups(doc)?;

    let mut sizes: Vec<f64> = groups.iter().map(|g| g.font_size).collect();
    sizes.sort_by(|a, b| b.partial_cmp(a).expect("font sizes are finite"));
    sizes.dedup();

    for size in sizes {
        let starts: Vec<usize> = groups
            .iter()
            .filter(|g| {
                g.font_size == size
                    && g.len() >= p.font_group_lines.0
                    && g.len() <= p.font_group_lines.1
                    && title_length(&doc.lines[g.start].text) >= p.min_section_title_length
            })
            .map(|g| g.start)
            .collect();
        if starts.len() >= p.n_chunks.0 && starts.len() <= p.n_chunks.1 {
            let mut line_starts = starts;
            if line_starts[0] != 0 {
                line_starts.insert(0, 0);
            }
            return ChunkBoundaries::from_line_starts(doc, line_starts);
        }
    }
    ChunkBoundaries::from_line_starts(doc, vec![0])
}

/// Heading lines selected by the syntactic chunker, used as section titles by
/// the keyphrase re-ranker. Boundary 0 is included only when it was a real
/// heading group start.
pub fn syntactic_titles(doc: &Document, boundaries: &ChunkBoundaries) -> Vec<String> {
    boundaries
        .line_starts
        .iter()
        .map(|&l| doc.lines[l].text.clone())
        .filter(|t| !t.trim().is_empty())
        .collect()
}

/// Recursive divide-and-conquer boundary search over a vector sequence.
///
/// A partition of n vectors is split at the window index i ∈
/// [max(1, ⌊n/trim_par⌋), min(n−1, ⌈n·(1 − 1/trim_par)⌉)] minimizing the
/// cosine similarity between the sums of the two sides (ties toward the
/// smallest i), then both sides are split recursively until a side has at
/// most `min_par_to_stop` vectors. Returned indices are ascending and offset
/// by `start_index`.
pub fn find_segments(
    vectors: &[Vector],
    start_index: usize,
    p: &SemanticParams,
) -> Result<Vec<usize>> {
    p.validate()?;
    if vectors.is_empty() {
        return Err(Error::arg("find_segments needs at least one vector"));
    }
    let mut out = Vec::new();
    split_recursive(
        vectors,
        start_index,
        p.min_par_to_stop,
        p.trim_par,
        &mut out,
    );
    out.sort_unstable();
    Ok(out)
}

fn split_recursive(
    vectors: &[Vector],
    offset: usize,
    min_stop: usize,
    trim_par: usize,
    out: &mut Vec<usize>,
) {
    let n = vectors.len();
    if n <= min_stop {
        return;
    }
    let x = (n / trim_par).max(1);
    // ceil(n * (trim_par - 1) / trim_par), capped so both sides stay non-empty
    let y = (n * (trim_par - 1)).div_ceil(trim_par).min(n - 1);
    debug_assert!(x <= y);

    let dim = vectors[0].len();
    let mut sum_top = vec![0.0; dim];
    let mut sum_bot = vec![0.0; dim];
    for v in &vectors[..x] {
        add_assign(&mut sum_top, v);
    }
    for v in &vectors[x..] {
        add_assign(&mut sum_bot, v);
    }

    let mut best_index = x;
    let mut best_score = f64::INFINITY;
    for i in x..=y {
        if i > x {
            let moved = &vectors[i - 1];
            add_assign(&mut sum_top, moved);
            sub_assign(&mut sum_bot, moved);
        }
        let score = cosine_unchecked(&sum_top, &sum_bot);
        if score < best_score {
            best_score = score;
            best_index = i;
        }
    }

    out.push(offset + best_index);
    split_recursive(&vectors[..best_index], offset, min_stop, trim_par, out);
    split_recursive(
        &vectors[best_index..],
        offset + best_index,
        min_stop,
        trim_par,
        out,
    );
}

/// Chunk a document by topical shift: one mean-embedding vector per line,
/// then `find_segments` over the sequence.
pub fn semantic_chunk(
    doc: &Document,
    table: &EmbeddingTable,
    stoplist: &Stoplist,
    p: &SemanticParams,
) -> Result<ChunkBoundaries> {
    p.validate()?;
    let vectors: Vec<Vector> = doc
        .lines
        .iter()
        .map(|l| mean_bow(&content_tokens(&l.text, stoplist), table))
        .collect();
    let mut starts = vec![0];
    starts.extend(find_segments(&vectors, 0, p)?);
    ChunkBoundaries::from_line_starts(doc, starts)
}

/// Chunk over font groups: each group's vector is the sum of its lines'
/// mean-embedding vectors, the stopping threshold is rescaled into group
/// units, and returned group indices map to the group's start line.
pub fn hybrid_chunk(
    doc: &Document,
    table: &EmbeddingTable,
    stoplist: &Stoplist,
    p: &SemanticParams,
) -> Result<ChunkBoundaries> {
    p.validate()?;
    let groups = build_font_groups(doc)?;
    let group_vectors: Vec<Vector> = groups
        .iter()
        .map(|g| {
            let mut sum = vec![0.0; table.dim()];
            for line in &doc.lines[g.start..=g.end] {
                add_assign(
                    &mut sum,
                    &mean_bow(&content_tokens(&line.text, stoplist), table),
                );
            }
            sum
        })
        .collect();

    // min_par_to_stop is a line count; rescale by the mean group length.
    let group_stop = ((p.min_par_to_stop * groups.len()) / doc.lines.len()).max(4);

    let mut indices = Vec::new();
    split_recursive(&group_vectors, 0, group_stop, p.trim_par, &mut indices);
    let mut starts = vec![0];
    starts.extend(indices.into_iter().map(|gi| groups[gi].start));
    starts.sort_unstable();
    ChunkBoundaries::from_line_starts(doc, starts)
}

/// Slice a document into chunks along boundaries. Chunks tile the document:
/// concatenating their texts in ordinal order reproduces `doc.full_text()`.
pub fn cut_chunks(doc: &Document, b: &ChunkBoundaries) -> Vec<Chunk> {
    let n = doc.lines.len();
    b.line_starts
        .iter()
        .enumerate()
        .map(|(ordinal, &start)| {
            let end = b
                .line_starts
                .get(ordinal + 1)
                .map(|&next| next - 1)
                .unwrap_or(n - 1);
            let mut text = String::new();
            for line in &doc.lines[start..=end] {
                text.push_str(&line.text);
                text.push('\n');
            }
            Chunk {
                doc_id: doc.id.clone(),
                ordinal,
                start_line: start,
                end_line: end,
                text,
            }
        })
        .collect()
}

/// One manifest record per materialized chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkRecord {
    pub doc_id: String,
    pub ordinal: usize,
    pub start_line: usize,
    pub end_line: usize,
    pub start_page: u32,
    /// File name of the chunk payload, relative to the manifest's directory.
    pub file: String,
}

impl ChunkRecord {
    pub fn chunk_id(&self) -> String {
        format!("{}.{}", self.doc_id, self.ordinal)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChunkManifest {
    pub records: Vec<ChunkRecord>,
}

impl ChunkManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("chunk record serializes"));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut records = Vec::new();
        for (lineno, raw) in contents.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let rec: ChunkRecord = serde_json::from_str(raw)
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad chunk record: {e}")))?;
            records.push(rec);
        }
        Ok(ChunkManifest { records })
    }
}

/// Write one text file per chunk (`<doc_id>.<ordinal>.txt`) plus the per-
/// document manifest `<doc_id>.chunks.jsonl`. Re-running is byte-identical.
pub fn materialize_chunks(
    doc: &Document,
    b: &ChunkBoundaries,
    out_dir: &Path,
) -> Result<ChunkManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let chunks = cut_chunks(doc, b);
    let mut records = Vec::with_capacity(chunks.len());
    for chunk in &chunks {
        let file = format!("{}.{}.txt", chunk.doc_id, chunk.ordinal);
        let path = out_dir.join(&file);
        fs::write(&path, &chunk.text).map_err(|e| Error::io(&path, e))?;
        records.push(ChunkRecord {
            doc_id: chunk.doc_id.clone(),
            ordinal: chunk.ordinal,
            start_line: chunk.start_line,
            end_line: chunk.end_line,
            start_page: doc.page_of(chunk.start_line),
            file,
        });
    }
    let manifest = ChunkManifest { records };
    manifest.save(&out_dir.join(format!("{}.chunks.jsonl", doc.id)))?;
    Ok(manifest)
}

/// Path of a chunk's manifest within a chunk store directory.
pub fn manifest_path(store: &Path, doc_id: &str) -> PathBuf {
    store.join(format!("{doc_id}.chunks.jsonl"))
}
