//! Document ingestion: normalized line records, plain-text fallback, and the
//! tokenizer shared by every downstream stage.
//!
//! A document is an ordered list of lines, each carrying its text, a 1-based
//! page number, and (when the producer recovered one) a font size in points.
//! Line records arrive as line-delimited JSON with fields `line`, `page`,
//! `text`, and optional `font_size`; unknown fields are ignored.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One physical line of a document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentLine {
    /// 0-based ordinal within the document.
    pub index: usize,
    /// 1-based page number, non-decreasing with `index`.
    pub page: u32,
    pub text: String,
    /// Font size in points, when the producer extracted one.
    pub font_size: Option<f64>,
}

/// An ingested document. `has_fonts` is true iff every line carries a font
/// size, which is what the syntactic and hybrid chunkers require.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub lines: Vec<DocumentLine>,
    pub has_fonts: bool,
}

impl Document {
    /// Build a document from lines, enforcing the line-record invariants:
    /// non-empty, indices consecutive from 0, pages ≥ 1 and non-decreasing,
    /// font sizes finite and positive.
    pub fn new(id: impl Into<String>, lines: Vec<DocumentLine>) -> Result<Self> {
        let id = id.into();
        if lines.is_empty() {
            return Err(Error::arg(format!("document {id} has no lines")));
        }
        let mut prev_page = 1u32;
        for (i, line) in lines.iter().enumerate() {
            if line.index != i {
                return Err(Error::arg(format!(
                    "document {id}: line index {} at position {i}",
                    line.index
                )));
            }
            if line.page < prev_page {
                return Err(Error::arg(format!(
                    "document {id}: page {} decreases at line {i}",
                    line.page
                )));
            }
            if let Some(fs) = line.font_size {
                if !fs.is_finite() || fs <= 0.0 {
                    return Err(Error::arg(format!(
                        "document {id}: bad font size {fs} at line {i}"
                    )));
                }
            }
            prev_page = line.page;
        }
        let has_fonts = lines.iter().all(|l| l.font_size.is_some());
        Ok(Document {
            id,
            lines,
            has_fonts,
        })
    }

    /// Full text of the document: every line suffixed with a newline.
    pub fn full_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(&line.text);
            out.push('\n');
        }
        out
    }

    /// Page of a given line index.
    pub fn page_of(&self, line: usize) -> u32 {
        self.lines[line].page
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LineRecord {
    line: u64,
    page: u32,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    font_size: Option<f64>,
}

fn doc_id_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

/// Load a line-record file (line-delimited JSON). Records are re-indexed
/// 0..n−1 in file order; the stored `line` field is not trusted.
pub fn load_lines(path: &Path) -> Result<Document> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    let mut prev_page = 1u32;
    for (lineno, raw) in contents.lines().enumerate() {
        let lineno = lineno + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: LineRecord = serde_json::from_str(raw)
            .map_err(|e| Error::parse(path, lineno, format!("bad line record: {e}")))?;
        if rec.page < 1 {
            return Err(Error::parse(path, lineno, "page must be >= 1"));
        }
        if rec.page < prev_page {
            return Err(Error::parse(
                path,
                lineno,
                format!("page {} decreases (previous {prev_page})", rec.page),
            ));
        }
        if let Some(fs) = rec.font_size {
            if !fs.is_finite() || fs <= 0.0 {
                return Err(Error::parse(path, lineno, format!("bad font size {fs}")));
            }
        }
        prev_page = rec.page;
        lines.push(DocumentLine {
            index: lines.len(),
            page: rec.page,
            text: rec.text,
            font_size: rec.font_size,
        });
    }
    if lines.is_empty() {
        return Err(Error::EmptyDocument(path.to_path_buf()));
    }
    Document::new(doc_id_from_path(path), lines)
}

/// Write a document back out as line records. `load_lines` of the result
/// reproduces the document exactly.
pub fn write_lines(doc: &Document, path: &Path) -> Result<()> {
    let mut out = String::new();
    for line in &doc.lines {
        let rec = LineRecord {
            line: line.index as u64,
            page: line.page,
            text: line.text.clone(),
            font_size: line.font_size,
        };
        out.push_str(&serde_json::to_string(&rec).expect("line record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub const DEFAULT_PAGE_LINES: usize = 40;

/// Load a UTF-8 text file as a fontless document. Synthetic pages are
/// assigned every `page_lines` lines so page-level boundary evaluation stays
/// defined.
pub fn load_plain_text(path: &Path, page_lines: usize) -> Result<Document> {
    if page_lines == 0 {
        return Err(Error::arg("page_lines must be >= 1"));
    }
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<DocumentLine> = contents
        .lines()
        .enumerate()
        .map(|(i, text)| DocumentLine {
            index: i,
            page: (1 + i / page_lines) as u32,
            text: text.to_string(),
            font_size: None,
        })
        .collect();
    if lines.is_empty() {
        return Err(Error::EmptyDocument(path.to_path_buf()));
    }
    Document::new(doc_id_from_path(path), lines)
}

/// Punctuation stripped from token edges: commas, periods, colons,
/// semicolons, quotes, parentheses.
const TRIM_CHARS: &[char] = &[
    ',', '.', ':', ';', '"', '\'', '(', ')', '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}',
];

/// Lowercase, split on whitespace, strip leading/trailing punctuation, drop
/// empties.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|w| w.trim_matches(TRIM_CHARS))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// `tokenize` with stopwords removed.
pub fn content_tokens(text: &str, stoplist: &Stoplist) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !stoplist.contains(t))
        .collect()
}

/// A set of lowercase stopwords.
#[derive(Debug, Clone, Default)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    pub fn empty() -> Self {
        Stoplist::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stoplist {
            words: words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        }
    }

    /// Load a stoplist file: one word per line, blank lines ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Stoplist::from_words(
            contents.lines().map(str::trim).filter(|l| !l.is_empty()),
        ))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}
