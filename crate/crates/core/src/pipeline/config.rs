//! Pipeline configuration: a flat key-value file plus CLI overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::chunkers::{SemanticParams, SyntacticParams};
use crate::error::{Error, Result};
use crate::ingest::DEFAULT_PAGE_LINES;
use crate::keyphrase::{WeightVector, DEFAULT_GRID_STEP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkMethod {
    Syntactic,
    Semantic,
    Hybrid,
    /// Syntactic when the document carries fonts, semantic otherwise.
    Auto,
}

impl FromStr for ChunkMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "syntactic" => Ok(ChunkMethod::Syntactic),
            "semantic" => Ok(ChunkMethod::Semantic),
            "hybrid" => Ok(ChunkMethod::Hybrid),
            "auto" => Ok(ChunkMethod::Auto),
            other => Err(Error::arg(format!(
                "unknown chunk method {other:?} (expected syntactic|semantic|hybrid|auto)"
            ))),
        }
    }
}

impl fmt::Display for ChunkMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChunkMethod::Syntactic => "syntactic",
            ChunkMethod::Semantic => "semantic",
            ChunkMethod::Hybrid => "hybrid",
            ChunkMethod::Auto => "auto",
        })
    }
}

/// Either concrete factor weights or a request to tune them from the
/// configured annotations.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightsSpec {
    Fixed(WeightVector),
    Tune,
}

impl WeightsSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "tune" {
            return Ok(WeightsSpec::Tune);
        }
        Ok(WeightsSpec::Fixed(WeightVector::parse(s)?))
    }
}

/// Everything a pipeline run needs. Field names double as the config-file
/// keys.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub method: ChunkMethod,
    pub syntactic: SyntacticParams,
    pub semantic: SemanticParams,
    pub embeddings: Option<PathBuf>,
    pub vocab_limit: usize,
    pub stoplist: Option<PathBuf>,
    pub background: Option<PathBuf>,
    pub ngrams: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub weights: WeightsSpec,
    pub grid_step: f64,
    pub top_k: usize,
    pub model: Option<PathBuf>,
    pub classes: usize,
    pub out_dir: PathBuf,
    pub page_lines: usize,
    pub seed: u64,
    pub jobs: usize,
    /// Treat each document as a single chunk (whole-document objectives).
    pub no_chunk: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            method: ChunkMethod::Auto,
            syntactic: SyntacticParams::default(),
            semantic: SemanticParams::default(),
            embeddings: None,
            vocab_limit: crate::embeddings::DEFAULT_VOCAB_LIMIT,
            stoplist: None,
            background: None,
            ngrams: None,
            annotations: None,
            weights: WeightsSpec::Fixed(WeightVector::uniform()),
            grid_step: DEFAULT_GRID_STEP,
            top_k: 5,
            model: None,
            classes: 10,
            out_dir: PathBuf::from("out"),
            page_lines: DEFAULT_PAGE_LINES,
            seed: 42,
            jobs: 1,
            no_chunk: false,
        }
    }
}

fn parse_pair(value: &str, key: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::arg(format!(
            "{key} expects `min,max`, got {value:?}"
        )));
    }
    let lo = parts[0]
        .parse::<usize>()
        .map_err(|e| Error::arg(format!("bad {key} min: {e}")))?;
    let hi = parts[1]
        .parse::<usize>()
        .map_err(|e| Error::arg(format!("bad {key} max: {e}")))?;
    Ok((lo, hi))
}

impl PipelineConfig {
    /// Load a flat `key = value` config file; `#` starts a comment.
    pub fn load(path: &Path) -> Result<Self> {
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = PipelineConfig::default();
        for (lineno, raw) in contents.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, lineno + 1, "expected `key = value`"))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one key-value assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "method" => self.method = value.parse()?,
            "font_group_lines" => {
                self.syntactic.font_group_lines = parse_pair(value, key)?;
            }
            "n_chunks" => self.syntactic.n_chunks = parse_pair(value, key)?,
            "min_section_title_length" => {
                self.syntactic.min_section_title_length = parse_usize(value, key)?;
            }
            "min_par_to_stop" => self.semantic.min_par_to_stop = parse_usize(value, key)?,
            "trim_par" => self.semantic.trim_par = parse_usize(value, key)?,
            "embeddings" => self.embeddings = Some(PathBuf::from(value)),
            "vocab_limit" => self.vocab_limit = parse_usize(value, key)?,
            "stoplist" => self.stoplist = Some(PathBuf::from(value)),
            "background" => self.background = Some(PathBuf::from(value)),
            "ngrams" => self.ngrams = Some(PathBuf::from(value)),
            "annotations" => self.annotations = Some(PathBuf::from(value)),
            "weights" => self.weights = WeightsSpec::parse(value)?,
            "grid_step" => {
                self.grid_step = value
                    .parse::<f64>()
                    .map_err(|e| Error::arg(format!("bad grid_step: {e}")))?;
            }
            "top_k" => self.top_k = parse_usize(value, key)?,
            "model" => self.model = Some(PathBuf::from(value)),
            "classes" => self.classes = parse_usize(value, key)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "page_lines" => self.page_lines = parse_usize(value, key)?,
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|e| Error::arg(format!("bad seed: {e}")))?;
            }
            "jobs" => self.jobs = parse_usize(value, key)?,
            "no_chunk" => {
                self.no_chunk = value
                    .parse::<bool>()
                    .map_err(|e| Error::arg(format!("bad no_chunk: {e}")))?;
            }
            other => return Err(Error::arg(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.syntactic.validate()?;
        self.semantic.validate()?;
        if self.top_k == 0 {
            return Err(Error::arg("top_k must be >= 1"));
        }
        if self.vocab_limit == 0 {
            return Err(Error::arg("vocab_limit must be >= 1"));
        }
        if self.page_lines == 0 {
            return Err(Error::arg("page_lines must be >= 1"));
        }
        if self.classes != 4 && self.classes != 10 {
            return Err(Error::arg("classes must be 4 or 10"));
        }
        Ok(())
    }
}

fn parse_usize(value: &str, key: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|e| Error::arg(format!("bad {key}: {e}")))
}
