//! Orchestration: ingest → chunk → keyphrases → objectives, metadata
//! persistence, objective queries, and throughput measurement.
//!
//! All metadata is line-delimited JSON so runs are diff-able and re-running
//! with the same config and seed is byte-identical.

mod config;

pub use config::{ChunkMethod, PipelineConfig, WeightsSpec};

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bloom::{featurize, generate_objectives, LearningObjective, MlpModel, TrainExample};
use crate::chunkers::{
    self, cut_chunks, hybrid_chunk, materialize_chunks, semantic_chunk, syntactic_chunk,
    syntactic_titles, Chunk, ChunkBoundaries, ChunkManifest,
};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::{boundary_f1, DocEval, EvalReport};
use crate::ingest::{content_tokens, load_lines, load_plain_text, tokenize, Document, Stoplist};
use crate::keyphrase::{
    grid_search_weights, rank_candidates, score_candidates, AnnotationRecord, BackgroundCorpus,
    FactorContext, GraphExtractor, Keyphrase, KeyphraseExtractor, NgramTable, RatedCandidate,
    ScoredKeyphrase, TuningChunk, WeightVector,
};

pub const COURSE_RECORDS_FILE: &str = "course_records.jsonl";
pub const CHUNKS_DIR: &str = "chunks";
pub const LINES_DIR: &str = "lines";

/// One stored record per chunk: its objectives plus boundary provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseRecord {
    pub doc_id: String,
    pub ordinal: usize,
    pub method: String,
    pub params_hash: String,
    pub objectives: Vec<LearningObjective>,
}

impl CourseRecord {
    pub fn chunk_id(&self) -> String {
        format!("{}.{}", self.doc_id, self.ordinal)
    }
}

pub fn save_course_records(records: &[CourseRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec).expect("course record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_course_records(path: &Path) -> Result<Vec<CourseRecord>> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, raw) in contents.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(raw)
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad course record: {e}")))?,
        );
    }
    Ok(records)
}

/// FNV-1a over the canonical parameter string; stable across runs so records
/// carry reproducible provenance.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn params_hash(cfg: &PipelineConfig, method: &str, weights: &WeightVector) -> String {
    let canon = format!(
        "method={method};fg={},{};nc={},{};mtl={};mps={};tp={};vocab={};topk={};nochunk={};w={:.6},{:.6},{:.6},{:.6},{:.6}",
        cfg.syntactic.font_group_lines.0,
        cfg.syntactic.font_group_lines.1,
        cfg.syntactic.n_chunks.0,
        cfg.syntactic.n_chunks.1,
        cfg.syntactic.min_section_title_length,
        cfg.semantic.min_par_to_stop,
        cfg.semantic.trim_par,
        cfg.vocab_limit,
        cfg.top_k,
        cfg.no_chunk,
        weights.w_alpha,
        weights.w_beta,
        weights.w_gamma,
        weights.w_phi,
        weights.w_theta,
    );
    format!("{:016x}", fnv1a64(canon.as_bytes()))
}

/// Read-only state shared by every document worker.
pub struct Resources {
    pub table: Option<EmbeddingTable>,
    pub stoplist: Stoplist,
    pub background: BackgroundCorpus,
    pub ngrams: NgramTable,
    pub model: Option<MlpModel>,
    pub extractor: GraphExtractor,
}

impl Resources {
    pub fn load(cfg: &PipelineConfig, need_embeddings: bool, need_model: bool) -> Result<Self> {
        let stoplist = match &cfg.stoplist {
            Some(path) => Stoplist::load(path)?,
            None => Stoplist::empty(),
        };
        let table = match (&cfg.embeddings, need_embeddings) {
            (Some(path), _) => Some(EmbeddingTable::load(path, cfg.vocab_limit)?),
            (None, false) => None,
            (None, true) => {
                return Err(Error::arg(
                    "this command needs word embeddings; set `embeddings` in the config",
                ))
            }
        };
        let background = match &cfg.background {
            Some(path) if path.is_dir() => BackgroundCorpus::from_dir(path)?,
            Some(path) => BackgroundCorpus::load(path)?,
            None => BackgroundCorpus::empty(),
        };
        let ngrams = match &cfg.ngrams {
            Some(path) => NgramTable::load(path)?,
            None => NgramTable::empty(),
        };
        let model = match (&cfg.model, need_model) {
            (Some(path), _) => Some(MlpModel::load(path)?),
            (None, false) => None,
            (None, true) => {
                return Err(Error::arg(
                    "this command needs a verb model; set `model` in the config",
                ))
            }
        };
        Ok(Resources {
            extractor: GraphExtractor::new(stoplist.clone()),
            table,
            stoplist,
            background,
            ngrams,
            model,
        })
    }

    fn table(&self) -> Result<&EmbeddingTable> {
        self.table
            .as_ref()
            .ok_or_else(|| Error::arg("embedding table not loaded"))
    }
}

/// Load a document by extension: `.jsonl`/`.ndjson` are line records,
/// anything else is plain text with synthetic pages.
pub fn load_document(path: &Path, page_lines: usize) -> Result<Document> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") => load_lines(path),
        _ => load_plain_text(path, page_lines),
    }
}

/// Dispatch to the configured chunker. Returns the boundaries, the method
/// actually used (named in provenance), and the section titles available to
/// the keyphrase re-ranker.
pub fn chunk_document(
    doc: &Document,
    cfg: &PipelineConfig,
    res: &Resources,
) -> Result<(ChunkBoundaries, &'static str, Vec<String>)> {
    if cfg.no_chunk {
        let b = ChunkBoundaries::from_line_starts(doc, vec![0])?;
        return Ok((b, "no-chunk", Vec::new()));
    }
    let method = match cfg.method {
        ChunkMethod::Auto => {
            if doc.has_fonts {
                ChunkMethod::Syntactic
            } else {
                ChunkMethod::Semantic
            }
        }
        m => m,
    };
    match method {
        ChunkMethod::Syntactic => {
            let b = syntactic_chunk(doc, &cfg.syntactic)?;
            let titles = syntactic_titles(doc, &b);
            Ok((b, "syntactic", titles))
        }
        ChunkMethod::Semantic => {
            let b = semantic_chunk(doc, res.table()?, &res.stoplist, &cfg.semantic)?;
            Ok((b, "semantic", Vec::new()))
        }
        ChunkMethod::Hybrid => {
            let b = hybrid_chunk(doc, res.table()?, &res.stoplist, &cfg.semantic)?;
            Ok((b, "hybrid", Vec::new()))
        }
        ChunkMethod::Auto => unreachable!("auto resolved above"),
    }
}

/// Rank keyphrases for every chunk of a document. Sibling texts feed the
/// inverse-chunk-frequency factor; titles feed the overlap factor.
pub fn rank_document_keyphrases(
    chunks: &[Chunk],
    titles: &[String],
    cfg: &PipelineConfig,
    res: &Resources,
) -> Result<Vec<Vec<ScoredKeyphrase>>> {
    let weights = match &cfg.weights {
        WeightsSpec::Fixed(w) => *w,
        WeightsSpec::Tune => return Err(Error::arg("weights unresolved; tune them first")),
    };
    let mut ranked = Vec::with_capacity(chunks.len());
    for (i, chunk) in chunks.iter().enumerate() {
        let siblings: Vec<String> = chunks
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| c.text.clone())
            .collect();
        let ctx = FactorContext {
            siblings: &siblings,
            titles,
            background: &res.background,
            ngrams: &res.ngrams,
            stoplist: &res.stoplist,
        };
        let pool = cfg.top_k.max(crate::keyphrase::DEFAULT_CANDIDATE_POOL);
        let candidates = res.extractor.extract(&chunk.text, pool)?;
        let scored = score_candidates(&candidates, &chunk.text, &ctx);
        ranked.push(rank_candidates(scored, &weights, cfg.top_k));
    }
    Ok(ranked)
}

fn process_document(
    path: &Path,
    cfg: &PipelineConfig,
    res: &Resources,
    weights: &WeightVector,
) -> Result<(Vec<CourseRecord>, ChunkManifest)> {
    let doc = load_document(path, cfg.page_lines)?;
    let (boundaries, method, titles) = chunk_document(&doc, cfg, res)?;
    let chunks_dir = cfg.out_dir.join(CHUNKS_DIR);
    let manifest = materialize_chunks(&doc, &boundaries, &chunks_dir)?;
    let chunks = cut_chunks(&doc, &boundaries);

    let fixed_cfg = PipelineConfig {
        weights: WeightsSpec::Fixed(*weights),
        ..cfg.clone()
    };
    let ranked = rank_document_keyphrases(&chunks, &titles, &fixed_cfg, res)?;
    let model = res
        .model
        .as_ref()
        .ok_or_else(|| Error::arg("verb model not loaded"))?;
    let hash = params_hash(cfg, method, weights);

    let mut records = Vec::with_capacity(chunks.len());
    for (chunk, kps) in chunks.iter().zip(&ranked) {
        let objectives = generate_objectives(&chunk.text, kps, model, res.table()?, &res.stoplist)?;
        records.push(CourseRecord {
            doc_id: doc.id.clone(),
            ordinal: chunk.ordinal,
            method: method.to_string(),
            params_hash: hash.clone(),
            objectives,
        });
    }
    Ok((records, manifest))
}

/// Split work across a small worker pool, preserving input order. Shared
/// state is read-only so plain scoped threads suffice.
fn run_parallel<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs <= 1 {
        return items.iter().map(&f).collect();
    }
    let per_worker = items.len().div_ceil(jobs);
    let mut results: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (item_slice, result_slice) in
            items.chunks(per_worker).zip(results.chunks_mut(per_worker))
        {
            let f = &f;
            scope.spawn(move || {
                for (item, slot) in item_slice.iter().zip(result_slice.iter_mut()) {
                    *slot = Some(f(item));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect()
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub records: Vec<CourseRecord>,
    /// Documents that failed, with the error message; processing continues
    /// past them.
    pub failures: Vec<(PathBuf, String)>,
    pub weights: WeightVector,
}

/// Run the full pipeline over a document set and persist chunk files, chunk
/// manifests, and course records under `cfg.out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig, docs: &[PathBuf]) -> Result<PipelineOutput> {
    cfg.validate()?;
    if docs.is_empty() {
        return Err(Error::arg("no input documents"));
    }
    let res = Resources::load(cfg, true, true)?;
    let weights = resolve_weights(cfg, docs, &res)?;

    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let outcomes = run_parallel(docs, cfg.jobs, |path| {
        process_document(path, cfg, &res, &weights)
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (path, outcome) in docs.iter().zip(outcomes) {
        match outcome {
            Ok((recs, _)) => records.extend(recs),
            Err(e) => failures.push((path.clone(), e.to_string())),
        }
    }
    save_course_records(&records, &cfg.out_dir.join(COURSE_RECORDS_FILE))?;
    Ok(PipelineOutput {
        records,
        failures,
        weights,
    })
}

fn resolve_weights(
    cfg: &PipelineConfig,
    docs: &[PathBuf],
    res: &Resources,
) -> Result<WeightVector> {
    match &cfg.weights {
        WeightsSpec::Fixed(w) => Ok(*w),
        WeightsSpec::Tune => {
            let annotations_path = cfg
                .annotations
                .as_ref()
                .ok_or_else(|| Error::arg("weights = tune needs `annotations` in the config"))?;
            let annotations = crate::keyphrase::load_annotations(annotations_path)?;
            // Chunk the documents in-memory to rebuild the chunk texts the
            // annotations refer to.
            let mut store = Vec::new();
            for path in docs {
                let doc = load_document(path, cfg.page_lines)?;
                let (boundaries, _, titles) = chunk_document(&doc, cfg, res)?;
                for chunk in cut_chunks(&doc, &boundaries) {
                    store.push(StoreChunk {
                        chunk_id: chunk.id(),
                        doc_id: chunk.doc_id.clone(),
                        ordinal: chunk.ordinal,
                        start_page: doc.page_of(chunk.start_line),
                        text: chunk.text.clone(),
                        titles: titles.clone(),
                    });
                }
            }
            let tuning = build_tuning_chunks(&annotations, &store, res)?;
            grid_search_weights(&tuning, cfg.top_k, cfg.grid_step)
        }
    }
}

/// A chunk re-read from the store (or built in memory) for tuning/training.
#[derive(Debug, Clone)]
pub struct StoreChunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub ordinal: usize,
    pub start_page: u32,
    pub text: String,
    /// Section titles of the owning document.
    pub titles: Vec<String>,
}

/// Load every chunk of a chunk store directory, in manifest order sorted by
/// document id. Titles are reconstructed as each chunk's first line.
pub fn load_store_chunks(chunks_dir: &Path) -> Result<Vec<StoreChunk>> {
    let mut manifests: Vec<PathBuf> = fs::read_dir(chunks_dir)
        .map_err(|e| Error::io(chunks_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".chunks.jsonl"))
        })
        .collect();
    manifests.sort();

    let mut store = Vec::new();
    for manifest_path in &manifests {
        let manifest = ChunkManifest::load(manifest_path)?;
        let titles: Vec<String> = manifest
            .records
            .iter()
            .filter_map(|rec| {
                let text = fs::read_to_string(chunks_dir.join(&rec.file)).ok()?;
                text.lines().next().map(str::to_string)
            })
            .filter(|t| !t.trim().is_empty())
            .collect();
        for rec in &manifest.records {
            let path = chunks_dir.join(&rec.file);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            store.push(StoreChunk {
                chunk_id: rec.chunk_id(),
                doc_id: rec.doc_id.clone(),
                ordinal: rec.ordinal,
                start_page: rec.start_page,
                text,
                titles: titles.clone(),
            });
        }
    }
    Ok(store)
}

fn chunk_lookup(store: &[StoreChunk]) -> HashMap<&str, &StoreChunk> {
    store.iter().map(|c| (c.chunk_id.as_str(), c)).collect()
}

fn siblings_of(store: &[StoreChunk], chunk: &StoreChunk) -> Vec<String> {
    store
        .iter()
        .filter(|c| c.doc_id == chunk.doc_id && c.ordinal != chunk.ordinal)
        .map(|c| c.text.clone())
        .collect()
}

/// Candidate pool consulted when recovering extractor scores for annotated
/// keyphrases that the extractor may rank lower.
const ALPHA_RECOVERY_POOL: usize = 20;

/// Compute factor scores for each annotated keyphrase of each chunk, ready
/// for grid search. Annotations are grouped by chunk in first-appearance
/// order; an annotation whose chunk is missing from the store is an error.
pub fn build_tuning_chunks(
    annotations: &[AnnotationRecord],
    store: &[StoreChunk],
    res: &Resources,
) -> Result<Vec<TuningChunk>> {
    if annotations.is_empty() {
        return Err(Error::arg("no annotations"));
    }
    let lookup = chunk_lookup(store);
    let mut order: Vec<&str> = Vec::new();
    let mut grouped: HashMap<&str, Vec<&AnnotationRecord>> = HashMap::new();
    for ann in annotations {
        let entry = grouped.entry(ann.chunk_id.as_str()).or_default();
        if entry.is_empty() {
            order.push(&ann.chunk_id);
        }
        entry.push(ann);
    }

    let mut tuning = Vec::with_capacity(order.len());
    for chunk_id in order {
        let chunk = lookup
            .get(chunk_id)
            .ok_or_else(|| Error::arg(format!("annotation references unknown chunk {chunk_id}")))?;
        let anns = &grouped[chunk_id];
        // Recover extractor scores for the annotated phrases; unseen phrases
        // get alpha 0.
        let extracted = res.extractor.extract(&chunk.text, ALPHA_RECOVERY_POOL)?;
        let alpha_of = |text: &str| {
            extracted
                .iter()
                .find(|kp| kp.text == text)
                .map(|kp| kp.alpha)
                .unwrap_or(0.0)
        };
        let candidates: Vec<Keyphrase> = anns
            .iter()
            .map(|a| Keyphrase {
                text: a.keyphrase.clone(),
                alpha: alpha_of(&a.keyphrase),
            })
            .collect();
        let siblings = siblings_of(store, chunk);
        let ctx = FactorContext {
            siblings: &siblings,
            titles: &chunk.titles,
            background: &res.background,
            ngrams: &res.ngrams,
            stoplist: &res.stoplist,
        };
        let scored = score_candidates(&candidates, &chunk.text, &ctx);
        tuning.push(TuningChunk {
            chunk_id: chunk_id.to_string(),
            candidates: scored
                .into_iter()
                .zip(anns.iter())
                .map(|((kp, factors), ann)| RatedCandidate {
                    text: kp.text,
                    factors,
                    rating: ann.mean_rating(),
                })
                .collect(),
        });
    }
    Ok(tuning)
}

/// Pair annotated keyphrases carrying verb labels with features for verb
/// training. `classes` must be 4 (collapsed) or 10.
pub fn build_training_examples(
    annotations: &[AnnotationRecord],
    store: &[StoreChunk],
    res: &Resources,
    classes: usize,
) -> Result<Vec<TrainExample>> {
    let table = res.table()?;
    let lookup = chunk_lookup(store);
    let mut examples = Vec::new();
    for ann in annotations {
        let Some(verb) = &ann.verb else { continue };
        let verb = crate::bloom::BloomVerb::parse(verb)?;
        let label = match classes {
            10 => verb.index(),
            4 => verb.collapse().index(),
            n => return Err(Error::arg(format!("classes must be 4 or 10, got {n}"))),
        };
        let chunk = lookup.get(ann.chunk_id.as_str()).ok_or_else(|| {
            Error::arg(format!(
                "annotation references unknown chunk {}",
                ann.chunk_id
            ))
        })?;
        let doc_tokens = content_tokens(&chunk.text, &res.stoplist);
        let kp_tokens = content_tokens(&ann.keyphrase, &res.stoplist);
        examples.push(TrainExample {
            features: featurize(&doc_tokens, &kp_tokens, table),
            label,
            chunk_id: ann.chunk_id.clone(),
        });
    }
    if examples.is_empty() {
        return Err(Error::arg("no annotations carry verb labels"));
    }
    Ok(examples)
}

/// Rank stored course records against a query by distinct-token overlap with
/// their objective texts. Zero-overlap records are dropped; ties order by
/// (doc_id, ordinal).
pub fn query_objectives(
    store_dir: &Path,
    query: &str,
    limit: usize,
) -> Result<Vec<(CourseRecord, usize)>> {
    let records = load_course_records(&store_dir.join(COURSE_RECORDS_FILE))?;
    let query_tokens: HashSet<String> = tokenize(query).into_iter().collect();
    let mut scored: Vec<(CourseRecord, usize)> = records
        .into_iter()
        .map(|rec| {
            let record_tokens: HashSet<String> = rec
                .objectives
                .iter()
                .flat_map(|o| tokenize(&o.render()))
                .collect();
            let overlap = query_tokens.intersection(&record_tokens).count();
            (rec, overlap)
        })
        .filter(|(_, score)| *score > 0)
        .collect();
    scored.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| a.0.doc_id.cmp(&b.0.doc_id))
            .then_with(|| a.0.ordinal.cmp(&b.0.ordinal))
    });
    scored.truncate(limit);
    Ok(scored)
}

/// Gold chunk boundaries for one document: starting page numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldBoundaries {
    pub doc_id: String,
    pub pages: Vec<u32>,
}

pub fn load_gold_boundaries(path: &Path) -> Result<Vec<GoldBoundaries>> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut golds = Vec::new();
    for (lineno, raw) in contents.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        golds.push(
            serde_json::from_str(raw)
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad gold record: {e}")))?,
        );
    }
    Ok(golds)
}

/// Boundary F1 of a chunk store against gold page lists.
pub fn evaluate_store(chunks_dir: &Path, gold: &[GoldBoundaries]) -> Result<EvalReport> {
    let mut docs = Vec::new();
    for g in gold {
        let manifest = ChunkManifest::load(&chunkers::manifest_path(chunks_dir, &g.doc_id))?;
        let mut records = manifest.records;
        records.sort_by_key(|r| r.ordinal);
        let system: Vec<u32> = records.iter().map(|r| r.start_page).collect();
        let (precision, recall, f1) = boundary_f1(&system, &g.pages)?;
        docs.push(DocEval {
            doc_id: g.doc_id.clone(),
            precision,
            recall,
            f1,
        });
    }
    Ok(EvalReport { docs })
}

/// Mean wall-clock seconds per document for each pipeline stage.
#[derive(Debug, Clone, Serialize)]
pub struct ThroughputReport {
    pub documents: usize,
    pub chunking_secs: f64,
    pub keyphrase_secs: f64,
    pub rerank_secs: f64,
    pub bloom_secs: f64,
}

impl ThroughputReport {
    pub fn render_table(&self) -> String {
        format!(
            "{:<12} {:>14}\n{:<12} {:>14.4}\n{:<12} {:>14.4}\n{:<12} {:>14.4}\n{:<12} {:>14.4}\n",
            "stage",
            "mean secs/doc",
            "chunking",
            self.chunking_secs,
            "keyphrase",
            self.keyphrase_secs,
            "reranking",
            self.rerank_secs,
            "bloom",
            self.bloom_secs,
        )
    }
}

/// Time each stage over the documents (sequentially, to keep timings clean).
pub fn measure_throughput(cfg: &PipelineConfig, docs: &[PathBuf]) -> Result<ThroughputReport> {
    cfg.validate()?;
    if docs.is_empty() {
        return Err(Error::arg("no input documents"));
    }
    let res = Resources::load(cfg, true, true)?;
    let weights = match &cfg.weights {
        WeightsSpec::Fixed(w) => *w,
        WeightsSpec::Tune => WeightVector::uniform(),
    };
    let model = res.model.as_ref().expect("model loaded");

    let mut chunking = 0.0;
    let mut keyphrase = 0.0;
    let mut rerank = 0.0;
    let mut bloom = 0.0;
    for path in docs {
        let doc = load_document(path, cfg.page_lines)?;

        let t = Instant::now();
        let (boundaries, _, titles) = chunk_document(&doc, cfg, &res)?;
        let chunks = cut_chunks(&doc, &boundaries);
        chunking += t.elapsed().as_secs_f64();

        let pool = cfg.top_k.max(crate::keyphrase::DEFAULT_CANDIDATE_POOL);
        let mut extracted: Vec<Vec<Keyphrase>> = Vec::with_capacity(chunks.len());
        let t = Instant::now();
        for chunk in &chunks {
            extracted.push(res.extractor.extract(&chunk.text, pool)?);
        }
        keyphrase += t.elapsed().as_secs_f64();

        let mut ranked: Vec<Vec<ScoredKeyphrase>> = Vec::with_capacity(chunks.len());
        let t = Instant::now();
        for (i, chunk) in chunks.iter().enumerate() {
            let siblings: Vec<String> = chunks
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, c)| c.text.clone())
                .collect();
            let ctx = FactorContext {
                siblings: &siblings,
                titles: &titles,
                background: &res.background,
                ngrams: &res.ngrams,
                stoplist: &res.stoplist,
            };
            let scored = score_candidates(&extracted[i], &chunk.text, &ctx);
            ranked.push(rank_candidates(scored, &weights, cfg.top_k));
        }
        rerank += t.elapsed().as_secs_f64();

        let t = Instant::now();
        for (chunk, kps) in chunks.iter().zip(&ranked) {
            generate_objectives(&chunk.text, kps, model, res.table()?, &res.stoplist)?;
        }
        bloom += t.elapsed().as_secs_f64();
    }
    let n = docs.len() as f64;
    Ok(ThroughputReport {
        documents: docs.len(),
        chunking_secs: chunking / n,
        keyphrase_secs: keyphrase / n,
        rerank_secs: rerank / n,
        bloom_secs: bloom / n,
    })
}

/// Factor scores for a single ad-hoc candidate set, used by the tuning and
/// keyphrase CLI paths.
pub fn keyphrase_records(
    chunks: &[Chunk],
    ranked: &[Vec<ScoredKeyphrase>],
) -> Vec<serde_json::Value> {
    chunks
        .iter()
        .zip(ranked)
        .map(|(chunk, kps)| {
            serde_json::json!({
                "chunk_id": chunk.id(),
                "keyphrases": kps.iter().map(|kp| {
                    serde_json::json!({
                        "text": kp.text,
                        "score": kp.score,
                        "factors": kp.factors,
                    })
                }).collect::<Vec<_>>(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_hash_is_stable() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        let cfg = PipelineConfig::default();
        let w = WeightVector::uniform();
        assert_eq!(
            params_hash(&cfg, "syntactic", &w),
            params_hash(&cfg, "syntactic", &w)
        );
        assert_ne!(
            params_hash(&cfg, "syntactic", &w),
            params_hash(&cfg, "semantic", &w)
        );
    }

    #[test]
    fn run_parallel_preserves_order() {
        let items: Vec<usize> = (0..103).collect();
        for jobs in [1, 2, 7, 200] {
            let doubled = run_parallel(&items, jobs, |&x| x * 2);
            assert_eq!(doubled, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn course_records_round_trip() {
        use crate::bloom::{BloomVerb, ObjectiveVerb};
        let records = vec![CourseRecord {
            doc_id: "doc".into(),
            ordinal: 0,
            method: "syntactic".into(),
            params_hash: "abc".into(),
            objectives: vec![LearningObjective {
                verb: ObjectiveVerb::Verb(BloomVerb::Describe),
                keyphrase: "ach payments".into(),
                score: 0.9,
                verb_confidence: 0.8,
            }],
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(COURSE_RECORDS_FILE);
        save_course_records(&records, &path).unwrap();
        let loaded = load_course_records(&path).unwrap();
        assert_eq!(records, loaded);
    }

    #[test]
    fn query_ranks_by_overlap() {
        use crate::bloom::{BloomVerb, ObjectiveVerb};
        let mk = |doc: &str, ordinal: usize, phrases: &[&str]| CourseRecord {
            doc_id: doc.into(),
            ordinal,
            method: "semantic".into(),
            params_hash: "h".into(),
            objectives: phrases
                .iter()
                .map(|p| LearningObjective {
                    verb: ObjectiveVerb::Verb(BloomVerb::Identify),
                    keyphrase: p.to_string(),
                    score: 1.0,
                    verb_confidence: 1.0,
                })
                .collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        save_course_records(
            &[
                mk("a", 0, &["ach payments"]),
                mk("b", 0, &["payments industry"]),
                mk("c", 0, &["unrelated topic"]),
            ],
            &dir.path().join(COURSE_RECORDS_FILE),
        )
        .unwrap();

        let hits = query_objectives(dir.path(), "ach payments", 10).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].0.doc_id, "a");
        assert_eq!(hits[0].1, 2);
        assert_eq!(hits[1].0.doc_id, "b");

        let limited = query_objectives(dir.path(), "ach payments", 1).unwrap();
        assert_eq!(limited.len(), 1);

        let empty = query_objectives(dir.path(), "zzz", 10).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn query_missing_store_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            query_objectives(dir.path(), "anything", 5),
            Err(Error::Io { .. })
        ));
    }
}
