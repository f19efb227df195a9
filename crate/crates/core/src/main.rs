//! Command-line front end: one executable with a subcommand per pipeline
//! stage. Exit codes: 0 success, 1 partial failure, 2 usage/config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chunklo::bloom::{cross_validate, majority_baseline, train_mlp, TrainConfig};
use chunklo::chunkers::{cut_chunks, materialize_chunks};
use chunklo::keyphrase::{grid_search_weights, load_annotations};
use chunklo::pipeline::{
    self, build_training_examples, build_tuning_chunks, chunk_document, evaluate_store,
    load_document, load_gold_boundaries, load_store_chunks, query_objectives,
    rank_document_keyphrases, run_pipeline, ChunkMethod, PipelineConfig, Resources, WeightsSpec,
    CHUNKS_DIR, COURSE_RECORDS_FILE, LINES_DIR,
};
use chunklo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "chunklo",
    about = "Chunk instructional documents and generate Bloom-verb learning objectives",
    version
)]
struct Cli {
    /// Flat key-value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed override for training and tuning.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker pool size for multi-document commands.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize documents into line-record files under <out>/lines.
    Ingest {
        /// Line-record (.jsonl/.ndjson) or plain-text documents.
        inputs: Vec<PathBuf>,
        /// Synthetic page size for plain-text input.
        #[arg(long)]
        page_lines: Option<usize>,
    },
    /// Chunk documents and write chunk files plus manifests.
    Chunk {
        #[arg(long)]
        method: Option<String>,
        docs: Vec<PathBuf>,
    },
    /// Chunk documents and write re-ranked keyphrases per chunk.
    Keyphrases {
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        no_chunk: bool,
        docs: Vec<PathBuf>,
    },
    /// Full pipeline: chunk, rank keyphrases, predict verbs, persist records.
    Objectives {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        no_chunk: bool,
        docs: Vec<PathBuf>,
    },
    /// Train the Bloom-verb classifier from annotations over a chunk store.
    TrainBloom {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long)]
        classes: Option<usize>,
        /// Chunk store directory (defaults to <out>/chunks).
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Grid-search factor weights against rating annotations.
    TuneWeights {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Boundary F1 of a chunk store against gold page lists.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Rank stored course records against a query.
    Query {
        query: String,
        #[arg(long, default_value_t = 10)]
        limit: usize,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Measure mean per-stage seconds per document.
    Throughput {
        #[arg(long)]
        model: Option<PathBuf>,
        docs: Vec<PathBuf>,
    },
}

fn build_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    Ok(cfg)
}

fn is_usage_error(err: &Error) -> bool {
    matches!(err, Error::InvalidArgument(_) | Error::Parse { .. })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn require_docs(docs: &[PathBuf]) -> Result<()> {
    if docs.is_empty() {
        return Err(Error::InvalidArgument("no input documents given".into()));
    }
    Ok(())
}

fn run(cli: &Cli, mut cfg: PipelineConfig) -> Result<ExitCode> {
    match &cli.command {
        Command::Ingest { inputs, page_lines } => {
            require_docs(inputs)?;
            if let Some(pl) = page_lines {
                cfg.page_lines = *pl;
            }
            cfg.validate()?;
            let out = cfg.out_dir.join(LINES_DIR);
            std::fs::create_dir_all(&out).map_err(|e| {
                Error::InvalidArgument(format!("cannot create {}: {e}", out.display()))
            })?;
            let mut failures = 0usize;
            for input in inputs {
                match load_document(input, cfg.page_lines) {
                    Ok(doc) => {
                        let path = out.join(format!("{}.jsonl", doc.id));
                        chunklo::ingest::write_lines(&doc, &path)?;
                        println!(
                            "ingested {} ({} lines) -> {}",
                            doc.id,
                            doc.lines.len(),
                            path.display()
                        );
                    }
                    Err(e) => {
                        eprintln!("skipping {}: {e}", input.display());
                        failures += 1;
                    }
                }
            }
            Ok(exit_for_failures(failures))
        }

        Command::Chunk { method, docs } => {
            require_docs(docs)?;
            if let Some(m) = method {
                cfg.method = m.parse()?;
            }
            cfg.validate()?;
            let needs_embeddings = cfg.method != ChunkMethod::Syntactic;
            let res = Resources::load(&cfg, needs_embeddings, false)?;
            let chunks_dir = cfg.out_dir.join(CHUNKS_DIR);
            let mut failures = 0usize;
            for path in docs {
                match chunk_one(path, &cfg, &res, &chunks_dir) {
                    Ok((doc_id, n, method)) => {
                        println!("{doc_id}: {n} chunks ({method})");
                    }
                    Err(e) => {
                        eprintln!("skipping {}: {e}", path.display());
                        failures += 1;
                    }
                }
            }
            Ok(exit_for_failures(failures))
        }

        Command::Keyphrases {
            top_k,
            no_chunk,
            docs,
        } => {
            require_docs(docs)?;
            if let Some(k) = top_k {
                cfg.top_k = *k;
            }
            cfg.no_chunk = *no_chunk;
            cfg.validate()?;
            if matches!(cfg.weights, WeightsSpec::Tune) {
                return Err(Error::InvalidArgument(
                    "keyphrases needs fixed weights; run tune-weights first".into(),
                ));
            }
            let res = Resources::load(&cfg, true, false)?;
            let chunks_dir = cfg.out_dir.join(CHUNKS_DIR);
            std::fs::create_dir_all(&chunks_dir).map_err(|e| {
                Error::InvalidArgument(format!("cannot create {}: {e}", chunks_dir.display()))
            })?;
            let mut records = Vec::new();
            let mut failures = 0usize;
            for path in docs {
                match keyphrases_one(path, &cfg, &res, &chunks_dir) {
                    Ok(mut recs) => records.append(&mut recs),
                    Err(e) => {
                        eprintln!("skipping {}: {e}", path.display());
                        failures += 1;
                    }
                }
            }
            let out = cfg.out_dir.join("keyphrases.jsonl");
            let body: String = records.iter().map(|r| format!("{r}\n")).collect();
            std::fs::write(&out, body).map_err(|e| {
                Error::InvalidArgument(format!("cannot write {}: {e}", out.display()))
            })?;
            println!(
                "wrote {} chunk keyphrase records -> {}",
                records.len(),
                out.display()
            );
            Ok(exit_for_failures(failures))
        }

        Command::Objectives {
            model,
            classes,
            top_k,
            no_chunk,
            docs,
        } => {
            require_docs(docs)?;
            if let Some(m) = model {
                cfg.model = Some(m.clone());
            }
            if let Some(c) = classes {
                cfg.classes = *c;
            }
            if let Some(k) = top_k {
                cfg.top_k = *k;
            }
            cfg.no_chunk = *no_chunk;
            cfg.validate()?;
            let output = run_pipeline(&cfg, docs)?;
            println!(
                "stored {} course records ({} objectives) -> {}",
                output.records.len(),
                output
                    .records
                    .iter()
                    .map(|r| r.objectives.len())
                    .sum::<usize>(),
                cfg.out_dir.join(COURSE_RECORDS_FILE).display()
            );
            for (path, err) in &output.failures {
                eprintln!("failed {}: {err}", path.display());
            }
            Ok(exit_for_failures(output.failures.len()))
        }

        Command::TrainBloom {
            annotations,
            folds,
            classes,
            store,
        } => {
            if let Some(c) = classes {
                cfg.classes = *c;
            }
            cfg.validate()?;
            let res = Resources::load(&cfg, true, false)?;
            let store_dir = store
                .clone()
                .unwrap_or_else(|| cfg.out_dir.join(CHUNKS_DIR));
            let chunks = load_store_chunks(&store_dir)?;
            let annotations = load_annotations(annotations)?;
            let examples = build_training_examples(&annotations, &chunks, &res, cfg.classes)?;
            let train_cfg = TrainConfig {
                seed: cfg.seed,
                ..TrainConfig::default()
            };
            let cv = cross_validate(&examples, *folds, &train_cfg, cfg.classes)?;
            let baseline = majority_baseline(&examples, cfg.classes)?;
            let outcome = train_mlp(&examples, &train_cfg, cfg.classes)?;
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
                Error::InvalidArgument(format!("cannot create {}: {e}", cfg.out_dir.display()))
            })?;
            let model_path = cfg.out_dir.join("model.txt");
            outcome.model.save(&model_path)?;
            println!("examples: {}", examples.len());
            println!("{}-fold weighted F1: {cv:.4}", folds);
            println!("majority baseline:  {baseline:.4}");
            println!("model -> {}", model_path.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::TuneWeights {
            annotations,
            step,
            top_k,
            store,
        } => {
            if let Some(s) = step {
                cfg.grid_step = *s;
            }
            if let Some(k) = top_k {
                cfg.top_k = *k;
            }
            cfg.validate()?;
            let res = Resources::load(&cfg, false, false)?;
            let store_dir = store
                .clone()
                .unwrap_or_else(|| cfg.out_dir.join(CHUNKS_DIR));
            let chunks = load_store_chunks(&store_dir)?;
            let annotations = load_annotations(annotations)?;
            let tuning = build_tuning_chunks(&annotations, &chunks, &res)?;
            let weights = grid_search_weights(&tuning, cfg.top_k, cfg.grid_step)?;
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
                Error::InvalidArgument(format!("cannot create {}: {e}", cfg.out_dir.display()))
            })?;
            let weights_path = cfg.out_dir.join("weights.txt");
            std::fs::write(&weights_path, format!("{weights}\n")).map_err(|e| {
                Error::InvalidArgument(format!("cannot write {}: {e}", weights_path.display()))
            })?;
            println!("tuned weights (alpha,beta,gamma,phi,theta): {weights}");
            println!("weights -> {}", weights_path.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Evaluate { gold, store } => {
            cfg.validate()?;
            let store_dir = store
                .clone()
                .unwrap_or_else(|| cfg.out_dir.join(CHUNKS_DIR));
            let gold = load_gold_boundaries(gold)?;
            let report = evaluate_store(&store_dir, &gold)?;
            let report_path = cfg.out_dir.join("evaluation.jsonl");
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
                Error::InvalidArgument(format!("cannot create {}: {e}", cfg.out_dir.display()))
            })?;
            std::fs::write(&report_path, report.to_jsonl()).map_err(|e| {
                Error::InvalidArgument(format!("cannot write {}: {e}", report_path.display()))
            })?;
            print!("{}", report.render_table());
            Ok(ExitCode::SUCCESS)
        }

        Command::Query {
            query,
            limit,
            store,
        } => {
            let store_dir = store.clone().unwrap_or_else(|| cfg.out_dir.clone());
            let hits = query_objectives(&store_dir, query, *limit)?;
            for (record, score) in &hits {
                for objective in &record.objectives {
                    println!("{}\t{}\t{}", record.chunk_id(), score, objective.render());
                }
            }
            if hits.is_empty() {
                println!("no matches");
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Throughput { model, docs } => {
            require_docs(docs)?;
            if let Some(m) = model {
                cfg.model = Some(m.clone());
            }
            cfg.validate()?;
            let report = pipeline::measure_throughput(&cfg, docs)?;
            std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
                Error::InvalidArgument(format!("cannot create {}: {e}", cfg.out_dir.display()))
            })?;
            let path = cfg.out_dir.join("throughput.jsonl");
            std::fs::write(
                &path,
                format!(
                    "{}\n",
                    serde_json::to_string(&report).expect("report serializes")
                ),
            )
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", report.render_table());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_for_failures(failures: usize) -> ExitCode {
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn chunk_one(
    path: &Path,
    cfg: &PipelineConfig,
    res: &Resources,
    chunks_dir: &Path,
) -> Result<(String, usize, &'static str)> {
    let doc = load_document(path, cfg.page_lines)?;
    let (boundaries, method, _titles) = chunk_document(&doc, cfg, res)?;
    materialize_chunks(&doc, &boundaries, chunks_dir)?;
    Ok((doc.id.clone(), boundaries.chunk_count(), method))
}

fn keyphrases_one(
    path: &Path,
    cfg: &PipelineConfig,
    res: &Resources,
    chunks_dir: &Path,
) -> Result<Vec<String>> {
    let doc = load_document(path, cfg.page_lines)?;
    let (boundaries, _method, titles) = chunk_document(&doc, cfg, res)?;
    materialize_chunks(&doc, &boundaries, chunks_dir)?;
    let chunks = cut_chunks(&doc, &boundaries);
    let ranked = rank_document_keyphrases(&chunks, &titles, cfg, res)?;
    Ok(pipeline::keyphrase_records(&chunks, &ranked)
        .iter()
        .map(|value| value.to_string())
        .collect())
}
