//! Command-line interface: per-stage subcommands plus the full pipeline
//! and the evaluation harness.
//!
//! Exit codes: 0 success, 1 partial or runtime failure, 2 configuration or
//! usage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::event::EventLog;
use crate::mcts::Context;
use crate::pipeline::{self, BackendKind, PipelineError, RunConfig, RunReport};
use crate::planner::Query;
use crate::qd::EliteArchive;

#[derive(Parser)]
#[command(
    name = "scenforge",
    version,
    about = "Evolutionary tree-search generator for future-problem creativity assessment contexts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Mock,
    Live,
}

#[derive(Args)]
pub struct CommonArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured backend.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Run directory for inputs and outputs.
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum Command {
    /// Plan outlines for every dataset query.
    Plan(CommonArgs),
    /// Generate seed contexts from persisted outlines.
    Generate(CommonArgs),
    /// Evolve archives from persisted seed contexts.
    Evolve(CommonArgs),
    /// Refine the persisted archive's elites.
    Refine(CommonArgs),
    /// Run all four stages end to end.
    Pipeline(CommonArgs),
    /// Judge method directories against a reference directory.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory of reference contexts (<query_id>.txt).
        #[arg(long)]
        reference: PathBuf,
        /// Method directory to evaluate; repeatable.
        #[arg(long = "method", required = true)]
        methods: Vec<PathBuf>,
        /// Optional expert-reference directory for ROUGE.
        #[arg(long)]
        expert: Option<PathBuf>,
    },
    /// Summarize a run directory's report.
    Report {
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
}

pub fn main() -> ! {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(0) => 0,
        Ok(_) => 1,
        Err(error) => {
            eprintln!("error: {error}");
            match error {
                PipelineError::Config(_) | PipelineError::Dataset { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, PipelineError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(backend) = common.backend {
        config.backend = match backend {
            BackendArg::Mock => BackendKind::Mock,
            BackendArg::Live => BackendKind::Live,
        };
    }
    config.validate()?;
    Ok(config)
}

fn queries_with_ids(config: &RunConfig) -> Result<Vec<(Query, String)>, PipelineError> {
    let queries = pipeline::resolve_queries(config)?;
    if queries.is_empty() {
        eprintln!("warning: dataset is empty; nothing to do");
    }
    let ids = pipeline::query_ids(&queries);
    Ok(queries.into_iter().zip(ids).collect())
}

fn execute(cli: Cli) -> Result<usize, PipelineError> {
    match cli.command {
        Command::Plan(common) => {
            let config = load_config(&common)?;
            let gateway = pipeline::build_gateway(&config)?;
            let dir = common.out.join("outline");
            std::fs::create_dir_all(&dir).map_err(|e| PipelineError::Io {
                path: dir.display().to_string(),
                detail: e.to_string(),
            })?;
            run_per_query(&queries_with_ids(&config)?, |query, qid| {
                let outline = pipeline::stage_plan(&gateway, &config, query)?;
                pipeline::write_json(&dir.join(format!("{qid}.json")), &outline)?;
                println!("planned {qid}: {} sections", outline.sections.len());
                Ok(())
            })
        }
        Command::Generate(common) => {
            let config = load_config(&common)?;
            let gateway = pipeline::build_gateway(&config)?;
            let seeds_dir = common.out.join("seeds");
            std::fs::create_dir_all(&seeds_dir).map_err(|e| PipelineError::Io {
                path: seeds_dir.display().to_string(),
                detail: e.to_string(),
            })?;
            run_per_query(&queries_with_ids(&config)?, |query, qid| {
                let outline =
                    pipeline::read_json(&common.out.join("outline").join(format!("{qid}.json")))?;
                let (seed, traces) =
                    pipeline::stage_seed(&gateway, &config, query, &outline, qid)?;
                pipeline::write_json(&seeds_dir.join(format!("{qid}.json")), &seed)?;
                pipeline::write_json(&seeds_dir.join(format!("{qid}_trace.json")), &traces)?;
                println!("generated {qid}: {} chars", seed.text.len());
                Ok(())
            })
        }
        Command::Evolve(common) => {
            let config = load_config(&common)?;
            let gateway = pipeline::build_gateway(&config)?;
            let mut archives: BTreeMap<String, EliteArchive> = BTreeMap::new();
            let mut events = EventLog::new();
            let failed = run_per_query(&queries_with_ids(&config)?, |_, qid| {
                let seed: Context =
                    pipeline::read_json(&common.out.join("seeds").join(format!("{qid}.json")))?;
                let mut archive = EliteArchive::new(config.archive.bins);
                pipeline::stage_evolve(&gateway, &config, qid, vec![seed], &mut archive, &mut events)?;
                println!(
                    "evolved {qid}: {} niches occupied over {} generations",
                    archive.occupied(),
                    archive.generation()
                );
                archives.insert(qid.to_string(), archive);
                Ok(())
            })?;
            pipeline::write_json(&common.out.join("archive.json"), &archives)?;
            write_events(&common.out.join("events-evolve.jsonl"), &events)?;
            Ok(failed)
        }
        Command::Refine(common) => {
            let config = load_config(&common)?;
            let gateway = pipeline::build_gateway(&config)?;
            let refine_dir = common.out.join("refine");
            std::fs::create_dir_all(&refine_dir).map_err(|e| PipelineError::Io {
                path: refine_dir.display().to_string(),
                detail: e.to_string(),
            })?;
            let mut archives: BTreeMap<String, EliteArchive> =
                pipeline::read_json(&common.out.join("archive.json"))?;
            let mut events = EventLog::new();
            let mut failures = 0usize;
            for (qid, archive) in archives.iter_mut() {
                match pipeline::stage_refine(&gateway, &config, qid, archive, &mut events) {
                    Ok((reports, bonus)) => {
                        pipeline::write_json(&refine_dir.join(format!("{qid}.json")), &reports)?;
                        println!(
                            "refined {qid}: {} reports, {} bonus round(s)",
                            reports.len(),
                            bonus
                        );
                    }
                    Err(error) => {
                        eprintln!("refine failed for {qid}: {error}");
                        failures += 1;
                    }
                }
            }
            pipeline::write_json(&common.out.join("archive.json"), &archives)?;
            write_events(&common.out.join("events-refine.jsonl"), &events)?;
            Ok(failures)
        }
        Command::Pipeline(common) => {
            let config = load_config(&common)?;
            let pairs = queries_with_ids(&config)?;
            let queries: Vec<Query> = pairs.into_iter().map(|(q, _)| q).collect();
            let summary = pipeline::run_pipeline(&queries, &config, &common.out)?;
            println!(
                "pipeline complete: {} queries, {} failed, {} oracle calls",
                summary.report.queries.len(),
                summary.failed_queries,
                summary.report.totals.oracle_calls
            );
            println!("outputs in {}", summary.out_dir.display());
            Ok(summary.failed_queries)
        }
        Command::Evaluate { common, reference, methods, expert } => {
            let config = load_config(&common)?;
            let gateway = pipeline::build_gateway(&config)?;
            let named: Vec<(String, PathBuf)> = methods
                .iter()
                .map(|dir| (method_name(dir), dir.clone()))
                .collect();
            let reports = pipeline::eval::run_evaluation(
                &gateway,
                &named,
                &reference,
                &config.evaluation.metrics,
                expert.as_deref(),
                config.evaluation.external_scorer.as_deref(),
                &common.out,
            )?;
            for report in &reports {
                println!("method {}: {} pairs", report.method, report.n_pairs);
                for (metric, sub) in &report.subjective {
                    println!(
                        "  {metric}: positive rate {:.2}% ({}W/{}T/{}L, {} invalid)",
                        100.0 * sub.positive_rate,
                        sub.wins,
                        sub.ties,
                        sub.losses,
                        sub.invalid_pairs
                    );
                }
                println!("  diverse verbs: {:.2}%", report.diverse_verbs_mean);
                if let Some(rouge) = &report.rouge_vs_expert {
                    println!(
                        "  rouge-1 F1 {:.2}% / rouge-L F1 {:.2}% vs expert",
                        100.0 * rouge.rouge_1.f1,
                        100.0 * rouge.rouge_l.f1
                    );
                }
                if let Some(external) = report.external_scorer_mean {
                    println!("  external scorer mean: {external:.4}");
                }
            }
            Ok(0)
        }
        Command::Report { out } => {
            let report: RunReport = pipeline::read_json(&out.join("report.json"))?;
            print_report(&report);
            Ok(0)
        }
    }
}

fn method_name(dir: &Path) -> String {
    dir.file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("method")
        .to_string()
}

fn write_events(path: &Path, events: &EventLog) -> Result<(), PipelineError> {
    std::fs::write(path, events.to_jsonl()).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn run_per_query<F>(pairs: &[(Query, String)], mut step: F) -> Result<usize, PipelineError>
where
    F: FnMut(&Query, &str) -> Result<(), PipelineError>,
{
    let mut failures = 0usize;
    for (query, qid) in pairs {
        if let Err(error) = step(query, qid) {
            eprintln!("query {qid} failed: {error}");
            failures += 1;
        }
    }
    if failures == pairs.len() && !pairs.is_empty() {
        return Err(PipelineError::AllQueriesFailed);
    }
    Ok(failures)
}

fn print_report(report: &RunReport) {
    println!("run {} (backend {}, seed {})", report.run_id, report.backend, report.seed);
    println!(
        "totals: {} oracle calls, {} prompt tokens, {} reply tokens",
        report.totals.oracle_calls, report.totals.prompt_tokens, report.totals.reply_tokens
    );
    for record in &report.queries {
        println!("- {} [{}]", record.query_id, record.status);
        println!(
            "    outline {} sections; {} oracle calls; {} bonus round(s)",
            record.outline_sections, record.oracle_calls, record.bonus_rounds
        );
        if let Some(archive) = &record.archive {
            println!(
                "    archive: {} niches, generation {}, best fitness {}",
                archive.occupied,
                archive.generation,
                archive
                    .best_fitness
                    .map(|f| format!("{f:.3}"))
                    .unwrap_or_else(|| "-".to_string())
            );
        }
        for refinement in &record.refinements {
            println!(
                "    refine {}: psi {:.3} -> {} (cycle {})",
                refinement.context_id, refinement.psi, refinement.verdict, refinement.cycle
            );
        }
    }
}
