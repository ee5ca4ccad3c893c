//! `uket` command-line entry point.
//!
//! Paths default to the `[paths]` table of the file given with `--config`
//! (or built-in defaults relative to the working directory); explicit flags win.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use uket_core::config::Config;
use uket_core::corpus::{sample, stratify, Corpus, SampleManifest, SamplePlan};
use uket_core::dataset::{self, ExportPolicy};
use uket_core::extraction::{lint_record, load_records, LintFinding, Severity};
use uket_core::llm_gateway::{
    Gateway, HttpTransport, Mode, OfflineTransport, ReplayCache, Transport,
};
use uket_core::pipeline::{parse_dir, run_extract, ExtractJob};
use uket_core::prompting::{PromptRegistry, TemplateRef};
use uket_core::quality_check::{AnnotationStore, QualityAnnotation};
use uket_core::stats::{self, IntervalMethod, Rule21Detector, Subset};

#[derive(Parser)]
#[command(
    name = "uket",
    version,
    about = "Employment tribunal judgment extraction toolkit"
)]
struct Cli {
    /// TOML configuration file; relative paths inside it resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log verbosity (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus directory and report per-bucket page tallies.
    Ingest {
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Draw a stratified sample and write its manifest.
    Sample {
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
        /// `table1` or a path to a JSON plan.
        #[arg(long, default_value = "table1")]
        plan: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect the prompt registry.
    Prompts {
        #[arg(long)]
        prompts_dir: Option<PathBuf>,
        #[command(subcommand)]
        action: PromptsAction,
    },
    /// Run the sample through the model gateway and parse the responses.
    Extract(ExtractArgs),
    /// Parse stored raw responses into records.
    Parse {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the review linter over a records directory.
    Lint {
        records: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Quality-check annotation store.
    Qc {
        #[command(subcommand)]
        action: QcAction,
    },
    /// Accuracy tables and corpus reports.
    Stats {
        #[command(subcommand)]
        action: StatsAction,
    },
    /// Prediction dataset export.
    Dataset {
        #[command(subcommand)]
        action: DatasetAction,
    },
}

#[derive(Subcommand)]
enum PromptsAction {
    List,
    /// Print a template, e.g. `uket-final/v1`.
    Show {
        reference: String,
    },
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, default_value = "replay-strict")]
    mode: Mode,
    #[arg(long)]
    corpus_dir: Option<PathBuf>,
    #[arg(long)]
    sample: Option<PathBuf>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    prompts_dir: Option<PathBuf>,
    #[arg(long)]
    template: Option<String>,
    #[arg(long)]
    responses: Option<PathBuf>,
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    threads: usize,
}

#[derive(Subcommand)]
enum QcAction {
    /// Write every stored annotation as JSONL.
    Export {
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the review API.
    Serve {
        #[arg(long)]
        sample: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StatsAction {
    /// Per-aspect accuracy with 95% intervals.
    Table2 {
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        subset: Option<Subset>,
        #[arg(long)]
        method: Option<IntervalMethod>,
        /// Print JSON instead of the text table.
        #[arg(long)]
        json: bool,
        /// Also write the JSON form to this file.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Where "Rule 21" is mentioned across facts, statutes and reasons.
    Rule21 {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Suitable-case count and how many run past one page.
    Suitability {
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum DatasetAction {
    Export {
        #[arg(long)]
        policy: ExportPolicy,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level)),
        )
        .with_writer(std::io::stderr)
        .init();

    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn pick(cfg: &Config, flag: Option<PathBuf>, configured: &Path) -> PathBuf {
    flag.unwrap_or_else(|| cfg.resolve(configured))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load_annotations(dir: &Path) -> Result<Vec<QualityAnnotation>> {
    let store = AnnotationStore::open(dir)?;
    Ok(store
        .load_all()?
        .into_iter()
        .map(|s| s.annotation)
        .collect())
}

fn registry(cfg: &Config, flag: Option<PathBuf>) -> Result<PromptRegistry> {
    let dir = flag.or_else(|| cfg.paths.prompts.as_ref().map(|p| cfg.resolve(p)));
    match dir {
        Some(d) => PromptRegistry::load_dir(&d)
            .with_context(|| format!("loading prompts from {}", d.display())),
        None => Ok(PromptRegistry::builtin()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { corpus_dir, json } => {
            let dir = pick(&cfg, corpus_dir, &cfg.paths.corpus);
            let corpus = Corpus::load_dir(&dir)?;
            let tallies: BTreeMap<String, usize> = stratify(corpus.docs())?
                .into_iter()
                .map(|(b, ids)| (b.to_string(), ids.len()))
                .collect();
            if json {
                print_json(&serde_json::json!({ "cases": corpus.len(), "buckets": tallies }))?;
            } else {
                println!("{} cases in {}", corpus.len(), dir.display());
                for b in uket_core::corpus::Bucket::all() {
                    println!("{:>4} pages  {}", b.to_string(), tallies[&b.to_string()]);
                }
            }
        }
        Command::Sample {
            corpus_dir,
            plan,
            seed,
            out,
        } => {
            let dir = pick(&cfg, corpus_dir, &cfg.paths.corpus);
            let corpus = Corpus::load_dir(&dir)?;
            let plan = SamplePlan::resolve(&plan)?;
            let manifest = sample(corpus.docs(), &plan, seed)?;
            let out = pick(&cfg, out, &cfg.paths.sample);
            manifest.save(&out)?;
            for s in &manifest.shortfalls {
                eprintln!(
                    "warning: bucket {} has {} cases, target {}",
                    s.bucket, s.available, s.target
                );
            }
            println!(
                "{} cases sampled to {}",
                manifest.case_ids.len(),
                out.display()
            );
        }
        Command::Prompts {
            prompts_dir,
            action,
        } => {
            let reg = registry(&cfg, prompts_dir)?;
            match action {
                PromptsAction::List => {
                    let mut list = reg.list_templates();
                    list.sort_by(|a, b| {
                        (&a.template_id, &a.version).cmp(&(&b.template_id, &b.version))
                    });
                    for t in list {
                        println!("{}/{}\t{}", t.template_id, t.version, t.summary);
                    }
                }
                PromptsAction::Show { reference } => {
                    let r: TemplateRef = reference.parse()?;
                    print!("{}", reg.get(&r)?.text);
                }
            }
        }
        Command::Extract(args) => extract(&cfg, args)?,
        Command::Parse { input, out } => {
            let input = pick(&cfg, input, &cfg.paths.responses);
            let out = pick(&cfg, out, &cfg.paths.records);
            let report = parse_dir(&input, &out, &cfg.extraction.absence_markers)?;
            print_json(&report)?;
            if !report.failures.is_empty() {
                bail!("{} responses failed to parse", report.failures.len());
            }
        }
        Command::Lint { records, json } => {
            let dir = pick(&cfg, records, &cfg.paths.records);
            let records = load_records(&dir)?;
            let findings: Vec<(String, LintFinding)> = records
                .iter()
                .flat_map(|r| lint_record(r).into_iter().map(|f| (r.case_id.clone(), f)))
                .collect();
            if json {
                let rows: Vec<_> = findings
                    .iter()
                    .map(|(id, f)| serde_json::json!({ "case_id": id, "finding": f }))
                    .collect();
                print_json(&rows)?;
            } else {
                for (id, f) in &findings {
                    let sev = match f.severity {
                        Severity::Warning => "warning",
                        Severity::Error => "error",
                    };
                    println!("{id}\t{}\t{sev}\t{}", f.rule_id.id(), f.message);
                }
                println!("{} findings over {} records", findings.len(), records.len());
            }
        }
        Command::Qc { action } => qc(&cfg, action)?,
        Command::Stats { action } => stats_cmd(&cfg, action)?,
        Command::Dataset {
            action:
                DatasetAction::Export {
                    policy,
                    out,
                    annotations,
                    records,
                },
        } => {
            let records = load_records(&pick(&cfg, records, &cfg.paths.records))?;
            let annotations = load_annotations(&pick(&cfg, annotations, &cfg.paths.annotations))?;
            let manifest = dataset::export(&records, &annotations, policy, &out)?;
            print_json(&manifest)?;
        }
    }
    Ok(())
}

fn extract(cfg: &Config, args: ExtractArgs) -> Result<()> {
    let corpus = Corpus::load_dir(&pick(cfg, args.corpus_dir, &cfg.paths.corpus))?;
    let sample = SampleManifest::load(&pick(cfg, args.sample, &cfg.paths.sample))?;
    let reg = registry(cfg, args.prompts_dir)?;
    let template: TemplateRef = match args.template {
        Some(t) => t.parse()?,
        None => cfg.template().map_err(anyhow::Error::msg)?,
    };
    let cache = ReplayCache::open(pick(cfg, args.cache, &cfg.paths.cache))?;
    let gateway_cfg = cfg.gateway_with_env();
    let transport: Arc<dyn Transport> = match args.mode {
        Mode::ReplayStrict => Arc::new(OfflineTransport::default()),
        Mode::Live | Mode::Record => {
            if gateway_cfg.api_key.is_none() {
                bail!("{} is not set", uket_core::llm_gateway::API_KEY_ENV);
            }
            Arc::new(HttpTransport::new(Duration::from_secs(
                gateway_cfg.timeout_s,
            ))?)
        }
    };
    let gateway = Gateway::new(gateway_cfg, transport, Some(cache));
    let job = ExtractJob {
        corpus: &corpus,
        case_ids: &sample.case_ids,
        registry: &reg,
        template,
        model: cfg.model.clone(),
        markers: cfg.extraction.absence_markers.clone(),
        mode: args.mode,
        responses_dir: pick(cfg, args.responses, &cfg.paths.responses),
        records_dir: pick(cfg, args.records, &cfg.paths.records),
        threads: args.threads,
    };
    let report = run_extract(&job, &gateway)?;
    print_json(&report)?;
    if !report.failures.is_empty() {
        bail!(
            "{} of {} cases failed",
            report.failures.len(),
            report.attempted
        );
    }
    Ok(())
}

fn qc(cfg: &Config, action: QcAction) -> Result<()> {
    match action {
        QcAction::Export { annotations, out } => {
            let all = load_annotations(&pick(cfg, annotations, &cfg.paths.annotations))?;
            let mut body = Vec::new();
            for a in &all {
                serde_json::to_writer(&mut body, a)?;
                body.push(b'\n');
            }
            fs::write(&out, body).with_context(|| format!("writing {}", out.display()))?;
            println!("{} annotations written to {}", all.len(), out.display());
        }
        QcAction::Serve {
            sample,
            port,
            bind,
            corpus_dir,
            records,
            annotations,
        } => {
            let state = uket_service::AppState::load(
                &pick(cfg, corpus_dir, &cfg.paths.corpus),
                &pick(cfg, sample, &cfg.paths.sample),
                &pick(cfg, records, &cfg.paths.records),
                &pick(cfg, annotations, &cfg.paths.annotations),
            )?
            .with_method(cfg.stats.interval_method)
            .with_page_size(cfg.service.page_size);
            let addr = SocketAddr::new(bind, port.unwrap_or(cfg.service.port));
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(uket_service::serve(state, addr))?;
        }
    }
    Ok(())
}

fn stats_cmd(cfg: &Config, action: StatsAction) -> Result<()> {
    match action {
        StatsAction::Table2 {
            annotations,
            records,
            subset,
            method,
            json,
            json_out,
        } => {
            let records = load_records(&pick(cfg, records, &cfg.paths.records))?;
            let annotations = load_annotations(&pick(cfg, annotations, &cfg.paths.annotations))?;
            let method = method.unwrap_or(cfg.stats.interval_method);
            let table = stats::accuracy_table(&annotations, &records, method)?;
            if let Some(path) = json_out {
                let mut body = serde_json::to_vec_pretty(&table)?;
                body.push(b'\n');
                fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            }
            if json {
                print_json(&table)?;
            } else {
                print!("{}", table.render_text(subset));
                println!("interval: {method}");
            }
        }
        StatsAction::Rule21 { records, json } => {
            let records = load_records(&pick(cfg, records, &cfg.paths.records))?;
            let detector = Rule21Detector::new(&cfg.stats.rule21_phrases)?;
            let report = stats::rule21_report(&records, &detector);
            if json {
                print_json(&report)?;
            } else {
                println!("cases mentioning rule 21: {}", report.total_cases);
                println!(
                    "  facts, statutes and reasons: {}",
                    report.facts_statutes_reasons
                );
                println!("  statutes only: {}", report.statutes_only);
                println!(
                    "  statutes and reasons, not facts: {}",
                    report.statutes_and_reasons_not_facts
                );
                println!("  other patterns: {}", report.other_patterns.len());
                for p in &report.other_patterns {
                    println!(
                        "    {} facts={} statutes={} reasons={}",
                        p.case_id, p.facts, p.statute_refs, p.reasons
                    );
                }
            }
        }
        StatsAction::Suitability {
            annotations,
            corpus_dir,
            json,
        } => {
            let annotations = load_annotations(&pick(cfg, annotations, &cfg.paths.annotations))?;
            let corpus = Corpus::load_dir(&pick(cfg, corpus_dir, &cfg.paths.corpus))?;
            let report = stats::suitability_rate(&annotations, &corpus.page_counts())?;
            if json {
                print_json(&report)?;
            } else {
                println!(
                    "{} of {} suitable ({}), {} longer than one page",
                    report.suitable, report.annotated, report.percent, report.multipage_suitable
                );
            }
        }
    }
    Ok(())
}
