use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rforge_core::engine::{
    derive_from_premises, generate_fragment_with, load_fragment, save_fragment, DegreeCaps,
    DerivationLimits, DeriveOptions, FragmentOptions,
};
use rforge_core::formula::{
    classify_formula, degree_vector, occurrence_report, parse_formula, render_formula,
    strong_relevance_holds, variable_sharing_holds, DegreeVector,
};
use rforge_core::logic::validate_logic;
use rforge_core::pipeline::{
    corpus_entries, corpus_stats, exit, export_corpus, load_corpus, resolve_logic, run_pipeline,
    verify_corpus, write_json, CorpusFormat, Filters, PipelineError, PipelineManifest, RunOptions,
};
use rforge_core::theory::{load_premises, partition_theory};

#[derive(Parser)]
#[command(
    name = "rforge",
    version,
    about = "Degree-bounded forward reasoning and theorem corpus generation"
)]
struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Logic file utilities.
    Logic {
        #[command(subcommand)]
        command: LogicCommand,
    },
    /// Fragment utilities.
    Frag {
        #[command(subcommand)]
        command: FragCommand,
    },
    /// Derive empirical theorems from premises and a fragment cache.
    Derive(DeriveArgs),
    /// Print the degree vector and classification of a formula.
    Degree { formula: String },
    /// Run relevance validators on a formula.
    Check {
        #[arg(long)]
        strong_relevance: bool,
        #[arg(long)]
        variable_sharing: bool,
        formula: String,
    },
    /// Manifest-driven runs.
    Pipeline {
        #[command(subcommand)]
        command: PipelineCommand,
    },
    /// Summarize a JSONL corpus; fails when it contains duplicates.
    Stats { corpus: PathBuf },
    /// Replay every entry of a JSONL corpus.
    Verify {
        #[arg(long)]
        logic: String,
        #[arg(long)]
        frag: PathBuf,
        #[arg(long)]
        premises: PathBuf,
        corpus: PathBuf,
    },
}

#[derive(Subcommand)]
enum LogicCommand {
    /// Load a logic and audit its axioms for relevance.
    Validate { logic: String },
}

#[derive(Subcommand)]
enum FragCommand {
    /// Generate a fragment and write it as a cache file.
    Gen(FragGenArgs),
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Run a manifest end to end.
    Run { manifest: PathBuf },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long)]
    max_records: Option<usize>,
    #[arg(long)]
    max_size: Option<usize>,
    /// Seconds.
    #[arg(long)]
    time_budget: Option<u64>,
}

impl LimitArgs {
    fn limits(&self) -> DerivationLimits {
        let mut l = DerivationLimits::default();
        if let Some(d) = self.max_depth {
            l.max_depth = d;
        }
        if let Some(r) = self.max_records {
            l.max_records = r;
        }
        if let Some(s) = self.max_size {
            l.max_formula_size = s;
        }
        if let Some(t) = self.time_budget {
            l.time_budget = std::time::Duration::from_secs(t);
        }
        l
    }
}

#[derive(Args)]
struct FragGenArgs {
    /// Logic file or `preset:<name>`.
    #[arg(long)]
    logic: String,
    /// Degree caps, e.g. "=>:2,&:1"; unlisted connectives are capped at 0.
    #[arg(long)]
    cap: String,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    no_subsumption: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FilterArg {
    StrongRelevance,
    VariableSharing,
}

#[derive(Args)]
struct DeriveArgs {
    #[arg(long)]
    logic: String,
    /// Fragment cache written by `frag gen`.
    #[arg(long)]
    frag: PathBuf,
    #[arg(long)]
    premises: PathBuf,
    /// Caps on rule results; unlisted connectives are capped at 0.
    #[arg(long)]
    cap: String,
    #[arg(long, value_enum)]
    filter: Vec<FilterArg>,
    #[arg(long)]
    exclude_logical_instances: bool,
    #[command(flatten)]
    limits: LimitArgs,
    /// Term depth for universal instantiation.
    #[arg(long, default_value_t = 2)]
    ui_depth: usize,
    #[arg(long)]
    no_ui: bool,
    #[arg(long, default_value = "jsonl")]
    format: CorpusFormat,
    /// Stats report path; defaults to the output path plus `.stats.json`.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_caps(text: &str) -> Result<DegreeVector, PipelineError> {
    DegreeVector::parse(text).map_err(|e| PipelineError::Manifest(format!("--cap: {e}")))
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

fn stats_path(out: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".stats.json");
        PathBuf::from(s)
    })
}

fn frag_gen(args: FragGenArgs, workers: usize) -> Result<i32, PipelineError> {
    let logic = resolve_logic(&args.logic)?;
    let caps = parse_caps(&args.cap)?;
    let options = FragmentOptions {
        subsumption: !args.no_subsumption,
        workers,
    };
    let fragment = generate_fragment_with(&logic, &caps, &args.limits.limits(), &options)?;
    save_fragment(&fragment, &args.out)?;
    print_json(&json!({
        "logic": fragment.logic,
        "caps": fragment.caps.to_string(),
        "records": fragment.records.len(),
        "members": fragment.len(),
        "complete": fragment.complete,
        "truncation": fragment.truncation,
        "out": args.out.display().to_string(),
    }));
    Ok(if fragment.truncation.is_some() {
        exit::TRUNCATED
    } else {
        exit::OK
    })
}

fn derive(args: DeriveArgs, workers: usize) -> Result<i32, PipelineError> {
    let logic = resolve_logic(&args.logic)?;
    let fragment = load_fragment(&args.frag, &logic)?;
    let premises = load_premises(&args.premises)?;
    let caps = DegreeCaps::exact(&parse_caps(&args.cap)?);
    let options = DeriveOptions {
        subsumption: false,
        universal_instantiation: (!args.no_ui).then_some(args.ui_depth),
        workers,
    };
    let derived = derive_from_premises(
        &fragment,
        &logic.rules,
        &premises,
        &caps,
        &args.limits.limits(),
        &options,
    )?;
    let filters = Filters {
        strong_relevance: args.filter.contains(&FilterArg::StrongRelevance),
        variable_sharing: args.filter.contains(&FilterArg::VariableSharing),
        exclude_logical_instances: args.exclude_logical_instances,
    };
    let (entries, rejected) = corpus_entries(&derived, &filters);
    export_corpus(&entries, args.format, &args.out)?;
    let theory = partition_theory(&fragment, &derived, &premises).report(&derived);
    let report = json!({
        "status": derived.status,
        "filters": { "enabled": filters, "rejected": rejected },
        "corpus": corpus_stats(&entries),
        "theory": theory,
    });
    write_json(&stats_path(&args.out, args.stats), &report)?;
    print_json(&json!({
        "entries": entries.len(),
        "complete": derived.status.complete,
        "truncation": derived.status.truncation,
        "consistency": theory.consistency.label(),
        "out": args.out.display().to_string(),
    }));
    Ok(if derived.status.truncation.is_some() {
        exit::TRUNCATED
    } else {
        exit::OK
    })
}

fn degree(text: &str) -> Result<i32, PipelineError> {
    let f = parse_formula(text)?;
    print_json(&json!({
        "formula": render_formula(&f),
        "degrees": degree_vector(&f),
        "classification": classify_formula(&f).to_string(),
    }));
    Ok(exit::OK)
}

/// Exit 0 when every requested check holds, 1 otherwise.
fn check(text: &str, strong: bool, sharing: bool) -> Result<i32, PipelineError> {
    let f = parse_formula(text)?;
    let (strong, sharing) = if !strong && !sharing {
        (true, true)
    } else {
        (strong, sharing)
    };
    let mut out = serde_json::Map::new();
    out.insert("formula".into(), json!(render_formula(&f)));
    let report = occurrence_report(&f);
    out.insert(
        "occurrences".into(),
        json!(report
            .iter()
            .map(|(name, o)| (
                name.to_string(),
                json!({ "antecedent": o.antecedent, "consequent": o.consequent })
            ))
            .collect::<serde_json::Map<_, _>>()),
    );
    let mut ok = true;
    if strong {
        let holds = strong_relevance_holds(&f);
        ok &= holds;
        out.insert("strong_relevance".into(), json!(holds));
    }
    if sharing {
        match variable_sharing_holds(&f) {
            Ok(holds) => {
                ok &= holds;
                out.insert("variable_sharing".into(), json!(holds));
            }
            Err(e) => {
                ok = false;
                out.insert("variable_sharing".into(), json!(e.to_string()));
            }
        }
    }
    print_json(&out);
    Ok(if ok { exit::OK } else { exit::FAILURE })
}

fn pipeline_run(path: &Path, workers: usize) -> Result<i32, PipelineError> {
    let manifest = PipelineManifest::load(path)?;
    let outcome = run_pipeline(&manifest, &RunOptions { workers })?;
    let s = &outcome.stats;
    print_json(&json!({
        "entries": s.corpus.total,
        "duplicates": s.corpus.duplicates,
        "truncated": s.truncated,
        "consistency": s.theory.consistency.label(),
        "wall_millis": s.wall_millis,
        "corpus": manifest.output.display().to_string(),
        "stats": manifest.stats_path().display().to_string(),
    }));
    Ok(outcome.exit_code())
}

fn stats(path: &Path) -> Result<i32, PipelineError> {
    let s = corpus_stats(&load_corpus(path)?);
    print_json(&s);
    Ok(if s.duplicates > 0 {
        exit::DUPLICATES
    } else {
        exit::OK
    })
}

fn verify(logic: &str, frag: &Path, premises: &Path, corpus: &Path) -> Result<i32, PipelineError> {
    let logic = resolve_logic(logic)?;
    let fragment = load_fragment(frag, &logic)?;
    let premises = load_premises(premises)?;
    let entries = load_corpus(corpus)?;
    match verify_corpus(&entries, &logic, &premises, &fragment) {
        Ok(n) => {
            print_json(&json!({ "replayed": n }));
            Ok(exit::OK)
        }
        Err(e) => {
            eprintln!("rforge: {e}");
            Ok(exit::VERIFICATION)
        }
    }
}

fn run(cli: Cli) -> Result<i32, PipelineError> {
    let workers = cli.workers;
    match cli.command {
        Command::Logic {
            command: LogicCommand::Validate { logic },
        } => {
            let report = validate_logic(&resolve_logic(&logic)?);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print_json(&report);
            Ok(exit::OK)
        }
        Command::Frag {
            command: FragCommand::Gen(args),
        } => frag_gen(args, workers),
        Command::Derive(args) => derive(args, workers),
        Command::Degree { formula } => degree(&formula),
        Command::Check {
            strong_relevance,
            variable_sharing,
            formula,
        } => check(&formula, strong_relevance, variable_sharing),
        Command::Pipeline {
            command: PipelineCommand::Run { manifest },
        } => pipeline_run(&manifest, workers),
        Command::Stats { corpus } => stats(&corpus),
        Command::Verify {
            logic,
            frag,
            premises,
            corpus,
        } => verify(&logic, &frag, &premises, &corpus),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { 0 });
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("rforge: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
