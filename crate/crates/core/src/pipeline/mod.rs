//! The two-stage generation run: fragment generation (or cache load), then
//! empirical derivation, filtering, corpus export and a stats report.

mod corpus;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    derive_from_premises, generate_fragment_with, load_fragment, save_fragment, CacheError,
    DegreeCaps, DeriveOptions, EngineError, Fragment, FragmentOptions, SaturationStatus,
    Truncation,
};
use crate::formula::ParseError;
use crate::logic::{load_logic_file, LogicError, LogicSystem};
use crate::theory::{load_premises, partition_theory, PremiseError, TheoryReport};

pub use corpus::{
    corpus_entries, corpus_stats, export_corpus, load_corpus, read_corpus, render_corpus,
    verify_corpus, CorpusEntry, CorpusFormat, CorpusStats, FilterCounts, FlagTallies,
};
pub use manifest::{Filters, PipelineManifest};

/// Process exit codes shared by the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    /// Command-line usage error.
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    /// A limit cut the run short; outputs are partial.
    pub const TRUNCATED: i32 = 4;
    pub const PRECONDITION: i32 = 5;
    pub const DUPLICATES: i32 = 6;
    /// A cache or corpus failed replay.
    pub const VERIFICATION: i32 = 7;
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("premises: {0}")]
    Premises(#[from] PremiseError),
    #[error("fragment cache: {0}")]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("formula: {0}")]
    Formula(#[from] ParseError),
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("{0}")]
    Precondition(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } => exit::FAILURE,
            PipelineError::Manifest(_)
            | PipelineError::Formula(_)
            | PipelineError::Corpus { .. } => exit::PARSE,
            PipelineError::Logic(LogicError::Io { .. }) => exit::FAILURE,
            PipelineError::Logic(e) if e.is_parse() => exit::PARSE,
            PipelineError::Logic(_) => exit::PRECONDITION,
            PipelineError::Premises(PremiseError::Io { .. }) => exit::FAILURE,
            PipelineError::Premises(e) if e.is_parse() => exit::PARSE,
            PipelineError::Premises(_) => exit::PRECONDITION,
            PipelineError::Cache(CacheError::Io { .. }) => exit::FAILURE,
            PipelineError::Cache(CacheError::Format { .. }) => exit::PARSE,
            PipelineError::Cache(CacheError::LogicMismatch { .. }) => exit::PRECONDITION,
            PipelineError::Cache(CacheError::Replay(_)) => exit::VERIFICATION,
            PipelineError::Engine(_) | PipelineError::Precondition(_) => exit::PRECONDITION,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FragmentStage {
    /// `generated` or `cache`.
    pub source: &'static str,
    pub caps: String,
    pub records: usize,
    pub members: usize,
    pub complete: bool,
    pub truncation: Option<Truncation>,
    pub millis: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeriveStage {
    pub caps: String,
    pub status: SaturationStatus,
    pub theorems: usize,
    pub millis: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct FilterReport {
    pub enabled: Filters,
    pub rejected: FilterCounts,
}

/// The stats document written next to the corpus.
#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub logic: String,
    pub premises: usize,
    pub fragment: FragmentStage,
    pub derivation: DeriveStage,
    pub filters: FilterReport,
    pub corpus: CorpusStats,
    pub theory: TheoryReport,
    pub truncated: bool,
    pub wall_millis: u128,
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub stats: RunStats,
    pub entries: Vec<CorpusEntry>,
    pub fragment: Fragment,
}

impl PipelineOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.stats.truncated {
            exit::TRUNCATED
        } else {
            exit::OK
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 picks the default. Outputs do not depend on it.
    pub workers: usize,
}

/// The bundled logic or a logic file.
pub fn resolve_logic(source: &str) -> Result<LogicSystem, LogicError> {
    load_logic_file(Path::new(source))
}

fn stage_one(
    m: &PipelineManifest,
    logic: &LogicSystem,
    workers: usize,
) -> Result<(Fragment, &'static str), PipelineError> {
    if let Some(path) = m.fragment_cache.as_deref().filter(|p| p.exists()) {
        let fragment = load_fragment(path, logic)?;
        if fragment.caps != m.fragment_caps
            || fragment.limits != m.fragment_limits
            || fragment.subsumption != m.fragment_subsumption
        {
            return Err(PipelineError::Precondition(format!(
                "fragment cache {} was built with caps {} and limits {}, the manifest asks for {} and {}",
                path.display(),
                fragment.caps,
                fragment.limits,
                m.fragment_caps,
                m.fragment_limits
            )));
        }
        return Ok((fragment, "cache"));
    }
    let options = FragmentOptions {
        subsumption: m.fragment_subsumption,
        workers,
    };
    let fragment = generate_fragment_with(logic, &m.fragment_caps, &m.fragment_limits, &options)?;
    if let Some(path) = &m.fragment_cache {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        save_fragment(&fragment, path)?;
    }
    Ok((fragment, "generated"))
}

/// Runs both stages and writes the corpus, the optional text corpus and the
/// stats report. A truncated run still writes everything; see
/// [`PipelineOutcome::exit_code`].
pub fn run_pipeline(
    m: &PipelineManifest,
    options: &RunOptions,
) -> Result<PipelineOutcome, PipelineError> {
    let started = Instant::now();
    let logic = resolve_logic(&m.logic)?;
    let premises = load_premises(&m.premises)?;
    m.fragment_limits.validate()?;
    m.empirical_limits.validate()?;

    let t = Instant::now();
    let (fragment, source) = stage_one(m, &logic, options.workers)?;
    let fragment_stage = FragmentStage {
        source,
        caps: m.fragment_caps.to_string(),
        records: fragment.records.len(),
        members: fragment.len(),
        complete: fragment.complete,
        truncation: fragment.truncation,
        millis: t.elapsed().as_millis(),
    };

    let t = Instant::now();
    let caps = DegreeCaps::exact(&m.empirical_caps);
    let derive_options = DeriveOptions {
        subsumption: false,
        universal_instantiation: m.universal_instantiation,
        workers: options.workers,
    };
    let derived = derive_from_premises(
        &fragment,
        &logic.rules,
        &premises,
        &caps,
        &m.empirical_limits,
        &derive_options,
    )?;
    let derive_stage = DeriveStage {
        caps: m.empirical_caps.to_string(),
        status: derived.status.clone(),
        theorems: derived.theorems().count(),
        millis: t.elapsed().as_millis(),
    };

    let theory = partition_theory(&fragment, &derived, &premises).report(&derived);
    let (entries, rejected) = corpus_entries(&derived, &m.filters);
    export_corpus(&entries, CorpusFormat::Jsonl, &m.output)?;
    if let Some(path) = &m.text_output {
        export_corpus(&entries, CorpusFormat::Text, path)?;
    }
    let truncated = fragment.truncation.is_some() || derived.status.truncation.is_some();
    let stats = RunStats {
        logic: logic.name.clone(),
        premises: premises.len(),
        fragment: fragment_stage,
        derivation: derive_stage,
        filters: FilterReport {
            enabled: m.filters,
            rejected,
        },
        corpus: corpus_stats(&entries),
        theory,
        truncated,
        wall_millis: started.elapsed().as_millis(),
    };
    write_json(&m.stats_path(), &stats)?;
    Ok(PipelineOutcome {
        stats,
        entries,
        fragment,
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(io)
}
