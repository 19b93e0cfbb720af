//! Fragment cache files.
//!
//! ```text
//! # rforge fragment cache v1
//! logic  srl-entailment-mini
//! caps  =>:2,&:1,|:0,~:0
//! limits  max_depth=10 max_records=1000000 max_size=80 time_budget=300
//! subsumption  true
//! complete  true
//! truncation  -
//! records  3
//! subsumed  -
//! 0  0  axiom:Id  -  A1 => A1
//! 2  1  rule:MP  1,0  A1 => A1
//! ```
//!
//! Record lines are `id, depth, origin, parent ids, canonical formula`,
//! tab-separated (spaces above) and sorted by id. `subsumed` lists `id:by`
//! pairs. Loading replays every rule application.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use super::fragment::Fragment;
use super::replay::{replay_record, ReplayError};
use super::rules::apply_rule;
use super::{Derivation, DerivationLimits, RecordFlags, TheoremRecord, Truncation};
use crate::formula::{degree_vector, parse_formula, render_formula, DegreeVector};
use crate::logic::LogicSystem;
use crate::subst::is_instance;

const MAGIC: &str = "# rforge fragment cache v1";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("cache was built for logic `{found}`, expected `{expected}`")]
    LogicMismatch { expected: String, found: String },
    #[error("corrupt cache: {0}")]
    Replay(#[from] ReplayError),
}

/// Renders a fragment in the cache format.
pub fn write_fragment(fragment: &Fragment) -> String {
    let mut out = String::new();
    let subsumed: Vec<String> = fragment
        .records
        .iter()
        .filter_map(|r| r.subsumed_by.map(|by| format!("{}:{by}", r.id)))
        .collect();
    let limits = &fragment.limits;
    // Writing to a String cannot fail.
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "logic\t{}", fragment.logic);
    let _ = writeln!(out, "caps\t{}", fragment.caps);
    let _ = writeln!(
        out,
        "limits\tmax_depth={} max_records={} max_size={} time_budget={}",
        limits.max_depth,
        limits.max_records,
        limits.max_formula_size,
        limits.time_budget.as_secs()
    );
    let _ = writeln!(out, "subsumption\t{}", fragment.subsumption);
    let _ = writeln!(out, "complete\t{}", fragment.complete);
    let truncation = fragment
        .truncation
        .map_or("-".to_string(), |t| t.to_string());
    let _ = writeln!(out, "truncation\t{truncation}");
    let _ = writeln!(out, "records\t{}", fragment.records.len());
    let subsumed = if subsumed.is_empty() {
        "-".to_string()
    } else {
        subsumed.join(",")
    };
    let _ = writeln!(out, "subsumed\t{subsumed}");
    for r in &fragment.records {
        let (origin, parents) = match &r.derivation {
            Derivation::Axiom(name) => (format!("axiom:{name}"), "-".to_string()),
            Derivation::Rule { rule, parents, .. } => (
                format!("rule:{rule}"),
                parents
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            // Fragments only hold axioms and rule results.
            other => (other.label(), "-".to_string()),
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{origin}\t{parents}\t{}",
            r.id,
            r.depth,
            render_formula(&r.formula)
        );
    }
    out
}

pub fn save_fragment(fragment: &Fragment, path: &Path) -> Result<(), CacheError> {
    fs::write(path, write_fragment(fragment)).map_err(|source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a cache file and replays it against `logic`, refusing caches built
/// for a logic of another name.
pub fn load_fragment(path: &Path, logic: &LogicSystem) -> Result<Fragment, CacheError> {
    let text = fs::read_to_string(path).map_err(|source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_fragment(&text, logic)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str, CacheError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(self.error("unexpected end of file")),
        }
    }

    fn header(&mut self, key: &str) -> Result<&'a str, CacheError> {
        let l = self.next_line()?;
        match l.split_once('\t') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.error(format!("expected `{key}` header"))),
        }
    }

    fn error(&self, message: impl Into<String>) -> CacheError {
        CacheError::Format {
            line: self.line,
            message: message.into(),
        }
    }
}

fn parse_bool(lines: &Lines, v: &str) -> Result<bool, CacheError> {
    v.parse()
        .map_err(|_| lines.error(format!("bad boolean `{v}`")))
}

fn parse_limits(lines: &Lines, v: &str) -> Result<DerivationLimits, CacheError> {
    let mut limits = DerivationLimits::default();
    let mut seen = 0;
    for part in v.split_whitespace() {
        let (k, n) = part
            .split_once('=')
            .ok_or_else(|| lines.error(format!("bad limit `{part}`")))?;
        let n: u64 = n
            .parse()
            .map_err(|_| lines.error(format!("bad limit `{part}`")))?;
        match k {
            "max_depth" => limits.max_depth = n as u32,
            "max_records" => limits.max_records = n as usize,
            "max_size" => limits.max_formula_size = n as usize,
            "time_budget" => limits.time_budget = Duration::from_secs(n),
            _ => return Err(lines.error(format!("unknown limit `{k}`"))),
        }
        seen += 1;
    }
    if seen != 4 {
        return Err(lines.error("expected four limits"));
    }
    Ok(limits)
}

/// Parses and verifies cache text.
pub fn read_fragment(text: &str, logic: &LogicSystem) -> Result<Fragment, CacheError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    if lines.next_line()? != MAGIC {
        return Err(lines.error("not a fragment cache"));
    }
    let name = lines.header("logic")?;
    if name != logic.name {
        return Err(CacheError::LogicMismatch {
            expected: logic.name.clone(),
            found: name.to_string(),
        });
    }
    let caps_text = lines.header("caps")?;
    let caps = DegreeVector::parse(caps_text).map_err(|e| lines.error(e))?;
    let limits_text = lines.header("limits")?;
    let limits = parse_limits(&lines, limits_text)?;
    let subsumption_text = lines.header("subsumption")?;
    let subsumption = parse_bool(&lines, subsumption_text)?;
    let complete_text = lines.header("complete")?;
    let complete = parse_bool(&lines, complete_text)?;
    let truncation = match lines.header("truncation")? {
        "-" => None,
        "max-depth" => Some(Truncation::MaxDepth),
        "max-records" => Some(Truncation::MaxRecords),
        "time-budget" => Some(Truncation::TimeBudget),
        other => return Err(lines.error(format!("unknown truncation `{other}`"))),
    };
    let count_text = lines.header("records")?;
    let count: usize = count_text
        .parse()
        .map_err(|_| lines.error(format!("bad record count `{count_text}`")))?;
    let subsumed_text = lines.header("subsumed")?;
    let mut subsumed = Vec::new();
    if subsumed_text != "-" {
        for pair in subsumed_text.split(',') {
            let parsed = pair
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)));
            subsumed.push(parsed.ok_or_else(|| lines.error(format!("bad pair `{pair}`")))?);
        }
    }

    let mut records: Vec<TheoremRecord> = Vec::with_capacity(count);
    let mut seen = HashSet::new();
    while let Some((i, l)) = lines.inner.next() {
        lines.line = i + 1;
        if l.is_empty() {
            continue;
        }
        let id = records.len();
        let record = parse_record(&lines, l, id, &records, logic)?;
        if !record.degrees.within(&caps) {
            return Err(ReplayError {
                id,
                reason: format!("degrees {} exceed the caps", record.degrees),
            }
            .into());
        }
        if !seen.insert(record.formula.clone()) {
            return Err(ReplayError {
                id,
                reason: "duplicate formula".into(),
            }
            .into());
        }
        records.push(record);
        replay_record(&records, id, logic, None, None)?;
    }
    if records.len() != count {
        return Err(lines.error(format!(
            "header promises {count} records, found {}",
            records.len()
        )));
    }
    for (id, by) in subsumed {
        if id >= count || by >= count || id == by {
            return Err(CacheError::Format {
                line: 9,
                message: format!("bad subsumption pair {id}:{by}"),
            });
        }
        if !is_instance(&records[id].formula, &records[by].formula) {
            return Err(ReplayError {
                id,
                reason: format!("not an instance of record {by}"),
            }
            .into());
        }
        records[id].subsumed_by = Some(by);
    }
    Ok(Fragment {
        logic: logic.name.clone(),
        caps,
        limits,
        subsumption,
        complete,
        truncation,
        records,
    })
}

fn parse_record(
    lines: &Lines,
    l: &str,
    id: usize,
    earlier: &[TheoremRecord],
    logic: &LogicSystem,
) -> Result<TheoremRecord, CacheError> {
    let fields: Vec<&str> = l.split('\t').collect();
    let [id_text, depth_text, origin, parents_text, formula_text] = fields[..] else {
        return Err(lines.error("expected five tab-separated fields"));
    };
    if id_text.parse::<usize>().ok() != Some(id) {
        return Err(lines.error(format!("expected record id {id}")));
    }
    let depth: u32 = depth_text
        .parse()
        .map_err(|_| lines.error(format!("bad depth `{depth_text}`")))?;
    let formula = parse_formula(formula_text).map_err(|e| lines.error(e.to_string()))?;
    let parents: Vec<usize> = if parents_text == "-" {
        Vec::new()
    } else {
        parents_text
            .split(',')
            .map(|p| {
                p.parse()
                    .map_err(|_| lines.error(format!("bad parent `{p}`")))
            })
            .collect::<Result<_, _>>()?
    };
    let derivation = if let Some(name) = origin.strip_prefix("axiom:") {
        Derivation::Axiom(name.into())
    } else if let Some(name) = origin.strip_prefix("rule:") {
        let rule = logic.rule(name).ok_or_else(|| ReplayError {
            id,
            reason: format!("unknown rule `{name}`"),
        })?;
        if parents.iter().any(|&p| p >= id) {
            return Err(ReplayError {
                id,
                reason: "a parent does not precede the record".into(),
            }
            .into());
        }
        let parent_formulas: Vec<_> = parents.iter().map(|&p| &earlier[p].formula).collect();
        let conclusion = apply_rule(rule, &parent_formulas)
            .into_iter()
            .next()
            .ok_or_else(|| ReplayError {
                id,
                reason: format!("rule `{name}` does not apply to the parents"),
            })?;
        Derivation::Rule {
            rule: rule.name.clone(),
            parents,
            substitution: conclusion.substitution,
        }
    } else {
        return Err(lines.error(format!("bad origin `{origin}`")));
    };
    Ok(TheoremRecord {
        id,
        degrees: degree_vector(&formula),
        flags: RecordFlags::analyze(&formula, false, false),
        formula,
        derivation,
        depth,
        subsumed_by: None,
    })
}
