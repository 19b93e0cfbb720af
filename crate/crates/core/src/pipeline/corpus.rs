use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Filters, PipelineError};
use crate::engine::{
    apply_rule, instantiate_universal, Derivation, DerivedSet, Fragment, ReplayError, TheoremRecord,
};
use crate::formula::{
    canonicalize, degree_vector, parse_formula, render_formula, Connective, DegreeVector, Formula,
    Quantifier,
};
use crate::logic::{LogicSystem, UNIVERSAL_INSTANTIATION};
use crate::subst::match_schema;
use crate::theory::PremiseSet;

/// One line of the JSONL corpus.
///
/// Ids are the store ids of the derivation run. Parents that are fragment
/// members are listed in `fragment_parents` with their fragment record id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub id: usize,
    pub formula: String,
    pub degrees: DegreeVector,
    pub depth: u32,
    /// `premise` or the rule name.
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise: Option<String>,
    pub parents: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fragment_parents: BTreeMap<usize, usize>,
    /// Largest conditional degree of a rule result in the derivation.
    pub j_degree: Option<u32>,
    pub is_premise: bool,
    pub strong_relevance: bool,
    pub variable_sharing: bool,
    pub logical_instance: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FilterCounts {
    pub strong_relevance: usize,
    pub variable_sharing: usize,
    pub logical_instance: usize,
}

/// The conditional degree under which each record's own derivation stays:
/// 0 for premises and fragment copies, otherwise the maximum of the
/// record's degree and its parents' values.
fn j_degrees(records: &[TheoremRecord]) -> Vec<u32> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let j = match &r.derivation {
            Derivation::Rule { parents, .. } => parents
                .iter()
                .map(|&p| out[p])
                .fold(r.degrees.get(Connective::Entail), u32::max),
            _ => 0,
        };
        out.push(j);
    }
    out
}

/// Corpus entries for the theorems of `derived`, in id order, with the
/// number of theorems each filter rejected.
pub fn corpus_entries(derived: &DerivedSet, filters: &Filters) -> (Vec<CorpusEntry>, FilterCounts) {
    let j = j_degrees(&derived.records);
    let mut rejected = FilterCounts::default();
    let mut entries = Vec::new();
    for r in derived.theorems() {
        let f = &r.flags;
        let mut keep = true;
        if filters.strong_relevance && !f.strong_relevance {
            rejected.strong_relevance += 1;
            keep = false;
        }
        if filters.variable_sharing && !f.variable_sharing {
            rejected.variable_sharing += 1;
            keep = false;
        }
        if filters.exclude_logical_instances && f.logical_instance {
            rejected.logical_instance += 1;
            keep = false;
        }
        if keep {
            entries.push(entry(derived, r, j[r.id]));
        }
    }
    (entries, rejected)
}

fn entry(derived: &DerivedSet, r: &TheoremRecord, j: u32) -> CorpusEntry {
    let (rule, premise) = match &r.derivation {
        Derivation::Premise(label) => ("premise".to_string(), Some(label.to_string())),
        Derivation::Rule { rule, .. } => (rule.to_string(), None),
        other => (other.label(), None),
    };
    let parents = r.derivation.parents().to_vec();
    let fragment_parents = parents
        .iter()
        .filter_map(|&p| match derived.records[p].derivation {
            Derivation::Fragment(fid) => Some((p, fid)),
            _ => None,
        })
        .collect();
    CorpusEntry {
        id: r.id,
        formula: render_formula(&r.formula),
        degrees: r.degrees,
        depth: r.depth,
        rule,
        premise,
        parents,
        fragment_parents,
        j_degree: Some(j),
        is_premise: r.flags.is_premise,
        strong_relevance: r.flags.strong_relevance,
        variable_sharing: r.flags.variable_sharing,
        logical_instance: r.flags.logical_instance,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Text,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "text" => Ok(CorpusFormat::Text),
            other => Err(format!("unknown corpus format `{other}` (jsonl or text)")),
        }
    }
}

/// Renders entries in id order, LF-terminated.
pub fn render_corpus(entries: &[CorpusEntry], format: CorpusFormat) -> String {
    let mut out = String::new();
    write_corpus_to(entries, format, &mut out_writer(&mut out));
    out
}

fn out_writer(s: &mut String) -> impl FnMut(&str) + '_ {
    move |line| {
        s.push_str(line);
        s.push('\n');
    }
}

fn write_corpus_to(entries: &[CorpusEntry], format: CorpusFormat, emit: &mut impl FnMut(&str)) {
    let mut sorted: Vec<&CorpusEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.id);
    for e in sorted {
        match format {
            CorpusFormat::Jsonl => {
                emit(&serde_json::to_string(e).expect("corpus entries serialize"))
            }
            CorpusFormat::Text => emit(&e.formula),
        }
    }
}

pub fn export_corpus(
    entries: &[CorpusEntry],
    format: CorpusFormat,
    path: &Path,
) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    let mut result = Ok(());
    write_corpus_to(entries, format, &mut |line| {
        if result.is_ok() {
            result = writeln!(w, "{line}");
        }
    });
    result.and_then(|_| w.flush()).map_err(io)
}

/// Parses a JSONL corpus; blank lines are malformed.
pub fn read_corpus(text: &str) -> Result<Vec<CorpusEntry>, PipelineError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| PipelineError::Corpus {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusEntry>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_corpus(&text)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FlagTallies {
    pub strong_relevance: usize,
    pub variable_sharing: usize,
    pub logical_instance: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub total: usize,
    pub premises: usize,
    pub derived: usize,
    /// Connective symbol to degree to count.
    pub degrees: BTreeMap<String, BTreeMap<u32, usize>>,
    pub rules: BTreeMap<String, usize>,
    pub depths: BTreeMap<u32, usize>,
    pub flags: FlagTallies,
    /// Entries whose formula or id already occurred earlier.
    pub duplicates: usize,
    /// 1-based positions of the duplicate entries.
    pub duplicate_lines: Vec<usize>,
}

pub fn corpus_stats(entries: &[CorpusEntry]) -> CorpusStats {
    let mut s = CorpusStats::default();
    let mut formulas = HashSet::new();
    let mut ids = HashSet::new();
    for (i, e) in entries.iter().enumerate() {
        s.total += 1;
        if e.is_premise {
            s.premises += 1;
        } else {
            s.derived += 1;
        }
        for (c, d) in e.degrees.iter() {
            *s.degrees
                .entry(c.symbol().to_string())
                .or_default()
                .entry(d)
                .or_default() += 1;
        }
        *s.rules.entry(e.rule.clone()).or_default() += 1;
        *s.depths.entry(e.depth).or_default() += 1;
        s.flags.strong_relevance += usize::from(e.strong_relevance);
        s.flags.variable_sharing += usize::from(e.variable_sharing);
        s.flags.logical_instance += usize::from(e.logical_instance);
        let fresh_formula = formulas.insert(e.formula.as_str());
        let fresh_id = ids.insert(e.id);
        if !(fresh_formula && fresh_id) {
            s.duplicates += 1;
            s.duplicate_lines.push(i + 1);
        }
    }
    s
}

/// Replays every entry against the premises, the fragment and the entries
/// before it. Entries whose parents were filtered out of the corpus fail.
pub fn verify_corpus(
    entries: &[CorpusEntry],
    logic: &LogicSystem,
    premises: &PremiseSet,
    fragment: &Fragment,
) -> Result<usize, ReplayError> {
    let mut seen: HashMap<usize, (Formula, u32)> = HashMap::new();
    for e in entries {
        let fail = |reason: String| ReplayError { id: e.id, reason };
        let formula = parse_formula(&e.formula).map_err(|err| fail(err.to_string()))?;
        if canonicalize(&formula) != formula || render_formula(&formula) != e.formula {
            return Err(fail("formula text is not canonical".into()));
        }
        if degree_vector(&formula) != e.degrees {
            return Err(fail("stored degrees differ from the formula".into()));
        }
        match e.rule.as_str() {
            "premise" => {
                let label = e.premise.as_deref().unwrap_or_default();
                let p = premises
                    .get(label)
                    .ok_or_else(|| fail(format!("unknown premise `{label}`")))?;
                if canonicalize(&p.formula) != formula || e.depth != 0 || !e.parents.is_empty() {
                    return Err(fail(format!("does not reproduce premise `{label}`")));
                }
            }
            rule => {
                let mut parents = Vec::with_capacity(e.parents.len());
                let mut depth = 0;
                for &p in &e.parents {
                    if p >= e.id {
                        return Err(fail("a parent does not precede the entry".into()));
                    }
                    if let Some(&fid) = e.fragment_parents.get(&p) {
                        let m = fragment
                            .records
                            .get(fid)
                            .ok_or_else(|| fail(format!("unknown fragment record {fid}")))?;
                        parents.push(m.formula.clone());
                    } else {
                        let (f, d) = seen
                            .get(&p)
                            .ok_or_else(|| fail(format!("parent {p} is not in the corpus")))?;
                        parents.push(f.clone());
                        depth = depth.max(*d);
                    }
                }
                if e.depth != depth + 1 {
                    return Err(fail(format!(
                        "depth {} but parents give {}",
                        e.depth,
                        depth + 1
                    )));
                }
                let ok = if rule == UNIVERSAL_INSTANTIATION {
                    parents.len() == 1 && reproduces_instantiation(&parents[0], &formula)
                } else {
                    let inference = logic
                        .rule(rule)
                        .ok_or_else(|| fail(format!("unknown rule `{rule}`")))?;
                    let refs: Vec<&Formula> = parents.iter().collect();
                    apply_rule(inference, &refs)
                        .first()
                        .is_some_and(|c| c.formula == formula)
                };
                if !ok {
                    return Err(fail(format!(
                        "rule `{rule}` does not reproduce the formula"
                    )));
                }
            }
        }
        seen.insert(e.id, (formula, e.depth));
    }
    Ok(entries.len())
}

fn reproduces_instantiation(parent: &Formula, result: &Formula) -> bool {
    let Formula::Quant(Quantifier::Forall, var, body) = parent else {
        return false;
    };
    match match_schema(body, result).and_then(|s| s.get_term(var).cloned()) {
        Some(term) => instantiate_universal(parent, &term).is_some_and(|c| &c.formula == result),
        // The variable does not occur; the body itself is the instance.
        None => &canonicalize(body) == result,
    }
}
