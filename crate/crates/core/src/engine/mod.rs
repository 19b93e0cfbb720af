//! Degree-bounded forward saturation.
//!
//! Stage one ([`generate_fragment`]) saturates the axioms of a logic under
//! per-connective degree caps and yields a [`Fragment`]: a variant-free set of
//! schematic theorems. Stage two ([`derive_from_premises`]) saturates a
//! premise set against a fragment, capping only rule-application results.
//!
//! Rule application is condensed detachment: every premise of a rule is
//! unified with a renamed-apart parent and the conclusion is the most general
//! common instance. Saturation is breadth-first by derivation depth; within a
//! depth, candidates are inserted in the order of their canonical text, so the
//! result does not depend on the number of workers.

mod cache;
mod derive;
mod fragment;
mod replay;
mod rules;
mod saturate;
mod universe;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formula::{
    strong_relevance_holds, variable_sharing_holds, Connective, DegreeVector, Formula, Name,
    Quantifier,
};
use crate::logic::LogicError;
use crate::subst::Substitution;

pub use cache::{load_fragment, read_fragment, save_fragment, write_fragment, CacheError};
pub use derive::{
    deducibility_degree, derive_from_premises, derive_until_instances, is_logical_instance,
    DeducibilityOptions, DeriveOptions, DerivedSet,
};
pub use fragment::{generate_fragment, generate_fragment_with, Fragment, FragmentOptions};
pub use replay::{replay_record, verify_records, ReplayError};
pub use rules::{apply_rule, instantiate_universal, RuleConclusion};
pub use universe::term_universe;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("premises must be nonempty")]
    EmptyPremises,
    #[error("premise `{label}` is not closed (free variables: {vars})")]
    OpenPremise { label: String, vars: String },
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
    #[error("rule `{0}` has more premises than the engine supports")]
    RuleTooWide(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Resource bounds for one saturation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DerivationLimits {
    pub max_depth: u32,
    pub max_records: usize,
    /// Node count, formula and term nodes together.
    pub max_formula_size: usize,
    #[serde(
        rename = "time_budget_secs",
        serialize_with = "ser_secs",
        deserialize_with = "de_secs"
    )]
    pub time_budget: Duration,
}

fn ser_secs<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_secs())
}

fn de_secs<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
    Ok(Duration::from_secs(u64::deserialize(d)?))
}

impl Default for DerivationLimits {
    fn default() -> Self {
        DerivationLimits {
            max_depth: 10,
            max_records: 1_000_000,
            max_formula_size: 80,
            time_budget: Duration::from_secs(300),
        }
    }
}

impl DerivationLimits {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_depth == 0
            || self.max_records == 0
            || self.max_formula_size == 0
            || self.time_budget.is_zero()
        {
            return Err(EngineError::InvalidLimits(format!(
                "all limits must be positive: {self}"
            )));
        }
        Ok(())
    }

    pub fn with_depth(mut self, max_depth: u32) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn with_records(mut self, max_records: usize) -> Self {
        self.max_records = max_records;
        self
    }

    pub fn with_size(mut self, max_formula_size: usize) -> Self {
        self.max_formula_size = max_formula_size;
        self
    }
}

impl fmt::Display for DerivationLimits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "max_depth={} max_records={} max_size={} time_budget={}",
            self.max_depth,
            self.max_records,
            self.max_formula_size,
            self.time_budget.as_secs()
        )
    }
}

/// Degree caps on rule-application results. A connective without a cap is
/// unbounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DegreeCaps([Option<u32>; 4]);

impl DegreeCaps {
    pub fn unbounded() -> Self {
        DegreeCaps([None; 4])
    }

    /// Caps every connective at the given vector.
    pub fn exact(v: &DegreeVector) -> Self {
        let mut out = DegreeCaps::unbounded();
        for (c, d) in v.iter() {
            out.0[c.index()] = Some(d);
        }
        out
    }

    pub fn conditional(j: u32) -> Self {
        DegreeCaps::unbounded().with(Connective::Entail, j)
    }

    pub fn with(mut self, c: Connective, cap: u32) -> Self {
        self.0[c.index()] = Some(cap);
        self
    }

    pub fn get(&self, c: Connective) -> Option<u32> {
        self.0[c.index()]
    }

    pub fn allows(&self, d: &DegreeVector) -> bool {
        d.iter()
            .all(|(c, v)| self.get(c).is_none_or(|cap| v <= cap))
    }

    /// Parses `"=>:1,&:2"`; unlisted connectives stay unbounded.
    pub fn parse(text: &str) -> Result<DegreeCaps, String> {
        let listed = DegreeVector::parse(text)?;
        let mut out = DegreeCaps::unbounded();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let sym = part
                .rsplit_once(':')
                .map(|(s, _)| s.trim())
                .unwrap_or_default();
            if let Some(c) = Connective::from_symbol(sym) {
                out.0[c.index()] = Some(listed.get(c));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for DegreeCaps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Connective::ALL
            .iter()
            .filter_map(|&c| self.get(c).map(|v| format!("{c}:{v}")))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for DegreeCaps {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let listed: Vec<_> = Connective::ALL
            .iter()
            .filter_map(|&c| self.get(c).map(|v| (c, v)))
            .collect();
        let mut map = serializer.serialize_map(Some(listed.len()))?;
        for (c, v) in listed {
            map.serialize_entry(c.symbol(), &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DegreeCaps {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = std::collections::BTreeMap::<String, u32>::deserialize(deserializer)?;
        let mut out = DegreeCaps::unbounded();
        for (k, v) in raw {
            let c = Connective::from_symbol(&k)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown connective `{k}`")))?;
            out.0[c.index()] = Some(v);
        }
        Ok(out)
    }
}

/// How a record entered the store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Axiom(Name),
    Premise(Name),
    /// A record copied from a fragment; the payload is its id there.
    Fragment(usize),
    Rule {
        rule: Name,
        parents: Vec<usize>,
        /// Unifier over the renamed-apart rule and parent variables.
        substitution: Substitution,
    },
}

impl Derivation {
    pub fn parents(&self) -> &[usize] {
        match self {
            Derivation::Rule { parents, .. } => parents,
            _ => &[],
        }
    }

    /// `axiom:Id`, `premise:p1`, `fragment:3` or the rule name.
    pub fn label(&self) -> String {
        match self {
            Derivation::Axiom(n) => format!("axiom:{n}"),
            Derivation::Premise(n) => format!("premise:{n}"),
            Derivation::Fragment(id) => format!("fragment:{id}"),
            Derivation::Rule { rule, .. } => rule.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RecordFlags {
    pub is_premise: bool,
    pub strong_relevance: bool,
    /// Vacuously true for formulas that are not conditionals.
    pub variable_sharing: bool,
    pub logical_instance: bool,
    /// Some premise occurs among the derivation ancestors (or is the record).
    pub premise_ancestry: bool,
    /// Top-level existential; never instantiated.
    pub existential: bool,
}

impl RecordFlags {
    pub(crate) fn analyze(f: &Formula, is_premise: bool, premise_ancestry: bool) -> RecordFlags {
        RecordFlags {
            is_premise,
            strong_relevance: strong_relevance_holds(f),
            variable_sharing: variable_sharing_holds(f).unwrap_or(true),
            logical_instance: false,
            premise_ancestry,
            existential: matches!(f, Formula::Quant(Quantifier::Exists, ..)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremRecord {
    pub id: usize,
    /// Canonical form.
    pub formula: Formula,
    pub derivation: Derivation,
    pub depth: u32,
    pub degrees: DegreeVector,
    pub flags: RecordFlags,
    /// Set when a strictly more general record was found later.
    pub subsumed_by: Option<usize>,
}

impl TheoremRecord {
    pub fn is_active(&self) -> bool {
        self.subsumed_by.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    MaxDepth,
    MaxRecords,
    TimeBudget,
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truncation::MaxDepth => "max-depth",
            Truncation::MaxRecords => "max-records",
            Truncation::TimeBudget => "time-budget",
        })
    }
}

/// Counters and outcome of one saturation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SaturationStatus {
    /// A fixpoint was reached within the limits.
    pub complete: bool,
    pub truncation: Option<Truncation>,
    pub rounds: u32,
    pub candidates: usize,
    pub duplicates: usize,
    pub over_cap: usize,
    pub over_size: usize,
    pub subsumed: usize,
    pub retired: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}
