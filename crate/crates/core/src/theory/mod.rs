//! Formal theories over a premise set: the split into logical and empirical
//! parts, inconsistency checks and the explosion probe.

mod premises;

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    derive_until_instances, generate_fragment, DegreeCaps, DerivationLimits, DeriveOptions,
    DerivedSet, EngineError, Fragment, SaturationStatus,
};
use crate::formula::{canonicalize, degree_vector, render_formula, Formula, Name};
use crate::logic::LogicSystem;

pub use premises::{load_premises, parse_premises, Premise, PremiseError, PremiseSet};

/// Stated wherever the logical/empirical split is reported.
pub const LOGICAL_PART_CAVEAT: &str = "logical_instance means \"matches a schema of the \
generated fragment\"; this under-approximates membership in the full logic, so some \
empirical-part records may still be logical theorems";

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("probe `{0}` occurs in the premises")]
    ProbeInPremises(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `witness` and its negation are both in the premise set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectWitness {
    pub witness: Formula,
    pub positive: Name,
    pub negative: Name,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsistencyVerdict {
    DirectlyInconsistent(DirectWitness),
    /// Record ids of `witness` and of its negation in the derived set.
    IndirectlyInconsistent {
        witness: Formula,
        positive: usize,
        negative: usize,
    },
    /// Bounded search only; not a proof of consistency.
    NoInconsistencyFound {
        limits: DerivationLimits,
        complete: bool,
    },
}

impl ConsistencyVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ConsistencyVerdict::DirectlyInconsistent(_) => "directly-inconsistent",
            ConsistencyVerdict::IndirectlyInconsistent { .. } => "indirectly-inconsistent",
            ConsistencyVerdict::NoInconsistencyFound { .. } => "no-inconsistency-found",
        }
    }

    pub fn witness(&self) -> Option<&Formula> {
        match self {
            ConsistencyVerdict::DirectlyInconsistent(w) => Some(&w.witness),
            ConsistencyVerdict::IndirectlyInconsistent { witness, .. } => Some(witness),
            ConsistencyVerdict::NoInconsistencyFound { .. } => None,
        }
    }
}

impl Serialize for ConsistencyVerdict {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("verdict", self.label())?;
        match self {
            ConsistencyVerdict::DirectlyInconsistent(w) => {
                map.serialize_entry("witness", &render_formula(&w.witness))?;
                map.serialize_entry("positive_premise", &*w.positive)?;
                map.serialize_entry("negative_premise", &*w.negative)?;
            }
            ConsistencyVerdict::IndirectlyInconsistent {
                witness,
                positive,
                negative,
            } => {
                map.serialize_entry("witness", &render_formula(witness))?;
                map.serialize_entry("positive_record", positive)?;
                map.serialize_entry("negative_record", negative)?;
            }
            ConsistencyVerdict::NoInconsistencyFound { limits, complete } => {
                map.serialize_entry("bounds", limits)?;
                map.serialize_entry("saturated", complete)?;
            }
        }
        map.end()
    }
}

/// Some `A` with both `A` and `~A` in the premises, compared on canonical
/// forms without collapsing double negations.
pub fn check_direct_inconsistency(premises: &PremiseSet) -> Option<DirectWitness> {
    let mut by_formula: HashMap<Formula, Name> = HashMap::new();
    for p in premises.iter() {
        by_formula
            .entry(canonicalize(&p.formula))
            .or_insert_with(|| p.label.clone());
    }
    premises
        .iter()
        .find_map(|p| match canonicalize(&p.formula) {
            Formula::Not(inner) => by_formula.get(&*inner).map(|positive| DirectWitness {
                witness: (*inner).clone(),
                positive: positive.clone(),
                negative: p.label.clone(),
            }),
            _ => None,
        })
}

/// Direct inconsistency first; otherwise the first derived `~A` (by id) whose
/// `A` is also derived.
pub fn check_derived_inconsistency(
    derived: &DerivedSet,
    premises: &PremiseSet,
) -> ConsistencyVerdict {
    if let Some(w) = check_direct_inconsistency(premises) {
        return ConsistencyVerdict::DirectlyInconsistent(w);
    }
    let by_formula: HashMap<&Formula, usize> =
        derived.theorems().map(|r| (&r.formula, r.id)).collect();
    for r in derived.theorems() {
        if let Formula::Not(inner) = &r.formula {
            if let Some(&positive) = by_formula.get(&**inner) {
                return ConsistencyVerdict::IndirectlyInconsistent {
                    witness: (**inner).clone(),
                    positive,
                    negative: r.id,
                };
            }
        }
    }
    ConsistencyVerdict::NoInconsistencyFound {
        limits: derived.limits,
        complete: derived.status.complete,
    }
}

/// A premise set with its derived theorems split into parts.
#[derive(Clone, Debug)]
pub struct FormalTheory {
    pub logic: String,
    pub fragment_size: usize,
    pub premises: PremiseSet,
    /// Record ids not matching any fragment schema, premises included.
    pub empirical: Vec<usize>,
    /// Record ids matching some fragment schema.
    pub logical_instances: Vec<usize>,
    pub consistency: ConsistencyVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport {
    pub logic: String,
    pub fragment_size: usize,
    pub premises: usize,
    pub empirical: usize,
    pub empirical_premises: usize,
    pub logical_instances: usize,
    pub consistency: ConsistencyVerdict,
    pub caveat: &'static str,
}

impl FormalTheory {
    pub fn report(&self, derived: &DerivedSet) -> TheoryReport {
        TheoryReport {
            logic: self.logic.clone(),
            fragment_size: self.fragment_size,
            premises: self.premises.len(),
            empirical: self.empirical.len(),
            empirical_premises: self
                .empirical
                .iter()
                .filter(|&&id| derived.records[id].flags.is_premise)
                .count(),
            logical_instances: self.logical_instances.len(),
            consistency: self.consistency.clone(),
            caveat: LOGICAL_PART_CAVEAT,
        }
    }
}

pub fn partition_theory(
    fragment: &Fragment,
    derived: &DerivedSet,
    premises: &PremiseSet,
) -> FormalTheory {
    let mut empirical = Vec::new();
    let mut logical_instances = Vec::new();
    for r in derived.theorems() {
        if fragment.find_schema(&r.formula).is_some() {
            logical_instances.push(r.id);
        } else {
            empirical.push(r.id);
        }
    }
    FormalTheory {
        logic: fragment.logic.clone(),
        fragment_size: fragment.len(),
        premises: premises.clone(),
        empirical,
        logical_instances,
        consistency: check_derived_inconsistency(derived, premises),
    }
}

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    /// Defaults to the join of the axiom degrees, so every axiom is kept.
    pub fragment_caps: Option<crate::formula::DegreeVector>,
    pub fragment_limits: DerivationLimits,
    /// Defaults to the fragment caps raised to at least 1 for every
    /// connective of the signature.
    pub derive_caps: Option<DegreeCaps>,
    pub limits: DerivationLimits,
    pub workers: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            fragment_caps: None,
            fragment_limits: DerivationLimits::default().with_depth(4),
            derive_caps: None,
            limits: DerivationLimits::default().with_depth(8),
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    pub probe: String,
    pub derived: bool,
    /// Id of a derived record the probe is an instance of.
    pub witness: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExplosionReport {
    pub results: Vec<ProbeResult>,
    /// No probe was derived.
    pub paraconsistent_evidence: bool,
    pub fragment: Fragment,
    pub derived: DerivedSet,
    pub status: SaturationStatus,
}

fn symbols(f: &Formula) -> BTreeSet<Name> {
    let mut out = f.lower_names();
    f.visit(&mut |g| match g {
        Formula::Pred(n, _) | Formula::Schema(n) => {
            out.insert(n.clone());
        }
        _ => {}
    });
    out
}

/// Saturates a (typically inconsistent) premise set and reports which probe
/// formulas become derivable. A probe counts as derived when it is an
/// instance of some derived record.
pub fn explosion_probe(
    logic: &LogicSystem,
    premises: &PremiseSet,
    probes: &[Formula],
    options: &ProbeOptions,
) -> Result<ExplosionReport, TheoryError> {
    let used: BTreeSet<Name> = premises.formulas().flat_map(symbols).collect();
    for probe in probes {
        if symbols(probe).iter().any(|s| used.contains(s)) {
            return Err(TheoryError::ProbeInPremises(render_formula(probe)));
        }
    }
    let fragment_caps = options.fragment_caps.unwrap_or_else(|| {
        logic
            .axioms
            .iter()
            .fold(crate::formula::DegreeVector::ZERO, |acc, a| {
                acc.join(&degree_vector(&a.formula))
            })
    });
    let fragment = generate_fragment(logic, &fragment_caps, &options.fragment_limits)?;
    let derive_caps = options.derive_caps.unwrap_or_else(|| {
        let mut caps = fragment_caps;
        for &c in &logic.signature {
            caps.set(c, caps.get(c).max(1));
        }
        DegreeCaps::exact(&caps)
    });
    let derive_options = DeriveOptions {
        workers: options.workers,
        ..DeriveOptions::default()
    };
    let (derived, hits) = derive_until_instances(
        &fragment,
        &logic.rules,
        premises,
        &derive_caps,
        &options.limits,
        &derive_options,
        probes,
    )?;
    let results: Vec<ProbeResult> = probes
        .iter()
        .zip(hits)
        .map(|(probe, witness)| ProbeResult {
            probe: render_formula(probe),
            derived: witness.is_some(),
            witness,
        })
        .collect();
    Ok(ExplosionReport {
        paraconsistent_evidence: results.iter().all(|r| !r.derived),
        status: derived.status.clone(),
        results,
        fragment,
        derived,
    })
}
