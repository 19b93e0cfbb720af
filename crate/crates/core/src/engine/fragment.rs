use super::saturate::{SaturationConfig, Saturator};
use super::{DegreeCaps, Derivation, DerivationLimits, EngineError, TheoremRecord, Truncation};
use crate::formula::{canonicalize, degree_vector, DegreeVector, Formula};
use crate::logic::LogicSystem;
use crate::subst::is_instance;

/// A saturated set of schematic theorems of one logic under degree caps.
///
/// `records` keeps subsumed records too, because later records may cite them
/// as parents; [`Fragment::members`] yields the active ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub logic: String,
    pub caps: DegreeVector,
    pub limits: DerivationLimits,
    pub subsumption: bool,
    pub complete: bool,
    pub truncation: Option<Truncation>,
    pub records: Vec<TheoremRecord>,
}

impl Fragment {
    pub fn members(&self) -> impl Iterator<Item = &TheoremRecord> {
        self.records.iter().filter(|r| r.is_active())
    }

    pub fn len(&self) -> usize {
        self.members().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The first member of which `f` is an instance (or variant).
    pub fn find_schema(&self, f: &Formula) -> Option<&TheoremRecord> {
        let canonical = canonicalize(f);
        self.members().find(|r| {
            shallow_compatible(&r.formula, &canonical) && is_instance(&canonical, &r.formula)
        })
    }
}

/// Cheap necessary condition for `f` being an instance of `schema`.
fn shallow_compatible(schema: &Formula, f: &Formula) -> bool {
    match (schema, f) {
        (Formula::Schema(_), _) => true,
        (Formula::Pred(n, a), Formula::Pred(m, b)) => n == m && a.len() == b.len(),
        (Formula::Quant(q1, ..), Formula::Quant(q2, ..)) => q1 == q2,
        _ => schema.connective().is_some() && schema.connective() == f.connective(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FragmentOptions {
    /// Drop candidates that are instances of a record and retire records
    /// that are instances of a new one.
    pub subsumption: bool,
    /// Worker threads; 0 picks the default.
    pub workers: usize,
}

impl Default for FragmentOptions {
    fn default() -> Self {
        FragmentOptions {
            subsumption: true,
            workers: 0,
        }
    }
}

/// Saturates the axioms of `logic` under `caps` with default options.
pub fn generate_fragment(
    logic: &LogicSystem,
    caps: &DegreeVector,
    limits: &DerivationLimits,
) -> Result<Fragment, EngineError> {
    generate_fragment_with(logic, caps, limits, &FragmentOptions::default())
}

pub fn generate_fragment_with(
    logic: &LogicSystem,
    caps: &DegreeVector,
    limits: &DerivationLimits,
    options: &FragmentOptions,
) -> Result<Fragment, EngineError> {
    let mut sat = Saturator::new(
        &logic.rules,
        SaturationConfig {
            caps: DegreeCaps::exact(caps),
            limits: *limits,
            subsumption: options.subsumption,
            universe: None,
            require_premise_parent: false,
            goal: None,
            workers: options.workers,
        },
    )?;
    for axiom in &logic.axioms {
        let formula = canonicalize(&axiom.formula);
        if degree_vector(&formula).within(caps) && formula.size() <= limits.max_formula_size {
            sat.seed(formula, Derivation::Axiom(axiom.name.clone()), false);
        }
    }
    let status = sat.run()?;
    let (records, _) = sat.into_parts();
    Ok(Fragment {
        logic: logic.name.clone(),
        caps: *caps,
        limits: *limits,
        subsumption: options.subsumption,
        complete: status.complete,
        truncation: status.truncation,
        records,
    })
}
