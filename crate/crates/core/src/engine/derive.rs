use super::fragment::Fragment;
use super::saturate::{Goal, SaturationConfig, Saturator};
use super::universe::term_universe;
use super::{
    DegreeCaps, Derivation, DerivationLimits, EngineError, SaturationStatus, TheoremRecord,
};
use crate::formula::{canonicalize, Connective, Formula};
use crate::logic::InferenceRule;
use crate::theory::PremiseSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeriveOptions {
    /// Off by default, so the derived set follows the inductive definition
    /// literally.
    pub subsumption: bool,
    /// Term depth for universal instantiation; `None` disables the rule.
    pub universal_instantiation: Option<usize>,
    pub workers: usize,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            subsumption: false,
            universal_instantiation: Some(2),
            workers: 0,
        }
    }
}

/// The store of one derivation run.
///
/// Ids are assigned to premises first, then to copies of the fragment
/// members, then to rule results in agenda order. Fragment copies are
/// parents only; [`DerivedSet::theorems`] leaves them out.
#[derive(Clone, Debug)]
pub struct DerivedSet {
    pub records: Vec<TheoremRecord>,
    pub status: SaturationStatus,
    pub caps: DegreeCaps,
    pub limits: DerivationLimits,
}

impl DerivedSet {
    /// Premises and rule results, in id order.
    pub fn theorems(&self) -> impl Iterator<Item = &TheoremRecord> {
        self.records
            .iter()
            .filter(|r| !matches!(r.derivation, Derivation::Fragment(_)) && r.is_active())
    }

    /// Non-premise theorems.
    pub fn derived(&self) -> impl Iterator<Item = &TheoremRecord> {
        self.theorems().filter(|r| !r.flags.is_premise)
    }

    pub fn find(&self, f: &Formula) -> Option<&TheoremRecord> {
        let canonical = canonicalize(f);
        self.records.iter().find(|r| r.formula == canonical)
    }

    pub fn get(&self, id: usize) -> Option<&TheoremRecord> {
        self.records.get(id)
    }
}

/// Matches some member of the fragment; an under-approximation of being a
/// theorem of the logic.
pub fn is_logical_instance(f: &Formula, fragment: &Fragment) -> bool {
    fragment.find_schema(f).is_some()
}

/// Saturates `premises` together with the fragment members under `caps`,
/// which bound rule results only. Results derived from fragment members
/// alone belong to the logic and are not generated.
pub fn derive_from_premises(
    fragment: &Fragment,
    rules: &[InferenceRule],
    premises: &PremiseSet,
    caps: &DegreeCaps,
    limits: &DerivationLimits,
    options: &DeriveOptions,
) -> Result<DerivedSet, EngineError> {
    run(fragment, rules, premises, caps, limits, options, None).map(|(set, _)| set)
}

/// Like [`derive_from_premises`], but stops after the round in which every
/// target is an instance of some record. Returns, per target, the id of the
/// first such record.
pub fn derive_until_instances(
    fragment: &Fragment,
    rules: &[InferenceRule],
    premises: &PremiseSet,
    caps: &DegreeCaps,
    limits: &DerivationLimits,
    options: &DeriveOptions,
    targets: &[Formula],
) -> Result<(DerivedSet, Vec<Option<usize>>), EngineError> {
    let goal = Goal {
        targets: targets.iter().map(canonicalize).collect(),
        up_to_instance: true,
    };
    run(fragment, rules, premises, caps, limits, options, Some(goal))
}

fn run(
    fragment: &Fragment,
    rules: &[InferenceRule],
    premises: &PremiseSet,
    caps: &DegreeCaps,
    limits: &DerivationLimits,
    options: &DeriveOptions,
    goal: Option<Goal>,
) -> Result<(DerivedSet, Vec<Option<usize>>), EngineError> {
    if premises.is_empty() {
        return Err(EngineError::EmptyPremises);
    }
    for p in premises.iter() {
        let free = p.formula.free_vars();
        if !free.is_empty() {
            return Err(EngineError::OpenPremise {
                label: p.label.to_string(),
                vars: free.iter().map(|v| &**v).collect::<Vec<_>>().join(", "),
            });
        }
    }
    let universe = options
        .universal_instantiation
        .map(|depth| term_universe(premises.formulas(), depth));
    let mut sat = Saturator::new(
        rules,
        SaturationConfig {
            caps: *caps,
            limits: *limits,
            subsumption: options.subsumption,
            universe,
            require_premise_parent: true,
            goal,
            workers: options.workers,
        },
    )?;
    for p in premises.iter() {
        sat.seed(
            canonicalize(&p.formula),
            Derivation::Premise(p.label.clone()),
            true,
        );
    }
    for member in fragment.members() {
        sat.seed(
            member.formula.clone(),
            Derivation::Fragment(member.id),
            false,
        );
    }
    sat.run()?;
    let hits = sat.goal_hits().to_vec();
    let (mut records, status) = sat.into_parts();
    for r in &mut records {
        if !matches!(r.derivation, Derivation::Fragment(_)) {
            r.flags.logical_instance = is_logical_instance(&r.formula, fragment);
        }
    }
    Ok((
        DerivedSet {
            records,
            status,
            caps: *caps,
            limits: *limits,
        },
        hits,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeducibilityOptions {
    /// Caps on the other connectives; the conditional cap is set per round.
    pub base_caps: DegreeCaps,
    /// Largest conditional degree tried.
    pub max_j: u32,
    pub derive: DeriveOptions,
}

impl Default for DeducibilityOptions {
    fn default() -> Self {
        DeducibilityOptions {
            base_caps: DegreeCaps::unbounded(),
            max_j: 6,
            derive: DeriveOptions::default(),
        }
    }
}

/// The least `j` such that `target` is derivable with rule results capped at
/// conditional degree `j`, or `None` within `max_j` and the limits.
pub fn deducibility_degree(
    target: &Formula,
    premises: &PremiseSet,
    fragment: &Fragment,
    rules: &[InferenceRule],
    limits: &DerivationLimits,
    options: &DeducibilityOptions,
) -> Result<Option<u32>, EngineError> {
    let target = canonicalize(target);
    for j in 0..=options.max_j {
        let caps = options.base_caps.with(Connective::Entail, j);
        let goal = Goal {
            targets: vec![target.clone()],
            up_to_instance: false,
        };
        let (_, hits) = run(
            fragment,
            rules,
            premises,
            &caps,
            limits,
            &options.derive,
            Some(goal),
        )?;
        if hits[0].is_some() {
            return Ok(Some(j));
        }
    }
    Ok(None)
}
