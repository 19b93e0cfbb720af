use thiserror::Error;

use super::fragment::Fragment;
use super::rules::{apply_rule, instantiate_universal, rename_parent, RulePlan};
use super::{Derivation, TheoremRecord};
use crate::formula::{canonicalize, degree_vector, Formula, Quantifier};
use crate::logic::{LogicSystem, UNIVERSAL_INSTANTIATION};
use crate::theory::PremiseSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("record {id}: {reason}")]
pub struct ReplayError {
    pub id: usize,
    pub reason: String,
}

fn fail<T>(id: usize, reason: impl Into<String>) -> Result<T, ReplayError> {
    Err(ReplayError {
        id,
        reason: reason.into(),
    })
}

/// Re-derives record `id` from its stated origin: axioms and premises are
/// compared with their sources, rule applications are recomputed from the
/// parents and the stored unifier is checked against the rule.
pub fn replay_record(
    records: &[TheoremRecord],
    id: usize,
    logic: &LogicSystem,
    premises: Option<&PremiseSet>,
    fragment: Option<&Fragment>,
) -> Result<(), ReplayError> {
    let Some(r) = records.get(id) else {
        return fail(id, "no such record");
    };
    if r.id != id {
        return fail(id, format!("stored id is {}", r.id));
    }
    if canonicalize(&r.formula) != r.formula {
        return fail(id, "formula is not in canonical form");
    }
    if degree_vector(&r.formula) != r.degrees {
        return fail(id, "stored degrees differ from the formula");
    }
    match &r.derivation {
        Derivation::Axiom(name) => {
            let Some(axiom) = logic.axiom(name) else {
                return fail(id, format!("unknown axiom `{name}`"));
            };
            source_matches(r, &axiom.formula, &format!("axiom `{name}`"))
        }
        Derivation::Premise(label) => {
            let Some(p) = premises.and_then(|set| set.get(label)) else {
                return fail(id, format!("unknown premise `{label}`"));
            };
            source_matches(r, &p.formula, &format!("premise `{label}`"))
        }
        Derivation::Fragment(fid) => {
            let Some(source) = fragment.and_then(|f| f.records.get(*fid)) else {
                return fail(id, format!("unknown fragment record {fid}"));
            };
            source_matches(r, &source.formula, &format!("fragment record {fid}"))
        }
        Derivation::Rule {
            rule,
            parents,
            substitution,
        } => {
            if parents.iter().any(|&p| p >= id) {
                return fail(id, "a parent does not precede the record");
            }
            let depth = 1 + parents.iter().map(|&p| records[p].depth).max().unwrap_or(0);
            if r.depth != depth {
                return fail(id, format!("depth {} but parents give {depth}", r.depth));
            }
            let parent_formulas: Vec<&Formula> =
                parents.iter().map(|&p| &records[p].formula).collect();
            if &**rule == UNIVERSAL_INSTANTIATION {
                let (Some(parent), Some((var, term)), 1) = (
                    parent_formulas.first(),
                    substitution.term_bindings().iter().next(),
                    substitution.term_bindings().len(),
                ) else {
                    return fail(id, "malformed instantiation step");
                };
                if !matches!(parent, Formula::Quant(Quantifier::Forall, v, _) if v == var) {
                    return fail(id, "instantiated variable is not the outer universal");
                }
                return match instantiate_universal(parent, term) {
                    Some(c) if c.formula == r.formula => Ok(()),
                    _ => fail(id, "instantiation does not reproduce the formula"),
                };
            }
            let Some(inference) = logic.rule(rule) else {
                return fail(id, format!("unknown rule `{rule}`"));
            };
            let recomputed = apply_rule(inference, &parent_formulas);
            let Some(c) = recomputed.first() else {
                return fail(id, format!("rule `{rule}` does not apply to the parents"));
            };
            if c.formula != r.formula {
                return fail(id, format!("rule `{rule}` yields `{}`", c.formula));
            }
            // The stored unifier must unify every premise with its parent and
            // yield the formula.
            let plan = RulePlan::new(inference);
            for (slot, (premise, parent)) in plan.premises.iter().zip(&parent_formulas).enumerate()
            {
                let left = canonicalize(&substitution.apply(premise));
                let right = canonicalize(&substitution.apply(&rename_parent(parent, slot)));
                if left != right {
                    return fail(id, format!("stored unifier fails on premise {}", slot + 1));
                }
            }
            if canonicalize(&substitution.apply(&plan.conclusion)) != r.formula {
                return fail(id, "stored unifier does not yield the formula");
            }
            Ok(())
        }
    }
}

fn source_matches(r: &TheoremRecord, source: &Formula, what: &str) -> Result<(), ReplayError> {
    if r.depth != 0 {
        return fail(r.id, format!("{what} must have depth 0"));
    }
    if canonicalize(source) != r.formula {
        return fail(r.id, format!("formula differs from {what}"));
    }
    Ok(())
}

/// Replays every record in id order; returns how many were checked.
pub fn verify_records(
    records: &[TheoremRecord],
    logic: &LogicSystem,
    premises: Option<&PremiseSet>,
    fragment: Option<&Fragment>,
) -> Result<usize, ReplayError> {
    for id in 0..records.len() {
        replay_record(records, id, logic, premises, fragment)?;
    }
    Ok(records.len())
}
