use std::borrow::Cow;

use crate::formula::{canonicalize, Formula, Name, Quantifier, Term};
use crate::logic::InferenceRule;
use crate::subst::{Substitution, Unifier};

/// One conclusion of a rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleConclusion {
    /// Canonical form.
    pub formula: Formula,
    /// Unifier over the renamed rule variables (`X#r`) and the renamed
    /// schema atoms of parent `i` (`A1#i`, counting from 1).
    pub substitution: Substitution,
}

/// Suffix for rule variables after renaming apart.
pub(crate) const RULE_TAG: &str = "#r";

pub(crate) fn tag(f: &Formula, suffix: &str) -> Formula {
    f.map_schema(&mut |n| format!("{n}{suffix}").into())
}

pub(crate) fn parent_tag(slot: usize) -> String {
    format!("#{}", slot + 1)
}

/// Renames the schema atoms of a parent in the given slot, if it has any.
pub(crate) fn rename_parent(f: &Formula, slot: usize) -> Cow<'_, Formula> {
    if f.is_schema_free() {
        Cow::Borrowed(f)
    } else {
        Cow::Owned(tag(f, &parent_tag(slot)))
    }
}

/// A rule with its variables renamed apart from every parent.
#[derive(Clone, Debug)]
pub(crate) struct RulePlan {
    pub name: Name,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl RulePlan {
    pub fn new(rule: &InferenceRule) -> RulePlan {
        RulePlan {
            name: rule.name.clone(),
            premises: rule.premises.iter().map(|p| tag(p, RULE_TAG)).collect(),
            conclusion: tag(&rule.conclusion, RULE_TAG),
        }
    }
}

/// Condensed detachment: unifies each rule premise with the corresponding
/// parent (renamed apart) and returns the most general conclusion. The result
/// has at most one element; it is empty when the arity differs or no unifier
/// exists.
pub fn apply_rule(rule: &InferenceRule, parents: &[&Formula]) -> Vec<RuleConclusion> {
    if parents.len() != rule.premises.len() {
        return Vec::new();
    }
    let plan = RulePlan::new(rule);
    let mut u = Unifier::new();
    for (slot, (premise, parent)) in plan.premises.iter().zip(parents).enumerate() {
        if !u.unify(premise, &rename_parent(parent, slot)) {
            return Vec::new();
        }
    }
    match u.finish() {
        Some(substitution) => vec![RuleConclusion {
            formula: canonicalize(&u.resolve(&plan.conclusion)),
            substitution,
        }],
        None => Vec::new(),
    }
}

/// Instantiates the outermost universal quantifier of `parent` with `term`.
/// Returns `None` unless the parent is a universal.
pub fn instantiate_universal(parent: &Formula, term: &Term) -> Option<RuleConclusion> {
    match parent {
        Formula::Quant(Quantifier::Forall, v, body) => {
            let mut substitution = Substitution::new();
            substitution.bind_term(v, term.clone()).ok()?;
            Some(RuleConclusion {
                formula: canonicalize(&substitution.apply(body)),
                substitution,
            })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn conclusions(rule: &InferenceRule, parents: &[&str]) -> Vec<Formula> {
        let parents: Vec<Formula> = parents.iter().map(|s| p(s)).collect();
        let refs: Vec<&Formula> = parents.iter().collect();
        apply_rule(rule, &refs)
            .into_iter()
            .map(|c| c.formula)
            .collect()
    }

    #[test]
    fn modus_ponens_on_schemata() {
        let got = conclusions(
            &InferenceRule::modus_ponens(),
            &["(A => B) => ((B => C) => (A => C))", "D => D"],
        );
        assert_eq!(got, vec![canonicalize(&p("(D => C) => (D => C)"))]);
    }

    #[test]
    fn ground_rules() {
        let mp = InferenceRule::modus_ponens();
        assert_eq!(conclusions(&mp, &["p => q", "p"]), vec![p("q")]);
        assert!(conclusions(&mp, &["p => q", "q"]).is_empty());
        assert!(conclusions(&mp, &["p"]).is_empty());
        let adj = InferenceRule::adjunction();
        assert_eq!(conclusions(&adj, &["p", "q"]), vec![p("p & q")]);
    }

    #[test]
    fn same_schema_in_both_parents_is_renamed_apart() {
        // Without renaming, A => B and A would force A = A => B.
        let got = conclusions(&InferenceRule::modus_ponens(), &["A => B", "A => A"]);
        assert_eq!(got, vec![p("A1")]);
    }

    #[test]
    fn substitution_replays() {
        let mp = InferenceRule::modus_ponens();
        let major = p("(A => B) => ((B => C) => (A => C))");
        let minor = p("D => D");
        let c = &apply_rule(&mp, &[&major, &minor])[0];
        let plan = RulePlan::new(&mp);
        let sigma = &c.substitution;
        assert_eq!(
            sigma.apply(&plan.premises[0]),
            sigma.apply(&rename_parent(&major, 0))
        );
        assert_eq!(
            sigma.apply(&plan.premises[1]),
            sigma.apply(&rename_parent(&minor, 1))
        );
        assert_eq!(canonicalize(&sigma.apply(&plan.conclusion)), c.formula);
    }

    #[test]
    fn universal_instantiation() {
        let f = p("forall x. nat(x) => nat(s(x))");
        let c = instantiate_universal(&f, &Term::constant("0")).unwrap();
        assert_eq!(c.formula, p("nat(0) => nat(s(0))"));
        assert!(instantiate_universal(&p("exists x. nat(x)"), &Term::constant("0")).is_none());
    }
}
