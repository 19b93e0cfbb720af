use std::collections::BTreeMap;

use thiserror::Error;

use super::{Formula, Name};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Occurrence {
    pub antecedent: bool,
    pub consequent: bool,
}

/// Antecedent/consequent-part occurrences of each propositional symbol
/// (schema atoms and nullary predicates).
pub type OccurrenceReport = BTreeMap<Name, Occurrence>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a conditional")]
pub struct NotAConditional(pub String);

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Antecedent,
    Consequent,
}

impl Role {
    fn flip(self) -> Role {
        match self {
            Role::Antecedent => Role::Consequent,
            Role::Consequent => Role::Antecedent,
        }
    }
}

/// The whole formula is a consequent part. The antecedent of a conditional
/// takes the opposite role of the conditional, its consequent the same role;
/// negation flips; conjunction, disjunction and quantifiers preserve.
pub fn occurrence_report(f: &Formula) -> OccurrenceReport {
    let mut report = OccurrenceReport::new();
    mark(f, Role::Consequent, &mut report);
    report
}

fn mark(f: &Formula, role: Role, report: &mut OccurrenceReport) {
    let symbol = match f {
        Formula::Schema(n) => Some(n),
        Formula::Pred(n, args) if args.is_empty() => Some(n),
        _ => None,
    };
    if let Some(n) = symbol {
        let entry = report.entry(n.clone()).or_default();
        match role {
            Role::Antecedent => entry.antecedent = true,
            Role::Consequent => entry.consequent = true,
        }
        return;
    }
    match f {
        Formula::Schema(_) | Formula::Pred(..) => {}
        Formula::Not(c) => mark(c, role.flip(), report),
        Formula::Quant(_, _, c) => mark(c, role, report),
        Formula::And(l, r) | Formula::Or(l, r) => {
            mark(l, role, report);
            mark(r, role, report);
        }
        Formula::Entail(a, b) => {
            mark(a, role.flip(), report);
            mark(b, role, report);
        }
    }
}

/// Every propositional symbol occurs at least once as an antecedent part and
/// at least once as a consequent part.
pub fn strong_relevance_holds(f: &Formula) -> bool {
    occurrence_report(f)
        .values()
        .all(|o| o.antecedent && o.consequent)
}

fn symbols(f: &Formula) -> Vec<Name> {
    let mut out = Vec::new();
    f.visit(&mut |g| match g {
        Formula::Schema(n) => out.push(n.clone()),
        Formula::Pred(n, args) if args.is_empty() => out.push(n.clone()),
        _ => {}
    });
    out
}

/// The antecedent and consequent of the top conditional (under any quantifier
/// prefix) share a propositional symbol.
pub fn variable_sharing_holds(f: &Formula) -> Result<bool, NotAConditional> {
    match f.matrix() {
        Formula::Entail(a, b) => {
            let left = symbols(a);
            Ok(symbols(b).iter().any(|s| left.contains(s)))
        }
        _ => Err(NotAConditional(f.to_string())),
    }
}
