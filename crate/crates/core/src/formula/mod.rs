//! Formula AST over schema atoms, predicates and the connectives `~ & | =>`,
//! together with its text syntax, degree metrics, polarity analysis and
//! canonical forms.

mod canon;
mod degree;
mod parse;
mod polarity;
mod render;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use canon::{canonicalize, is_variant};
pub use degree::{
    classify_formula, connective_degree, degree_vector, is_first_degree, Classification,
    DegreeVector,
};
pub use parse::{parse_formula, FormulaParser, ParseError};
pub use polarity::{
    occurrence_report, strong_relevance_holds, variable_sharing_holds, NotAConditional, Occurrence,
    OccurrenceReport,
};
pub use render::{render_formula, render_term};

/// Interned-ish identifier. Cloning is a reference-count bump.
pub type Name = Arc<str>;

/// Individual terms: variables, constants and function applications.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    Const(Name),
    App(Name, Arc<[Term]>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Self {
        if args.is_empty() {
            Term::Const(name.into())
        } else {
            Term::App(name.into(), args.into())
        }
    }

    /// No individual variables anywhere inside.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Constants have depth 0; `f(t1..tn)` is one more than its deepest argument.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => &**v == name,
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub(crate) fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(n) | Term::Const(n) => {
                out.insert(n.clone());
            }
            Term::App(n, args) => {
                out.insert(n.clone());
                args.iter().for_each(|a| a.collect_names(out));
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

/// The logical connectives whose nesting degree is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connective {
    Entail,
    And,
    Or,
    Not,
}

impl Connective {
    pub const ALL: [Connective; 4] = [
        Connective::Entail,
        Connective::And,
        Connective::Or,
        Connective::Not,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Connective::Entail => "=>",
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Not => "~",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "=>" => Some(Connective::Entail),
            "&" => Some(Connective::And),
            "|" => Some(Connective::Or),
            "~" => Some(Connective::Not),
            _ => None,
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// Schema variable standing for an arbitrary formula.
    Schema(Name),
    /// Predicate applied to terms; nullary predicates are propositional atoms.
    Pred(Name, Arc<[Term]>),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Entail(Arc<Formula>, Arc<Formula>),
    Quant(Quantifier, Name, Arc<Formula>),
}

impl Formula {
    pub fn schema(name: &str) -> Self {
        Formula::Schema(name.into())
    }

    pub fn atom(name: &str) -> Self {
        Formula::Pred(name.into(), Arc::from([]))
    }

    pub fn pred(name: &str, args: Vec<Term>) -> Self {
        Formula::Pred(name.into(), args.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: Formula) -> Self {
        Formula::Not(Arc::new(child))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Arc::new(left), Arc::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Arc::new(left), Arc::new(right))
    }

    pub fn entail(antecedent: Formula, consequent: Formula) -> Self {
        Formula::Entail(Arc::new(antecedent), Arc::new(consequent))
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::Quant(Quantifier::Forall, var.into(), Arc::new(body))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Quant(Quantifier::Exists, var.into(), Arc::new(body))
    }

    /// The connective at the root, if any.
    pub fn connective(&self) -> Option<Connective> {
        match self {
            Formula::Not(_) => Some(Connective::Not),
            Formula::And(..) => Some(Connective::And),
            Formula::Or(..) => Some(Connective::Or),
            Formula::Entail(..) => Some(Connective::Entail),
            _ => None,
        }
    }

    /// Skips the quantifier prefix.
    pub fn matrix(&self) -> &Formula {
        let mut f = self;
        while let Formula::Quant(_, _, body) = f {
            f = body;
        }
        f
    }

    /// Node count, counting formula nodes and term nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Schema(_) => 1,
            Formula::Pred(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Formula::Not(c) | Formula::Quant(_, _, c) => 1 + c.size(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                1 + l.size() + r.size()
            }
        }
    }

    /// True when no schema atom occurs.
    pub fn is_schema_free(&self) -> bool {
        match self {
            Formula::Schema(_) => false,
            Formula::Pred(..) => true,
            Formula::Not(c) | Formula::Quant(_, _, c) => c.is_schema_free(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                l.is_schema_free() && r.is_schema_free()
            }
        }
    }

    pub fn schema_atoms(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Schema(n) = f {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn contains_schema(&self, name: &str) -> bool {
        match self {
            Formula::Schema(n) => &**n == name,
            Formula::Pred(..) => false,
            Formula::Not(c) | Formula::Quant(_, _, c) => c.contains_schema(name),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                l.contains_schema(name) || r.contains_schema(name)
            }
        }
    }

    /// Individual variables not bound by an enclosing quantifier.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Schema(_) => {}
            Formula::Pred(_, args) => {
                let mut vars = BTreeSet::new();
                args.iter().for_each(|a| a.collect_vars(&mut vars));
                out.extend(vars.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(c) => c.collect_free_vars(bound, out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                l.collect_free_vars(bound, out);
                r.collect_free_vars(bound, out);
            }
            Formula::Quant(_, v, body) => {
                bound.push(v.clone());
                body.collect_free_vars(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_free_var(&self, name: &str) -> bool {
        match self {
            Formula::Schema(_) => false,
            Formula::Pred(_, args) => args.iter().any(|a| a.contains_var(name)),
            Formula::Not(c) => c.has_free_var(name),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                l.has_free_var(name) || r.has_free_var(name)
            }
            Formula::Quant(_, v, body) => &**v != name && body.has_free_var(name),
        }
    }

    /// Every individual variable is bound by an enclosing quantifier.
    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every identifier occurring anywhere: predicates, functions, constants
    /// and variables (bound or free), but not schema atoms.
    pub fn lower_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Pred(n, args) => {
                out.insert(n.clone());
                args.iter().for_each(|a| a.collect_names(&mut out));
            }
            Formula::Quant(_, v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Preorder traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Schema(_) | Formula::Pred(..) => {}
            Formula::Not(c) | Formula::Quant(_, _, c) => c.visit(f),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }

    /// Rebuilds the formula with every schema atom renamed by `rename`.
    pub fn map_schema(&self, rename: &mut impl FnMut(&Name) -> Name) -> Formula {
        match self {
            Formula::Schema(n) => Formula::Schema(rename(n)),
            Formula::Pred(..) => self.clone(),
            Formula::Not(c) => Formula::Not(Arc::new(c.map_schema(rename))),
            Formula::And(l, r) => Formula::And(
                Arc::new(l.map_schema(rename)),
                Arc::new(r.map_schema(rename)),
            ),
            Formula::Or(l, r) => Formula::Or(
                Arc::new(l.map_schema(rename)),
                Arc::new(r.map_schema(rename)),
            ),
            Formula::Entail(l, r) => Formula::Entail(
                Arc::new(l.map_schema(rename)),
                Arc::new(r.map_schema(rename)),
            ),
            Formula::Quant(q, v, body) => {
                Formula::Quant(*q, v.clone(), Arc::new(body.map_schema(rename)))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_term(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}
