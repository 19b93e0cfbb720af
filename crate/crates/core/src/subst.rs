//! Substitutions over schema atoms and individual variables, one-way
//! matching, and most general unification with occurs check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::formula::{render_formula, Formula, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstitutionError {
    #[error("binding `{0}` to a formula containing itself")]
    Occurs(String),
    #[error("`{0}` is both bound and mentioned in the range of another binding")]
    NotIdempotent(String),
}

/// Simultaneous bindings of schema atoms to formulas and of individual
/// variables to terms. Always idempotent: no bound variable occurs in any
/// range.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    schema: BTreeMap<Name, Formula>,
    terms: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.schema.is_empty() && self.terms.is_empty()
    }

    pub fn schema_bindings(&self) -> &BTreeMap<Name, Formula> {
        &self.schema
    }

    pub fn term_bindings(&self) -> &BTreeMap<Name, Term> {
        &self.terms
    }

    pub fn get_schema(&self, name: &str) -> Option<&Formula> {
        self.schema.get(name)
    }

    pub fn get_term(&self, name: &str) -> Option<&Term> {
        self.terms.get(name)
    }

    fn range_mentions(&self, name: &str) -> bool {
        self.schema
            .values()
            .any(|f| f.contains_schema(name) || f.has_free_var(name))
            || self.terms.values().any(|t| t.contains_var(name))
    }

    fn domain_in(&self, f: &Formula) -> Option<Name> {
        self.schema
            .keys()
            .find(|k| f.contains_schema(k))
            .or_else(|| self.terms.keys().find(|k| f.has_free_var(k)))
            .cloned()
    }

    pub fn bind_schema(&mut self, name: &str, f: Formula) -> Result<(), SubstitutionError> {
        if f == Formula::Schema(name.into()) {
            return Ok(());
        }
        if f.contains_schema(name) {
            return Err(SubstitutionError::Occurs(name.into()));
        }
        if self.range_mentions(name) {
            return Err(SubstitutionError::NotIdempotent(name.into()));
        }
        if let Some(d) = self.domain_in(&f) {
            return Err(SubstitutionError::NotIdempotent(d.to_string()));
        }
        self.schema.insert(name.into(), f);
        Ok(())
    }

    pub fn bind_term(&mut self, name: &str, t: Term) -> Result<(), SubstitutionError> {
        if t == Term::Var(name.into()) {
            return Ok(());
        }
        if t.contains_var(name) {
            return Err(SubstitutionError::Occurs(name.into()));
        }
        if self.range_mentions(name) {
            return Err(SubstitutionError::NotIdempotent(name.into()));
        }
        if let Some(d) = self.terms.keys().find(|k| t.contains_var(k)) {
            return Err(SubstitutionError::NotIdempotent(d.to_string()));
        }
        self.terms.insert(name.into(), t);
        Ok(())
    }

    pub fn apply(&self, f: &Formula) -> Formula {
        apply_substitution(f, self)
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if self.terms.is_empty() {
            return t.clone();
        }
        Applier::new(self).term(t, &[])
    }

    /// Free individual variables of all ranges.
    fn range_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for f in self.schema.values() {
            out.extend(f.free_vars());
        }
        for t in self.terms.values() {
            t.collect_vars(&mut out);
        }
        out
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (k, v) in &self.schema {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k} := {}", render_formula(v))?;
        }
        for (k, v) in &self.terms {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k} := {v}")?;
        }
        f.write_str("}")
    }
}

/// Simultaneous, capture-avoiding replacement. Bound variables of `f` that
/// clash with free variables of the ranges are renamed first; bound
/// occurrences are never replaced.
pub fn apply_substitution(f: &Formula, sub: &Substitution) -> Formula {
    if sub.is_empty() {
        return f.clone();
    }
    Applier::new(sub).formula(f, &mut Vec::new())
}

struct Applier<'a> {
    sub: &'a Substitution,
    range_vars: BTreeSet<Name>,
}

impl<'a> Applier<'a> {
    fn new(sub: &'a Substitution) -> Self {
        Applier {
            sub,
            range_vars: sub.range_vars(),
        }
    }

    fn formula(&self, f: &Formula, shadow: &mut Vec<Name>) -> Formula {
        match f {
            Formula::Schema(n) => self.sub.schema.get(n).cloned().unwrap_or_else(|| f.clone()),
            Formula::Pred(n, args) => {
                if self.sub.terms.is_empty() {
                    return f.clone();
                }
                Formula::Pred(
                    n.clone(),
                    args.iter().map(|t| self.term(t, shadow)).collect(),
                )
            }
            Formula::Not(c) => Formula::Not(Arc::new(self.formula(c, shadow))),
            Formula::And(l, r) => Formula::And(
                Arc::new(self.formula(l, shadow)),
                Arc::new(self.formula(r, shadow)),
            ),
            Formula::Or(l, r) => Formula::Or(
                Arc::new(self.formula(l, shadow)),
                Arc::new(self.formula(r, shadow)),
            ),
            Formula::Entail(l, r) => Formula::Entail(
                Arc::new(self.formula(l, shadow)),
                Arc::new(self.formula(r, shadow)),
            ),
            Formula::Quant(q, v, body) => {
                if self.range_vars.contains(v) {
                    let fresh = fresh_variant(v, &self.range_vars, body);
                    let mut rename = Substitution::new();
                    rename.terms.insert(v.clone(), Term::Var(fresh.clone()));
                    let renamed = Applier::new(&rename).formula(body, &mut Vec::new());
                    shadow.push(fresh.clone());
                    let out = self.formula(&renamed, shadow);
                    shadow.pop();
                    Formula::Quant(*q, fresh, Arc::new(out))
                } else {
                    shadow.push(v.clone());
                    let out = self.formula(body, shadow);
                    shadow.pop();
                    Formula::Quant(*q, v.clone(), Arc::new(out))
                }
            }
        }
    }

    fn term(&self, t: &Term, shadow: &[Name]) -> Term {
        match t {
            Term::Var(v) if !shadow.contains(v) => {
                self.sub.terms.get(v).cloned().unwrap_or_else(|| t.clone())
            }
            Term::Var(_) | Term::Const(_) => t.clone(),
            Term::App(n, args) => Term::App(
                n.clone(),
                args.iter().map(|a| self.term(a, shadow)).collect(),
            ),
        }
    }
}

fn fresh_variant(v: &Name, avoid: &BTreeSet<Name>, body: &Formula) -> Name {
    let used = body.lower_names();
    (1..)
        .map(|i| -> Name { format!("{v}_{i}").into() })
        .find(|c| !avoid.contains(c) && !used.contains(c))
        .expect("unbounded search")
}

/// One-way matching: the substitution σ over the schema atoms and free
/// individual variables of `schema` with `σ(schema)` equal to `target` up to
/// renaming of bound variables. Schema atoms of `target` are treated as
/// rigid.
pub fn match_schema(schema: &Formula, target: &Formula) -> Option<Substitution> {
    let mut m = Matcher::default();
    if m.formula(schema, target) {
        Some(m.sub)
    } else {
        None
    }
}

/// True when `target` is a substitution instance of `schema`.
pub fn is_instance(target: &Formula, schema: &Formula) -> bool {
    let mut m = Matcher::default();
    m.formula(schema, target)
}

#[derive(Default)]
struct Matcher {
    sub: Substitution,
    // Pairs of (schema-side, target-side) bound variables, innermost last.
    env: Vec<(Name, Name)>,
}

impl Matcher {
    fn captures(&self, f: &Formula) -> bool {
        self.env.iter().any(|(_, t)| f.has_free_var(t))
    }

    fn formula(&mut self, s: &Formula, t: &Formula) -> bool {
        match (s, t) {
            (Formula::Schema(x), _) => {
                if self.captures(t) {
                    return false;
                }
                match self.sub.schema.get(x) {
                    Some(bound) => bound == t,
                    None => {
                        self.sub.schema.insert(x.clone(), t.clone());
                        true
                    }
                }
            }
            (Formula::Pred(n, a), Formula::Pred(m, b)) => {
                n == m && a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| self.term(x, y))
            }
            (Formula::Not(a), Formula::Not(b)) => self.formula(a, b),
            (Formula::And(a1, a2), Formula::And(b1, b2))
            | (Formula::Or(a1, a2), Formula::Or(b1, b2))
            | (Formula::Entail(a1, a2), Formula::Entail(b1, b2)) => {
                self.formula(a1, b1) && self.formula(a2, b2)
            }
            (Formula::Quant(q1, x, a), Formula::Quant(q2, y, b)) if q1 == q2 => {
                self.env.push((x.clone(), y.clone()));
                let ok = self.formula(a, b);
                self.env.pop();
                ok
            }
            _ => false,
        }
    }

    fn term(&mut self, s: &Term, t: &Term) -> bool {
        match s {
            Term::Var(x) => {
                if let Some((_, y)) = self.env.iter().rev().find(|(sx, _)| sx == x) {
                    return matches!(t, Term::Var(v) if v == y);
                }
                if self.env.iter().any(|(_, y)| t.contains_var(y)) {
                    return false;
                }
                match self.sub.terms.get(x) {
                    Some(bound) => bound == t,
                    None => {
                        self.sub.terms.insert(x.clone(), t.clone());
                        true
                    }
                }
            }
            Term::Const(a) => match t {
                Term::Const(b) => a == b,
                _ => false,
            },
            Term::App(f, a) => match t {
                Term::App(g, b) if f == g && a.len() == b.len() => {
                    a.iter().zip(b.iter()).all(|(x, y)| self.term(x, y))
                }
                _ => false,
            },
        }
    }
}

/// Most general unifier of `f` and `g`, with occurs check. Schema atoms of
/// both sides are unifiable; callers rename them apart when they must be
/// independent.
pub fn unify(f: &Formula, g: &Formula) -> Option<Substitution> {
    let mut u = Unifier::new();
    if u.unify(f, g) {
        u.finish()
    } else {
        None
    }
}

const RIGID_PREFIX: char = '#';

/// Incremental unifier in triangular form.
#[derive(Clone, Debug, Default)]
pub(crate) struct Unifier {
    schema: HashMap<Name, Formula>,
    terms: HashMap<Name, Term>,
    rigid: usize,
}

impl Unifier {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn unify(&mut self, a: &Formula, b: &Formula) -> bool {
        if let Formula::Schema(x) = a {
            if let Some(bound) = self.schema.get(x).cloned() {
                return self.unify(&bound, b);
            }
        }
        if let Formula::Schema(y) = b {
            if let Some(bound) = self.schema.get(y).cloned() {
                return self.unify(a, &bound);
            }
        }
        match (a, b) {
            (Formula::Schema(x), Formula::Schema(y)) if x == y => true,
            (Formula::Schema(x), other) | (other, Formula::Schema(x)) => {
                if self.occurs(x, other) {
                    return false;
                }
                self.schema.insert(x.clone(), other.clone());
                true
            }
            (Formula::Pred(n, xs), Formula::Pred(m, ys)) => {
                n == m
                    && xs.len() == ys.len()
                    && xs
                        .iter()
                        .zip(ys.iter())
                        .all(|(x, y)| self.unify_terms(x, y))
            }
            (Formula::Not(x), Formula::Not(y)) => self.unify(x, y),
            (Formula::And(a1, a2), Formula::And(b1, b2))
            | (Formula::Or(a1, a2), Formula::Or(b1, b2))
            | (Formula::Entail(a1, a2), Formula::Entail(b1, b2)) => {
                self.unify(a1, b1) && self.unify(a2, b2)
            }
            (Formula::Quant(q1, x, body1), Formula::Quant(q2, y, body2)) if q1 == q2 => {
                // Both bound variables become one fresh rigid constant; it
                // must not escape into any binding.
                self.rigid += 1;
                let rigid = Term::Const(format!("{RIGID_PREFIX}{}", self.rigid).into());
                let left = rename_bound(body1, x, &rigid);
                let right = rename_bound(body2, y, &rigid);
                self.unify(&left, &right)
            }
            _ => false,
        }
    }

    fn unify_terms(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk_term(a);
        let b = self.walk_term(b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if self.occurs_term(x, other) {
                    return false;
                }
                self.terms.insert(x.clone(), other.clone());
                true
            }
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs
                        .iter()
                        .zip(ys.iter())
                        .all(|(x, y)| self.unify_terms(x, y))
            }
            _ => false,
        }
    }

    fn walk_term(&self, t: &Term) -> Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.terms.get(v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    fn occurs(&self, x: &Name, f: &Formula) -> bool {
        match f {
            Formula::Schema(y) => {
                y == x
                    || self
                        .schema
                        .get(y)
                        .is_some_and(|bound| self.occurs(x, bound))
            }
            Formula::Pred(..) => false,
            Formula::Not(c) | Formula::Quant(_, _, c) => self.occurs(x, c),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                self.occurs(x, l) || self.occurs(x, r)
            }
        }
    }

    fn occurs_term(&self, x: &Name, t: &Term) -> bool {
        match t {
            Term::Var(y) => y == x || self.terms.get(y).is_some_and(|b| self.occurs_term(x, b)),
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| self.occurs_term(x, a)),
        }
    }

    /// Applies the current bindings exhaustively.
    pub(crate) fn resolve(&self, f: &Formula) -> Formula {
        match f {
            Formula::Schema(x) => match self.schema.get(x) {
                Some(bound) => self.resolve(bound),
                None => f.clone(),
            },
            Formula::Pred(n, args) => {
                if self.terms.is_empty() {
                    return f.clone();
                }
                Formula::Pred(
                    n.clone(),
                    args.iter().map(|t| self.resolve_term(t)).collect(),
                )
            }
            Formula::Not(c) => Formula::Not(Arc::new(self.resolve(c))),
            Formula::And(l, r) => {
                Formula::And(Arc::new(self.resolve(l)), Arc::new(self.resolve(r)))
            }
            Formula::Or(l, r) => Formula::Or(Arc::new(self.resolve(l)), Arc::new(self.resolve(r))),
            Formula::Entail(l, r) => {
                Formula::Entail(Arc::new(self.resolve(l)), Arc::new(self.resolve(r)))
            }
            Formula::Quant(q, v, body) => {
                // Bound occurrences are not variables of the unifier.
                let inner = if self.terms.contains_key(v) {
                    let mut shadowed = self.clone();
                    shadowed.terms.remove(v);
                    shadowed.resolve(body)
                } else {
                    self.resolve(body)
                };
                Formula::Quant(*q, v.clone(), Arc::new(inner))
            }
        }
    }

    fn resolve_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.terms.get(v) {
                Some(bound) => self.resolve_term(bound),
                None => t.clone(),
            },
            Term::Const(_) => t.clone(),
            Term::App(n, args) => Term::App(
                n.clone(),
                args.iter().map(|a| self.resolve_term(a)).collect(),
            ),
        }
    }

    /// The idempotent substitution, or `None` when a rigid placeholder for a
    /// bound variable escaped into a binding.
    pub(crate) fn finish(&self) -> Option<Substitution> {
        let mut out = Substitution::new();
        for x in self.schema.keys() {
            let f = self.resolve(&Formula::Schema(x.clone()));
            if self.rigid > 0 && mentions_rigid(&f) {
                return None;
            }
            out.schema.insert(x.clone(), f);
        }
        for x in self.terms.keys() {
            let t = self.resolve_term(&Term::Var(x.clone()));
            if self.rigid > 0 && term_mentions_rigid(&t) {
                return None;
            }
            out.terms.insert(x.clone(), t);
        }
        Some(out)
    }
}

fn rename_bound(f: &Formula, var: &Name, to: &Term) -> Formula {
    let mut sub = Substitution::new();
    sub.terms.insert(var.clone(), to.clone());
    Applier {
        sub: &sub,
        range_vars: BTreeSet::new(),
    }
    .formula(f, &mut Vec::new())
}

fn term_mentions_rigid(t: &Term) -> bool {
    match t {
        Term::Var(_) => false,
        Term::Const(n) => n.starts_with(RIGID_PREFIX),
        Term::App(_, args) => args.iter().any(term_mentions_rigid),
    }
}

fn mentions_rigid(f: &Formula) -> bool {
    let mut found = false;
    f.visit(&mut |g| {
        if let Formula::Pred(_, args) = g {
            found |= args.iter().any(term_mentions_rigid);
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{canonicalize, parse_formula};

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn sub(bindings: &[(&str, &str)]) -> Substitution {
        let mut s = Substitution::new();
        for (k, v) in bindings {
            s.bind_schema(k, p(v)).unwrap();
        }
        s
    }

    #[test]
    fn apply_examples() {
        assert_eq!(
            apply_substitution(&p("A => A"), &sub(&[("A", "p & q")])),
            p("(p & q) => (p & q)")
        );
        assert_eq!(
            apply_substitution(&p("A => B"), &Substitution::new()),
            p("A => B")
        );

        let mut s = Substitution::new();
        s.bind_term("x", Term::app("s", vec![Term::var("y")]))
            .unwrap();
        let f = p("forall x. nat(x) => p");
        assert_eq!(apply_substitution(&f, &s), f);
    }

    #[test]
    fn apply_avoids_capture() {
        // A := q(y) under `forall y` must not be captured.
        let body = Formula::forall(
            "y",
            Formula::and(
                Formula::schema("A"),
                Formula::pred("r", vec![Term::var("y")]),
            ),
        );
        let mut s = Substitution::new();
        s.bind_schema("A", Formula::pred("q", vec![Term::var("y")]))
            .unwrap();
        let out = apply_substitution(&body, &s);
        match &out {
            Formula::Quant(_, v, inner) => {
                assert_ne!(&**v, "y");
                assert_eq!(
                    **inner,
                    Formula::and(
                        Formula::pred("q", vec![Term::var("y")]),
                        Formula::pred("r", vec![Term::Var(v.clone())])
                    )
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_bindings_rejected() {
        let mut s = Substitution::new();
        assert_eq!(
            s.bind_schema("A", p("A => B")),
            Err(SubstitutionError::Occurs("A".into()))
        );
        s.bind_schema("A", p("B => C")).unwrap();
        assert!(matches!(
            s.bind_schema("B", p("p")),
            Err(SubstitutionError::NotIdempotent(_))
        ));
        assert!(matches!(
            s.bind_schema("C", p("A")),
            Err(SubstitutionError::NotIdempotent(_))
        ));
        s.bind_schema("D", p("D")).unwrap();
        assert!(s.get_schema("D").is_none());
    }

    #[test]
    fn match_examples() {
        let m = match_schema(&p("A => B"), &p("(p & q) => r")).unwrap();
        assert_eq!(m, sub(&[("A", "p & q"), ("B", "r")]));
        assert!(match_schema(&p("A => A"), &p("p => q")).is_none());
        assert_eq!(
            match_schema(&p("A => A"), &p("(q => q)")),
            Some(sub(&[("A", "q")]))
        );
    }

    #[test]
    fn match_treats_target_schema_atoms_as_rigid() {
        assert!(match_schema(&p("A => A"), &p("B => C")).is_none());
        assert!(match_schema(&p("p => p"), &p("A => A")).is_none());
        assert!(match_schema(&p("A => A"), &p("B => B")).is_some());
    }

    #[test]
    fn match_under_quantifiers() {
        assert!(match_schema(&p("forall x. A"), &p("forall y. p(y)")).is_none());
        let m = match_schema(&p("forall x. A & p(x)"), &p("forall y. q & p(y)")).unwrap();
        assert_eq!(m.get_schema("A"), Some(&p("q")));
    }

    #[test]
    fn unify_examples() {
        let s = unify(&p("A => B"), &p("C => C")).unwrap();
        assert_eq!(canonicalize(&s.apply(&p("A => B"))), p("A1 => A1"));
        assert_eq!(s.apply(&p("A => B")), s.apply(&p("C => C")));

        assert!(unify(&p("A"), &p("A => B")).is_none());

        let s = unify(&p("(A => B)"), &p("(p => q) => C")).unwrap();
        assert_eq!(s.get_schema("A"), Some(&p("p => q")));
        assert_eq!(s.apply(&p("A => B")), s.apply(&p("(p => q) => C")));
    }

    #[test]
    fn unify_clashes() {
        assert!(unify(&p("A & B"), &p("p | q")).is_none());
        assert!(unify(&p("p(a)"), &p("p(b)")).is_none());
        assert!(unify(&p("forall x. p(x)"), &p("exists x. p(x)")).is_none());
        assert!(unify(&p("forall x. p(x)"), &p("forall y. p(y)")).is_some());
        // A would have to mention the bound variable.
        assert!(unify(&p("forall x. A"), &p("forall y. p(y)")).is_none());
    }

    #[test]
    fn unify_is_transitive_through_bindings() {
        let f = p("(A => B) & (B => C) & A");
        let g = p("(D => D) & (E => p) & q");
        let s = unify(&f, &g).unwrap();
        assert_eq!(s.apply(&f), s.apply(&g));
        assert_eq!(s.apply(&f), p("(q => q) & (q => p) & q"));
    }
}
