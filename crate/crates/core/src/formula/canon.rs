use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::sync::OnceLock;

use super::{Formula, Name, Term};

const CACHED: usize = 64;

fn cached_names(prefix: &'static str, cell: &'static OnceLock<Vec<Name>>) -> &'static [Name] {
    cell.get_or_init(|| {
        (1..=CACHED)
            .map(|i| format!("{prefix}{i}").into())
            .collect()
    })
}

/// `A1, A2, ...` for canonical schema atoms.
pub(crate) fn schema_name(n: usize) -> Name {
    static CELL: OnceLock<Vec<Name>> = OnceLock::new();
    if (1..=CACHED).contains(&n) {
        cached_names("A", &CELL)[n - 1].clone()
    } else {
        format!("A{n}").into()
    }
}

fn bound_name(n: usize) -> Name {
    static CELL: OnceLock<Vec<Name>> = OnceLock::new();
    if (1..=CACHED).contains(&n) {
        cached_names("x", &CELL)[n - 1].clone()
    } else {
        format!("x{n}").into()
    }
}

/// Renames schema atoms to `A1, A2, ...` and bound variables to `x1, x2, ...`
/// in order of first preorder occurrence. Bound names skip any identifier
/// already used by a constant, function, predicate or free variable.
pub fn canonicalize(f: &Formula) -> Formula {
    let mut c = Canon {
        schemas: HashMap::new(),
        scope: Vec::new(),
        taken: None,
        next_bound: 0,
        source: f,
    };
    c.formula(f)
}

/// Equal up to renaming of schema atoms and bound variables.
pub fn is_variant(f: &Formula, g: &Formula) -> bool {
    canonicalize(f) == canonicalize(g)
}

struct Canon<'a> {
    schemas: HashMap<Name, Name>,
    scope: Vec<(Name, Name)>,
    taken: Option<BTreeSet<Name>>,
    next_bound: usize,
    source: &'a Formula,
}

impl Canon<'_> {
    fn fresh_bound(&mut self) -> Name {
        let source = self.source;
        let taken = self.taken.get_or_insert_with(|| rigid_names(source));
        loop {
            self.next_bound += 1;
            let candidate = bound_name(self.next_bound);
            if !taken.contains(&candidate) {
                return candidate;
            }
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Schema(n) => {
                let next = self.schemas.len() + 1;
                let renamed = self
                    .schemas
                    .entry(n.clone())
                    .or_insert_with(|| schema_name(next))
                    .clone();
                Formula::Schema(renamed)
            }
            Formula::Pred(n, args) => {
                if self.scope.is_empty() {
                    return f.clone();
                }
                Formula::Pred(n.clone(), args.iter().map(|t| self.term(t)).collect())
            }
            Formula::Not(c) => Formula::Not(Arc::new(self.formula(c))),
            Formula::And(l, r) => {
                let l = self.formula(l);
                Formula::And(Arc::new(l), Arc::new(self.formula(r)))
            }
            Formula::Or(l, r) => {
                let l = self.formula(l);
                Formula::Or(Arc::new(l), Arc::new(self.formula(r)))
            }
            Formula::Entail(l, r) => {
                let l = self.formula(l);
                Formula::Entail(Arc::new(l), Arc::new(self.formula(r)))
            }
            Formula::Quant(q, v, body) => {
                let fresh = self.fresh_bound();
                self.scope.push((v.clone(), fresh.clone()));
                let body = self.formula(body);
                self.scope.pop();
                Formula::Quant(*q, fresh, Arc::new(body))
            }
        }
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.scope.iter().rev().find(|(old, _)| old == v) {
                Some((_, new)) => Term::Var(new.clone()),
                None => t.clone(),
            },
            Term::Const(_) => t.clone(),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| self.term(a)).collect()),
        }
    }
}

/// Names that canonicalization must not reuse for bound variables.
fn rigid_names(f: &Formula) -> BTreeSet<Name> {
    fn term(t: &Term, bound: &[Name], out: &mut BTreeSet<Name>) {
        match t {
            Term::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Term::Const(n) => {
                out.insert(n.clone());
            }
            Term::App(n, args) => {
                out.insert(n.clone());
                args.iter().for_each(|a| term(a, bound, out));
            }
        }
    }
    fn walk(f: &Formula, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match f {
            Formula::Schema(_) => {}
            Formula::Pred(n, args) => {
                out.insert(n.clone());
                args.iter().for_each(|a| term(a, bound, out));
            }
            Formula::Not(c) => walk(c, bound, out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
                walk(l, bound, out);
                walk(r, bound, out);
            }
            Formula::Quant(_, v, body) => {
                bound.push(v.clone());
                walk(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(f, &mut Vec::new(), &mut out);
    out
}
