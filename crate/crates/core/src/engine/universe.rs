use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Formula, Name, Term};

/// Ground terms occurring in `formulas`, closed under the function symbols
/// occurring there up to `term_depth` (constants have depth 0). Terms that
/// already occur are kept whatever their depth. Sorted.
pub fn term_universe<'a>(
    formulas: impl IntoIterator<Item = &'a Formula>,
    term_depth: usize,
) -> Vec<Term> {
    let mut universe = BTreeSet::new();
    let mut functions: BTreeMap<Name, usize> = BTreeMap::new();
    for f in formulas {
        f.visit(&mut |g| {
            if let Formula::Pred(_, args) = g {
                for a in args.iter() {
                    collect(a, &mut universe, &mut functions);
                }
            }
        });
    }
    for _ in 0..term_depth {
        let current: Vec<Term> = universe.iter().cloned().collect();
        let mut grew = false;
        for (name, &arity) in &functions {
            for args in tuples(&current, arity) {
                let t = Term::App(name.clone(), args.into());
                if t.depth() <= term_depth && universe.insert(t) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    universe.into_iter().collect()
}

fn collect(t: &Term, universe: &mut BTreeSet<Term>, functions: &mut BTreeMap<Name, usize>) {
    if let Term::App(name, args) = t {
        functions.insert(name.clone(), args.len());
        for a in args.iter() {
            collect(a, universe, functions);
        }
    }
    if t.is_ground() {
        universe.insert(t.clone());
    }
}

fn tuples(items: &[Term], arity: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |t| {
                    let mut next = prefix.clone();
                    next.push(t.clone());
                    next
                })
            })
            .collect();
    }
    out
}
