//! Reference implementations used as test oracles. Nothing here calls into
//! the library except `from_lib`, which only copies the AST.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rforge_core::formula::{Formula, Quantifier, Term};

/// Terms with bound variables as de Bruijn indices, so structural equality
/// is alpha-equivalence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OTerm {
    Bound(usize),
    Free(String),
    Const(String),
    App(String, Vec<OTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum O {
    Var(String),
    Pred(String, Vec<OTerm>),
    Not(Box<O>),
    And(Box<O>, Box<O>),
    Or(Box<O>, Box<O>),
    Imp(Box<O>, Box<O>),
    /// `true` for a universal.
    Quant(bool, Box<O>),
}

pub fn var(n: &str) -> O {
    O::Var(n.into())
}
pub fn atom(n: &str) -> O {
    O::Pred(n.into(), vec![])
}
pub fn not(a: O) -> O {
    O::Not(Box::new(a))
}
pub fn and(a: O, b: O) -> O {
    O::And(Box::new(a), Box::new(b))
}
pub fn or(a: O, b: O) -> O {
    O::Or(Box::new(a), Box::new(b))
}
pub fn imp(a: O, b: O) -> O {
    O::Imp(Box::new(a), Box::new(b))
}

pub fn from_lib(f: &Formula) -> O {
    fn term(t: &Term, env: &[String]) -> OTerm {
        match t {
            Term::Var(n) => match env.iter().rev().position(|b| **b == **n) {
                Some(i) => OTerm::Bound(i),
                None => OTerm::Free(n.to_string()),
            },
            Term::Const(n) => OTerm::Const(n.to_string()),
            Term::App(n, args) => {
                OTerm::App(n.to_string(), args.iter().map(|a| term(a, env)).collect())
            }
        }
    }
    fn go(f: &Formula, env: &mut Vec<String>) -> O {
        match f {
            Formula::Schema(n) => O::Var(n.to_string()),
            Formula::Pred(n, args) => {
                O::Pred(n.to_string(), args.iter().map(|a| term(a, env)).collect())
            }
            Formula::Not(a) => not(go(a, env)),
            Formula::And(a, b) => and(go(a, env), go(b, env)),
            Formula::Or(a, b) => or(go(a, env), go(b, env)),
            Formula::Entail(a, b) => imp(go(a, env), go(b, env)),
            Formula::Quant(q, x, body) => {
                env.push(x.to_string());
                let b = go(body, env);
                env.pop();
                O::Quant(*q == Quantifier::Forall, Box::new(b))
            }
        }
    }
    go(f, &mut Vec::new())
}

impl O {
    pub fn size(&self) -> usize {
        fn tsize(t: &OTerm) -> usize {
            match t {
                OTerm::App(_, a) => 1 + a.iter().map(tsize).sum::<usize>(),
                _ => 1,
            }
        }
        match self {
            O::Var(_) => 1,
            O::Pred(_, a) => 1 + a.iter().map(tsize).sum::<usize>(),
            O::Not(a) | O::Quant(_, a) => 1 + a.size(),
            O::And(a, b) | O::Or(a, b) | O::Imp(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Nesting depth of each connective, in the order `=> & | ~`.
    pub fn degrees(&self) -> [u32; 4] {
        fn up(mut d: [u32; 4], i: usize) -> [u32; 4] {
            d[i] += 1;
            d
        }
        fn max(a: [u32; 4], b: [u32; 4]) -> [u32; 4] {
            [
                a[0].max(b[0]),
                a[1].max(b[1]),
                a[2].max(b[2]),
                a[3].max(b[3]),
            ]
        }
        match self {
            O::Var(_) | O::Pred(..) => [0; 4],
            O::Quant(_, a) => a.degrees(),
            O::Not(a) => up(a.degrees(), 3),
            O::Imp(a, b) => up(max(a.degrees(), b.degrees()), 0),
            O::And(a, b) => up(max(a.degrees(), b.degrees()), 1),
            O::Or(a, b) => up(max(a.degrees(), b.degrees()), 2),
        }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            O::Var(n) => {
                if !out.contains(n) {
                    out.push(n.clone())
                }
            }
            O::Pred(..) => {}
            O::Not(a) | O::Quant(_, a) => a.vars(out),
            O::And(a, b) | O::Or(a, b) | O::Imp(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> O {
        match self {
            O::Var(n) => O::Var(f(n)),
            O::Pred(..) => self.clone(),
            O::Not(a) => not(a.rename(f)),
            O::Quant(q, a) => O::Quant(*q, Box::new(a.rename(f))),
            O::And(a, b) => and(a.rename(f), b.rename(f)),
            O::Or(a, b) => or(a.rename(f), b.rename(f)),
            O::Imp(a, b) => imp(a.rename(f), b.rename(f)),
        }
    }

    /// Schema variables renamed `A1, A2, ...` by first occurrence.
    pub fn canonical(&self) -> O {
        let mut order = Vec::new();
        self.vars(&mut order);
        let map: HashMap<String, String> = order
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), format!("A{}", i + 1)))
            .collect();
        self.rename(&|v| map[v].clone())
    }

    /// Fully parenthesised, unambiguous text for set comparisons.
    pub fn key(&self) -> String {
        let mut s = String::new();
        self.write_key(&mut s);
        s
    }

    fn write_key(&self, s: &mut String) {
        fn term(t: &OTerm, s: &mut String) {
            match t {
                OTerm::Bound(i) => write!(s, "#{i}").unwrap(),
                OTerm::Free(n) => write!(s, "?{n}").unwrap(),
                OTerm::Const(n) => s.push_str(n),
                OTerm::App(n, a) => {
                    s.push_str(n);
                    s.push('(');
                    for (i, t) in a.iter().enumerate() {
                        if i > 0 {
                            s.push(',');
                        }
                        term(t, s);
                    }
                    s.push(')');
                }
            }
        }
        match self {
            O::Var(n) => write!(s, "${n}").unwrap(),
            O::Pred(n, a) => {
                s.push_str(n);
                if !a.is_empty() {
                    term(&OTerm::App(String::new(), a.clone()), s);
                }
            }
            O::Not(a) => {
                s.push('~');
                a.write_key(s);
            }
            O::Quant(q, a) => {
                s.push_str(if *q { "A." } else { "E." });
                a.write_key(s);
            }
            O::And(a, b) | O::Or(a, b) | O::Imp(a, b) => {
                let op = match self {
                    O::And(..) => " & ",
                    O::Or(..) => " | ",
                    _ => " => ",
                };
                s.push('(');
                a.write_key(s);
                s.push_str(op);
                b.write_key(s);
                s.push(')');
            }
        }
    }

    /// Surface syntax accepted by the formula parser; every binary node is
    /// parenthesised.
    pub fn text(&self) -> String {
        match self {
            O::Var(n) => n.clone(),
            O::Pred(n, a) if a.is_empty() => n.clone(),
            O::Pred(..) | O::Quant(..) => unimplemented!("propositional formulas only"),
            O::Not(a) => format!("~{}", a.text()),
            O::And(a, b) => format!("({} & {})", a.text(), b.text()),
            O::Or(a, b) => format!("({} | {})", a.text(), b.text()),
            O::Imp(a, b) => format!("({} => {})", a.text(), b.text()),
        }
    }
}

pub type Subst = HashMap<String, O>;

fn walk<'a>(mut f: &'a O, s: &'a Subst) -> &'a O {
    while let O::Var(n) = f {
        match s.get(n) {
            Some(g) => f = g,
            None => break,
        }
    }
    f
}

fn occurs(v: &str, f: &O, s: &Subst) -> bool {
    match walk(f, s) {
        O::Var(n) => n == v,
        O::Pred(..) => false,
        O::Not(a) | O::Quant(_, a) => occurs(v, a, s),
        O::And(a, b) | O::Or(a, b) | O::Imp(a, b) => occurs(v, a, s) || occurs(v, b, s),
    }
}

/// Robinson unification with occurs check over a triangular substitution.
pub fn unify(a: &O, b: &O, s: &mut Subst) -> bool {
    let a = walk(a, s).clone();
    let b = walk(b, s).clone();
    match (&a, &b) {
        (O::Var(x), O::Var(y)) if x == y => true,
        (O::Var(x), t) | (t, O::Var(x)) => {
            if occurs(x, t, s) {
                return false;
            }
            s.insert(x.clone(), t.clone());
            true
        }
        (O::Pred(..), O::Pred(..)) => a == b,
        (O::Not(x), O::Not(y)) => unify(x, y, s),
        (O::Quant(p, x), O::Quant(q, y)) => p == q && unify(x, y, s),
        (O::And(x1, x2), O::And(y1, y2))
        | (O::Or(x1, x2), O::Or(y1, y2))
        | (O::Imp(x1, x2), O::Imp(y1, y2)) => unify(x1, y1, s) && unify(x2, y2, s),
        _ => false,
    }
}

pub fn resolve(f: &O, s: &Subst) -> O {
    match walk(f, s) {
        O::Var(n) => O::Var(n.clone()),
        p @ O::Pred(..) => p.clone(),
        O::Not(a) => not(resolve(a, s)),
        O::Quant(q, a) => O::Quant(*q, Box::new(resolve(a, s))),
        O::And(a, b) => and(resolve(a, s), resolve(b, s)),
        O::Or(a, b) => or(resolve(a, s), resolve(b, s)),
        O::Imp(a, b) => imp(resolve(a, s), resolve(b, s)),
    }
}

/// One-way matching: is `target` an instance of `pattern`? Both are assumed
/// to use disjoint variable names or `target` to be treated as rigid.
pub fn matches(pattern: &O, target: &O, s: &mut HashMap<String, O>) -> bool {
    match (pattern, target) {
        (O::Var(x), t) => match s.get(x) {
            Some(bound) => bound == t,
            None => {
                s.insert(x.clone(), t.clone());
                true
            }
        },
        (O::Pred(..), _) => pattern == target,
        (O::Not(x), O::Not(y)) => matches(x, y, s),
        (O::Quant(p, x), O::Quant(q, y)) => p == q && matches(x, y, s),
        (O::And(x1, x2), O::And(y1, y2))
        | (O::Or(x1, x2), O::Or(y1, y2))
        | (O::Imp(x1, x2), O::Imp(y1, y2)) => matches(x1, y1, s) && matches(x2, y2, s),
        _ => false,
    }
}

pub fn is_instance(target: &O, pattern: &O) -> bool {
    matches(pattern, target, &mut HashMap::new())
}

/// A rule as premise schemata and a conclusion schema.
#[derive(Clone, Debug)]
pub struct ORule {
    pub name: String,
    pub premises: Vec<O>,
    pub conclusion: O,
}

impl ORule {
    pub fn new(name: &str, premises: Vec<O>, conclusion: O) -> ORule {
        ORule {
            name: name.into(),
            premises,
            conclusion,
        }
    }

    pub fn mp() -> ORule {
        ORule::new("MP", vec![imp(var("X"), var("Y")), var("X")], var("Y"))
    }

    pub fn adjunction() -> ORule {
        ORule::new(
            "Adjunction",
            vec![var("X"), var("Y")],
            and(var("X"), var("Y")),
        )
    }

    /// Condensed detachment on renamed-apart copies; canonical result.
    pub fn apply(&self, parents: &[&O]) -> Option<O> {
        if parents.len() != self.premises.len() {
            return None;
        }
        let mut s = Subst::new();
        for (i, (p, parent)) in self.premises.iter().zip(parents).enumerate() {
            let p = p.rename(&|v| format!("r:{v}"));
            let parent = parent.rename(&|v| format!("{i}:{v}"));
            if !unify(&p, &parent, &mut s) {
                return None;
            }
        }
        let c = self.conclusion.rename(&|v| format!("r:{v}"));
        Some(resolve(&c, &s).canonical())
    }
}

/// Caps in the order `=> & | ~`; `None` is unbounded.
pub type Caps = [Option<u32>; 4];

pub fn within(d: [u32; 4], caps: &Caps) -> bool {
    d.iter().zip(caps).all(|(v, c)| c.is_none_or(|c| *v <= c))
}

#[derive(Clone, Debug)]
pub struct ClosureItem {
    pub formula: O,
    pub depth: u32,
    /// Some premise is among its ancestors (or it is one).
    pub rooted: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Closure {
    pub items: Vec<ClosureItem>,
    pub index: HashMap<String, usize>,
    /// Stopped on `max_items`.
    pub overflow: bool,
    /// Stopped on `max_depth` with new items still appearing.
    pub cut: bool,
}

impl Closure {
    pub fn contains(&self, f: &O) -> bool {
        self.index.contains_key(&f.canonical().key())
    }

    pub fn keys(&self) -> BTreeSet<String> {
        self.index.keys().cloned().collect()
    }

    fn insert(&mut self, f: O, depth: u32, rooted: bool) -> bool {
        let key = f.key();
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.items.len());
        self.items.push(ClosureItem {
            formula: f,
            depth,
            rooted,
        });
        true
    }

    /// Keys of the items with premise ancestry.
    pub fn rooted_keys(&self) -> BTreeSet<String> {
        self.items
            .iter()
            .filter(|it| it.rooted)
            .map(|it| it.formula.key())
            .collect()
    }
}

pub struct Bounds {
    pub caps: Caps,
    pub max_size: usize,
    pub max_depth: u32,
    pub max_items: usize,
}

/// Breadth-first closure of `seeds` (exempt from caps and size) under
/// `rules`. Round `d` applies every rule to every tuple that contains at
/// least one item of depth `d - 1`.
pub fn closure(seeds: &[O], rules: &[ORule], b: &Bounds) -> Closure {
    let seeds: Vec<(O, bool)> = seeds.iter().map(|s| (s.clone(), true)).collect();
    rooted_closure(&seeds, rules, b, false)
}

/// Like [`closure`], with seeds marked as premises (`true`) or logic
/// (`false`). With `require_root`, only tuples with a premise-rooted member
/// fire.
pub fn rooted_closure(
    seeds: &[(O, bool)],
    rules: &[ORule],
    b: &Bounds,
    require_root: bool,
) -> Closure {
    let mut c = Closure::default();
    for (s, rooted) in seeds {
        c.insert(s.canonical(), 0, *rooted);
    }
    let mut depth = 0;
    loop {
        let frontier_start = c
            .items
            .iter()
            .position(|it| it.depth == depth)
            .unwrap_or(c.items.len());
        let n = c.items.len();
        if frontier_start == n {
            return c;
        }
        if depth == b.max_depth {
            c.cut = true;
            return c;
        }
        let mut fresh = Vec::new();
        for rule in rules {
            let k = rule.premises.len();
            let mut idx = vec![0usize; k];
            'tuples: loop {
                let rooted = idx.iter().any(|&i| c.items[i].rooted);
                if idx.iter().any(|&i| i >= frontier_start) && (rooted || !require_root) {
                    let parents: Vec<&O> = idx.iter().map(|&i| &c.items[i].formula).collect();
                    if let Some(r) = rule.apply(&parents) {
                        if within(r.degrees(), &b.caps) && r.size() <= b.max_size {
                            fresh.push((r, rooted));
                        }
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == k {
                        break 'tuples;
                    }
                    idx[pos] += 1;
                    if idx[pos] < n {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        }
        depth += 1;
        for (f, rooted) in fresh {
            if c.insert(f, depth, rooted) && c.items.len() > b.max_items {
                c.overflow = true;
                return c;
            }
        }
    }
}

/// Members with no strictly more general member (one per variant class).
pub fn maximal(items: &[O]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (i, f) in items.iter().enumerate() {
        let dominated = items
            .iter()
            .enumerate()
            .any(|(j, g)| i != j && is_instance(f, g) && !is_instance(g, f));
        if !dominated {
            out.insert(f.canonical().key());
        }
    }
    out
}

/// Antecedent/consequent marking per propositional symbol (schema variables
/// and nullary predicates).
pub fn polarity(f: &O) -> BTreeMap<String, (bool, bool)> {
    fn go(f: &O, consequent: bool, out: &mut BTreeMap<String, (bool, bool)>) {
        match f {
            O::Var(n) => mark(out, n, consequent),
            O::Pred(n, a) if a.is_empty() => mark(out, n, consequent),
            O::Pred(..) => {}
            O::Not(a) => go(a, !consequent, out),
            O::Quant(_, a) => go(a, consequent, out),
            O::And(a, b) | O::Or(a, b) => {
                go(a, consequent, out);
                go(b, consequent, out);
            }
            O::Imp(a, b) => {
                go(a, !consequent, out);
                go(b, consequent, out);
            }
        }
    }
    fn mark(out: &mut BTreeMap<String, (bool, bool)>, n: &str, consequent: bool) {
        let e = out.entry(n.to_string()).or_default();
        if consequent {
            e.1 = true;
        } else {
            e.0 = true;
        }
    }
    let mut out = BTreeMap::new();
    go(f, true, &mut out);
    out
}

pub fn strong_relevance(f: &O) -> bool {
    polarity(f).values().all(|&(a, c)| a && c)
}

/// `None` when the formula is not a conditional under its quantifier prefix.
pub fn variable_sharing(f: &O) -> Option<bool> {
    fn symbols(f: &O, out: &mut HashSet<String>) {
        match f {
            O::Var(n) => {
                out.insert(n.clone());
            }
            O::Pred(n, a) if a.is_empty() => {
                out.insert(n.clone());
            }
            O::Pred(..) => {}
            O::Not(a) | O::Quant(_, a) => symbols(a, out),
            O::And(a, b) | O::Or(a, b) | O::Imp(a, b) => {
                symbols(a, out);
                symbols(b, out);
            }
        }
    }
    match f {
        O::Quant(_, a) => variable_sharing(a),
        O::Imp(a, b) => {
            let (mut x, mut y) = (HashSet::new(), HashSet::new());
            symbols(a, &mut x);
            symbols(b, &mut y);
            Some(!x.is_disjoint(&y))
        }
        _ => None,
    }
}

/// Replaces de Bruijn index `level` (the variable of a stripped quantifier)
/// by `t`, adjusting nothing else; `t` must be closed.
pub fn instantiate(body: &O, t: &OTerm) -> O {
    fn term(x: &OTerm, level: usize, t: &OTerm) -> OTerm {
        match x {
            OTerm::Bound(i) if *i == level => t.clone(),
            OTerm::Bound(i) if *i > level => OTerm::Bound(i - 1),
            OTerm::App(n, a) => {
                OTerm::App(n.clone(), a.iter().map(|y| term(y, level, t)).collect())
            }
            other => other.clone(),
        }
    }
    fn go(f: &O, level: usize, t: &OTerm) -> O {
        match f {
            O::Var(_) => f.clone(),
            O::Pred(n, a) => O::Pred(n.clone(), a.iter().map(|x| term(x, level, t)).collect()),
            O::Not(a) => not(go(a, level, t)),
            O::Quant(q, a) => O::Quant(*q, Box::new(go(a, level + 1, t))),
            O::And(a, b) => and(go(a, level, t), go(b, level, t)),
            O::Or(a, b) => or(go(a, level, t), go(b, level, t)),
            O::Imp(a, b) => imp(go(a, level, t), go(b, level, t)),
        }
    }
    go(body, 0, t)
}

/// Finds the term that instantiates the outer universal of `parent` to
/// `child`, if any.
pub fn universal_witness(parent: &O, child: &O) -> Option<OTerm> {
    fn tm(p: &OTerm, c: &OTerm, level: usize, slot: &mut Option<OTerm>) -> bool {
        match (p, c) {
            (OTerm::Bound(i), _) if *i == level => match slot {
                Some(t) => t == c,
                None => {
                    *slot = Some(c.clone());
                    true
                }
            },
            (OTerm::Bound(i), OTerm::Bound(j)) if *i > level => *j == i - 1,
            (OTerm::App(n, a), OTerm::App(m, b)) => {
                n == m && a.len() == b.len() && a.iter().zip(b).all(|(x, y)| tm(x, y, level, slot))
            }
            _ => p == c,
        }
    }
    fn go(p: &O, c: &O, level: usize, slot: &mut Option<OTerm>) -> bool {
        match (p, c) {
            (O::Var(a), O::Var(b)) => a == b,
            (O::Pred(n, a), O::Pred(m, b)) => {
                n == m && a.len() == b.len() && a.iter().zip(b).all(|(x, y)| tm(x, y, level, slot))
            }
            (O::Not(a), O::Not(b)) => go(a, b, level, slot),
            (O::Quant(q, a), O::Quant(r, b)) => q == r && go(a, b, level + 1, slot),
            (O::And(a1, a2), O::And(b1, b2))
            | (O::Or(a1, a2), O::Or(b1, b2))
            | (O::Imp(a1, a2), O::Imp(b1, b2)) => {
                go(a1, b1, level, slot) && go(a2, b2, level, slot)
            }
            _ => false,
        }
    }
    let O::Quant(true, body) = parent else {
        return None;
    };
    let mut slot = None;
    if !go(body, child, 0, &mut slot) {
        return None;
    }
    // A vacuous quantifier instantiates with anything; report a constant.
    Some(slot.unwrap_or(OTerm::Const("_".into())))
}

pub fn term_is_closed(t: &OTerm) -> bool {
    match t {
        OTerm::Bound(_) | OTerm::Free(_) => false,
        OTerm::Const(_) => true,
        OTerm::App(_, a) => a.iter().all(term_is_closed),
    }
}
