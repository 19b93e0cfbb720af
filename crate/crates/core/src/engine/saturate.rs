//! The shared saturation loop behind fragment generation and premise
//! derivation.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use super::rules::{instantiate_universal, rename_parent, RulePlan};
use super::{
    DegreeCaps, Derivation, DerivationLimits, EngineError, RecordFlags, SaturationStatus,
    TheoremRecord, Truncation,
};
use crate::formula::{
    canonicalize, degree_vector, render_formula, Connective, DegreeVector, Formula, Name,
    Quantifier, Term,
};
use crate::logic::{InferenceRule, UNIVERSAL_INSTANTIATION};
use crate::subst::{is_instance, Substitution, Unifier};

/// Slot masks are 64 bits wide.
const MAX_SLOTS: usize = 64;

pub(crate) struct SaturationConfig {
    pub caps: DegreeCaps,
    pub limits: DerivationLimits,
    pub subsumption: bool,
    /// Terms for universal instantiation; `None` disables the rule.
    pub universe: Option<Vec<Term>>,
    /// Drop rule results none of whose parents descends from a premise.
    pub require_premise_parent: bool,
    /// Stop after the round in which every goal is reached.
    pub goal: Option<Goal>,
    /// 0 picks the default pool size.
    pub workers: usize,
}

/// Canonical target formulas.
pub(crate) struct Goal {
    pub targets: Vec<Formula>,
    /// Count a target as reached when it is an instance of a record, not
    /// only when it is one.
    pub up_to_instance: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum TopKey {
    Pred(Name, usize),
    Conn(Connective),
    Quant(Quantifier),
}

fn top_key(f: &Formula) -> Option<TopKey> {
    match f {
        Formula::Schema(_) => None,
        Formula::Pred(n, args) => Some(TopKey::Pred(n.clone(), args.len())),
        Formula::Quant(q, _, _) => Some(TopKey::Quant(*q)),
        other => other.connective().map(TopKey::Conn),
    }
}

/// Records grouped by top symbol. Lists are in id order.
#[derive(Default)]
struct TopIndex {
    ground: HashMap<TopKey, Vec<usize>>,
    schematic: HashMap<TopKey, Vec<usize>>,
    bare: Vec<usize>,
    all: Vec<usize>,
}

impl TopIndex {
    fn insert(&mut self, id: usize, f: &Formula) {
        self.all.push(id);
        match top_key(f) {
            None => self.bare.push(id),
            Some(k) if f.is_schema_free() => self.ground.entry(k).or_default().push(id),
            Some(k) => self.schematic.entry(k).or_default().push(id),
        }
    }

    /// Ids below `bound` that could unify with a formula headed by `key`.
    fn unifiable(&self, key: &TopKey, bound: usize, out: &mut Vec<usize>) {
        for list in [
            self.ground.get(key),
            self.schematic.get(key),
            Some(&self.bare),
        ]
        .into_iter()
        .flatten()
        {
            out.extend(below(list, bound));
        }
    }
}

fn below(list: &[usize], bound: usize) -> &[usize] {
    &list[..list.partition_point(|&i| i < bound)]
}

fn at_least(list: &[usize], from: usize) -> &[usize] {
    &list[list.partition_point(|&i| i < from)..]
}

struct Candidate {
    formula: Formula,
    text: String,
    degrees: DegreeVector,
    rule: usize,
    parents: Vec<usize>,
    substitution: Substitution,
}

#[derive(Default)]
struct Counts {
    candidates: usize,
    duplicates: usize,
    over_cap: usize,
    over_size: usize,
    subsumed: usize,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.candidates += o.candidates;
        self.duplicates += o.duplicates;
        self.over_cap += o.over_cap;
        self.over_size += o.over_size;
        self.subsumed += o.subsumed;
    }
}

#[derive(Clone, Copy)]
enum Task {
    Rule {
        plan: usize,
        slot: usize,
        record: usize,
    },
    Instantiate {
        record: usize,
    },
}

pub(crate) struct Saturator {
    cfg: SaturationConfig,
    plans: Vec<RulePlan>,
    slot_base: Vec<usize>,
    records: Vec<TheoremRecord>,
    by_canon: HashMap<Formula, usize>,
    usable: Vec<u64>,
    slots: Vec<TopIndex>,
    tops: TopIndex,
    universals: Vec<usize>,
    /// Per goal target, the first record reaching it.
    goal_hits: Vec<Option<usize>>,
    goal_checked: usize,
    status: SaturationStatus,
    started: Instant,
}

impl Saturator {
    pub fn new(rules: &[InferenceRule], cfg: SaturationConfig) -> Result<Saturator, EngineError> {
        cfg.limits.validate()?;
        let plans: Vec<RulePlan> = rules.iter().map(RulePlan::new).collect();
        let mut slot_base = Vec::with_capacity(plans.len());
        let mut total = 0;
        for (plan, rule) in plans.iter().zip(rules) {
            slot_base.push(total);
            total += plan.premises.len();
            if total > MAX_SLOTS {
                return Err(EngineError::RuleTooWide(rule.name.to_string()));
            }
        }
        let goal_hits = cfg
            .goal
            .as_ref()
            .map_or(Vec::new(), |g| vec![None; g.targets.len()]);
        Ok(Saturator {
            cfg,
            plans,
            slot_base,
            records: Vec::new(),
            by_canon: HashMap::new(),
            usable: Vec::new(),
            slots: (0..total).map(|_| TopIndex::default()).collect(),
            tops: TopIndex::default(),
            universals: Vec::new(),
            goal_hits,
            goal_checked: 0,
            status: SaturationStatus::default(),
            started: Instant::now(),
        })
    }

    pub fn into_parts(self) -> (Vec<TheoremRecord>, SaturationStatus) {
        (self.records, self.status)
    }

    /// For each goal target, the first record reaching it.
    pub fn goal_hits(&self) -> &[Option<usize>] {
        &self.goal_hits
    }

    /// Adds a depth-0 record. The formula must be canonical. Returns `None`
    /// for duplicates and (with subsumption) instances of active records.
    pub fn seed(
        &mut self,
        formula: Formula,
        derivation: Derivation,
        is_premise: bool,
    ) -> Option<usize> {
        if self.by_canon.contains_key(&formula) {
            self.status.duplicates += 1;
            return None;
        }
        if self.cfg.subsumption && self.find_subsumer(&formula, 0).is_some() {
            self.status.subsumed += 1;
            return None;
        }
        let degrees = degree_vector(&formula);
        let id = self.push(formula, derivation, 0, degrees, is_premise, is_premise);
        Some(id)
    }

    fn push(
        &mut self,
        formula: Formula,
        derivation: Derivation,
        depth: u32,
        degrees: DegreeVector,
        is_premise: bool,
        premise_ancestry: bool,
    ) -> usize {
        let id = self.records.len();
        let flags = RecordFlags::analyze(&formula, is_premise, premise_ancestry);
        let mut mask = 0u64;
        for (pi, plan) in self.plans.iter().enumerate() {
            for slot in 0..plan.premises.len() {
                if self.slot_usable(plan, slot, &formula) {
                    let global = self.slot_base[pi] + slot;
                    mask |= 1 << global;
                    self.slots[global].insert(id, &formula);
                }
            }
        }
        self.usable.push(mask);
        self.tops.insert(id, &formula);
        if matches!(formula, Formula::Quant(Quantifier::Forall, ..)) {
            self.universals.push(id);
        }
        self.by_canon.insert(formula.clone(), id);
        let schematic = !formula.is_schema_free();
        self.records.push(TheoremRecord {
            id,
            formula,
            derivation,
            depth,
            degrees,
            flags,
            subsumed_by: None,
        });
        if self.cfg.subsumption && schematic {
            self.retire_instances(id);
        }
        id
    }

    /// An active record of which `f` is a proper instance, among ids at or
    /// above `from`.
    fn find_subsumer(&self, f: &Formula, from: usize) -> Option<usize> {
        let key = top_key(f);
        let lists = [
            key.as_ref().and_then(|k| self.tops.schematic.get(k)),
            Some(&self.tops.bare),
        ];
        lists.into_iter().flatten().find_map(|list| {
            at_least(list, from).iter().copied().find(|&i| {
                let r = &self.records[i];
                r.is_active() && r.formula != *f && is_instance(f, &r.formula)
            })
        })
    }

    fn retire_instances(&mut self, g: usize) {
        let general = self.records[g].formula.clone();
        let victims: Vec<usize> = match top_key(&general) {
            None => self.tops.all.clone(),
            Some(k) => {
                let mut v = Vec::new();
                self.tops.unifiable(&k, usize::MAX, &mut v);
                v
            }
        };
        for i in victims {
            let r = &self.records[i];
            if i != g && r.is_active() && is_instance(&r.formula, &general) {
                self.records[i].subsumed_by = Some(g);
                self.status.retired += 1;
            }
        }
    }

    /// Whether a record of this shape can fill `slot` of `plan` without the
    /// conclusion necessarily exceeding the caps or the size limit.
    fn slot_usable(&self, plan: &RulePlan, slot: usize, f: &Formula) -> bool {
        let mut lower: HashMap<Name, (DegreeVector, usize)> = HashMap::new();
        if !lower_bounds(&plan.premises[slot], f, &mut lower) {
            return false;
        }
        let (degrees, size) = conclusion_bound(&plan.conclusion, &lower);
        self.cfg.caps.allows(&degrees) && size <= self.cfg.limits.max_formula_size
    }

    fn timed_out(&self) -> bool {
        self.started.elapsed() > self.cfg.limits.time_budget
    }

    /// Saturates from the current seeds.
    pub fn run(&mut self) -> Result<SaturationStatus, EngineError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?;
        let mut lo = 0;
        let mut hi = self.records.len();
        self.status.complete = false;
        loop {
            if self.update_goals() {
                break;
            }
            if hi == lo {
                self.status.complete = true;
                break;
            }
            if self.status.rounds == self.cfg.limits.max_depth {
                let probe = pool.install(|| self.generate(lo, hi));
                match probe {
                    Some(c) if c.is_empty() => self.status.complete = true,
                    Some(_) => self.status.truncation = Some(Truncation::MaxDepth),
                    None => self.status.truncation = Some(Truncation::TimeBudget),
                }
                break;
            }
            if self.timed_out() {
                self.status.truncation = Some(Truncation::TimeBudget);
                break;
            }
            let Some(candidates) = pool.install(|| self.generate(lo, hi)) else {
                self.status.truncation = Some(Truncation::TimeBudget);
                break;
            };
            self.status.rounds += 1;
            let round_start = self.records.len();
            if !self.insert(candidates, round_start) {
                break;
            }
            lo = hi;
            hi = self.records.len();
        }
        self.status.elapsed = self.started.elapsed();
        Ok(self.status.clone())
    }

    /// Checks records added since the last call; true once every target
    /// is reached.
    fn update_goals(&mut self) -> bool {
        let Some(goal) = &self.cfg.goal else {
            return false;
        };
        for (t, target) in goal.targets.iter().enumerate() {
            if self.goal_hits[t].is_some() {
                continue;
            }
            self.goal_hits[t] = if goal.up_to_instance {
                self.records[self.goal_checked..]
                    .iter()
                    .find(|r| r.is_active() && is_instance(target, &r.formula))
                    .map(|r| r.id)
            } else {
                self.by_canon.get(target).copied()
            };
        }
        self.goal_checked = self.records.len();
        self.goal_hits.iter().all(Option::is_some)
    }

    /// Inserts one round of candidates at the current round's depth; false
    /// when a limit stopped it.
    fn insert(&mut self, candidates: Vec<Candidate>, round_start: usize) -> bool {
        let depth = self.status.rounds;
        for (n, c) in candidates.into_iter().enumerate() {
            if self.records.len() >= self.cfg.limits.max_records {
                self.status.truncation = Some(Truncation::MaxRecords);
                return false;
            }
            if n % 4096 == 4095 && self.timed_out() {
                self.status.truncation = Some(Truncation::TimeBudget);
                return false;
            }
            if self.by_canon.contains_key(&c.formula) {
                self.status.duplicates += 1;
                continue;
            }
            if self.cfg.subsumption && self.find_subsumer(&c.formula, round_start).is_some() {
                self.status.subsumed += 1;
                continue;
            }
            let rule_name = match self.plans.get(c.rule) {
                Some(plan) => plan.name.clone(),
                None => Name::from(UNIVERSAL_INSTANTIATION),
            };
            let ancestry = c
                .parents
                .iter()
                .any(|&p| self.records[p].flags.premise_ancestry);
            self.push(
                c.formula,
                Derivation::Rule {
                    rule: rule_name,
                    parents: c.parents,
                    substitution: c.substitution,
                },
                depth,
                c.degrees,
                false,
                ancestry,
            );
        }
        true
    }

    /// All surviving conclusions with at least one parent in `lo..hi`, in
    /// agenda order. `None` when the time budget ran out meanwhile.
    fn generate(&mut self, lo: usize, hi: usize) -> Option<Vec<Candidate>> {
        let mut tasks = Vec::new();
        for (pi, plan) in self.plans.iter().enumerate() {
            for slot in 0..plan.premises.len() {
                let global = self.slot_base[pi] + slot;
                for &record in at_least(below(&self.slots[global].all, hi), lo) {
                    if self.records[record].is_active() {
                        tasks.push(Task::Rule {
                            plan: pi,
                            slot,
                            record,
                        });
                    }
                }
            }
        }
        if self.cfg.universe.as_ref().is_some_and(|u| !u.is_empty()) {
            for &record in at_least(below(&self.universals, hi), lo) {
                if self.records[record].is_active() {
                    tasks.push(Task::Instantiate { record });
                }
            }
        }
        let this = &*self;
        let results: Vec<Option<(Vec<Candidate>, Counts)>> = tasks
            .par_iter()
            .map(|&task| {
                if this.timed_out() {
                    return None;
                }
                let mut out = Vec::new();
                let mut counts = Counts::default();
                match task {
                    Task::Rule { plan, slot, record } => {
                        this.expand(plan, slot, record, lo, hi, &mut out, &mut counts)
                    }
                    Task::Instantiate { record } => this.instantiate(record, &mut out, &mut counts),
                }
                Some((out, counts))
            })
            .collect();
        let mut total = Counts::default();
        let mut candidates = Vec::new();
        for r in results {
            let (c, counts) = r?;
            total.add(&counts);
            candidates.extend(c);
        }
        candidates.par_sort_unstable_by(|a, b| {
            (&a.text, a.rule, &a.parents).cmp(&(&b.text, b.rule, &b.parents))
        });
        self.status.candidates += total.candidates;
        self.status.duplicates += total.duplicates;
        self.status.over_cap += total.over_cap;
        self.status.over_size += total.over_size;
        self.status.subsumed += total.subsumed;
        Some(candidates)
    }

    #[allow(clippy::too_many_arguments)]
    fn expand(
        &self,
        pi: usize,
        slot: usize,
        record: usize,
        lo: usize,
        hi: usize,
        out: &mut Vec<Candidate>,
        counts: &mut Counts,
    ) {
        let plan = &self.plans[pi];
        let mut u = Unifier::new();
        if !u.unify(
            &plan.premises[slot],
            &rename_parent(&self.records[record].formula, slot),
        ) {
            return;
        }
        let mut parents = vec![usize::MAX; plan.premises.len()];
        parents[slot] = record;
        let frame = Frame {
            pi,
            delta_slot: slot,
            lo,
            hi,
        };
        self.fill(&frame, 0, u, &mut parents, out, counts);
    }

    fn fill(
        &self,
        frame: &Frame,
        q: usize,
        u: Unifier,
        parents: &mut Vec<usize>,
        out: &mut Vec<Candidate>,
        counts: &mut Counts,
    ) {
        let plan = &self.plans[frame.pi];
        if q == plan.premises.len() {
            self.conclude(frame.pi, &u, parents, out, counts);
            return;
        }
        if q == frame.delta_slot {
            return self.fill(frame, q + 1, u, parents, out, counts);
        }
        // Slots before the delta slot draw from older records only, so every
        // tuple is enumerated once.
        let bound = if q < frame.delta_slot {
            frame.lo
        } else {
            frame.hi
        };
        let global = self.slot_base[frame.pi] + q;
        let pattern = u.resolve(&plan.premises[q]);
        for c in self.partners(global, &pattern, bound) {
            let mut next = u.clone();
            if next.unify(
                &plan.premises[q],
                &rename_parent(&self.records[c].formula, q),
            ) {
                parents[q] = c;
                self.fill(frame, q + 1, next, parents, out, counts);
            }
        }
        parents[q] = usize::MAX;
    }

    /// Active records usable in `slot` below `bound` that may unify with
    /// `pattern`.
    fn partners(&self, slot: usize, pattern: &Formula, bound: usize) -> Vec<usize> {
        let index = &self.slots[slot];
        let mut ids = Vec::new();
        match top_key(pattern) {
            None => ids.extend_from_slice(below(&index.all, bound)),
            Some(key) if pattern.is_schema_free() => {
                if let Some(&i) = self.by_canon.get(&canonicalize(pattern)) {
                    if i < bound && self.usable[i] & (1 << slot) != 0 {
                        ids.push(i);
                    }
                }
                for list in [index.schematic.get(&key), Some(&index.bare)]
                    .into_iter()
                    .flatten()
                {
                    ids.extend_from_slice(below(list, bound));
                }
            }
            Some(key) => index.unifiable(&key, bound, &mut ids),
        }
        ids.retain(|&i| self.records[i].is_active());
        ids
    }

    fn conclude(
        &self,
        pi: usize,
        u: &Unifier,
        parents: &[usize],
        out: &mut Vec<Candidate>,
        counts: &mut Counts,
    ) {
        if self.cfg.require_premise_parent
            && !parents
                .iter()
                .any(|&p| self.records[p].flags.premise_ancestry)
        {
            return;
        }
        let formula = canonicalize(&u.resolve(&self.plans[pi].conclusion));
        let Some(degrees) = self.admit(&formula, counts) else {
            return;
        };
        // Re-unify in slot order so the stored unifier does not depend on
        // which slot drove the join.
        let plan = &self.plans[pi];
        let mut ordered = Unifier::new();
        for (slot, &p) in parents.iter().enumerate() {
            let parent = rename_parent(&self.records[p].formula, slot);
            if !ordered.unify(&plan.premises[slot], &parent) {
                return;
            }
        }
        let Some(substitution) = ordered.finish() else {
            return;
        };
        out.push(Candidate {
            text: render_formula(&formula),
            formula,
            degrees,
            rule: pi,
            parents: parents.to_vec(),
            substitution,
        });
    }

    fn instantiate(&self, record: usize, out: &mut Vec<Candidate>, counts: &mut Counts) {
        let parent = &self.records[record];
        if self.cfg.require_premise_parent && !parent.flags.premise_ancestry {
            return;
        }
        for t in self.cfg.universe.iter().flatten() {
            let Some(c) = instantiate_universal(&parent.formula, t) else {
                return;
            };
            let Some(degrees) = self.admit(&c.formula, counts) else {
                continue;
            };
            out.push(Candidate {
                text: render_formula(&c.formula),
                formula: c.formula,
                degrees,
                rule: self.plans.len(),
                parents: vec![record],
                substitution: c.substitution,
            });
        }
    }

    /// Size, caps, duplicate and subsumption filters against the frozen
    /// store. Returns the degrees of an admitted formula.
    fn admit(&self, formula: &Formula, counts: &mut Counts) -> Option<DegreeVector> {
        counts.candidates += 1;
        if formula.size() > self.cfg.limits.max_formula_size {
            counts.over_size += 1;
            return None;
        }
        let degrees = degree_vector(formula);
        if !self.cfg.caps.allows(&degrees) {
            counts.over_cap += 1;
            return None;
        }
        if self.by_canon.contains_key(formula) {
            counts.duplicates += 1;
            return None;
        }
        if self.cfg.subsumption && self.find_subsumer(formula, 0).is_some() {
            counts.subsumed += 1;
            return None;
        }
        Some(degrees)
    }
}

struct Frame {
    pi: usize,
    delta_slot: usize,
    lo: usize,
    hi: usize,
}

/// Lower bounds on the degrees and size of each template variable after
/// unification with `f`; false when the shapes cannot unify.
fn lower_bounds(
    template: &Formula,
    f: &Formula,
    out: &mut HashMap<Name, (DegreeVector, usize)>,
) -> bool {
    match (template, f) {
        (Formula::Schema(x), sub) => {
            let entry = out.entry(x.clone()).or_insert((DegreeVector::ZERO, 1));
            entry.0 = entry.0.join(&degree_vector(sub));
            entry.1 = entry.1.max(sub.size());
            true
        }
        (_, Formula::Schema(_)) => true,
        (Formula::Pred(n, a), Formula::Pred(m, b)) => n == m && a.len() == b.len(),
        (Formula::Not(a), Formula::Not(b)) => lower_bounds(a, b, out),
        (Formula::And(a1, a2), Formula::And(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Entail(a1, a2), Formula::Entail(b1, b2)) => {
            lower_bounds(a1, b1, out) && lower_bounds(a2, b2, out)
        }
        (Formula::Quant(q1, _, a), Formula::Quant(q2, _, b)) => q1 == q2 && lower_bounds(a, b, out),
        _ => false,
    }
}

fn conclusion_bound(
    template: &Formula,
    lower: &HashMap<Name, (DegreeVector, usize)>,
) -> (DegreeVector, usize) {
    let node = |c: Connective, children: &[(DegreeVector, usize)]| {
        let mut d = DegreeVector::ZERO;
        let mut size = 1;
        for (cd, cs) in children {
            d = d.join(cd);
            size += cs;
        }
        d.set(c, d.get(c) + 1);
        (d, size)
    };
    match template {
        Formula::Schema(x) => lower.get(x).copied().unwrap_or((DegreeVector::ZERO, 1)),
        Formula::Pred(..) => (DegreeVector::ZERO, template.size()),
        Formula::Not(a) => node(Connective::Not, &[conclusion_bound(a, lower)]),
        Formula::And(a, b) => node(
            Connective::And,
            &[conclusion_bound(a, lower), conclusion_bound(b, lower)],
        ),
        Formula::Or(a, b) => node(
            Connective::Or,
            &[conclusion_bound(a, lower), conclusion_bound(b, lower)],
        ),
        Formula::Entail(a, b) => node(
            Connective::Entail,
            &[conclusion_bound(a, lower), conclusion_bound(b, lower)],
        ),
        Formula::Quant(_, _, a) => {
            let (d, s) = conclusion_bound(a, lower);
            (d, s + 1)
        }
    }
}
