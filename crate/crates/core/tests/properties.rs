mod support;

use proptest::prelude::*;

use rforge_core::engine::{
    derive_from_premises, generate_fragment, verify_records, DegreeCaps, DerivationLimits,
    DeriveOptions,
};
use rforge_core::formula::{
    canonicalize, classify_formula, connective_degree, degree_vector, is_variant,
    strong_relevance_holds, variable_sharing_holds, Classification, Connective, DegreeVector,
    Formula, Quantifier, Term,
};
use rforge_core::logic::LogicSystem;
use rforge_core::theory::PremiseSet;
use rforge_core::{apply_substitution, match_schema, parse_formula, render_formula, unify};

use support::*;

#[derive(Clone, Debug)]
enum Shape {
    Schema(u8),
    Atom(u8),
    /// `nat(x)` under a quantifier, `nat(0)` elsewhere.
    Nat,
    Not(Box<Shape>),
    And(Box<Shape>, Box<Shape>),
    Or(Box<Shape>, Box<Shape>),
    Entail(Box<Shape>, Box<Shape>),
    Forall(Box<Shape>),
    Exists(Box<Shape>),
}

fn shape(first_order: bool) -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        (0u8..3).prop_map(Shape::Schema),
        (0u8..3).prop_map(Shape::Atom),
        Just(Shape::Nat),
    ];
    leaf.prop_recursive(5, 24, 2, move |inner| {
        let mut options = vec![
            inner.clone().prop_map(|a| Shape::Not(Box::new(a))).boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Shape::And(Box::new(a), Box::new(b)))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Shape::Or(Box::new(a), Box::new(b)))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Shape::Entail(Box::new(a), Box::new(b)))
                .boxed(),
        ];
        if first_order {
            options.push(
                inner
                    .clone()
                    .prop_map(|a| Shape::Forall(Box::new(a)))
                    .boxed(),
            );
            options.push(inner.prop_map(|a| Shape::Exists(Box::new(a))).boxed());
        }
        proptest::strategy::Union::new(options)
    })
}

fn build(s: &Shape, bound: bool) -> Formula {
    match s {
        Shape::Schema(i) => Formula::schema(["A", "B", "C"][*i as usize]),
        Shape::Atom(i) => Formula::atom(["p", "q", "r"][*i as usize]),
        Shape::Nat if bound => Formula::pred("nat", vec![Term::var("x")]),
        Shape::Nat => Formula::pred("nat", vec![Term::constant("0")]),
        Shape::Not(a) => Formula::not(build(a, bound)),
        Shape::And(a, b) => Formula::and(build(a, bound), build(b, bound)),
        Shape::Or(a, b) => Formula::or(build(a, bound), build(b, bound)),
        Shape::Entail(a, b) => Formula::entail(build(a, bound), build(b, bound)),
        Shape::Forall(a) => Formula::forall("x", build(a, true)),
        Shape::Exists(a) => Formula::exists("x", build(a, true)),
    }
}

fn formula() -> impl Strategy<Value = Formula> {
    shape(true).prop_map(|s| build(&s, false))
}

fn propositional() -> impl Strategy<Value = Formula> {
    shape(false).prop_map(|s| build(&s, false))
}

/// Renames schema atoms with a fixed injective map.
fn shuffle_schema(f: &Formula) -> Formula {
    f.map_schema(&mut |n| format!("Z{}", n.len() * 7 + n.as_bytes()[0] as usize).into())
}

const CONNECTIVES: [Connective; 4] = [
    Connective::Entail,
    Connective::And,
    Connective::Or,
    Connective::Not,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_parse_round_trip(f in formula()) {
        let text = render_formula(&f);
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(render_formula(&back), text);
    }

    #[test]
    fn canonical_form_is_idempotent_and_a_variant(f in formula()) {
        let c = canonicalize(&f);
        prop_assert_eq!(canonicalize(&c), c.clone());
        prop_assert!(is_variant(&f, &c));
        prop_assert!(is_variant(&f, &shuffle_schema(&f)));
        prop_assert_eq!(from_lib(&c), from_lib(&f).canonical());
    }

    #[test]
    fn variant_relation_matches_the_reference(f in formula(), g in formula()) {
        let expected = from_lib(&f).canonical() == from_lib(&g).canonical();
        prop_assert_eq!(is_variant(&f, &g), expected);
        prop_assert_eq!(is_variant(&g, &f), expected);
    }

    #[test]
    fn degrees_match_the_reference_recursion(f in formula()) {
        let expected = from_lib(&f).degrees();
        let got = degree_vector(&f);
        for (i, &c) in CONNECTIVES.iter().enumerate() {
            prop_assert_eq!(connective_degree(&f, c), expected[i]);
            prop_assert_eq!(got.get(c), expected[i]);
        }
        if let Formula::Quant(_, _, body) = &f {
            prop_assert_eq!(degree_vector(body), got);
        }
    }

    #[test]
    fn classification_agrees_with_the_conditional_degree(f in formula()) {
        let d = connective_degree(&f, Connective::Entail);
        let class = classify_formula(&f);
        prop_assert_eq!(class.degree(), d);
        prop_assert_eq!(class == Classification::ZeroDegree, d == 0);
        if class == Classification::FirstDegreeConditional {
            prop_assert_eq!(d, 1);
        }
    }

    #[test]
    fn relevance_checks_match_the_reference(f in formula()) {
        let o = from_lib(&f);
        prop_assert_eq!(strong_relevance_holds(&f), strong_relevance(&o));
        prop_assert_eq!(variable_sharing_holds(&f).ok(), variable_sharing(&o));
    }

    #[test]
    // Strong relevance is vacuous without propositional atoms, so
    // predicates with arguments are left out.
    fn strong_relevance_implies_variable_sharing(f in propositional()) {
        prop_assume!(!render_formula(&f).contains("nat("));
        if let Ok(shares) = variable_sharing_holds(&f) {
            if strong_relevance_holds(&f) {
                prop_assert!(shares, "{}", render_formula(&f));
            }
        }
    }

    #[test]
    fn matching_agrees_with_the_reference(pattern in propositional(), target in formula()) {
        // Rigid target atoms must not collide with pattern variables.
        let target = target.map_schema(&mut |n| format!("T{n}").into());
        let got = match_schema(&pattern, &target);
        prop_assert_eq!(got.is_some(), is_instance(&from_lib(&target), &from_lib(&pattern)));
        if let Some(s) = got {
            prop_assert_eq!(apply_substitution(&pattern, &s), target);
        }
    }

    #[test]
    fn instances_match_their_schema(pattern in propositional(), a in formula(), b in formula()) {
        // Keep the bindings clear of the pattern's own atoms.
        let rename = |f: Formula| f.map_schema(&mut |n| format!("S{n}").into());
        let mut sub = rforge_core::Substitution::new();
        sub.bind_schema("A", rename(a)).unwrap();
        sub.bind_schema("B", rename(b)).unwrap();
        let instance = apply_substitution(&pattern, &sub);
        prop_assert!(match_schema(&pattern, &instance).is_some());
    }

    #[test]
    fn unifiers_unify(f in propositional(), g in propositional()) {
        let g = g.map_schema(&mut |n| format!("{n}'").into());
        let got = unify(&f, &g);
        let mut s = Subst::new();
        let expected = support::unify(&from_lib(&f), &from_lib(&g), &mut s);
        prop_assert_eq!(got.is_some(), expected);
        if let Some(u) = got {
            let (fu, gu) = (apply_substitution(&f, &u), apply_substitution(&g, &u));
            prop_assert_eq!(&fu, &gu);
            // Most general: the reference unifier's result is a variant.
            let reference = resolve(&from_lib(&f), &s);
            prop_assert_eq!(from_lib(&fu).canonical(), reference.canonical());
        }
    }
}

fn implication_premises() -> impl Strategy<Value = Vec<String>> {
    let atom = || (0u8..5).prop_map(|i| ["a", "b", "c", "d", "e"][i as usize].to_string());
    let premise = prop_oneof![
        atom(),
        (atom(), atom()).prop_map(|(x, y)| format!("{x} => {y}")),
        (atom(), atom(), atom()).prop_map(|(x, y, z)| format!("{x} => ({y} => {z})")),
        atom().prop_map(|x| format!("~{x}")),
    ];
    proptest::collection::vec(premise, 1..7)
}

fn identity_logic() -> LogicSystem {
    let mut l = LogicSystem::preset("srl-entailment-mini").unwrap();
    l.axioms.retain(|a| &*a.name == "Id");
    l
}

fn derive(texts: &[String], workers: usize) -> rforge_core::engine::DerivedSet {
    let logic = identity_logic();
    let fragment = generate_fragment(
        &logic,
        &DegreeVector::parse("=>:1").unwrap(),
        &DerivationLimits::default(),
    )
    .unwrap();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let premises = PremiseSet::from_texts(&refs).unwrap();
    let options = DeriveOptions {
        workers,
        ..DeriveOptions::default()
    };
    derive_from_premises(
        &fragment,
        &logic.rules,
        &premises,
        &DegreeCaps::parse("=>:1,&:1,~:1").unwrap(),
        &DerivationLimits::default().with_depth(6),
        &options,
    )
    .unwrap()
}

fn theorem_keys(d: &rforge_core::engine::DerivedSet) -> std::collections::BTreeSet<String> {
    d.theorems().map(|r| from_lib(&r.formula).key()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivation_matches_the_reference_closure(texts in implication_premises()) {
        let derived = derive(&texts, 1);
        prop_assert!(derived.status.complete);
        let mut seeds: Vec<(O, bool)> = texts
            .iter()
            .map(|t| (from_lib(&parse_formula(t).unwrap()), true))
            .collect();
        seeds.push((imp(var("A"), var("A")), false));
        let bounds = Bounds {
            caps: [Some(1), Some(1), None, Some(1)],
            max_size: 80,
            max_depth: 6,
            max_items: 100_000,
        };
        let reference = rooted_closure(&seeds, &[ORule::mp(), ORule::adjunction()], &bounds, true);
        let expected = reference.rooted_keys();
        prop_assert_eq!(theorem_keys(&derived), expected);
    }

    #[test]
    fn derivation_is_independent_of_workers(texts in implication_premises()) {
        let one = derive(&texts, 1);
        let three = derive(&texts, 3);
        prop_assert_eq!(one.records, three.records);
    }

    #[test]
    fn every_record_replays(texts in implication_premises()) {
        let derived = derive(&texts, 1);
        let logic = identity_logic();
        let fragment = generate_fragment(
            &logic,
            &DegreeVector::parse("=>:1").unwrap(),
            &DerivationLimits::default(),
        )
        .unwrap();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let premises = PremiseSet::from_texts(&refs).unwrap();
        let n = verify_records(&derived.records, &logic, Some(&premises), Some(&fragment)).unwrap();
        prop_assert_eq!(n, derived.records.len());
    }

    #[test]
    fn more_premises_never_lose_theorems(texts in implication_premises(), extra in implication_premises()) {
        let small = derive(&texts, 1);
        let mut more = texts.clone();
        more.extend(extra);
        let large = derive(&more, 1);
        prop_assume!(small.status.complete && large.status.complete);
        let big = theorem_keys(&large);
        for k in theorem_keys(&small) {
            prop_assert!(big.contains(&k), "{} lost", k);
        }
    }
}

#[test]
fn quantifier_prefix_is_transparent_to_degrees() {
    let body = parse_formula("(p => q) & ~r").unwrap();
    let f = Formula::Quant(Quantifier::Forall, "x".into(), body.clone().into());
    assert_eq!(degree_vector(&f), degree_vector(&body));
}
