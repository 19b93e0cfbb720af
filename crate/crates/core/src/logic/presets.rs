//! Logic documents bundled with the crate. They are illustrative, not
//! complete axiomatizations of any named logic.

const PRESETS: &[(&str, &str)] = &[
    (
        "srl-entailment-mini",
        include_str!("../../data/logics/srl-entailment-mini.json"),
    ),
    (
        "srl-entailment-neg-mini",
        include_str!("../../data/logics/srl-entailment-neg-mini.json"),
    ),
    ("cml-mini", include_str!("../../data/logics/cml-mini.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_document(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}
