mod support;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rforge_core::formula::parse_formula;
use rforge_core::pipeline::{
    corpus_stats, exit, load_corpus, read_corpus, run_pipeline, verify_corpus, CorpusEntry,
    Filters, PipelineError, PipelineManifest, RunOptions,
};
use rforge_core::theory::load_premises;
use tempfile::TempDir;

use support::*;

fn manifests() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/manifests")
}

/// A bundled manifest with every output redirected into `dir`.
fn bundled(name: &str, dir: &Path) -> PipelineManifest {
    let mut m = PipelineManifest::load(&manifests().join(format!("{name}.json"))).unwrap();
    m.fragment_cache = m.fragment_cache.map(|_| dir.join("fragment.frag"));
    m.output = dir.join(format!("{name}.jsonl"));
    m.text_output = m.text_output.map(|_| dir.join(format!("{name}.txt")));
    m.stats = None;
    m
}

fn formulas(entries: &[CorpusEntry]) -> BTreeSet<String> {
    entries.iter().map(|e| e.formula.clone()).collect()
}

fn oracle(e: &CorpusEntry) -> O {
    from_lib(&parse_formula(&e.formula).unwrap())
}

#[test]
fn chain_example_derives_the_two_consequences() {
    let dir = TempDir::new().unwrap();
    let m = bundled("chain", dir.path());
    let out = run_pipeline(&m, &RunOptions::default()).unwrap();
    assert_eq!(out.exit_code(), exit::OK);
    let got = formulas(&out.entries);
    let expected: BTreeSet<String> = ["p", "p => q", "q => r", "q", "r"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(got, expected);
    assert_eq!(out.stats.corpus.premises, 3);
    assert_eq!(out.stats.corpus.duplicates, 0);

    let written = load_corpus(&m.output).unwrap();
    assert_eq!(written, out.entries);
    assert!(m.stats_path().exists());
    let text = fs::read_to_string(&m.output).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn empty_premises_are_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let mut m = bundled("chain", dir.path());
    m.premises = dir.path().join("empty.txt");
    fs::write(&m.premises, "# nothing here\n").unwrap();
    let err = run_pipeline(&m, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), exit::PRECONDITION, "{err}");
}

#[test]
fn malformed_premise_is_a_parse_failure() {
    let dir = TempDir::new().unwrap();
    let mut m = bundled("chain", dir.path());
    m.premises = dir.path().join("bad.txt");
    fs::write(&m.premises, "p1: p => \n").unwrap();
    let err = run_pipeline(&m, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), exit::PARSE, "{err}");
}

#[test]
fn truncated_run_still_writes_a_partial_corpus() {
    let dir = TempDir::new().unwrap();
    let mut m = bundled("sets", dir.path());
    m.empirical_limits.max_depth = 1;
    let out = run_pipeline(&m, &RunOptions::default()).unwrap();
    assert!(out.stats.truncated);
    assert_eq!(out.exit_code(), exit::TRUNCATED);
    assert_eq!(load_corpus(&m.output).unwrap().len(), out.entries.len());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let ma = bundled("sets", a.path());
    let mb = bundled("sets", b.path());
    run_pipeline(&ma, &RunOptions { workers: 1 }).unwrap();
    run_pipeline(&mb, &RunOptions { workers: 2 }).unwrap();
    assert_eq!(fs::read(&ma.output).unwrap(), fs::read(&mb.output).unwrap());
    let (ta, tb) = (ma.text_output.unwrap(), mb.text_output.unwrap());
    assert_eq!(fs::read(ta).unwrap(), fs::read(tb).unwrap());
}

#[test]
fn cached_fragment_gives_the_same_corpus() {
    let dir = TempDir::new().unwrap();
    let m = bundled("rsa", dir.path());
    let cache = m.fragment_cache.clone().unwrap();
    assert!(!cache.exists());
    let fresh = run_pipeline(&m, &RunOptions::default()).unwrap();
    assert_eq!(fresh.stats.fragment.source, "generated");
    let first = fs::read(&m.output).unwrap();
    assert!(cache.exists());

    let cached = run_pipeline(&m, &RunOptions::default()).unwrap();
    assert_eq!(cached.stats.fragment.source, "cache");
    assert_eq!(fs::read(&m.output).unwrap(), first);
    assert_eq!(cached.fragment, fresh.fragment);
}

#[test]
fn cache_built_under_other_caps_is_refused() {
    let dir = TempDir::new().unwrap();
    let m = bundled("rsa", dir.path());
    run_pipeline(&m, &RunOptions::default()).unwrap();
    let mut other = m.clone();
    other.fragment_caps = rforge_core::DegreeVector::parse("=>:1,~:2").unwrap();
    let err = run_pipeline(&other, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, PipelineError::Precondition(_)), "{err}");
    assert_eq!(err.exit_code(), exit::PRECONDITION);
}

type Keep<'a> = Box<dyn Fn(&O) -> bool + 'a>;

fn with_filters(name: &str, filters: Filters) -> (Vec<CorpusEntry>, PipelineManifest, TempDir) {
    let dir = TempDir::new().unwrap();
    let mut m = bundled(name, dir.path());
    m.filters = filters;
    let out = run_pipeline(&m, &RunOptions::default()).unwrap();
    (out.entries, m, dir)
}

#[test]
fn filters_only_remove_and_remove_exactly_the_failures() {
    for pack in ["sets", "rsa"] {
        let (all, m, _dir) = with_filters(pack, Filters::default());
        let fragment: Vec<O> = {
            let out = run_pipeline(&m, &RunOptions::default()).unwrap();
            out.fragment
                .members()
                .map(|r| from_lib(&r.formula))
                .collect()
        };
        let cases: [(Filters, Keep); 3] = [
            (
                Filters {
                    strong_relevance: true,
                    ..Filters::default()
                },
                Box::new(strong_relevance),
            ),
            (
                Filters {
                    variable_sharing: true,
                    ..Filters::default()
                },
                Box::new(|f: &O| variable_sharing(f).unwrap_or(true)),
            ),
            (
                Filters {
                    exclude_logical_instances: true,
                    ..Filters::default()
                },
                Box::new(|f: &O| !fragment.iter().any(|s| is_instance(f, s))),
            ),
        ];
        for (filters, keep) in cases {
            let (filtered, ..) = with_filters(pack, filters);
            assert!(filtered.len() <= all.len());
            let expected: Vec<&CorpusEntry> = all.iter().filter(|e| keep(&oracle(e))).collect();
            let got: Vec<&CorpusEntry> = filtered.iter().collect();
            assert_eq!(got, expected, "{pack} with {filters:?}");
        }
        let (everything, ..) = with_filters(
            pack,
            Filters {
                strong_relevance: true,
                variable_sharing: true,
                exclude_logical_instances: true,
            },
        );
        assert!(everything.len() <= all.len());
    }
}

#[test]
fn unfiltered_corpus_replays() {
    let dir = TempDir::new().unwrap();
    let mut m = bundled("sets", dir.path());
    m.filters = Filters::default();
    let out = run_pipeline(&m, &RunOptions::default()).unwrap();
    let logic = rforge_core::pipeline::resolve_logic(&m.logic).unwrap();
    let premises = load_premises(&m.premises).unwrap();
    let n = verify_corpus(&out.entries, &logic, &premises, &out.fragment).unwrap();
    assert_eq!(n, out.entries.len());

    // A tampered entry is caught.
    let mut bad = out.entries.clone();
    let last = bad.iter_mut().rev().find(|e| e.rule == "MP").unwrap();
    last.formula = "q".into();
    assert!(verify_corpus(&bad, &logic, &premises, &out.fragment).is_err());
}

#[test]
fn stats_count_duplicates() {
    let dir = TempDir::new().unwrap();
    let m = bundled("chain", dir.path());
    run_pipeline(&m, &RunOptions::default()).unwrap();
    let text = fs::read_to_string(&m.output).unwrap();
    let first = text.lines().next().unwrap();
    let doubled = format!("{text}{first}\n");
    let entries = read_corpus(&doubled).unwrap();
    let stats = corpus_stats(&entries);
    assert_eq!(stats.duplicates, 1);
    assert_eq!(stats.duplicate_lines, vec![entries.len()]);
    assert_eq!(corpus_stats(&read_corpus(&text).unwrap()).duplicates, 0);
}

#[test]
fn corpus_rejects_unknown_fields() {
    let err = read_corpus("{\"id\": 0, \"colour\": 1}\n").unwrap_err();
    assert_eq!(err.exit_code(), exit::PARSE);
}

#[test]
fn derived_entries_respect_the_empirical_caps() {
    let dir = TempDir::new().unwrap();
    let m = bundled("rsa", dir.path());
    let out = run_pipeline(&m, &RunOptions::default()).unwrap();
    let caps: Caps = [
        Some(m.empirical_caps.get(rforge_core::Connective::Entail)),
        Some(m.empirical_caps.get(rforge_core::Connective::And)),
        Some(m.empirical_caps.get(rforge_core::Connective::Or)),
        Some(m.empirical_caps.get(rforge_core::Connective::Not)),
    ];
    for e in out.entries.iter().filter(|e| !e.is_premise) {
        assert!(within(oracle(e).degrees(), &caps), "{}", e.formula);
    }
}
