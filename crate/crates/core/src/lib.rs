//! Degree-bounded forward reasoning over user-defined Hilbert-style logics.
//!
//! The crate is organised bottom-up:
//!
//! * [`formula`]: the object language, its text syntax, degree metrics,
//!   polarity analysis and canonical forms;
//! * [`subst`]: substitutions, matching and unification;
//! * [`logic`]: logic systems as data (axiom schemata and inference rules);
//! * [`engine`]: fragment generation and empirical saturation;
//! * [`theory`]: premise sets, formal theories and consistency checks;
//! * [`pipeline`]: manifests, corpus export and statistics.

pub mod engine;
pub mod formula;
pub mod logic;
pub mod pipeline;
pub mod subst;
pub mod theory;

pub use formula::{parse_formula, render_formula, Connective, DegreeVector, Formula, Term};
pub use subst::{apply_substitution, match_schema, unify, Substitution};
