//! Logic systems as data: axiom schemata, inference rules and the connective
//! signature, loaded from JSON documents.

mod presets;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{
    classify_formula, degree_vector, render_formula, strong_relevance_holds,
    variable_sharing_holds, Classification, Connective, DegreeVector, Formula, FormulaParser, Name,
    ParseError,
};

pub use presets::{preset_document, preset_names};

/// Rule name reserved for the built-in universal instantiation step.
pub const UNIVERSAL_INSTANTIATION: &str = "UI";

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("logic document: {0}")]
    Schema(String),
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("{context}: {source}")]
    Parse { context: String, source: ParseError },
    #[error("{context}: {message}")]
    Invariant { context: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl LogicError {
    pub fn is_parse(&self) -> bool {
        matches!(self, LogicError::Parse { .. } | LogicError::Schema(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomSchema {
    pub name: Name,
    pub formula: Formula,
    /// Set for axioms without schema atoms.
    pub concrete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceRule {
    pub name: Name,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl InferenceRule {
    /// Checks that the rule has premises and invents no schema atoms.
    pub fn new(
        name: &str,
        premises: Vec<Formula>,
        conclusion: Formula,
    ) -> Result<InferenceRule, LogicError> {
        let context = format!("rule `{name}`");
        if premises.is_empty() {
            return Err(LogicError::Invariant {
                context,
                message: "a rule needs at least one premise".into(),
            });
        }
        let bound: BTreeSet<Name> = premises.iter().flat_map(|p| p.schema_atoms()).collect();
        if let Some(x) = conclusion
            .schema_atoms()
            .iter()
            .find(|x| !bound.contains(*x))
        {
            return Err(LogicError::Invariant {
                context,
                message: format!("conclusion uses schema variable `{x}` absent from the premises"),
            });
        }
        Ok(InferenceRule {
            name: name.into(),
            premises,
            conclusion,
        })
    }

    /// `X => Y, X ⊢ Y`
    pub fn modus_ponens() -> InferenceRule {
        let x = Formula::schema("X");
        let y = Formula::schema("Y");
        InferenceRule {
            name: "MP".into(),
            premises: vec![Formula::entail(x.clone(), y.clone()), x],
            conclusion: y,
        }
    }

    /// `X, Y ⊢ X & Y`
    pub fn adjunction() -> InferenceRule {
        let x = Formula::schema("X");
        let y = Formula::schema("Y");
        InferenceRule {
            name: "Adjunction".into(),
            premises: vec![x.clone(), y.clone()],
            conclusion: Formula::and(x, y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicSystem {
    pub name: String,
    pub description: Option<String>,
    pub signature: Vec<Connective>,
    pub axioms: Vec<AxiomSchema>,
    pub rules: Vec<InferenceRule>,
}

impl LogicSystem {
    pub fn axiom(&self, name: &str) -> Option<&AxiomSchema> {
        self.axioms.iter().find(|a| &*a.name == name)
    }

    pub fn rule(&self, name: &str) -> Option<&InferenceRule> {
        self.rules.iter().find(|r| &*r.name == name)
    }

    /// Loads a built-in preset by name.
    pub fn preset(name: &str) -> Result<LogicSystem, LogicError> {
        let doc = preset_document(name).ok_or_else(|| LogicError::UnknownPreset(name.into()))?;
        load_logic(doc)
    }

    /// Checks the system-level invariants: unique names, signature
    /// conformance, rule and axiom well-formedness.
    pub fn check(&self) -> Result<(), LogicError> {
        let mut seen = BTreeSet::new();
        for a in &self.axioms {
            if !seen.insert(a.name.clone()) {
                return Err(LogicError::DuplicateName {
                    kind: "axiom",
                    name: a.name.to_string(),
                });
            }
            if !a.concrete && a.formula.is_schema_free() {
                return Err(LogicError::Invariant {
                    context: format!("axiom `{}`", a.name),
                    message: "no schema variable; mark the axiom `concrete` if intended".into(),
                });
            }
            self.check_signature(&a.formula, &format!("axiom `{}`", a.name))?;
        }
        let mut seen = BTreeSet::new();
        for r in &self.rules {
            if !seen.insert(r.name.clone()) {
                return Err(LogicError::DuplicateName {
                    kind: "rule",
                    name: r.name.to_string(),
                });
            }
            if &*r.name == UNIVERSAL_INSTANTIATION {
                return Err(LogicError::Invariant {
                    context: format!("rule `{}`", r.name),
                    message: "this name is reserved for universal instantiation".into(),
                });
            }
            let checked = InferenceRule::new(&r.name, r.premises.clone(), r.conclusion.clone())?;
            let context = format!("rule `{}`", r.name);
            for f in checked
                .premises
                .iter()
                .chain(std::iter::once(&checked.conclusion))
            {
                self.check_signature(f, &context)?;
            }
        }
        Ok(())
    }

    fn check_signature(&self, f: &Formula, context: &str) -> Result<(), LogicError> {
        let mut bad = None;
        f.visit(&mut |g| {
            if let Some(c) = g.connective() {
                if !self.signature.contains(&c) {
                    bad.get_or_insert(c);
                }
            }
        });
        match bad {
            Some(c) => Err(LogicError::Invariant {
                context: context.into(),
                message: format!("connective `{c}` is not in the signature"),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LogicDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    signature: Vec<String>,
    axioms: Vec<AxiomDoc>,
    rules: Vec<RuleDoc>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct AxiomDoc {
    name: String,
    formula: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    concrete: bool,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    name: String,
    premises: Vec<String>,
    conclusion: String,
}

/// Parses and validates a logic document (JSON).
pub fn load_logic(document: &str) -> Result<LogicSystem, LogicError> {
    let doc: LogicDoc =
        serde_json::from_str(document).map_err(|e| LogicError::Schema(e.to_string()))?;
    if doc.name.trim().is_empty() {
        return Err(LogicError::Schema("`name` must be nonempty".into()));
    }
    let mut signature = Vec::new();
    for s in &doc.signature {
        let c = Connective::from_symbol(s)
            .ok_or_else(|| LogicError::Schema(format!("unknown connective `{s}` in signature")))?;
        if !signature.contains(&c) {
            signature.push(c);
        }
    }
    let mut parser = FormulaParser::new();
    let mut parse = |text: &str, context: String| {
        parser
            .parse(text)
            .map_err(|source| LogicError::Parse { context, source })
    };
    let mut axioms = Vec::new();
    for a in &doc.axioms {
        let formula = parse(&a.formula, format!("axiom `{}`", a.name))?;
        axioms.push(AxiomSchema {
            name: a.name.as_str().into(),
            formula,
            concrete: a.concrete,
        });
    }
    let mut rules = Vec::new();
    for r in &doc.rules {
        let mut premises = Vec::new();
        for (i, p) in r.premises.iter().enumerate() {
            premises.push(parse(p, format!("rule `{}` premise {}", r.name, i + 1))?);
        }
        let conclusion = parse(&r.conclusion, format!("rule `{}` conclusion", r.name))?;
        rules.push(InferenceRule::new(&r.name, premises, conclusion)?);
    }
    let logic = LogicSystem {
        name: doc.name,
        description: doc.description,
        signature,
        axioms,
        rules,
    };
    logic.check()?;
    Ok(logic)
}

/// Loads a logic from a file path, or from a built-in preset when the
/// argument has the form `preset:<name>`.
pub fn load_logic_file(path: &Path) -> Result<LogicSystem, LogicError> {
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("preset:")) {
        return LogicSystem::preset(name);
    }
    let text = std::fs::read_to_string(path).map_err(|source| LogicError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_logic(&text)
}

/// Serializes a logic back to the document format.
pub fn logic_to_json(logic: &LogicSystem) -> String {
    let doc = LogicDoc {
        name: logic.name.clone(),
        description: logic.description.clone(),
        signature: logic
            .signature
            .iter()
            .map(|c| c.symbol().to_string())
            .collect(),
        axioms: logic
            .axioms
            .iter()
            .map(|a| AxiomDoc {
                name: a.name.to_string(),
                formula: render_formula(&a.formula),
                concrete: a.concrete,
            })
            .collect(),
        rules: logic
            .rules
            .iter()
            .map(|r| RuleDoc {
                name: r.name.to_string(),
                premises: r.premises.iter().map(render_formula).collect(),
                conclusion: render_formula(&r.conclusion),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("logic document serializes")
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomAudit {
    pub name: String,
    pub formula: String,
    pub degrees: DegreeVector,
    pub classification: String,
    pub strong_relevance: bool,
    /// `None` when the axiom is not a conditional.
    pub variable_sharing: Option<bool>,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogicReport {
    pub logic: String,
    pub axioms: Vec<AxiomAudit>,
    pub warnings: Vec<String>,
}

/// Relevance audit of every axiom. Failing strong relevance is a warning:
/// non-relevant systems are legitimate inputs.
pub fn validate_logic(logic: &LogicSystem) -> LogicReport {
    let mut axioms = Vec::new();
    let mut warnings = Vec::new();
    for a in &logic.axioms {
        let strong = strong_relevance_holds(&a.formula);
        let sharing = variable_sharing_holds(&a.formula).ok();
        let class: Classification = classify_formula(&a.formula);
        if !strong {
            warnings.push(format!(
                "axiom `{}` ({}) fails the strong relevance principle",
                a.name,
                render_formula(&a.formula)
            ));
        }
        axioms.push(AxiomAudit {
            name: a.name.to_string(),
            formula: render_formula(&a.formula),
            degrees: degree_vector(&a.formula),
            classification: class.to_string(),
            strong_relevance: strong,
            variable_sharing: sharing,
            flagged: !strong,
        });
    }
    LogicReport {
        logic: logic.name.clone(),
        axioms,
        warnings,
    }
}
