use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::formula::{Formula, FormulaParser, Name, ParseError};

#[derive(Debug, Error)]
pub enum PremiseError {
    #[error("premises must be nonempty")]
    Empty,
    #[error("line {line}: expected `label: formula`")]
    MissingLabel { line: usize },
    #[error("line {line}: bad label `{label}`")]
    BadLabel { line: usize, label: String },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("premise `{label}` is not closed (free variables: {vars})")]
    Open { label: String, vars: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PremiseError {
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            PremiseError::MissingLabel { .. }
                | PremiseError::BadLabel { .. }
                | PremiseError::Parse { .. }
                | PremiseError::Io { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Premise {
    pub label: Name,
    pub formula: Formula,
    /// 1-based line in the source text, when parsed from text.
    pub line: Option<usize>,
}

/// A nonempty set of labelled closed formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PremiseSet {
    premises: Vec<Premise>,
    source: Option<PathBuf>,
}

impl PremiseSet {
    pub fn new(premises: Vec<Premise>) -> Result<PremiseSet, PremiseError> {
        if premises.is_empty() {
            return Err(PremiseError::Empty);
        }
        let mut seen = BTreeSet::new();
        for p in &premises {
            if !seen.insert(p.label.clone()) {
                return Err(PremiseError::DuplicateLabel {
                    line: p.line.unwrap_or(0),
                    label: p.label.to_string(),
                });
            }
            let free = p.formula.free_vars();
            if !free.is_empty() {
                return Err(PremiseError::Open {
                    label: p.label.to_string(),
                    vars: free.iter().map(|v| &**v).collect::<Vec<_>>().join(", "),
                });
            }
        }
        Ok(PremiseSet {
            premises,
            source: None,
        })
    }

    /// Labels the formulas `p1, p2, ...`.
    pub fn from_formulas(formulas: Vec<Formula>) -> Result<PremiseSet, PremiseError> {
        PremiseSet::new(
            formulas
                .into_iter()
                .enumerate()
                .map(|(i, formula)| Premise {
                    label: format!("p{}", i + 1).into(),
                    formula,
                    line: None,
                })
                .collect(),
        )
    }

    /// Parses each text with one shared parser, labelling them `p1, p2, ...`.
    pub fn from_texts(texts: &[&str]) -> Result<PremiseSet, PremiseError> {
        let mut parser = FormulaParser::new();
        let formulas = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                parser.parse(t).map_err(|source| PremiseError::Parse {
                    line: i + 1,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        PremiseSet::from_formulas(formulas)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Premise> {
        self.premises.iter()
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.premises.iter().map(|p| &p.formula)
    }

    pub fn get(&self, label: &str) -> Option<&Premise> {
        self.premises.iter().find(|p| &*p.label == label)
    }

    pub fn len(&self) -> usize {
        self.premises.len()
    }

    pub fn is_empty(&self) -> bool {
        self.premises.is_empty()
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn with_source(mut self, path: impl Into<PathBuf>) -> Self {
        self.source = Some(path.into());
        self
    }
}

/// Parses `label: formula` lines. Blank lines and lines starting with `#`
/// are skipped. Labels are letters, digits, `_`, `-` and `.`.
pub fn parse_premises(text: &str) -> Result<PremiseSet, PremiseError> {
    let mut parser = FormulaParser::new();
    let mut premises = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (label, body) = trimmed
            .split_once(':')
            .ok_or(PremiseError::MissingLabel { line })?;
        let label = label.trim();
        let valid = !label.is_empty()
            && label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if !valid {
            return Err(PremiseError::BadLabel {
                line,
                label: label.to_string(),
            });
        }
        let formula = parser
            .parse(body)
            .map_err(|source| PremiseError::Parse { line, source })?;
        premises.push(Premise {
            label: label.into(),
            formula,
            line: Some(line),
        });
    }
    PremiseSet::new(premises)
}

pub fn load_premises(path: &Path) -> Result<PremiseSet, PremiseError> {
    let text = fs::read_to_string(path).map_err(|source| PremiseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_premises(&text)?.with_source(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn parses_labelled_lines() {
        let set = parse_premises("# facts\nax1: p\n\nax2: p => q\n").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(
            set.get("ax2").unwrap().formula,
            parse_formula("p => q").unwrap()
        );
        assert_eq!(set.get("ax2").unwrap().line, Some(4));
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(
            parse_premises("# nothing\n"),
            Err(PremiseError::Empty)
        ));
        assert!(matches!(
            PremiseSet::from_formulas(vec![]),
            Err(PremiseError::Empty)
        ));
    }

    #[test]
    fn rejects_duplicates_and_open_formulas() {
        assert!(matches!(
            parse_premises("a: p\na: q"),
            Err(PremiseError::DuplicateLabel { line: 2, .. })
        ));
        let open = Formula::pred("p", vec![crate::formula::Term::var("x")]);
        assert!(matches!(
            PremiseSet::from_formulas(vec![open]),
            Err(PremiseError::Open { .. })
        ));
    }

    #[test]
    fn reports_parse_line() {
        match parse_premises("a: p\nb: p =>") {
            Err(PremiseError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_premises("p => q"),
            Err(PremiseError::MissingLabel { line: 1 })
        ));
    }

    #[test]
    fn arity_is_shared_across_lines() {
        assert!(parse_premises("a: r(c)\nb: r(c, c)").is_err());
    }
}
