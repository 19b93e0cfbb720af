use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::{Formula, Name, Quantifier, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: `{name}` used with arity {found} but earlier with arity {expected}")]
    Arity {
        line: usize,
        column: usize,
        name: String,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::Arity { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Upper(String),
    Lower(String),
    Forall,
    Exists,
    Entail,
    And,
    Or,
    Not,
    LParen,
    RParen,
    Comma,
    Dot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Upper(s) | Tok::Lower(s) => format!("`{s}`"),
            Tok::Forall => "`forall`".into(),
            Tok::Exists => "`exists`".into(),
            Tok::Entail => "`=>`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Not => "`~`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let single = match c {
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '~' => Some(Tok::Not),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
            i += 1;
            column += 1;
            continue;
        }
        if c == '=' {
            if chars.get(i + 1) == Some(&'>') {
                out.push(Spanned {
                    tok: Tok::Entail,
                    line: start_line,
                    column: start_col,
                });
                i += 2;
                column += 2;
                continue;
            }
            return Err(ParseError::Syntax {
                line,
                column,
                message: "expected `=>`".into(),
            });
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut word = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                word.push(chars[i]);
                i += 1;
                column += 1;
            }
            let tok = match word.as_str() {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                _ if word.starts_with(|ch: char| ch.is_ascii_uppercase()) => Tok::Upper(word),
                _ if word.starts_with('_') => {
                    return Err(ParseError::Syntax {
                        line: start_line,
                        column: start_col,
                        message: format!("identifier `{word}` must start with a letter or digit"),
                    })
                }
                _ => Tok::Lower(word),
            };
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        return Err(ParseError::Syntax {
            line,
            column,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

/// A parser that remembers the arity of every predicate and function symbol
/// it has seen, so that all formulas of one problem agree on arities.
#[derive(Debug, Default, Clone)]
pub struct FormulaParser {
    predicates: HashMap<Name, usize>,
    functions: HashMap<Name, usize>,
}

impl FormulaParser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(&mut self, text: &str) -> Result<Formula, ParseError> {
        let toks = lex(text)?;
        let mut state = State {
            toks,
            pos: 0,
            bound: Vec::new(),
            ctx: self,
        };
        let f = state.formula()?;
        state.expect_eof()?;
        Ok(f)
    }

    fn check_arity(
        table: &mut HashMap<Name, usize>,
        name: &str,
        arity: usize,
        line: usize,
        column: usize,
    ) -> Result<Name, ParseError> {
        if let Some((key, &expected)) = table.get_key_value(name) {
            if expected != arity {
                return Err(ParseError::Arity {
                    line,
                    column,
                    name: name.to_string(),
                    expected,
                    found: arity,
                });
            }
            return Ok(key.clone());
        }
        let key: Name = name.into();
        table.insert(key.clone(), arity);
        Ok(key)
    }
}

/// Parses one formula with a fresh arity context.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    FormulaParser::new().parse(text)
}

struct State<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    bound: Vec<Name>,
    ctx: &'a mut FormulaParser,
}

impl State<'_> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("expected {expected}, found {}", t.tok.describe()),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(what))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error_here("a connective or end of input"))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.or_expr()?;
        if self.peek().tok == Tok::Entail {
            self.bump();
            let right = self.formula()?;
            return Ok(Formula::entail(left, right));
        }
        Ok(left)
    }

    fn or_expr(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and_expr()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            let rhs = self.and_expr()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Forall | Tok::Exists => {
                self.bump();
                let q = if t.tok == Tok::Forall {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let var: Name = match self.bump() {
                    Spanned {
                        tok: Tok::Lower(v), ..
                    } => v.as_str().into(),
                    other => {
                        return Err(ParseError::Syntax {
                            line: other.line,
                            column: other.column,
                            message: format!(
                                "expected a lowercase bound variable, found {}",
                                other.tok.describe()
                            ),
                        })
                    }
                };
                self.expect(Tok::Dot, "`.` after the bound variable")?;
                // The body extends as far to the right as possible.
                self.bound.push(var.clone());
                let body = self.formula();
                self.bound.pop();
                Ok(Formula::Quant(q, var, Arc::new(body?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Upper(name) => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    return Err(self.error_here("no arguments after a schema variable"));
                }
                Ok(Formula::Schema(name.as_str().into()))
            }
            Tok::Lower(name) => {
                self.bump();
                let args = if self.peek().tok == Tok::LParen {
                    self.bump();
                    self.term_list()?
                } else {
                    Vec::new()
                };
                let key = FormulaParser::check_arity(
                    &mut self.ctx.predicates,
                    &name,
                    args.len(),
                    t.line,
                    t.column,
                )?;
                Ok(Formula::Pred(key, args.into()))
            }
            _ => Err(self.error_here("a formula")),
        }
    }

    /// Parses `term ("," term)* ")"`; the opening paren is already consumed.
    fn term_list(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = vec![self.term()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.bump();
        let name = match t.tok {
            Tok::Lower(name) => name,
            Tok::Upper(_) => {
                return Err(ParseError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: "schema variables cannot occur inside terms".into(),
                })
            }
            other => {
                return Err(ParseError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: format!("expected a term, found {}", other.describe()),
                })
            }
        };
        if self.peek().tok == Tok::LParen {
            self.bump();
            let args = self.term_list()?;
            let key = FormulaParser::check_arity(
                &mut self.ctx.functions,
                &name,
                args.len(),
                t.line,
                t.column,
            )?;
            return Ok(Term::App(key, args.into()));
        }
        if let Some(v) = self.bound.iter().rev().find(|b| ***b == *name) {
            return Ok(Term::Var(v.clone()));
        }
        let key = FormulaParser::check_arity(&mut self.ctx.functions, &name, 0, t.line, t.column)?;
        Ok(Term::Const(key))
    }
}
