use super::{Formula, Term};

// Binding strength, loosest first.
const ENTAIL: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

/// Canonical text: minimal parentheses, `=>` right-associative, `&` and `|`
/// left-associative, one space around binary connectives.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, ENTAIL, true, &mut out);
    out
}

pub fn render_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(n) | Term::Const(n) => out.push_str(n),
        Term::App(n, args) => {
            out.push_str(n);
            write_args(args, out);
        }
    }
}

fn write_args(args: &[Term], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_term(a, out);
    }
    out.push(')');
}

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Entail(..) => ENTAIL,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        Formula::Schema(_) | Formula::Pred(..) | Formula::Not(_) => UNARY,
        // A quantifier body swallows everything to its right, so it only
        // appears bare when nothing follows it.
        Formula::Quant(..) => 0,
    }
}

/// `min_prec` is the loosest binding allowed without parentheses; `tail` says
/// whether nothing follows this subformula in the surrounding text.
fn write_formula(f: &Formula, min_prec: u8, tail: bool, out: &mut String) {
    let bare = match f {
        Formula::Quant(..) => tail,
        _ => precedence(f) >= min_prec,
    };
    if !bare {
        out.push('(');
    }
    let tail = tail || !bare;
    match f {
        Formula::Schema(n) => out.push_str(n),
        Formula::Pred(n, args) => {
            out.push_str(n);
            if !args.is_empty() {
                write_args(args, out);
            }
        }
        Formula::Not(c) => {
            out.push('~');
            write_formula(c, UNARY, tail, out);
        }
        Formula::And(l, r) => {
            write_formula(l, AND, false, out);
            out.push_str(" & ");
            write_formula(r, UNARY, tail, out);
        }
        Formula::Or(l, r) => {
            write_formula(l, OR, false, out);
            out.push_str(" | ");
            write_formula(r, AND, tail, out);
        }
        Formula::Entail(l, r) => {
            write_formula(l, OR, false, out);
            out.push_str(" => ");
            write_formula(r, ENTAIL, tail, out);
        }
        Formula::Quant(q, v, body) => {
            out.push_str(q.keyword());
            out.push(' ');
            out.push_str(v);
            out.push_str(". ");
            write_formula(body, ENTAIL, true, out);
        }
    }
    if !bare {
        out.push(')');
    }
}
