//! Pretty-printing for types, terms and contexts. The printer and the
//! parser share one precedence table, so `parse(print(t))` gives the
//! term back (up to alpha-equivalence it is the identity).

use super::{Context, Term, Type};
use std::fmt;

// Term precedence levels, loosest to tightest:
//   0 lambda / fix / if / case
//   1 choice (+)         right assoc
//   2 cons ::            right assoc
//   3 comparisons <= ==  non assoc
//   4 addition +         left assoc
//   5 application        left assoc
//   6 fst/snd prefix and atoms

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_type(self, f, 0)
    }
}

fn fmt_type(t: &Type, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match t {
        Type::Bool => write!(f, "bool"),
        Type::Int => write!(f, "int"),
        Type::List(a) => write!(f, "[{}]", a),
        Type::Arrow(a, b) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            fmt_type(a, f, 1)?;
            write!(f, " -> ")?;
            fmt_type(b, f, 0)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Prod(a, b) => {
            if prec > 1 {
                write!(f, "(")?;
            }
            fmt_type(a, f, 2)?;
            write!(f, " * ")?;
            fmt_type(b, f, 1)?;
            if prec > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f, 0)
    }
}

fn fmt_term(t: &Term, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    let paren = |f: &mut fmt::Formatter<'_>, needed: bool, inner: &dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result| {
        if needed {
            write!(f, "(")?;
            inner(f)?;
            write!(f, ")")
        } else {
            inner(f)
        }
    };
    match t {
        Term::Var(x) => write!(f, "{}", x),
        Term::Num(n) => write!(f, "{}", n),
        Term::Bool(b) => write!(f, "{}", if *b { "true" } else { "false" }),
        Term::Nil(ty) => write!(f, "nil[{}]", ty),
        Term::Pair(a, b) => write!(f, "({}, {})", a, b),
        Term::Lam(x, ty, b) => paren(f, prec > 0, &|f| {
            write!(f, "\\{}:{}. ", x, ty)?;
            fmt_term(b, f, 0)
        }),
        Term::Fix(x, ty, b) => paren(f, prec > 0, &|f| {
            write!(f, "fix {}:{}. ", x, ty)?;
            fmt_term(b, f, 0)
        }),
        Term::If(c, th, el) => paren(f, prec > 0, &|f| {
            write!(f, "if ")?;
            fmt_term(c, f, 0)?;
            write!(f, " then ")?;
            fmt_term(th, f, 0)?;
            write!(f, " else ")?;
            fmt_term(el, f, 0)
        }),
        Term::Case { scrutinee, nil, head, tail, cons } => paren(f, prec > 0, &|f| {
            write!(f, "case ")?;
            fmt_term(scrutinee, f, 0)?;
            write!(f, " of {{ nil -> ")?;
            fmt_term(nil, f, 0)?;
            write!(f, " | {}::{} -> ", head, tail)?;
            fmt_term(cons, f, 0)?;
            write!(f, " }}")
        }),
        Term::Choice(a, b) => paren(f, prec > 1, &|f| {
            fmt_term(a, f, 2)?;
            write!(f, " (+) ")?;
            fmt_term(b, f, 1)
        }),
        Term::Cons(a, b) => paren(f, prec > 2, &|f| {
            fmt_term(a, f, 3)?;
            write!(f, " :: ")?;
            fmt_term(b, f, 2)
        }),
        Term::Op(op, a, b) => match op {
            super::OpKind::Add => paren(f, prec > 4, &|f| {
                fmt_term(a, f, 4)?;
                write!(f, " + ")?;
                fmt_term(b, f, 5)
            }),
            _ => paren(f, prec > 3, &|f| {
                fmt_term(a, f, 4)?;
                write!(f, " {} ", op.symbol())?;
                fmt_term(b, f, 4)
            }),
        },
        Term::App(a, b) => paren(f, prec > 5, &|f| {
            fmt_term(a, f, 5)?;
            write!(f, " ")?;
            fmt_term(b, f, 6)
        }),
        Term::Fst(a) => paren(f, prec > 5, &|f| {
            write!(f, "fst ")?;
            fmt_term(a, f, 6)
        }),
        Term::Snd(a) => paren(f, prec > 5, &|f| {
            write!(f, "snd ")?;
            fmt_term(a, f, 6)
        }),
    }
}

impl fmt::Display for Context {
    /// Contexts print in term syntax with `[.]` for the hole.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Render via a placeholder variable that cannot be parsed as an
        // identifier, then splice the hole notation back in.
        let placeholder = Term::Var("\u{0}hole".to_string());
        let filled = self.fill(&placeholder);
        let s = filled.to_string().replace("\u{0}hole", "[.]");
        write!(f, "{}", s)
    }
}
