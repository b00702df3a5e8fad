//! Abstract syntax of the typed probabilistic language: terms, types,
//! one-hole contexts, substitution, and alpha-equivalence.
//!
//! Terms are identified up to alpha-equivalence throughout the crate;
//! renaming a binder never changes the behaviour of any operation.

pub(crate) mod parse;
mod print;
mod typecheck;

pub use parse::{parse_term, parse_type, Lexer, ParseError, Token};
pub use typecheck::{check_context, infer, ContextTypeError, TypeError, TypingContext};

use num::BigUint;
use std::collections::BTreeSet;

/// Types: booleans, naturals, functions, products, and lazy lists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Bool,
    Int,
    Arrow(Box<Type>, Box<Type>),
    Prod(Box<Type>, Box<Type>),
    List(Box<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }
    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }
    pub fn list(a: Type) -> Type {
        Type::List(Box::new(a))
    }
    pub fn is_function(&self) -> bool {
        matches!(self, Type::Arrow(_, _))
    }
    /// All structural subtypes, including the type itself.
    pub fn subtypes(&self) -> BTreeSet<Type> {
        let mut out = BTreeSet::new();
        fn go(t: &Type, out: &mut BTreeSet<Type>) {
            out.insert(t.clone());
            match t {
                Type::Bool | Type::Int => {}
                Type::Arrow(a, b) | Type::Prod(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Type::List(a) => go(a, out),
            }
        }
        go(self, &mut out);
        out
    }
}

/// Binary arithmetic operators on naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Add,
    Le,
    Eq,
}

impl OpKind {
    pub fn result_type(self) -> Type {
        match self {
            OpKind::Add => Type::Int,
            OpKind::Le | OpKind::Eq => Type::Bool,
        }
    }
    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Add => "+",
            OpKind::Le => "<=",
            OpKind::Eq => "==",
        }
    }
}

/// Terms. Binders carry type annotations so that checking is
/// syntax-directed; `fix` is a binder form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Num(BigUint),
    Bool(bool),
    Nil(Type),
    Pair(Box<Term>, Box<Term>),
    Cons(Box<Term>, Box<Term>),
    Lam(String, Type, Box<Term>),
    Fix(String, Type, Box<Term>),
    Choice(Box<Term>, Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Op(OpKind, Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    Case {
        scrutinee: Box<Term>,
        nil: Box<Term>,
        head: String,
        tail: String,
        cons: Box<Term>,
    },
    App(Box<Term>, Box<Term>),
}

impl Term {
    pub fn num(n: u64) -> Term {
        Term::Num(BigUint::from(n))
    }
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }
    pub fn lam(x: &str, ty: Type, body: Term) -> Term {
        Term::Lam(x.to_string(), ty, Box::new(body))
    }
    pub fn fix(x: &str, ty: Type, body: Term) -> Term {
        Term::Fix(x.to_string(), ty, Box::new(body))
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }
    pub fn choice(l: Term, r: Term) -> Term {
        Term::Choice(Box::new(l), Box::new(r))
    }
    pub fn pair(l: Term, r: Term) -> Term {
        Term::Pair(Box::new(l), Box::new(r))
    }
    pub fn cons(h: Term, t: Term) -> Term {
        Term::Cons(Box::new(h), Box::new(t))
    }
    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::If(Box::new(c), Box::new(t), Box::new(e))
    }
    pub fn op(op: OpKind, l: Term, r: Term) -> Term {
        Term::Op(op, Box::new(l), Box::new(r))
    }
    pub fn fst(t: Term) -> Term {
        Term::Fst(Box::new(t))
    }
    pub fn snd(t: Term) -> Term {
        Term::Snd(Box::new(t))
    }
    pub fn case(scrutinee: Term, nil: Term, head: &str, tail: &str, cons: Term) -> Term {
        Term::Case {
            scrutinee: Box::new(scrutinee),
            nil: Box::new(nil),
            head: head.to_string(),
            tail: tail.to_string(),
            cons: Box::new(cons),
        }
    }

    /// A program of type `ty` that never converges.
    pub fn diverging(ty: Type) -> Term {
        Term::app(
            Term::fix("_div", Type::arrow(Type::Int, ty), Term::var("_div")),
            Term::num(0),
        )
    }

    /// Node count of the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Num(_) | Term::Bool(_) | Term::Nil(_) => 1,
            Term::Lam(_, _, b) | Term::Fix(_, _, b) | Term::Fst(b) | Term::Snd(b) => 1 + b.size(),
            Term::Pair(a, b)
            | Term::Cons(a, b)
            | Term::Choice(a, b)
            | Term::Op(_, a, b)
            | Term::App(a, b) => 1 + a.size() + b.size(),
            Term::If(a, b, c) => 1 + a.size() + b.size() + c.size(),
            Term::Case { scrutinee, nil, cons, .. } => {
                1 + scrutinee.size() + nil.size() + cons.size()
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Term::Num(_) | Term::Bool(_) | Term::Nil(_) => {}
            Term::Lam(x, _, b) | Term::Fix(x, _, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::Pair(a, b)
            | Term::Cons(a, b)
            | Term::Choice(a, b)
            | Term::Op(_, a, b)
            | Term::App(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::If(a, b, c) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
                c.collect_free(bound, out);
            }
            Term::Fst(a) | Term::Snd(a) => a.collect_free(bound, out),
            Term::Case { scrutinee, nil, head, tail, cons } => {
                scrutinee.collect_free(bound, out);
                nil.collect_free(bound, out);
                bound.push(head.clone());
                bound.push(tail.clone());
                cons.collect_free(bound, out);
                bound.pop();
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution of `replacement` for free
    /// occurrences of `var`. Binders that would capture a free variable
    /// of the replacement are renamed first.
    pub fn subst(&self, replacement: &Term, var: &str) -> Term {
        let fv = replacement.free_vars();
        self.subst_inner(replacement, var, &fv)
    }

    fn subst_inner(&self, repl: &Term, var: &str, repl_fv: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(x) => {
                if x == var {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Term::Num(_) | Term::Bool(_) | Term::Nil(_) => self.clone(),
            Term::Lam(x, ty, b) => {
                if x == var {
                    self.clone()
                } else if repl_fv.contains(x) {
                    let fresh = fresh_name(x, &[&b.free_vars(), repl_fv]);
                    let renamed = b.subst(&Term::Var(fresh.clone()), x);
                    Term::Lam(fresh, ty.clone(), Box::new(renamed.subst_inner(repl, var, repl_fv)))
                } else {
                    Term::Lam(x.clone(), ty.clone(), Box::new(b.subst_inner(repl, var, repl_fv)))
                }
            }
            Term::Fix(x, ty, b) => {
                if x == var {
                    self.clone()
                } else if repl_fv.contains(x) {
                    let fresh = fresh_name(x, &[&b.free_vars(), repl_fv]);
                    let renamed = b.subst(&Term::Var(fresh.clone()), x);
                    Term::Fix(fresh, ty.clone(), Box::new(renamed.subst_inner(repl, var, repl_fv)))
                } else {
                    Term::Fix(x.clone(), ty.clone(), Box::new(b.subst_inner(repl, var, repl_fv)))
                }
            }
            Term::Pair(a, b) => Term::Pair(
                Box::new(a.subst_inner(repl, var, repl_fv)),
                Box::new(b.subst_inner(repl, var, repl_fv)),
            ),
            Term::Cons(a, b) => Term::Cons(
                Box::new(a.subst_inner(repl, var, repl_fv)),
                Box::new(b.subst_inner(repl, var, repl_fv)),
            ),
            Term::Choice(a, b) => Term::Choice(
                Box::new(a.subst_inner(repl, var, repl_fv)),
                Box::new(b.subst_inner(repl, var, repl_fv)),
            ),
            Term::Op(op, a, b) => Term::Op(
                *op,
                Box::new(a.subst_inner(repl, var, repl_fv)),
                Box::new(b.subst_inner(repl, var, repl_fv)),
            ),
            Term::App(a, b) => Term::App(
                Box::new(a.subst_inner(repl, var, repl_fv)),
                Box::new(b.subst_inner(repl, var, repl_fv)),
            ),
            Term::If(a, b, c) => Term::If(
                Box::new(a.subst_inner(repl, var, repl_fv)),
                Box::new(b.subst_inner(repl, var, repl_fv)),
                Box::new(c.subst_inner(repl, var, repl_fv)),
            ),
            Term::Fst(a) => Term::Fst(Box::new(a.subst_inner(repl, var, repl_fv))),
            Term::Snd(a) => Term::Snd(Box::new(a.subst_inner(repl, var, repl_fv))),
            Term::Case { scrutinee, nil, head, tail, cons } => {
                let scrutinee = Box::new(scrutinee.subst_inner(repl, var, repl_fv));
                let nil = Box::new(nil.subst_inner(repl, var, repl_fv));
                if head == var || tail == var {
                    Term::Case {
                        scrutinee,
                        nil,
                        head: head.clone(),
                        tail: tail.clone(),
                        cons: cons.clone(),
                    }
                } else {
                    let (mut head, mut tail, mut cons) = (head.clone(), tail.clone(), *cons.clone());
                    if repl_fv.contains(&head) {
                        let fresh = fresh_name(&head, &[&cons.free_vars(), repl_fv, &[tail.clone()].into_iter().collect()]);
                        cons = cons.subst(&Term::Var(fresh.clone()), &head);
                        head = fresh;
                    }
                    if repl_fv.contains(&tail) {
                        let fresh = fresh_name(&tail, &[&cons.free_vars(), repl_fv, &[head.clone()].into_iter().collect()]);
                        cons = cons.subst(&Term::Var(fresh.clone()), &tail);
                        tail = fresh;
                    }
                    Term::Case {
                        scrutinee,
                        nil,
                        head,
                        tail,
                        cons: Box::new(cons.subst_inner(repl, var, repl_fv)),
                    }
                }
            }
        }
    }

    /// Alpha-equivalence by parallel traversal with binder maps.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_eq_inner(self, other, &mut Vec::new())
    }

    /// Canonical alpha-representative: binders renamed `x0, x1, ...` in
    /// traversal order. Only meaningful for closed terms (the canonical
    /// names could otherwise collide with free variables); all map keys
    /// in this crate are closed, so this is the representative stored in
    /// distributions and chain states.
    pub fn canon(&self) -> Term {
        let mut counter = 0usize;
        self.canon_inner(&mut counter, &Vec::new())
    }

    fn canon_inner(&self, counter: &mut usize, env: &Vec<(String, String)>) -> Term {
        let lookup = |x: &str, env: &Vec<(String, String)>| -> String {
            env.iter().rev().find(|(a, _)| a == x).map(|(_, b)| b.clone()).unwrap_or_else(|| x.to_string())
        };
        match self {
            Term::Var(x) => Term::Var(lookup(x, env)),
            Term::Num(_) | Term::Bool(_) | Term::Nil(_) => self.clone(),
            Term::Lam(x, ty, b) => {
                let nx = format!("x{}", counter);
                *counter += 1;
                let mut env2 = env.clone();
                env2.push((x.clone(), nx.clone()));
                Term::Lam(nx, ty.clone(), Box::new(b.canon_inner(counter, &env2)))
            }
            Term::Fix(x, ty, b) => {
                let nx = format!("x{}", counter);
                *counter += 1;
                let mut env2 = env.clone();
                env2.push((x.clone(), nx.clone()));
                Term::Fix(nx, ty.clone(), Box::new(b.canon_inner(counter, &env2)))
            }
            Term::Pair(a, b) => Term::Pair(
                Box::new(a.canon_inner(counter, env)),
                Box::new(b.canon_inner(counter, env)),
            ),
            Term::Cons(a, b) => Term::Cons(
                Box::new(a.canon_inner(counter, env)),
                Box::new(b.canon_inner(counter, env)),
            ),
            Term::Choice(a, b) => Term::Choice(
                Box::new(a.canon_inner(counter, env)),
                Box::new(b.canon_inner(counter, env)),
            ),
            Term::Op(op, a, b) => Term::Op(
                *op,
                Box::new(a.canon_inner(counter, env)),
                Box::new(b.canon_inner(counter, env)),
            ),
            Term::App(a, b) => Term::App(
                Box::new(a.canon_inner(counter, env)),
                Box::new(b.canon_inner(counter, env)),
            ),
            Term::If(a, b, c) => Term::If(
                Box::new(a.canon_inner(counter, env)),
                Box::new(b.canon_inner(counter, env)),
                Box::new(c.canon_inner(counter, env)),
            ),
            Term::Fst(a) => Term::Fst(Box::new(a.canon_inner(counter, env))),
            Term::Snd(a) => Term::Snd(Box::new(a.canon_inner(counter, env))),
            Term::Case { scrutinee, nil, head, tail, cons } => {
                let scrutinee = Box::new(scrutinee.canon_inner(counter, env));
                let nil = Box::new(nil.canon_inner(counter, env));
                let nh = format!("x{}", counter);
                *counter += 1;
                let nt = format!("x{}", counter);
                *counter += 1;
                let mut env2 = env.clone();
                env2.push((head.clone(), nh.clone()));
                env2.push((tail.clone(), nt.clone()));
                Term::Case {
                    scrutinee,
                    nil,
                    head: nh,
                    tail: nt,
                    cons: Box::new(cons.canon_inner(counter, &env2)),
                }
            }
        }
    }
}

fn alpha_eq_inner(a: &Term, b: &Term, env: &mut Vec<(String, String)>) -> bool {
    let var_eq = |x: &str, y: &str, env: &Vec<(String, String)>| -> bool {
        for (l, r) in env.iter().rev() {
            match (l == x, r == y) {
                (true, true) => return true,
                (true, false) | (false, true) => return false,
                _ => {}
            }
        }
        x == y
    };
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => var_eq(x, y, env),
        (Term::Num(m), Term::Num(n)) => m == n,
        (Term::Bool(m), Term::Bool(n)) => m == n,
        (Term::Nil(s), Term::Nil(t)) => s == t,
        (Term::Lam(x, s, m), Term::Lam(y, t, n)) | (Term::Fix(x, s, m), Term::Fix(y, t, n)) => {
            if s != t {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha_eq_inner(m, n, env);
            env.pop();
            r
        }
        (Term::Pair(a1, a2), Term::Pair(b1, b2))
        | (Term::Cons(a1, a2), Term::Cons(b1, b2))
        | (Term::Choice(a1, a2), Term::Choice(b1, b2))
        | (Term::App(a1, a2), Term::App(b1, b2)) => {
            alpha_eq_inner(a1, b1, env) && alpha_eq_inner(a2, b2, env)
        }
        (Term::Op(o1, a1, a2), Term::Op(o2, b1, b2)) => {
            o1 == o2 && alpha_eq_inner(a1, b1, env) && alpha_eq_inner(a2, b2, env)
        }
        (Term::If(a1, a2, a3), Term::If(b1, b2, b3)) => {
            alpha_eq_inner(a1, b1, env) && alpha_eq_inner(a2, b2, env) && alpha_eq_inner(a3, b3, env)
        }
        (Term::Fst(m), Term::Fst(n)) | (Term::Snd(m), Term::Snd(n)) => alpha_eq_inner(m, n, env),
        (
            Term::Case { scrutinee: s1, nil: n1, head: h1, tail: t1, cons: c1 },
            Term::Case { scrutinee: s2, nil: n2, head: h2, tail: t2, cons: c2 },
        ) => {
            if !alpha_eq_inner(s1, s2, env) || !alpha_eq_inner(n1, n2, env) {
                return false;
            }
            env.push((h1.clone(), h2.clone()));
            env.push((t1.clone(), t2.clone()));
            let r = alpha_eq_inner(c1, c2, env);
            env.pop();
            env.pop();
            r
        }
        _ => false,
    }
}

/// A name based on `hint` that avoids every set in `avoid`.
pub fn fresh_name(hint: &str, avoid: &[&BTreeSet<String>]) -> String {
    let base: String = hint.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
    let base = if base.is_empty() { "v".to_string() } else { base };
    let mut i = 0usize;
    loop {
        let cand = format!("{}{}", base, i);
        if !avoid.iter().any(|s| s.contains(&cand)) {
            return cand;
        }
        i += 1;
    }
}

/// One-hole contexts: the term constructors plus `Hole`. Filling is
/// plain tree grafting and may capture, which is the point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Context {
    Hole,
    Lam(String, Type, Box<Context>),
    Fix(String, Type, Box<Context>),
    AppL(Box<Context>, Box<Term>),
    AppR(Box<Term>, Box<Context>),
    ChoiceL(Box<Context>, Box<Term>),
    ChoiceR(Box<Term>, Box<Context>),
    OpL(OpKind, Box<Context>, Box<Term>),
    OpR(OpKind, Box<Term>, Box<Context>),
    PairL(Box<Context>, Box<Term>),
    PairR(Box<Term>, Box<Context>),
    ConsL(Box<Context>, Box<Term>),
    ConsR(Box<Term>, Box<Context>),
    Fst(Box<Context>),
    Snd(Box<Context>),
    IfC(Box<Context>, Box<Term>, Box<Term>),
    IfT(Box<Term>, Box<Context>, Box<Term>),
    IfE(Box<Term>, Box<Term>, Box<Context>),
    CaseS {
        scrutinee: Box<Context>,
        nil: Box<Term>,
        head: String,
        tail: String,
        cons: Box<Term>,
    },
    CaseN {
        scrutinee: Box<Term>,
        nil: Box<Context>,
        head: String,
        tail: String,
        cons: Box<Term>,
    },
    CaseC {
        scrutinee: Box<Term>,
        nil: Box<Term>,
        head: String,
        tail: String,
        cons: Box<Context>,
    },
}

impl Context {
    pub fn hole_count(&self) -> usize {
        match self {
            Context::Hole => 1,
            Context::Lam(_, _, c)
            | Context::Fix(_, _, c)
            | Context::AppL(c, _)
            | Context::AppR(_, c)
            | Context::ChoiceL(c, _)
            | Context::ChoiceR(_, c)
            | Context::OpL(_, c, _)
            | Context::OpR(_, _, c)
            | Context::PairL(c, _)
            | Context::PairR(_, c)
            | Context::ConsL(c, _)
            | Context::ConsR(_, c)
            | Context::Fst(c)
            | Context::Snd(c)
            | Context::IfC(c, _, _)
            | Context::IfT(_, c, _)
            | Context::IfE(_, _, c)
            | Context::CaseS { scrutinee: c, .. }
            | Context::CaseN { nil: c, .. }
            | Context::CaseC { cons: c, .. } => c.hole_count(),
        }
    }

    /// Replaces the hole by `m`. No renaming happens: a binder above the
    /// hole captures free variables of `m`.
    pub fn fill(&self, m: &Term) -> Term {
        match self {
            Context::Hole => m.clone(),
            Context::Lam(x, ty, c) => Term::Lam(x.clone(), ty.clone(), Box::new(c.fill(m))),
            Context::Fix(x, ty, c) => Term::Fix(x.clone(), ty.clone(), Box::new(c.fill(m))),
            Context::AppL(c, t) => Term::App(Box::new(c.fill(m)), t.clone()),
            Context::AppR(t, c) => Term::App(t.clone(), Box::new(c.fill(m))),
            Context::ChoiceL(c, t) => Term::Choice(Box::new(c.fill(m)), t.clone()),
            Context::ChoiceR(t, c) => Term::Choice(t.clone(), Box::new(c.fill(m))),
            Context::OpL(op, c, t) => Term::Op(*op, Box::new(c.fill(m)), t.clone()),
            Context::OpR(op, t, c) => Term::Op(*op, t.clone(), Box::new(c.fill(m))),
            Context::PairL(c, t) => Term::Pair(Box::new(c.fill(m)), t.clone()),
            Context::PairR(t, c) => Term::Pair(t.clone(), Box::new(c.fill(m))),
            Context::ConsL(c, t) => Term::Cons(Box::new(c.fill(m)), t.clone()),
            Context::ConsR(t, c) => Term::Cons(t.clone(), Box::new(c.fill(m))),
            Context::Fst(c) => Term::Fst(Box::new(c.fill(m))),
            Context::Snd(c) => Term::Snd(Box::new(c.fill(m))),
            Context::IfC(c, t, e) => Term::If(Box::new(c.fill(m)), t.clone(), e.clone()),
            Context::IfT(g, c, e) => Term::If(g.clone(), Box::new(c.fill(m)), e.clone()),
            Context::IfE(g, t, c) => Term::If(g.clone(), t.clone(), Box::new(c.fill(m))),
            Context::CaseS { scrutinee, nil, head, tail, cons } => Term::Case {
                scrutinee: Box::new(scrutinee.fill(m)),
                nil: nil.clone(),
                head: head.clone(),
                tail: tail.clone(),
                cons: cons.clone(),
            },
            Context::CaseN { scrutinee, nil, head, tail, cons } => Term::Case {
                scrutinee: scrutinee.clone(),
                nil: Box::new(nil.fill(m)),
                head: head.clone(),
                tail: tail.clone(),
                cons: cons.clone(),
            },
            Context::CaseC { scrutinee, nil, head, tail, cons } => Term::Case {
                scrutinee: scrutinee.clone(),
                nil: nil.clone(),
                head: head.clone(),
                tail: tail.clone(),
                cons: Box::new(cons.fill(m)),
            },
        }
    }

    /// Grafts `inner` into the hole, producing a composed context.
    pub fn fill_ctx(&self, inner: &Context) -> Context {
        match self {
            Context::Hole => inner.clone(),
            Context::Lam(x, ty, c) => Context::Lam(x.clone(), ty.clone(), Box::new(c.fill_ctx(inner))),
            Context::Fix(x, ty, c) => Context::Fix(x.clone(), ty.clone(), Box::new(c.fill_ctx(inner))),
            Context::AppL(c, t) => Context::AppL(Box::new(c.fill_ctx(inner)), t.clone()),
            Context::AppR(t, c) => Context::AppR(t.clone(), Box::new(c.fill_ctx(inner))),
            Context::ChoiceL(c, t) => Context::ChoiceL(Box::new(c.fill_ctx(inner)), t.clone()),
            Context::ChoiceR(t, c) => Context::ChoiceR(t.clone(), Box::new(c.fill_ctx(inner))),
            Context::OpL(op, c, t) => Context::OpL(*op, Box::new(c.fill_ctx(inner)), t.clone()),
            Context::OpR(op, t, c) => Context::OpR(*op, t.clone(), Box::new(c.fill_ctx(inner))),
            Context::PairL(c, t) => Context::PairL(Box::new(c.fill_ctx(inner)), t.clone()),
            Context::PairR(t, c) => Context::PairR(t.clone(), Box::new(c.fill_ctx(inner))),
            Context::ConsL(c, t) => Context::ConsL(Box::new(c.fill_ctx(inner)), t.clone()),
            Context::ConsR(t, c) => Context::ConsR(t.clone(), Box::new(c.fill_ctx(inner))),
            Context::Fst(c) => Context::Fst(Box::new(c.fill_ctx(inner))),
            Context::Snd(c) => Context::Snd(Box::new(c.fill_ctx(inner))),
            Context::IfC(c, t, e) => Context::IfC(Box::new(c.fill_ctx(inner)), t.clone(), e.clone()),
            Context::IfT(g, c, e) => Context::IfT(g.clone(), Box::new(c.fill_ctx(inner)), e.clone()),
            Context::IfE(g, t, c) => Context::IfE(g.clone(), t.clone(), Box::new(c.fill_ctx(inner))),
            Context::CaseS { scrutinee, nil, head, tail, cons } => Context::CaseS {
                scrutinee: Box::new(scrutinee.fill_ctx(inner)),
                nil: nil.clone(),
                head: head.clone(),
                tail: tail.clone(),
                cons: cons.clone(),
            },
            Context::CaseN { scrutinee, nil, head, tail, cons } => Context::CaseN {
                scrutinee: scrutinee.clone(),
                nil: Box::new(nil.fill_ctx(inner)),
                head: head.clone(),
                tail: tail.clone(),
                cons: cons.clone(),
            },
            Context::CaseC { scrutinee, nil, head, tail, cons } => Context::CaseC {
                scrutinee: scrutinee.clone(),
                nil: nil.clone(),
                head: head.clone(),
                tail: tail.clone(),
                cons: Box::new(cons.fill_ctx(inner)),
            },
        }
    }
}
