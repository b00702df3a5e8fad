//! Embedding into the untyped probabilistic lambda-calculus.
//!
//! Booleans and naturals become Scott encodings (`true = \x.\y.x`,
//! `false = \x.\y.y`, `0 = \s.\z.z`, `n+1 = \s.\z.s n`), data is
//! Church-style with thunked branches, recursion goes through the
//! call-by-value fixpoint combinator `M_fix = N N` with
//! `N = \x.\y.y (\z. ((x x) y) z)`, and binary choice maps
//! homomorphically. The embedding preserves values in both directions
//! and convergence mass exactly: evaluating the image of a program
//! yields the image of its value distribution.

use crate::dist::Dist;
use crate::rational::{rat, Rational};
use crate::syntax::{OpKind, Term};
use num::{BigUint, One, Zero};
use std::collections::BTreeSet;

/// Pure untyped terms with fair binary choice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UntypedTerm {
    Var(String),
    Lam(String, Box<UntypedTerm>),
    App(Box<UntypedTerm>, Box<UntypedTerm>),
    Choice(Box<UntypedTerm>, Box<UntypedTerm>),
}

use UntypedTerm as U;

impl UntypedTerm {
    pub fn var(x: &str) -> U {
        U::Var(x.to_string())
    }
    pub fn lam(x: &str, body: U) -> U {
        U::Lam(x.to_string(), Box::new(body))
    }
    pub fn app(f: U, a: U) -> U {
        U::App(Box::new(f), Box::new(a))
    }
    pub fn apps(f: U, args: impl IntoIterator<Item = U>) -> U {
        args.into_iter().fold(f, U::app)
    }
    pub fn choice(l: U, r: U) -> U {
        U::Choice(Box::new(l), Box::new(r))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, U::Lam(_, _))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(t: &U, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                U::Var(x) => {
                    if !bound.iter().any(|b| b == x) {
                        out.insert(x.clone());
                    }
                }
                U::Lam(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                U::App(a, b) | U::Choice(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn subst(&self, repl: &U, var: &str) -> U {
        let fv = repl.free_vars();
        fn go(t: &U, repl: &U, var: &str, fv: &BTreeSet<String>) -> U {
            match t {
                U::Var(x) => {
                    if x == var {
                        repl.clone()
                    } else {
                        t.clone()
                    }
                }
                U::Lam(x, b) => {
                    if x == var {
                        t.clone()
                    } else if fv.contains(x) {
                        let avoid: BTreeSet<String> =
                            b.free_vars().union(fv).cloned().collect();
                        let fresh = crate::syntax::fresh_name(x, &[&avoid]);
                        let renamed = go(b, &U::Var(fresh.clone()), x, &BTreeSet::new());
                        U::Lam(fresh, Box::new(go(&renamed, repl, var, fv)))
                    } else {
                        U::Lam(x.clone(), Box::new(go(b, repl, var, fv)))
                    }
                }
                U::App(a, b) => U::app(go(a, repl, var, fv), go(b, repl, var, fv)),
                U::Choice(a, b) => U::choice(go(a, repl, var, fv), go(b, repl, var, fv)),
            }
        }
        go(self, repl, var, &fv)
    }

    pub fn alpha_eq(&self, other: &U) -> bool {
        fn go(a: &U, b: &U, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (U::Var(x), U::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        match (l == x, r == y) {
                            (true, true) => return true,
                            (true, false) | (false, true) => return false,
                            _ => {}
                        }
                    }
                    x == y
                }
                (U::Lam(x, m), U::Lam(y, n)) => {
                    env.push((x.clone(), y.clone()));
                    let out = go(m, n, env);
                    env.pop();
                    out
                }
                (U::App(a1, a2), U::App(b1, b2)) | (U::Choice(a1, a2), U::Choice(b1, b2)) => {
                    go(a1, b1, env) && go(a2, b2, env)
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Canonical representative with binders renamed `u0, u1, ...`;
    /// meaningful for closed terms, which is all the maps store.
    pub fn canon(&self) -> U {
        fn go(t: &U, counter: &mut usize, env: &Vec<(String, String)>) -> U {
            match t {
                U::Var(x) => {
                    let name = env
                        .iter()
                        .rev()
                        .find(|(a, _)| a == x)
                        .map(|(_, b)| b.clone())
                        .unwrap_or_else(|| x.clone());
                    U::Var(name)
                }
                U::Lam(x, b) => {
                    let nx = format!("u{}", counter);
                    *counter += 1;
                    let mut env2 = env.clone();
                    env2.push((x.clone(), nx.clone()));
                    U::Lam(nx, Box::new(go(b, counter, &env2)))
                }
                U::App(a, b) => U::app(go(a, counter, env), go(b, counter, env)),
                U::Choice(a, b) => U::choice(go(a, counter, env), go(b, counter, env)),
            }
        }
        go(self, &mut 0, &Vec::new())
    }
}

impl std::fmt::Display for UntypedTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // precedence: lambda 0, choice 1, application 2, atom 3
        fn go(t: &U, f: &mut std::fmt::Formatter<'_>, prec: u8) -> std::fmt::Result {
            match t {
                U::Var(x) => write!(f, "{}", x),
                U::Lam(x, b) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    write!(f, "\\{}. ", x)?;
                    go(b, f, 0)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                U::Choice(a, b) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(a, f, 2)?;
                    write!(f, " (+) ")?;
                    go(b, f, 1)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                U::App(a, b) => {
                    if prec > 2 {
                        write!(f, "(")?;
                    }
                    go(a, f, 2)?;
                    write!(f, " ")?;
                    go(b, f, 3)?;
                    if prec > 2 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0)
    }
}

/// Subdistribution over untyped values (abstractions only).
pub type UntypedDist = Dist<UntypedTerm>;

/// The dummy closed value `⋆`, fixed to the identity.
pub fn star() -> U {
    U::lam("x", U::var("x"))
}

/// Scott boolean.
pub fn scott_bool(b: bool) -> U {
    if b {
        U::lam("x", U::lam("y", U::var("x")))
    } else {
        U::lam("x", U::lam("y", U::var("y")))
    }
}

/// Scott numeral: `0 = \s.\z.z`, `n+1 = \s.\z.s n`.
pub fn scott_nat(n: &BigUint) -> U {
    let mut acc = U::lam("s", U::lam("z", U::var("z")));
    let mut i = BigUint::zero();
    while &i < n {
        acc = U::lam("s", U::lam("z", U::app(U::var("s"), acc)));
        i += 1u32;
    }
    acc
}

/// The call-by-value fixpoint combinator `M_fix = N N`,
/// `N = \x.\y. y (\z. ((x x) y) z)`.
pub fn fix_combinator() -> U {
    let n = U::lam(
        "x",
        U::lam(
            "y",
            U::app(
                U::var("y"),
                U::lam(
                    "z",
                    U::app(
                        U::app(U::app(U::var("x"), U::var("x")), U::var("y")),
                        U::var("z"),
                    ),
                ),
            ),
        ),
    );
    U::app(n.clone(), n)
}

/// The untyped diverging term `(\x. x x) (\x. x x)`.
pub fn untyped_omega() -> U {
    let d = U::lam("x", U::app(U::var("x"), U::var("x")));
    U::app(d.clone(), d)
}

/// Arithmetic on Scott numerals, built with the fixpoint combinator.
/// Each returns a closed combinator applied to two numerals.
pub fn op_combinator(op: OpKind) -> U {
    let succ = U::lam("n", U::lam("s", U::lam("z", U::app(U::var("s"), U::var("n")))));
    let recurse = |body: U| U::lam("m", U::lam("n", U::apps(U::app(fix_combinator(), U::lam("f", body)), [U::var("m"), U::var("n")])));
    match op {
        // add m n: on 0 return n, else succ (add m' n)
        OpKind::Add => {
            let body = U::lam(
                "m",
                U::lam(
                    "n",
                    U::apps(
                        U::var("m"),
                        [
                            U::lam("p", U::app(succ.clone(), U::apps(U::var("f"), [U::var("p"), U::var("n")]))),
                            U::var("n"),
                        ],
                    ),
                ),
            );
            recurse(body)
        }
        // leq m n: 0 <= n, and m+1 <= n+1 iff m <= n
        OpKind::Le => {
            let body = U::lam(
                "m",
                U::lam(
                    "n",
                    U::apps(
                        U::var("m"),
                        [
                            U::lam(
                                "p",
                                U::apps(
                                    U::var("n"),
                                    [
                                        U::lam("q", U::apps(U::var("f"), [U::var("p"), U::var("q")])),
                                        scott_bool(false),
                                    ],
                                ),
                            ),
                            scott_bool(true),
                        ],
                    ),
                ),
            );
            recurse(body)
        }
        // eq m n: both zero, or both successors of equal numerals
        OpKind::Eq => {
            let body = U::lam(
                "m",
                U::lam(
                    "n",
                    U::apps(
                        U::var("m"),
                        [
                            U::lam(
                                "p",
                                U::apps(
                                    U::var("n"),
                                    [
                                        U::lam("q", U::apps(U::var("f"), [U::var("p"), U::var("q")])),
                                        scott_bool(false),
                                    ],
                                ),
                            ),
                            U::apps(U::var("n"), [U::lam("q", scott_bool(false)), scott_bool(true)]),
                        ],
                    ),
                ),
            );
            recurse(body)
        }
    }
}

/// Names that can never collide with embedded user variables.
struct FreshNames {
    used: BTreeSet<String>,
    counter: usize,
}

impl FreshNames {
    fn for_term(t: &Term) -> Self {
        fn all_names(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Var(x) => {
                    out.insert(x.clone());
                }
                Term::Num(_) | Term::Bool(_) | Term::Nil(_) => {}
                Term::Lam(x, _, b) | Term::Fix(x, _, b) => {
                    out.insert(x.clone());
                    all_names(b, out);
                }
                Term::Pair(a, b)
                | Term::Cons(a, b)
                | Term::Choice(a, b)
                | Term::Op(_, a, b)
                | Term::App(a, b) => {
                    all_names(a, out);
                    all_names(b, out);
                }
                Term::If(a, b, c) => {
                    all_names(a, out);
                    all_names(b, out);
                    all_names(c, out);
                }
                Term::Fst(a) | Term::Snd(a) => all_names(a, out),
                Term::Case { scrutinee, nil, head, tail, cons } => {
                    out.insert(head.clone());
                    out.insert(tail.clone());
                    all_names(scrutinee, out);
                    all_names(nil, out);
                    all_names(cons, out);
                }
            }
        }
        let mut used = BTreeSet::new();
        all_names(t, &mut used);
        FreshNames { used, counter: 0 }
    }

    fn fresh(&mut self, hint: &str) -> String {
        loop {
            let cand = format!("{}{}", hint, self.counter);
            self.counter += 1;
            if !self.used.contains(&cand) {
                self.used.insert(cand.clone());
                return cand;
            }
        }
    }
}

/// Translates a typed term to the untyped calculus. Annotations are
/// dropped; every clause follows the fixed encoding table.
pub fn embed(term: &Term) -> U {
    let mut names = FreshNames::for_term(term);
    go(term, &mut names)
}

fn thunk(body: U, names: &mut FreshNames) -> U {
    U::lam(&names.fresh("_t"), body)
}

fn go(term: &Term, names: &mut FreshNames) -> U {
    match term {
        Term::Var(x) => U::var(x),
        Term::Num(n) => scott_nat(n),
        Term::Bool(b) => scott_bool(*b),
        // nil = \x.\y. x ⋆
        Term::Nil(_) => {
            let x = names.fresh("x");
            let y = names.fresh("y");
            U::lam(&x, U::lam(&y, U::app(U::var(&x), star())))
        }
        // cons M N = \x.\y. y M N
        Term::Cons(h, t) => {
            let eh = go(h, names);
            let et = go(t, names);
            let x = names.fresh("x");
            let y = names.fresh("y");
            U::lam(&x, U::lam(&y, U::apps(U::var(&y), [eh, et])))
        }
        // (M, N) = \x. x (\_. M) (\_. N)
        Term::Pair(a, b) => {
            let ea = go(a, names);
            let eb = go(b, names);
            let x = names.fresh("x");
            let ta = thunk(ea, names);
            let tb = thunk(eb, names);
            U::lam(&x, U::apps(U::var(&x), [ta, tb]))
        }
        Term::Lam(x, _, body) => U::lam(x, go(body, names)),
        // fix x. M = \y. M_fix (\x. M) y
        Term::Fix(x, _, body) => {
            let eb = go(body, names);
            let y = names.fresh("y");
            U::lam(&y, U::app(U::apps(fix_combinator(), [U::lam(x, eb)]), U::var(&y)))
        }
        Term::Choice(a, b) => U::choice(go(a, names), go(b, names)),
        // if L then M else N = L (\_. M) (\_. N) ⋆
        Term::If(c, t, e) => {
            let ec = go(c, names);
            let et = go(t, names);
            let ee = go(e, names);
            let tt = thunk(et, names);
            let te = thunk(ee, names);
            U::app(U::apps(ec, [tt, te]), star())
        }
        Term::Op(op, a, b) => U::apps(op_combinator(*op), [go(a, names), go(b, names)]),
        // fst M = M (\x.\y. x) ⋆
        Term::Fst(p) => {
            let ep = go(p, names);
            let x = names.fresh("x");
            let y = names.fresh("y");
            U::app(U::apps(ep, [U::lam(&x, U::lam(&y, U::var(&x)))]), star())
        }
        Term::Snd(p) => {
            let ep = go(p, names);
            let x = names.fresh("x");
            let y = names.fresh("y");
            U::app(U::apps(ep, [U::lam(&x, U::lam(&y, U::var(&y)))]), star())
        }
        Term::App(f, a) => U::app(go(f, names), go(a, names)),
        // case M of {nil -> N | h::t -> L} = M (\_. N) (\h.\t. L)
        Term::Case { scrutinee, nil, head, tail, cons } => {
            let es = go(scrutinee, names);
            let en = go(nil, names);
            let ec = go(cons, names);
            let tn = thunk(en, names);
            U::apps(es, [tn, U::lam(head, U::lam(tail, ec))])
        }
    }
}

/// Weak call-by-value one-step reduction: function position first, then
/// the argument, beta only on values; choice splits in two.
pub fn step_untyped(term: &U) -> Option<Vec<U>> {
    if term.is_value() {
        return None;
    }
    match term {
        U::Choice(a, b) => Some(vec![(**a).clone(), (**b).clone()]),
        U::App(f, a) => {
            if !f.is_value() {
                let reducts = step_untyped(f)?;
                Some(reducts.into_iter().map(|t| U::app(t, (**a).clone())).collect())
            } else if !a.is_value() {
                let reducts = step_untyped(a)?;
                Some(reducts.into_iter().map(|t| U::app((**f).clone(), t)).collect())
            } else {
                match &**f {
                    U::Lam(x, body) => Some(vec![body.subst(a, x)]),
                    _ => None, // stuck (open term)
                }
            }
        }
        U::Var(_) => None,
        U::Lam(_, _) => unreachable!("values returned above"),
    }
}

/// Fuel-bounded call-by-value evaluation to a subdistribution over
/// abstractions; fuel bounds the length of every reduction path.
/// Iterative, so deep reduction paths do not consume stack.
pub fn eval_untyped(term: &U, fuel: u64) -> UntypedDist {
    let mut out = Dist::empty();
    let mut work: Vec<(U, Rational, u64)> = vec![(term.clone(), Rational::one(), fuel)];
    while let Some((t, weight, f)) = work.pop() {
        if t.is_value() {
            out.add_weight(t.canon(), weight);
            continue;
        }
        if f == 0 {
            continue;
        }
        match step_untyped(&t) {
            None => {}
            Some(reducts) => {
                let share = &weight * rat(1, reducts.len() as i64);
                for r in reducts {
                    work.push((r, share.clone(), f - 1));
                }
            }
        }
    }
    out
}

/// Compares source-side convergence mass with target-side mass of the
/// embedded term. Lower bounds at the given fuel; `agree` asks the
/// resulting intervals to overlap, and on terminating terms both sides
/// stabilise to the same exact rational.
pub fn mass_preservation(
    term: &Term,
    fuel: u64,
) -> (crate::rational::Interval, crate::rational::Interval, bool) {
    use crate::rational::Interval;
    let src_lo = crate::eval::eval_big(term, fuel).mass();
    let src = if src_lo.is_one() {
        Interval::one()
    } else {
        Interval::new(src_lo, Rational::one())
    };
    // embedded terms take many administrative steps per source step
    let tgt_fuel = fuel * fuel.max(16);
    let tgt_lo = eval_untyped(&embed(term), tgt_fuel).mass();
    let tgt = if tgt_lo.is_one() {
        Interval::one()
    } else {
        Interval::new(tgt_lo, Rational::one())
    };
    let agree = src.overlaps(&tgt);
    (src, tgt, agree)
}
