//! The conjunctive test language over chain labels, exact success
//! probabilities on fragments, the test-to-context compiler, and
//! breadth-first distinguishing-test search.
//!
//! A test either always succeeds (`w`), performs an action and
//! continues (`a.t`), or runs independent copies of the state and
//! succeeds only if all of them do (`<t, s>`). Success probabilities
//! follow the standard recurrences: `Pr(x, w) = 1`,
//! `Pr(x, a.t) = Σ_s P(x, a, s) · Pr(s, t)`, and
//! `Pr(x, <t, s>) = Pr(x, t) · Pr(x, s)`. On a fragment they become
//! intervals: lower bounds from explored rows, upper bounds adding the
//! row deficits, and `[0, 1]` for the residual test at frontier states.
//!
//! The compiler turns every test into a pair of boolean program
//! contexts — one for program states, one for distinguished values —
//! whose convergence mass equals the test's success probability. Copy
//! semantics of conjunction comes out of call-by-value evaluation: the
//! tested term is bound to a thunk `\z:int. [.]` once, and every
//! conjunct re-runs it by applying the thunk to `0`, which is exactly
//! the ability to copy a term after evaluating it that call-by-value
//! provides.

use crate::lmc::{Label, LmcFragment, LmcState};
use crate::rational::{rat_one, rat_zero, Interval, Rational};
use crate::syntax::parse::{self, Lexer, Token};
use crate::syntax::{infer, Context, ParseError, Term, Type, TypingContext};
use crate::{dist, eval};
use std::collections::BTreeSet;

/// Tests: success, action prefix, finite conjunction (length >= 2).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Test {
    Omega,
    Prefix(Label, Box<Test>),
    Conj(Vec<Test>),
}

impl Test {
    pub fn prefix(label: Label, rest: Test) -> Test {
        Test::Prefix(label, Box::new(rest))
    }

    pub fn conj(parts: Vec<Test>) -> Test {
        debug_assert!(parts.len() >= 2);
        Test::Conj(parts)
    }

    /// Prefix-nesting depth; conjunction takes the maximum of its
    /// parts.
    pub fn depth(&self) -> usize {
        match self {
            Test::Omega => 0,
            Test::Prefix(_, rest) => 1 + rest.depth(),
            Test::Conj(parts) => parts.iter().map(Test::depth).max().unwrap_or(0),
        }
    }

    /// Argument values mentioned by the test's labels.
    pub fn arg_values(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        fn go(t: &Test, out: &mut BTreeSet<Term>) {
            match t {
                Test::Omega => {}
                Test::Prefix(l, rest) => {
                    if let Label::Arg(v) = l {
                        out.insert(v.canon());
                    }
                    go(rest, out);
                }
                Test::Conj(parts) => parts.iter().for_each(|p| go(p, out)),
            }
        }
        go(self, &mut out);
        out
    }
}

impl std::fmt::Display for Test {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Test::Omega => write!(f, "w"),
            Test::Prefix(l, rest) => write!(f, "{}.{}", l, rest),
            Test::Conj(parts) => {
                write!(f, "<")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", p)?;
                }
                write!(f, ">")
            }
        }
    }
}

/// Parses the test surface syntax: `w`, `eval.t`, `arg(<value>).t`,
/// `fst.t`, `snd.t`, `hd.t`, `tl.t`, `nil.t`, `num(k).t`,
/// `bool(true|false).t`, `ty(<type>).t`, `<t, t, ...>`.
pub fn parse_test(text: &str) -> Result<Test, ParseError> {
    let mut lx = Lexer::new(text)?;
    let t = test(&mut lx)?;
    lx.expect_eof()?;
    Ok(t)
}

fn test(lx: &mut Lexer) -> Result<Test, ParseError> {
    match lx.peek().clone() {
        Token::Ident(w) if w == "w" => {
            lx.next();
            Ok(Test::Omega)
        }
        Token::Lt => {
            lx.next();
            let mut parts = vec![test(lx)?];
            while *lx.peek() == Token::Comma {
                lx.next();
                parts.push(test(lx)?);
            }
            lx.expect(Token::Gt)?;
            if parts.len() < 2 {
                return Err(lx.error("conjunction needs at least two tests"));
            }
            Ok(Test::Conj(parts))
        }
        _ => {
            let l = label(lx)?;
            lx.expect(Token::Dot)?;
            let rest = test(lx)?;
            Ok(Test::prefix(l, rest))
        }
    }
}

fn label(lx: &mut Lexer) -> Result<Label, ParseError> {
    match lx.peek().clone() {
        Token::Ident(s) if s == "eval" => {
            lx.next();
            Ok(Label::Eval)
        }
        Token::Ident(s) if s == "arg" => {
            lx.next();
            lx.expect(Token::LParen)?;
            let v = parse::term(lx)?;
            lx.expect(Token::RParen)?;
            Ok(Label::Arg(v))
        }
        Token::Ident(s) if s == "hd" => {
            lx.next();
            Ok(Label::Hd)
        }
        Token::Ident(s) if s == "tl" => {
            lx.next();
            Ok(Label::Tl)
        }
        Token::Ident(s) if s == "num" => {
            lx.next();
            lx.expect(Token::LParen)?;
            let n = match lx.next() {
                Token::Nat(n) => n,
                other => return Err(lx.error(format!("expected a number, found {}", other))),
            };
            lx.expect(Token::RParen)?;
            Ok(Label::Num(n))
        }
        Token::Ident(s) if s == "ty" => {
            lx.next();
            lx.expect(Token::LParen)?;
            let t = parse::ty(lx)?;
            lx.expect(Token::RParen)?;
            Ok(Label::TypeLbl(t))
        }
        Token::Fst => {
            lx.next();
            Ok(Label::FstL)
        }
        Token::Snd => {
            lx.next();
            Ok(Label::SndL)
        }
        Token::Nil => {
            lx.next();
            Ok(Label::NilL)
        }
        Token::BoolTy => {
            lx.next();
            lx.expect(Token::LParen)?;
            let b = match lx.next() {
                Token::True => true,
                Token::False => false,
                other => return Err(lx.error(format!("expected true or false, found {}", other))),
            };
            lx.expect(Token::RParen)?;
            Ok(Label::BoolL(b))
        }
        other => Err(lx.error(format!("expected a test label, found {}", other))),
    }
}

/// Success-probability interval of `t` at state `id`. Lower bounds use
/// the explored rows only; upper bounds add each row's deficit (the
/// missing mass could reach states where the rest of the test succeeds
/// outright) and give frontier states the whole unit interval for any
/// residual action.
pub fn success_prob(frag: &LmcFragment, id: usize, t: &Test) -> Interval {
    match t {
        Test::Omega => Interval::one(),
        Test::Conj(parts) => {
            let mut acc = Interval::one();
            for p in parts {
                acc = acc.mul(&success_prob(frag, id, p));
            }
            acc
        }
        Test::Prefix(label, rest) => {
            let Some(row) = frag.row(id, label) else {
                return Interval::unknown();
            };
            let mut lo = rat_zero();
            let mut hi = frag.deficit(id, label);
            for (&target, w) in row {
                let inner = success_prob(frag, target, rest);
                lo += &inner.lo * w;
                hi += &inner.hi * w;
            }
            Interval::new(lo, hi).clamp_unit()
        }
    }
}

/// Fresh-name supply for compiled contexts; names are distinct per
/// compilation so nested pieces never capture each other's binders.
struct NameSupply {
    counter: usize,
}

impl NameSupply {
    fn new() -> Self {
        NameSupply { counter: 0 }
    }
    fn fresh(&mut self, hint: &str) -> String {
        let n = self.counter;
        self.counter += 1;
        format!("{}{}", hint, n)
    }
}

fn omega_term(ty: Type) -> Term {
    Term::diverging(ty)
}

/// The type-correct diverging context `(\x:σ. Ω_bool) [.]`: converges
/// with probability zero whatever fills the hole.
fn diverging_ctx(hole_ty: &Type, names: &mut NameSupply) -> Context {
    let x = names.fresh("d");
    Context::AppR(
        Box::new(Term::Lam(x, hole_ty.clone(), Box::new(omega_term(Type::Bool)))),
        Box::new(Context::Hole),
    )
}

/// Compiles a test into a pair of boolean contexts: `C` measures the
/// test at program states `(M, σ)`, `D` at value states `(V̂, σ)`. Both
/// check as `∅ ⊢ · (∅; σ) : bool`, and the convergence mass of the
/// filled context equals the success probability of the test. Labels
/// that do not fit the type compile to a diverging context, matching
/// the empty rows of the chain.
pub fn compile_test(t: &Test, ty: &Type) -> (Context, Context) {
    let mut names = NameSupply::new();
    compile(t, ty, &mut names)
}

fn compile(t: &Test, ty: &Type, names: &mut NameSupply) -> (Context, Context) {
    match t {
        // C_w = D_w = (\x. true) (\z. [.])
        Test::Omega => {
            let thunk_ty = Type::arrow(Type::Int, ty.clone());
            let mk = |names: &mut NameSupply| {
                let x = names.fresh("x");
                let z = names.fresh("z");
                Context::AppR(
                    Box::new(Term::lam(&x, thunk_ty.clone(), Term::Bool(true))),
                    Box::new(Context::Lam(z, Type::Int, Box::new(Context::Hole))),
                )
            };
            (mk(names), mk(names))
        }
        // bind the hole to a thunk x = \z. [.], then test copies x 0
        // through each conjunct's compiled context in an if-chain whose
        // guards converge iff the conjunct succeeds
        Test::Conj(parts) => {
            let thunk_ty = Type::arrow(Type::Int, ty.clone());
            let mk = |names: &mut NameSupply, use_value_ctx: bool| {
                let x = names.fresh("x");
                let z = names.fresh("z");
                let copy = Term::app(Term::var(&x), Term::num(0));
                let mut chain = Term::Bool(true);
                let mut guards = Vec::new();
                for part in parts {
                    let (c_i, d_i) = compile(part, ty, names);
                    let ctx = if use_value_ctx { d_i } else { c_i };
                    let y = names.fresh("y");
                    guards.push(Term::app(
                        Term::lam(&y, Type::Bool, Term::Bool(true)),
                        ctx.fill(&copy),
                    ));
                }
                for guard in guards.into_iter().rev() {
                    chain = Term::ite(guard, chain, Term::Bool(true));
                }
                Context::AppR(
                    Box::new(Term::lam(&x, thunk_ty.clone(), chain)),
                    Box::new(Context::Lam(z, Type::Int, Box::new(Context::Hole))),
                )
            };
            (mk(names, false), mk(names, true))
        }
        Test::Prefix(label, rest) => match label {
            // C = (\x. D_rest[x]) [.]   — evaluate, then test the value
            // D = diverging             — value states have no eval row
            Label::Eval => {
                let (_, d_rest) = compile(rest, ty, names);
                let x = names.fresh("x");
                let c = Context::AppR(
                    Box::new(Term::Lam(
                        x.clone(),
                        ty.clone(),
                        Box::new(d_rest.fill(&Term::var(&x))),
                    )),
                    Box::new(Context::Hole),
                );
                (c, diverging_ctx(ty, names))
            }
            // D = C_rest[[.] W] on matching arrows, diverging otherwise
            Label::Arg(w) => {
                let d = match ty {
                    Type::Arrow(dom, cod)
                        if infer(&TypingContext::new(), w).ok().as_ref() == Some(dom.as_ref()) =>
                    {
                        let (c_rest, _) = compile(rest, cod, names);
                        c_rest.fill_ctx(&Context::AppL(Box::new(Context::Hole), Box::new(w.clone())))
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            Label::FstL => {
                let d = match ty {
                    Type::Prod(a, _) => {
                        let (c_rest, _) = compile(rest, a, names);
                        c_rest.fill_ctx(&Context::Fst(Box::new(Context::Hole)))
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            Label::SndL => {
                let d = match ty {
                    Type::Prod(_, b) => {
                        let (c_rest, _) = compile(rest, b, names);
                        c_rest.fill_ctx(&Context::Snd(Box::new(Context::Hole)))
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            // head observation: case [.] of { nil -> Ω | h::t -> h }
            Label::Hd => {
                let d = match ty {
                    Type::List(el) => {
                        let (c_rest, _) = compile(rest, el, names);
                        let h = names.fresh("h");
                        let tl = names.fresh("t");
                        c_rest.fill_ctx(&Context::CaseS {
                            scrutinee: Box::new(Context::Hole),
                            nil: Box::new(omega_term((**el).clone())),
                            head: h.clone(),
                            tail: tl,
                            cons: Box::new(Term::var(&h)),
                        })
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            Label::Tl => {
                let d = match ty {
                    Type::List(_) => {
                        let (c_rest, _) = compile(rest, ty, names);
                        let h = names.fresh("h");
                        let tl = names.fresh("t");
                        c_rest.fill_ctx(&Context::CaseS {
                            scrutinee: Box::new(Context::Hole),
                            nil: Box::new(omega_term(ty.clone())),
                            head: h,
                            tail: tl.clone(),
                            cons: Box::new(Term::var(&tl)),
                        })
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            // nil observation keeps testing the same state:
            // case [.] of { nil -> D_rest[nil] | h::t -> Ω_bool }
            Label::NilL => {
                let d = match ty {
                    Type::List(el) => {
                        let (_, d_rest) = compile(rest, ty, names);
                        let h = names.fresh("h");
                        let tl = names.fresh("t");
                        Context::CaseS {
                            scrutinee: Box::new(Context::Hole),
                            nil: Box::new(d_rest.fill(&Term::Nil((**el).clone()))),
                            head: h,
                            tail: tl,
                            cons: Box::new(omega_term(Type::Bool)),
                        }
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            // literal observations self-loop, so the continuation is
            // re-tested on the same literal:
            // if [.] == k then D_rest[k] else Ω_bool
            Label::Num(k) => {
                let d = match ty {
                    Type::Int => {
                        let (_, d_rest) = compile(rest, ty, names);
                        let lit = Term::Num(k.clone());
                        Context::IfC(
                            Box::new(Context::OpL(
                                crate::syntax::OpKind::Eq,
                                Box::new(Context::Hole),
                                Box::new(lit.clone()),
                            )),
                            Box::new(d_rest.fill(&lit)),
                            Box::new(omega_term(Type::Bool)),
                        )
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            Label::BoolL(b) => {
                let d = match ty {
                    Type::Bool => {
                        let (_, d_rest) = compile(rest, ty, names);
                        let lit = Term::Bool(*b);
                        let hit = d_rest.fill(&lit);
                        let miss = omega_term(Type::Bool);
                        if *b {
                            Context::IfC(Box::new(Context::Hole), Box::new(hit), Box::new(miss))
                        } else {
                            Context::IfC(Box::new(Context::Hole), Box::new(miss), Box::new(hit))
                        }
                    }
                    _ => diverging_ctx(ty, names),
                };
                (diverging_ctx(ty, names), d)
            }
            // a matching type label is a self-loop: the continuation
            // tests the same state; a mismatch never fires
            Label::TypeLbl(t2) => {
                if t2 == ty {
                    compile(rest, ty, names)
                } else {
                    (diverging_ctx(ty, names), diverging_ctx(ty, names))
                }
            }
        },
    }
}

/// Compares the chain-side success probability of `t` at `(M, σ)` with
/// the convergence mass of the compiled program context filled with
/// `M`, both at comparable resource bounds. `agree` means the intervals
/// overlap; on terminating instances with stable fuel both collapse to
/// the same exact rational.
pub fn bridge_check(
    m: &Term,
    ty: &Type,
    t: &Test,
    fuel: u64,
) -> (Interval, Interval, bool) {
    let root = LmcState::program(m, ty.clone());
    let universe = t.arg_values();
    let depth = t.depth() + 1;
    let frag = crate::lmc::build_fragment(std::slice::from_ref(&root), fuel, &universe, depth, 100_000)
        .expect("bridge fragment within cap");
    let pr = success_prob(&frag, frag.id_of(&root).expect("root"), t);
    let (c, _) = compile_test(t, ty);
    let filled = c.fill(m);
    let lo = dist::mass(&eval::eval_big(&filled, fuel));
    let stable = lo == dist::mass(&eval::eval_big(&filled, fuel + fuel / 2 + 1));
    let ctx_mass = if stable && lo == rat_one() {
        Interval::one()
    } else if stable {
        // stability is evidence, not proof; keep the upper end open
        // unless the mass already reached 1
        Interval::new(lo.clone(), rat_one())
    } else {
        Interval::new(lo.clone(), rat_one())
    };
    let agree = pr.overlaps(&ctx_mass);
    (pr, ctx_mass, agree)
}

/// Exact success probability of a test measured directly on terms by
/// the evaluators, without a prebuilt fragment: `eval` consults the
/// exact solver first and falls back to fuel-bounded lower bounds.
/// Returns a lower bound; it is exact whenever every evaluation along
/// the way was solved exactly (the common case for desk-scale terms).
pub fn success_lower_bound(m: &Term, ty: &Type, t: &Test, fuel: u64) -> Rational {
    fn at_program(m: &Term, ty: &Type, t: &Test, fuel: u64) -> Rational {
        match t {
            Test::Omega => rat_one(),
            Test::Conj(parts) => parts
                .iter()
                .fold(rat_one(), |acc, p| acc * at_program(m, ty, p, fuel)),
            Test::Prefix(Label::TypeLbl(t2), rest) => {
                if t2 == ty {
                    at_program(m, ty, rest, fuel)
                } else {
                    rat_zero()
                }
            }
            Test::Prefix(Label::Eval, rest) => {
                let d = eval::exact_dist(m, crate::lmc::EXACT_SOLVE_BUDGET)
                    .unwrap_or_else(|| eval::eval_big(m, fuel));
                let mut acc = rat_zero();
                for (v, w) in d.iter() {
                    acc += w * at_value(v, ty, rest, fuel);
                }
                acc
            }
            Test::Prefix(_, _) => rat_zero(),
        }
    }
    fn at_value(v: &Term, ty: &Type, t: &Test, fuel: u64) -> Rational {
        match t {
            Test::Omega => rat_one(),
            Test::Conj(parts) => parts
                .iter()
                .fold(rat_one(), |acc, p| acc * at_value(v, ty, p, fuel)),
            Test::Prefix(label, rest) => match (label, ty, v) {
                (Label::TypeLbl(t2), _, _) => {
                    if t2 == ty {
                        at_value(v, ty, rest, fuel)
                    } else {
                        rat_zero()
                    }
                }
                (Label::Arg(w), Type::Arrow(dom, cod), _) => {
                    if infer(&TypingContext::new(), w).ok().as_ref() != Some(dom.as_ref()) {
                        return rat_zero();
                    }
                    match v {
                        Term::Lam(x, _, body) => at_program(&body.subst(w, x), cod, rest, fuel),
                        Term::Fix(x, _, body) => {
                            let unfolded = Term::app(body.subst(v, x), w.clone());
                            at_program(&unfolded, cod, rest, fuel)
                        }
                        _ => rat_zero(),
                    }
                }
                (Label::FstL, Type::Prod(a, _), Term::Pair(l, _)) => at_program(l, a, rest, fuel),
                (Label::SndL, Type::Prod(_, b), Term::Pair(_, r)) => at_program(r, b, rest, fuel),
                (Label::Hd, Type::List(el), Term::Cons(h, _)) => at_program(h, el, rest, fuel),
                (Label::Tl, Type::List(_), Term::Cons(_, tl)) => at_program(tl, ty, rest, fuel),
                (Label::NilL, Type::List(_), Term::Nil(_)) => at_value(v, ty, rest, fuel),
                (Label::Num(k), Type::Int, Term::Num(n)) if n == k => at_value(v, ty, rest, fuel),
                (Label::BoolL(b), Type::Bool, Term::Bool(x)) if x == b => at_value(v, ty, rest, fuel),
                _ => rat_zero(),
            },
        }
    }
    at_program(m, ty, t, fuel)
}

/// Breadth-first search for a test separating two states of equal type.
///
/// Enumerated shapes are prefix chains over `w` plus at most one binary
/// conjunction of prefix chains, over the fragment's non-type labels;
/// depth counts prefix nesting, conjunctions take the maximum of their
/// parts. Tests with identical interval vectors across all states are
/// collapsed to their lexicographically smallest representative (test
/// composition only sees the vector, so this loses nothing). Returns
/// the first test, in depth order with lexicographic tie-breaking,
/// whose intervals at `left` and `right` are disjoint.
pub fn find_distinguishing_test(
    frag: &LmcFragment,
    left: usize,
    right: usize,
    max_depth: usize,
) -> Option<Test> {
    if left == right {
        return None;
    }
    let labels: Vec<Label> = frag
        .alphabet()
        .into_iter()
        .filter(|l| !matches!(l, Label::TypeLbl(_)))
        .collect();
    let n = frag.len();
    let vector = |t: &Test| -> Vec<Interval> {
        (0..n).map(|id| success_prob(frag, id, t)).collect()
    };
    let disjoint = |v: &Vec<Interval>| v[left].disjoint(&v[right]);

    // chains[d] = representatives of prefix chains of depth exactly d;
    // conjs[d] likewise for tests containing one binary conjunction
    let mut chains: Vec<Vec<Test>> = vec![vec![Test::Omega]];
    let mut conjs: Vec<Vec<Test>> = vec![Vec::new()];
    let mut seen: BTreeSet<Vec<Interval>> = [vector(&Test::Omega)].into_iter().collect();

    for depth in 1..=max_depth {
        // new chains first: conjunctions at this depth need them
        let mut chain_candidates: Vec<Test> = Vec::new();
        for t in &chains[depth - 1] {
            for l in &labels {
                chain_candidates.push(Test::prefix(l.clone(), t.clone()));
            }
        }
        chain_candidates.sort();
        let mut level: Vec<(Test, Vec<Interval>)> = Vec::new();
        let mut new_chains: Vec<Test> = Vec::new();
        for t in chain_candidates {
            let v = vector(&t);
            if seen.insert(v.clone()) {
                new_chains.push(t.clone());
                level.push((t, v));
            }
        }
        chains.push(new_chains);

        // conjunctions of two chains, at least one of this depth
        let mut conj_candidates: Vec<Test> = Vec::new();
        for a in chains.iter().flatten().filter(|t| t.depth() >= 1) {
            for b in chains.iter().flatten().filter(|t| t.depth() >= 1) {
                if a <= b && a.depth().max(b.depth()) == depth {
                    conj_candidates.push(Test::conj(vec![a.clone(), b.clone()]));
                }
            }
        }
        // and prefixed versions of shallower conjunctions
        for t in &conjs[depth - 1] {
            for l in &labels {
                conj_candidates.push(Test::prefix(l.clone(), t.clone()));
            }
        }
        conj_candidates.sort();
        let mut new_conjs: Vec<Test> = Vec::new();
        for t in conj_candidates {
            let v = vector(&t);
            if seen.insert(v.clone()) {
                new_conjs.push(t.clone());
                level.push((t, v));
            }
        }
        conjs.push(new_conjs);

        // report the lexicographically smallest separating test of the
        // level, if any
        level.sort_by(|(a, _), (b, _)| a.cmp(b));
        for (t, v) in level {
            if disjoint(&v) {
                return Some(t);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmc::{arg_universe_for, build_fragment};
    use crate::rational::rat;
    use crate::syntax::{check_context, parse_term};

    fn bb() -> Type {
        Type::arrow(Type::Bool, Type::Bool)
    }

    fn frag_of(src: &str, ty: Type, depth: usize) -> (LmcFragment, usize) {
        let t = parse_term(src).unwrap();
        let root = LmcState::program(&t, ty.clone());
        let universe = arg_universe_for(&ty, 1);
        let frag = build_fragment(&[root.clone()], 16, &universe, depth, 50_000).unwrap();
        let id = frag.id_of(&root).unwrap();
        (frag, id)
    }

    #[test]
    fn test_syntax_round_trips() {
        let samples = [
            "w",
            "eval.w",
            "eval.arg(true).eval.w",
            "arg(\\x:bool. x).eval.w",
            "<eval.w, eval.bool(true).w>",
            "<eval.w, eval.w, eval.w>",
            "num(3).w",
            "ty(bool -> bool).eval.w",
            "eval.nil.w",
            "hd.tl.fst.snd.w",
        ];
        for s in samples {
            let t = parse_test(s).unwrap();
            let printed = t.to_string();
            let t2 = parse_test(&printed).unwrap_or_else(|e| panic!("`{}`: {}", printed, e));
            assert_eq!(t, t2, "`{}` -> `{}`", s, printed);
        }
        assert!(parse_test("<w>").is_err());
        assert!(parse_test("eval").is_err());
    }

    #[test]
    fn omega_always_succeeds() {
        let (frag, id) = frag_of("true", Type::Bool, 0);
        assert_eq!(success_prob(&frag, id, &Test::Omega), Interval::one());
    }

    #[test]
    fn eval_prefix_measures_convergence() {
        let (frag, id) = frag_of("\\x:bool. x", bb(), 2);
        let t = Test::prefix(Label::Eval, Test::Omega);
        assert_eq!(success_prob(&frag, id, &t), Interval::one());

        let half = Term::choice(
            parse_term("\\x:bool. x").unwrap(),
            Term::diverging(bb()),
        );
        let root = LmcState::program(&half, bb());
        let frag = build_fragment(&[root.clone()], 8, &BTreeSet::new(), 2, 1000).unwrap();
        let id = frag.id_of(&root).unwrap();
        assert_eq!(success_prob(&frag, id, &t), Interval::exact(rat(1, 2)));
    }

    #[test]
    fn empty_row_gives_deficit_bounded_interval() {
        // a program state has no argument action
        let (frag, id) = frag_of("\\x:bool. x", bb(), 2);
        let t = Test::prefix(Label::Arg(Term::Bool(true)), Test::Omega);
        assert_eq!(success_prob(&frag, id, &t), Interval::zero());
    }

    #[test]
    fn conjunction_unit_law() {
        let (frag, id) = frag_of("true (+) false", Type::Bool, 2);
        for t in [
            Test::prefix(Label::Eval, Test::Omega),
            Test::prefix(Label::Eval, Test::prefix(Label::BoolL(true), Test::Omega)),
        ] {
            let with_unit = Test::conj(vec![t.clone(), Test::Omega]);
            for sid in 0..frag.len() {
                assert_eq!(success_prob(&frag, sid, &t), success_prob(&frag, sid, &with_unit));
            }
            let _ = id;
        }
    }

    #[test]
    fn compiled_contexts_typecheck_bool() {
        let types = [Type::Bool, Type::Int, bb(), Type::prod(Type::Bool, Type::Int), Type::list(Type::Bool)];
        let tests = [
            parse_test("w").unwrap(),
            parse_test("eval.w").unwrap(),
            parse_test("eval.arg(true).eval.w").unwrap(),
            parse_test("eval.fst.eval.w").unwrap(),
            parse_test("eval.nil.w").unwrap(),
            parse_test("eval.num(3).w").unwrap(),
            parse_test("eval.bool(false).w").unwrap(),
            parse_test("<eval.w, eval.bool(true).w>").unwrap(),
            parse_test("ty(bool).eval.w").unwrap(),
            parse_test("eval.hd.eval.w").unwrap(),
        ];
        for ty in &types {
            for t in &tests {
                let (c, d) = compile_test(t, ty);
                let got_c = check_context(&TypingContext::new(), &c, &TypingContext::new(), ty)
                    .unwrap_or_else(|e| panic!("C for {} at {}: {}", t, ty, e));
                let got_d = check_context(&TypingContext::new(), &d, &TypingContext::new(), ty)
                    .unwrap_or_else(|e| panic!("D for {} at {}: {}", t, ty, e));
                assert_eq!(got_c, Type::Bool);
                assert_eq!(got_d, Type::Bool);
            }
        }
    }

    #[test]
    fn omega_context_has_unit_mass() {
        let (c, _) = compile_test(&Test::Omega, &Type::Bool);
        for src in ["true", "true (+) false"] {
            let filled = c.fill(&parse_term(src).unwrap());
            assert_eq!(dist::mass(&eval::eval_big(&filled, 16)), rat(1, 1));
        }
        // even divergence under the thunk cannot spoil it
        let filled = c.fill(&Term::diverging(Type::Bool));
        assert_eq!(dist::mass(&eval::eval_big(&filled, 16)), rat(1, 1));
    }

    #[test]
    fn eval_context_measures_half() {
        let t = parse_test("eval.w").unwrap();
        let (c, _) = compile_test(&t, &bb());
        let half = Term::choice(parse_term("\\x:bool. x").unwrap(), Term::diverging(bb()));
        let filled = c.fill(&half);
        assert_eq!(dist::mass(&eval::eval_big(&filled, 20)), rat(1, 2));
    }

    #[test]
    fn numeral_context_dispatches() {
        let t = parse_test("num(3).w").unwrap();
        let (_, d) = compile_test(&t, &Type::Int);
        let on3 = d.fill(&Term::num(3));
        let on4 = d.fill(&Term::num(4));
        assert_eq!(dist::mass(&eval::eval_big(&on3, 16)), rat(1, 1));
        assert_eq!(dist::mass(&eval::eval_big(&on4, 16)), rat(0, 1));
    }

    #[test]
    fn bridge_on_simple_terms() {
        let cases = [
            ("\\x:bool. x", bb(), "eval.w", rat(1, 1)),
            ("true (+) false", Type::Bool, "eval.bool(true).w", rat(1, 2)),
            ("(\\x:bool. x) true", Type::Bool, "eval.w", rat(1, 1)),
        ];
        for (src, ty, test_src, expect) in cases {
            let m = parse_term(src).unwrap();
            let t = parse_test(test_src).unwrap();
            let (pr, ctx, agree) = bridge_check(&m, &ty, &t, 24);
            assert!(agree, "{} / {}", src, test_src);
            assert_eq!(pr, Interval::exact(expect.clone()), "{} / {}", src, test_src);
            assert_eq!(ctx.lo, expect, "{} / {}", src, test_src);
        }
        // diverging program: both sides zero from below
        let m = Term::diverging(Type::Bool);
        let (pr, ctx, agree) = bridge_check(&m, &Type::Bool, &parse_test("eval.w").unwrap(), 24);
        assert!(agree);
        assert_eq!(pr.lo, rat(0, 1));
        assert_eq!(ctx.lo, rat(0, 1));
    }

    #[test]
    fn search_returns_none_for_equal_states() {
        let (frag, id) = frag_of("true (+) false", Type::Bool, 3);
        assert_eq!(find_distinguishing_test(&frag, id, id, 3), None);
    }

    #[test]
    fn search_separates_biased_coins() {
        let a = parse_term("true (+) false").unwrap();
        let b = parse_term("true (+) (true (+) false)").unwrap();
        let ra = LmcState::program(&a, Type::Bool);
        let rb = LmcState::program(&b, Type::Bool);
        let frag = build_fragment(&[ra.clone(), rb.clone()], 16, &BTreeSet::new(), 3, 10_000).unwrap();
        let (ia, ib) = (frag.id_of(&ra).unwrap(), frag.id_of(&rb).unwrap());
        let t = find_distinguishing_test(&frag, ia, ib, 3).expect("distinguishable");
        let pa = success_prob(&frag, ia, &t);
        let pb = success_prob(&frag, ib, &t);
        assert!(pa.disjoint(&pb), "{}: {} vs {}", t, pa, pb);
    }
}
