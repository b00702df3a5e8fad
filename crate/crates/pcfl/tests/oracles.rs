//! Cross-validation against independent oracles on generated programs:
//! the three evaluation routes must agree, ground-type bisimilarity
//! must coincide with distribution equality, simulation with pointwise
//! domination, and context typing with plain term typing at every
//! possible hole position.

use pcfl::equivalence::{bisim_classes, sim_preorder};
use pcfl::eval::{eval_big, eval_small, exact_dist, is_value};
use pcfl::lmc::build_fragment;
use pcfl::lmc::LmcState;
use pcfl::rational::is_dyadic;
use pcfl::syntax::{check_context, infer, Context, OpKind, Term, Type, TypingContext};
use std::collections::BTreeSet;

struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// Deterministic generator of closed well-typed terms. Recursion
/// appears only as the diverging program, so reduction graphs stay
/// finite and the exact solver applies.
struct Gen {
    rng: XorShift,
    fresh: usize,
}

impl Gen {
    fn new(seed: u64) -> Self {
        Gen { rng: XorShift(seed), fresh: 0 }
    }

    fn name(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn small_type(&mut self) -> Type {
        match self.rng.below(4) {
            0 => Type::Int,
            1 => Type::prod(Type::Bool, Type::Int),
            2 => Type::arrow(Type::Bool, Type::Bool),
            _ => Type::Bool,
        }
    }

    fn value(&mut self, env: &[(String, Type)], ty: &Type, depth: usize) -> Term {
        match ty {
            Type::Bool => Term::Bool(self.rng.below(2) == 0),
            Type::Int => Term::num(self.rng.below(4)),
            Type::Arrow(dom, cod) => {
                let x = self.name();
                let mut env2 = env.to_vec();
                env2.push((x.clone(), (**dom).clone()));
                let body = self.term(&env2, cod, depth.saturating_sub(1));
                Term::Lam(x, (**dom).clone(), Box::new(body))
            }
            Type::Prod(a, b) => Term::pair(
                self.term(env, a, depth.saturating_sub(1)),
                self.term(env, b, depth.saturating_sub(1)),
            ),
            Type::List(el) => {
                if depth == 0 || self.rng.below(2) == 0 {
                    Term::Nil((**el).clone())
                } else {
                    Term::cons(
                        self.term(env, el, depth - 1),
                        self.value(env, ty, depth - 1),
                    )
                }
            }
        }
    }

    fn leaf(&mut self, env: &[(String, Type)], ty: &Type) -> Term {
        let vars: Vec<&String> =
            env.iter().filter(|(_, t)| t == ty).map(|(x, _)| x).collect();
        if !vars.is_empty() && self.rng.below(2) == 0 {
            return Term::var(vars[self.rng.below(vars.len() as u64) as usize]);
        }
        if self.rng.below(8) == 0 {
            return Term::diverging(ty.clone());
        }
        self.value(env, ty, 1)
    }

    fn term(&mut self, env: &[(String, Type)], ty: &Type, depth: usize) -> Term {
        if depth == 0 {
            return self.leaf(env, ty);
        }
        let d = depth - 1;
        match self.rng.below(12) {
            0 | 1 => self.leaf(env, ty),
            2 => Term::ite(
                self.term(env, &Type::Bool, d),
                self.term(env, ty, d),
                self.term(env, ty, d),
            ),
            3 => {
                let dom = self.small_type();
                Term::app(
                    self.term(env, &Type::arrow(dom.clone(), ty.clone()), d),
                    self.term(env, &dom, d),
                )
            }
            4 => Term::choice(self.term(env, ty, d), self.term(env, ty, d)),
            5 => {
                let other = self.small_type();
                Term::fst(self.term(env, &Type::prod(ty.clone(), other), d))
            }
            6 => {
                let other = self.small_type();
                Term::snd(self.term(env, &Type::prod(other, ty.clone()), d))
            }
            7 if *ty == Type::Int => Term::op(
                OpKind::Add,
                self.term(env, &Type::Int, d),
                self.term(env, &Type::Int, d),
            ),
            7 if *ty == Type::Bool => Term::op(
                if self.rng.below(2) == 0 { OpKind::Le } else { OpKind::Eq },
                self.term(env, &Type::Int, d),
                self.term(env, &Type::Int, d),
            ),
            8 => {
                let el = self.small_type();
                let scrutinee = self.term(env, &Type::list(el.clone()), d);
                let nil = self.term(env, ty, d);
                let h = self.name();
                let t = self.name();
                let mut env2 = env.to_vec();
                env2.push((h.clone(), el.clone()));
                env2.push((t.clone(), Type::list(el)));
                let cons = self.term(&env2, ty, d);
                Term::case(scrutinee, nil, &h, &t, cons)
            }
            _ => self.value(env, ty, d),
        }
    }
}

#[test]
fn generated_terms_are_well_typed_closed() {
    let mut gen = Gen::new(0xabc0_ffee_1234_5678);
    for i in 0..300 {
        let ty = gen.small_type();
        let t = gen.term(&[], &ty, 3);
        assert!(t.is_closed(), "case {}: {}", i, t);
        assert_eq!(infer(&TypingContext::new(), &t), Ok(ty.clone()), "case {}: {}", i, t);
    }
}

/// The three evaluation routes agree: the exact solution dominates
/// every fuel bound, stable fuel bounds equal it, and weight keys stay
/// typed and dyadic.
#[test]
fn evaluation_routes_agree_on_generated_terms() {
    let mut gen = Gen::new(0x5151_d00d_feed_cafe);
    let mut solved = 0;
    for i in 0..250 {
        let ty = gen.small_type();
        let t = gen.term(&[], &ty, 3);
        let big = eval_big(&t, 30);
        let big2 = eval_big(&t, 60);
        let small = eval_small(&t, 120);
        assert!(big.le(&big2), "case {}: fuel monotonicity", i);
        for (v, w) in big.iter() {
            assert!(is_value(v) && is_dyadic(w), "case {}", i);
            assert_eq!(infer(&TypingContext::new(), v), Ok(ty.clone()), "case {}", i);
        }
        if let Some(exact) = exact_dist(&t, 400) {
            solved += 1;
            assert!(big2.le(&exact), "case {}: big exceeds exact", i);
            assert!(small.le(&exact), "case {}: small exceeds exact", i);
            if big == big2 {
                assert_eq!(big, exact, "case {}: stable big differs from exact", i);
            }
            if small == eval_small(&t, 240) {
                assert_eq!(small, exact, "case {}: stable small differs from exact", i);
            }
        }
    }
    assert!(solved >= 200, "exact solver should handle most generated terms, got {}", solved);
}

/// On ground-type programs with exact rows, bisimilarity is exactly
/// distribution equality and simulation is exactly pointwise
/// domination.
#[test]
fn ground_type_relations_match_distribution_order() {
    let mut gen = Gen::new(0x0123_4567_89ab_cdef);
    let mut terms: Vec<Term> = Vec::new();
    while terms.len() < 18 {
        let t = gen.term(&[], &Type::Bool, 2);
        if exact_dist(&t, 400).is_some() {
            terms.push(t);
        }
    }
    let states: Vec<LmcState> =
        terms.iter().map(|t| LmcState::program(t, Type::Bool)).collect();
    let frag = build_fragment(&states, 24, &BTreeSet::new(), 3, 50_000).unwrap();
    let partition = bisim_classes(&frag);
    let sim = sim_preorder(&frag);
    for (i, a) in terms.iter().enumerate() {
        for (j, b) in terms.iter().enumerate() {
            let da = exact_dist(a, 400).unwrap();
            let db = exact_dist(b, 400).unwrap();
            let (ia, ib) = (
                frag.id_of(&states[i]).unwrap(),
                frag.id_of(&states[j]).unwrap(),
            );
            assert_eq!(
                partition.same_block(ia, ib),
                da == db,
                "bisimilarity vs distribution equality on ({}, {})",
                a,
                b
            );
            assert_eq!(
                sim.contains(&(ia, ib)),
                da.le(&db),
                "simulation vs pointwise order on ({}, {})",
                a,
                b
            );
        }
    }
}

/// The checker is symmetric: swapping the two programs swaps the
/// witness probabilities and nothing else.
#[test]
fn check_equiv_is_symmetric() {
    use pcfl::equivalence::{check_equiv, CheckConfig, Verdict};
    let mut gen = Gen::new(0x00c0_ffee_900d_beef);
    let cfg = CheckConfig { depth: 4, ..CheckConfig::default() };
    let mut refuted = 0;
    for _ in 0..40 {
        let a = gen.term(&[], &Type::Bool, 2);
        let b = gen.term(&[], &Type::Bool, 2);
        let ab = check_equiv(&a, &b, &Type::Bool, &cfg).unwrap();
        let ba = check_equiv(&b, &a, &Type::Bool, &cfg).unwrap();
        match (ab, ba) {
            (
                Verdict::NotEquivalent { witness: w1, p_left: l1, p_right: r1 },
                Verdict::NotEquivalent { witness: w2, p_left: l2, p_right: r2 },
            ) => {
                assert_eq!(w1, w2, "{} vs {}", a, b);
                assert_eq!((l1, r1), (r2, l2), "{} vs {}", a, b);
                refuted += 1;
            }
            (Verdict::EquivalentUpToBound { .. }, Verdict::EquivalentUpToBound { .. }) => {}
            (x, y) => panic!("asymmetric verdicts for {} vs {}: {:?} / {:?}", a, b, x, y),
        }
    }
    assert!(refuted >= 5, "generator should produce refutable pairs, got {}", refuted);
}

/// Every hole position of a well-typed term yields a context judgement
/// that agrees with plain typing: filling reproduces the term and the
/// type.
#[test]
fn context_typing_agrees_with_term_typing_at_every_position() {
    // all (context, subterm, binders-above-hole) decompositions
    fn split(t: &Term) -> Vec<(Context, Term, Vec<(String, Type)>)> {
        let mut out: Vec<(Context, Term, Vec<(String, Type)>)> =
            vec![(Context::Hole, t.clone(), Vec::new())];
        let lift = |inner: Vec<(Context, Term, Vec<(String, Type)>)>,
                    wrap: &dyn Fn(Context) -> Context,
                    binder: Option<(String, Type)>|
         -> Vec<(Context, Term, Vec<(String, Type)>)> {
            inner
                .into_iter()
                .map(|(c, m, mut bs)| {
                    if let Some(b) = &binder {
                        bs.insert(0, b.clone());
                    }
                    (wrap(c), m, bs)
                })
                .collect()
        };
        match t {
            Term::Var(_) | Term::Num(_) | Term::Bool(_) | Term::Nil(_) => {}
            Term::Lam(x, ty, b) => {
                let (x2, ty2) = (x.clone(), ty.clone());
                out.extend(lift(
                    split(b),
                    &move |c| Context::Lam(x2.clone(), ty2.clone(), Box::new(c)),
                    Some((x.clone(), ty.clone())),
                ));
            }
            Term::Fix(x, ty, b) => {
                let (x2, ty2) = (x.clone(), ty.clone());
                out.extend(lift(
                    split(b),
                    &move |c| Context::Fix(x2.clone(), ty2.clone(), Box::new(c)),
                    Some((x.clone(), ty.clone())),
                ));
            }
            Term::App(f, a) => {
                let a2 = a.clone();
                out.extend(lift(split(f), &move |c| Context::AppL(Box::new(c), a2.clone()), None));
                let f2 = f.clone();
                out.extend(lift(split(a), &move |c| Context::AppR(f2.clone(), Box::new(c)), None));
            }
            Term::Choice(l, r) => {
                let r2 = r.clone();
                out.extend(lift(split(l), &move |c| Context::ChoiceL(Box::new(c), r2.clone()), None));
                let l2 = l.clone();
                out.extend(lift(split(r), &move |c| Context::ChoiceR(l2.clone(), Box::new(c)), None));
            }
            Term::Pair(l, r) => {
                let r2 = r.clone();
                out.extend(lift(split(l), &move |c| Context::PairL(Box::new(c), r2.clone()), None));
                let l2 = l.clone();
                out.extend(lift(split(r), &move |c| Context::PairR(l2.clone(), Box::new(c)), None));
            }
            Term::Cons(l, r) => {
                let r2 = r.clone();
                out.extend(lift(split(l), &move |c| Context::ConsL(Box::new(c), r2.clone()), None));
                let l2 = l.clone();
                out.extend(lift(split(r), &move |c| Context::ConsR(l2.clone(), Box::new(c)), None));
            }
            Term::Op(op, l, r) => {
                let (op2, r2) = (*op, r.clone());
                out.extend(lift(split(l), &move |c| Context::OpL(op2, Box::new(c), r2.clone()), None));
                let (op3, l2) = (*op, l.clone());
                out.extend(lift(split(r), &move |c| Context::OpR(op3, l2.clone(), Box::new(c)), None));
            }
            Term::Fst(p) => {
                out.extend(lift(split(p), &|c| Context::Fst(Box::new(c)), None));
            }
            Term::Snd(p) => {
                out.extend(lift(split(p), &|c| Context::Snd(Box::new(c)), None));
            }
            Term::If(g, th, el) => {
                let (a, b) = (th.clone(), el.clone());
                out.extend(lift(split(g), &move |c| Context::IfC(Box::new(c), a.clone(), b.clone()), None));
                let (g2, b2) = (g.clone(), el.clone());
                out.extend(lift(split(th), &move |c| Context::IfT(g2.clone(), Box::new(c), b2.clone()), None));
                let (g3, a3) = (g.clone(), th.clone());
                out.extend(lift(split(el), &move |c| Context::IfE(g3.clone(), a3.clone(), Box::new(c)), None));
            }
            Term::Case { scrutinee, nil, head, tail, cons } => {
                let (n2, h2, t2, c2) = (nil.clone(), head.clone(), tail.clone(), cons.clone());
                out.extend(lift(
                    split(scrutinee),
                    &move |c| Context::CaseS {
                        scrutinee: Box::new(c),
                        nil: n2.clone(),
                        head: h2.clone(),
                        tail: t2.clone(),
                        cons: c2.clone(),
                    },
                    None,
                ));
                let (s3, h3, t3, c3) = (scrutinee.clone(), head.clone(), tail.clone(), cons.clone());
                out.extend(lift(
                    split(nil),
                    &move |c| Context::CaseN {
                        scrutinee: s3.clone(),
                        nil: Box::new(c),
                        head: h3.clone(),
                        tail: t3.clone(),
                        cons: c3.clone(),
                    },
                    None,
                ));
                // the cons branch binds head and tail around the hole;
                // their types come from the scrutinee
                if let Ok(Type::List(el)) = infer(&TypingContext::new(), scrutinee) {
                    let (s4, n4, h4, t4) = (scrutinee.clone(), nil.clone(), head.clone(), tail.clone());
                    let binders = vec![
                        (head.clone(), (*el).clone()),
                        (tail.clone(), Type::list((*el).clone())),
                    ];
                    for (c, m, mut bs) in split(cons) {
                        let mut all = binders.clone();
                        all.extend(bs.drain(..));
                        out.push((
                            Context::CaseC {
                                scrutinee: s4.clone(),
                                nil: n4.clone(),
                                head: h4.clone(),
                                tail: t4.clone(),
                                cons: Box::new(c),
                            },
                            m,
                            all,
                        ));
                    }
                }
            }
        }
        out
    }

    let mut gen = Gen::new(0xdead_beef_0451_aaaa);
    let mut positions = 0;
    for _ in 0..60 {
        let ty = gen.small_type();
        let whole = gen.term(&[], &ty, 3);
        let whole_ty = infer(&TypingContext::new(), &whole).unwrap();
        for (ctx, sub, binders) in split(&whole) {
            // generator names are globally fresh, so the binder list
            // has no duplicates and forms a typing context
            let mut delta = TypingContext::new();
            let mut ok = true;
            for (x, t) in &binders {
                match delta.extend(x, t.clone()) {
                    Ok(d) => delta = d,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let hole_ty = infer(&delta, &sub).unwrap();
            let got = check_context(&TypingContext::new(), &ctx, &delta, &hole_ty)
                .unwrap_or_else(|e| panic!("{} at {}: {}", ctx, sub, e));
            assert_eq!(got, whole_ty);
            assert_eq!(ctx.fill(&sub), whole);
            positions += 1;
        }
    }
    assert!(positions >= 500, "covered only {} positions", positions);
}
