//! Exact probabilistic operational semantics.
//!
//! `eval_big` is the fuel-bounded big-step evaluator: fuel counts
//! derivation depth, fuel 0 yields the empty distribution, and results
//! grow pointwise with fuel towards the true semantics. `eval_small`
//! chains one-step reductions, with fuel bounding the length of every
//! reduction path; the two agree in the limit.
//!
//! `exact_dist` additionally solves terms whose one-step reduction
//! graph closes within a budget: the graph is then a finite absorbing
//! Markov chain and the exact value distribution is the solution of a
//! rational linear system. This is the only way to certify an upper
//! bound on convergence (fuel alone never proves divergence).

use crate::dist::ValueDist;
use crate::rational::{rat, rat_zero, Rational};
use crate::syntax::{OpKind, Term};
use num::{BigUint, One, Zero};
use std::collections::BTreeMap;

/// True iff the term matches the value grammar. Pairs and cons cells
/// of arbitrary terms are values: pairs and lists are lazy.
pub fn is_value(term: &Term) -> bool {
    matches!(
        term,
        Term::Num(_)
            | Term::Bool(_)
            | Term::Nil(_)
            | Term::Lam(_, _, _)
            | Term::Fix(_, _, _)
            | Term::Cons(_, _)
            | Term::Pair(_, _)
    )
}

fn apply_op(op: OpKind, n: &BigUint, m: &BigUint) -> Term {
    match op {
        OpKind::Add => Term::Num(n + m),
        OpKind::Le => Term::Bool(n <= m),
        OpKind::Eq => Term::Bool(n == m),
    }
}

/// Fuel-bounded big-step evaluation. Every premise of a rule is
/// evaluated at `fuel - 1`; insufficient fuel loses mass, it never
/// fails.
pub fn eval_big(term: &Term, fuel: u64) -> ValueDist {
    if fuel == 0 {
        return ValueDist::empty();
    }
    let f = fuel - 1;
    match term {
        v if is_value(v) => ValueDist::point(v),
        Term::Op(op, l, r) => {
            let d = eval_big(l, f);
            let e = eval_big(r, f);
            let mut out = ValueDist::empty();
            for (vn, wn) in d.iter() {
                if let Term::Num(n) = vn {
                    for (vm, wm) in e.iter() {
                        if let Term::Num(m) = vm {
                            out.add_weight(&apply_op(*op, n, m), wn * wm);
                        }
                    }
                }
            }
            out
        }
        Term::App(fun, arg) => {
            let k = eval_big(fun, f);
            let fdist = eval_big(arg, f);
            let mut out = ValueDist::empty();
            for (v, wv) in fdist.iter() {
                for (w, ww) in k.iter() {
                    match w {
                        Term::Lam(x, _, body) => {
                            let res = eval_big(&body.subst(v, x), f);
                            out.add(&res.scale(&(wv * ww)));
                        }
                        Term::Fix(x, _, body) => {
                            let unfolded = Term::app(body.subst(w, x), v.clone());
                            let res = eval_big(&unfolded, f);
                            out.add(&res.scale(&(wv * ww)));
                        }
                        _ => {}
                    }
                }
            }
            out
        }
        Term::If(c, t, e) => {
            let d = eval_big(c, f);
            let mut out = ValueDist::empty();
            let wt = d.get(&Term::Bool(true));
            let we = d.get(&Term::Bool(false));
            if !wt.is_zero() {
                out.add(&eval_big(t, f).scale(&wt));
            }
            if !we.is_zero() {
                out.add(&eval_big(e, f).scale(&we));
            }
            out
        }
        Term::Case { scrutinee, nil, head, tail, cons } => {
            let d = eval_big(scrutinee, f);
            let mut out = ValueDist::empty();
            for (v, wv) in d.iter() {
                match v {
                    Term::Nil(_) => out.add(&eval_big(nil, f).scale(&wv.clone())),
                    Term::Cons(h, t) => {
                        // both components of a matched cons cell are
                        // evaluated before the branch runs, even though
                        // the cons cell itself was a lazy value
                        let g = eval_big(h, f);
                        let k = eval_big(t, f);
                        for (hv, hw) in g.iter() {
                            for (tv, tw) in k.iter() {
                                let branch = cons.subst(hv, head).subst(tv, tail);
                                let res = eval_big(&branch, f);
                                out.add(&res.scale(&(wv * hw * tw)));
                            }
                        }
                    }
                    _ => {}
                }
            }
            out
        }
        Term::Fst(p) => {
            let d = eval_big(p, f);
            let mut out = ValueDist::empty();
            for (v, wv) in d.iter() {
                if let Term::Pair(a, _) = v {
                    out.add(&eval_big(a, f).scale(wv));
                }
            }
            out
        }
        Term::Snd(p) => {
            let d = eval_big(p, f);
            let mut out = ValueDist::empty();
            for (v, wv) in d.iter() {
                if let Term::Pair(_, b) = v {
                    out.add(&eval_big(b, f).scale(wv));
                }
            }
            out
        }
        Term::Choice(l, r) => {
            let half = rat(1, 2);
            let mut out = eval_big(l, f).scale(&half);
            out.add(&eval_big(r, f).scale(&half));
            out
        }
        // free variables cannot occur in closed programs
        Term::Var(_) => ValueDist::empty(),
        _ => unreachable!("all value forms handled above"),
    }
}

/// Outcome of decomposing a closed term into evaluation context and
/// redex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    /// The term is a value; there is nothing to do.
    Value,
    /// No rule applies: the term is ill-typed.
    Stuck,
    /// The one or two (for probabilistic choice) reducts.
    Next(Vec<Term>),
}

/// One-step reduction. The decomposition into evaluation context and
/// redex is unique; well-typed non-values always make progress.
pub fn step(term: &Term) -> StepOutcome {
    use StepOutcome::*;
    if is_value(term) {
        return Value;
    }
    // plug reducts of a subterm back into the surrounding frame
    let plug = |sub: StepOutcome, f: &dyn Fn(Term) -> Term| match sub {
        Next(ts) => Next(ts.into_iter().map(f).collect()),
        Value => unreachable!("caller descends only into non-values"),
        Stuck => Stuck,
    };
    match term {
        Term::Choice(l, r) => Next(vec![(**l).clone(), (**r).clone()]),
        Term::App(f, a) => {
            if !is_value(f) {
                let f2 = a.clone();
                plug(step(f), &move |t| Term::App(Box::new(t), f2.clone()))
            } else if !is_value(a) {
                let f2 = f.clone();
                plug(step(a), &move |t| Term::App(f2.clone(), Box::new(t)))
            } else {
                match &**f {
                    Term::Lam(x, _, body) => Next(vec![body.subst(a, x)]),
                    Term::Fix(x, _, body) => {
                        Next(vec![Term::app(body.subst(f, x), (**a).clone())])
                    }
                    _ => Stuck,
                }
            }
        }
        Term::Op(op, l, r) => {
            if !is_value(l) {
                let (op2, r2) = (*op, r.clone());
                plug(step(l), &move |t| Term::Op(op2, Box::new(t), r2.clone()))
            } else if !is_value(r) {
                let (op2, l2) = (*op, l.clone());
                plug(step(r), &move |t| Term::Op(op2, l2.clone(), Box::new(t)))
            } else {
                match (&**l, &**r) {
                    (Term::Num(n), Term::Num(m)) => Next(vec![apply_op(*op, n, m)]),
                    _ => Stuck,
                }
            }
        }
        Term::Fst(p) => {
            if !is_value(p) {
                plug(step(p), &|t| Term::fst(t))
            } else {
                match &**p {
                    Term::Pair(a, _) => Next(vec![(**a).clone()]),
                    _ => Stuck,
                }
            }
        }
        Term::Snd(p) => {
            if !is_value(p) {
                plug(step(p), &|t| Term::snd(t))
            } else {
                match &**p {
                    Term::Pair(_, b) => Next(vec![(**b).clone()]),
                    _ => Stuck,
                }
            }
        }
        Term::If(c, t, e) => {
            if !is_value(c) {
                let (t2, e2) = (t.clone(), e.clone());
                plug(step(c), &move |s| Term::If(Box::new(s), t2.clone(), e2.clone()))
            } else {
                match &**c {
                    Term::Bool(true) => Next(vec![(**t).clone()]),
                    Term::Bool(false) => Next(vec![(**e).clone()]),
                    _ => Stuck,
                }
            }
        }
        Term::Case { scrutinee, nil, head, tail, cons } => {
            let rebuild = |s: Term| Term::Case {
                scrutinee: Box::new(s),
                nil: nil.clone(),
                head: head.clone(),
                tail: tail.clone(),
                cons: cons.clone(),
            };
            if !is_value(scrutinee) {
                plug(step(scrutinee), &rebuild)
            } else {
                match &**scrutinee {
                    Term::Nil(_) => Next(vec![(**nil).clone()]),
                    Term::Cons(h, t) => {
                        // the matched components are reduced in place:
                        // head first, then tail, then the branch fires
                        if !is_value(h) {
                            let t2 = t.clone();
                            plug(step(h), &move |s| rebuild(Term::Cons(Box::new(s), t2.clone())))
                        } else if !is_value(t) {
                            let h2 = h.clone();
                            plug(step(t), &move |s| rebuild(Term::Cons(h2.clone(), Box::new(s))))
                        } else {
                            Next(vec![cons.subst(h, head).subst(t, tail)])
                        }
                    }
                    _ => Stuck,
                }
            }
        }
        Term::Var(_) => Stuck,
        _ => unreachable!("values are handled before the match"),
    }
}

/// Fuel-bounded small-step evaluation; fuel bounds the number of steps
/// along every reduction path. Iterative, so deep reduction paths do
/// not consume stack.
pub fn eval_small(term: &Term, fuel: u64) -> ValueDist {
    let mut out = ValueDist::empty();
    let mut work: Vec<(Term, Rational, u64)> = vec![(term.clone(), Rational::one(), fuel)];
    while let Some((t, weight, f)) = work.pop() {
        if is_value(&t) {
            out.add_weight(&t, weight);
            continue;
        }
        if f == 0 {
            continue;
        }
        match step(&t) {
            StepOutcome::Value => unreachable!("values handled above"),
            StepOutcome::Stuck => {}
            StepOutcome::Next(reducts) => {
                let share = &weight * rat(1, reducts.len() as i64);
                for r in reducts {
                    work.push((r, share.clone(), f - 1));
                }
            }
        }
    }
    out
}

/// Exact semantics for terms whose one-step reduction graph closes
/// within `state_budget` distinct terms (up to alpha): the graph is an
/// absorbing Markov chain and absorption probabilities solve a linear
/// system over the rationals. Returns `None` when the graph does not
/// close (or a stuck term is reachable), in which case only fuel-bounded
/// lower bounds are available.
pub fn exact_dist(term: &Term, state_budget: usize) -> Option<ValueDist> {
    let root = term.canon();
    if is_value(&root) {
        return Some(ValueDist::point(&root));
    }
    // explore the reduction graph
    let mut index: BTreeMap<Term, usize> = BTreeMap::new();
    let mut nodes: Vec<Term> = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut values: Vec<bool> = Vec::new();
    let mut queue = vec![root.clone()];
    index.insert(root.clone(), 0);
    nodes.push(root);
    edges.push(Vec::new());
    values.push(false);
    let mut head = 0usize;
    while head < queue.len() {
        let t = queue[head].clone();
        let id = index[&t];
        head += 1;
        if is_value(&t) {
            values[id] = true;
            continue;
        }
        match step(&t) {
            StepOutcome::Value => values[id] = true,
            StepOutcome::Stuck => return None,
            StepOutcome::Next(reducts) => {
                for r in reducts {
                    let rc = r.canon();
                    let rid = match index.get(&rc) {
                        Some(&i) => i,
                        None => {
                            if nodes.len() >= state_budget {
                                return None;
                            }
                            let i = nodes.len();
                            index.insert(rc.clone(), i);
                            nodes.push(rc.clone());
                            edges.push(Vec::new());
                            values.push(false);
                            queue.push(rc);
                            i
                        }
                    };
                    edges[id].push(rid);
                }
            }
        }
    }

    // nodes that cannot reach any value never absorb; their whole
    // subtree contributes nothing and must leave the linear system,
    // otherwise (I - Q) is singular
    let total = nodes.len();
    let mut reaches_value = values.clone();
    loop {
        let mut changed = false;
        for i in 0..total {
            if !reaches_value[i] && edges[i].iter().any(|&j| reaches_value[j]) {
                reaches_value[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !reaches_value[0] {
        return Some(ValueDist::empty());
    }

    // x_t = sum over reducts r of (1/n) x_r, values absorb, dead nodes
    // contribute zero. Solve (I - Q) X = R by Gaussian elimination.
    let transient: Vec<usize> = (0..total).filter(|&i| !values[i] && reaches_value[i]).collect();
    let absorbing: Vec<usize> = (0..total).filter(|&i| values[i]).collect();
    let tpos: BTreeMap<usize, usize> = transient.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let apos: BTreeMap<usize, usize> = absorbing.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let n = transient.len();
    let m = absorbing.len();
    // the root is a non-value that reaches a value, so n >= 1
    debug_assert!(n >= 1);
    // augmented matrix [I - Q | R]
    let mut a: Vec<Vec<Rational>> = vec![vec![rat_zero(); n + m]; n];
    for (row, &node) in transient.iter().enumerate() {
        a[row][row] = Rational::one();
        let outs = &edges[node];
        if outs.is_empty() {
            continue;
        }
        let share = rat(1, outs.len() as i64);
        for &succ in outs {
            if let Some(&col) = tpos.get(&succ) {
                a[row][col] -= &share;
            } else if let Some(&k) = apos.get(&succ) {
                a[row][n + k] += &share;
            }
        }
    }
    // forward elimination with exact pivots; the matrix is invertible
    // because every remaining node escapes with positive probability
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for j in col..n + m {
            a[col][j] = &a[col][j] / &pivot;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in col..n + m {
                    let v = &a[col][j] * &factor;
                    a[r][j] = &a[r][j] - &v;
                }
            }
        }
    }
    let root_row = tpos[&0];
    let mut out = ValueDist::empty();
    for (k, &node) in absorbing.iter().enumerate() {
        out.add_weight(&nodes[node], a[root_row][n + k].clone());
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{is_dyadic, rat};
    use crate::syntax::{infer, parse_term, Type, TypingContext};

    fn omega(ty: Type) -> Term {
        Term::diverging(ty)
    }

    fn ident(ty: Type) -> Term {
        Term::lam("x", ty, Term::var("x"))
    }

    #[test]
    fn value_predicate() {
        assert!(is_value(&ident(Type::Bool)));
        // lazy cons: a diverging head still makes a value
        let v = Term::cons(omega(Type::Bool), Term::Nil(Type::Bool));
        assert!(is_value(&v));
        assert!(!is_value(&Term::fst(Term::pair(Term::num(1), Term::num(2)))));
    }

    #[test]
    fn diverging_term_evaluates_to_empty() {
        let o = omega(Type::Bool);
        for fuel in [0, 1, 4, 16, 64] {
            assert!(eval_big(&o, fuel).is_empty());
        }
    }

    #[test]
    fn value_is_point_distribution() {
        let i = ident(Type::Bool);
        let d = eval_big(&i, 1);
        assert_eq!(d.mass(), rat(1, 1));
        assert_eq!(d.get(&i), rat(1, 1));
    }

    #[test]
    fn choice_of_lambdas_applied() {
        // (\x. I (+) \x. omega) 0  ==>  I with probability 1/2
        let i = ident(Type::Bool);
        let lam_i = Term::lam("y", Type::Int, i.clone());
        let lam_o = Term::lam("y", Type::Int, omega(Type::arrow(Type::Bool, Type::Bool)));
        let t = Term::app(Term::choice(lam_i, lam_o), Term::num(0));
        let d = eval_big(&t, 4);
        assert_eq!(d.mass(), rat(1, 2));
        assert_eq!(d.get(&i), rat(1, 2));
    }

    #[test]
    fn geometric_distribution_from_recursion() {
        // (fix f. (\y.y) (+) (\y. f (y+1))) 0  gives  n with prob 2^-(n+1)
        let t = parse_term("(fix f:int->int. (\\y:int. y) (+) (\\y:int. f (y + 1))) 0").unwrap();
        assert_eq!(infer(&TypingContext::new(), &t).unwrap(), Type::Int);
        let d = eval_big(&t, 40);
        for n in 0u64..=10 {
            assert_eq!(d.get(&Term::num(n)), rat(1, 1 << (n + 1)), "n = {}", n);
        }
    }

    #[test]
    fn recursive_choice_mass_approaches_one() {
        let t = parse_term("(fix f:int->int. (\\y:int. y) (+) f) 0").unwrap();
        let d = eval_big(&t, 40);
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(&Term::num(0)), d.mass());
        assert!(d.mass() >= rat(1, 1) - rat(1, 1 << 10));
    }

    #[test]
    fn step_examples() {
        let o = omega(Type::Bool);
        // the diverging term unfolds in two steps and returns to itself
        let mut t = o.clone();
        for _ in 0..8 {
            match step(&t) {
                StepOutcome::Next(v) => {
                    assert_eq!(v.len(), 1);
                    t = v.into_iter().next().unwrap();
                }
                other => panic!("unexpected {:?}", other),
            }
        }
        assert!(t.alpha_eq(&o) || step(&t) != StepOutcome::Stuck);

        assert_eq!(
            step(&Term::choice(Term::num(1), Term::num(2))),
            StepOutcome::Next(vec![Term::num(1), Term::num(2)])
        );
        // projection discards the diverging component without running it
        let t = Term::fst(Term::pair(Term::num(1), omega(Type::Int)));
        assert_eq!(step(&t), StepOutcome::Next(vec![Term::num(1)]));
    }

    #[test]
    fn small_step_examples() {
        let i = ident(Type::Bool);
        assert_eq!(eval_small(&i, 0), ValueDist::point(&i));

        let t = Term::choice(i.clone(), omega(Type::arrow(Type::Bool, Type::Bool)));
        let d = eval_small(&t, 50);
        assert_eq!(d.mass(), rat(1, 2));
        assert_eq!(d.get(&i), rat(1, 2));

        let t = parse_term("(fix f:int->int. (\\y:int. y) (+) f) 0").unwrap();
        let d = eval_small(&t, 60);
        assert_eq!(d.len(), 1);
        assert!(d.mass() >= rat(1, 1) - rat(1, 1 << 10));
        assert!(d.mass() < rat(1, 1));
    }

    #[test]
    fn big_step_monotone_in_fuel() {
        let samples = [
            "(fix f:int->int. (\\y:int. y) (+) (\\y:int. f (y + 1))) 0",
            "(\\x:bool. x) (true (+) false)",
            "fst (1 (+) 2, 3)",
            "case (1 (+) 2) :: nil[int] of { nil -> 0 | h::t -> h + 1 }",
        ];
        for s in samples {
            let t = parse_term(s).unwrap();
            let mut prev = eval_big(&t, 0);
            for fuel in 1..=14 {
                let cur = eval_big(&t, fuel);
                assert!(prev.le(&cur), "fuel {} not monotone for {}", fuel, s);
                prev = cur;
            }
        }
    }

    #[test]
    fn operator_semantics_on_literals() {
        let cases = [
            ("2 + 3", Term::num(5)),
            ("2 <= 3", Term::Bool(true)),
            ("3 <= 2", Term::Bool(false)),
            ("3 <= 3", Term::Bool(true)),
            ("3 == 3", Term::Bool(true)),
            ("3 == 4", Term::Bool(false)),
        ];
        for (src, want) in cases {
            let t = parse_term(src).unwrap();
            assert_eq!(eval_big(&t, 4), ValueDist::point(&want), "{}", src);
            assert_eq!(eval_small(&t, 4), ValueDist::point(&want), "{}", src);
        }
    }

    #[test]
    fn weights_are_dyadic_and_typed() {
        let src = "(\\x:bool. if x then 1 (+) (2 (+) 3) else 0) (true (+) false)";
        let t = parse_term(src).unwrap();
        let ty = infer(&TypingContext::new(), &t).unwrap();
        let d = eval_big(&t, 16);
        for (v, w) in d.iter() {
            assert!(is_dyadic(w));
            assert_eq!(infer(&TypingContext::new(), v).unwrap(), ty);
        }
        assert_eq!(d.mass(), rat(1, 1));
    }

    #[test]
    fn beta_value_law() {
        // ((\x.M) V) and M[V/x] agree once both are stable
        let m = parse_term("\\x:bool. if x then 0 (+) 1 else 2").unwrap();
        let v = Term::Bool(true);
        let app = Term::app(m.clone(), v.clone());
        let substed = match &m {
            Term::Lam(x, _, body) => body.subst(&v, x),
            _ => unreachable!(),
        };
        for fuel in 2..10 {
            let left = eval_big(&app, fuel + 2);
            let right = eval_big(&substed, fuel + 2);
            assert!(left.le(&right));
        }
        assert_eq!(eval_big(&app, 20), eval_big(&substed, 20));
    }

    #[test]
    fn exact_solver_matches_limits() {
        // diverging term: provably empty
        let o = omega(Type::Bool);
        assert_eq!(exact_dist(&o, 100), Some(ValueDist::empty()));

        // half-diverging choice: exactly 1/2
        let i = ident(Type::Bool);
        let t = Term::choice(i.clone(), omega(Type::arrow(Type::Bool, Type::Bool)));
        let d = exact_dist(&t, 100).unwrap();
        assert_eq!(d.mass(), rat(1, 2));
        assert_eq!(d.get(&i), rat(1, 2));

        // recursive loop with escape: mass exactly 1
        let t = parse_term("(fix f:int->int. (\\y:int. y) (+) f) 0").unwrap();
        let d = exact_dist(&t, 100).unwrap();
        assert_eq!(d.mass(), rat(1, 1));
        assert_eq!(d.get(&Term::num(0)), rat(1, 1));

        // infinite graph: no exact answer
        let t = parse_term("(fix f:int->int. (\\y:int. y) (+) (\\y:int. f (y + 1))) 0").unwrap();
        assert_eq!(exact_dist(&t, 200), None);
    }

    #[test]
    fn exact_solver_agrees_with_fuel_lower_bounds() {
        let samples = [
            "(\\x:bool. x) (true (+) false)",
            "if true (+) false then 1 else 2 (+) 3",
            "fst ((true, 0), \\x:int. x)",
        ];
        for s in samples {
            let t = parse_term(s).unwrap();
            let exact = exact_dist(&t, 500).unwrap();
            let lower = eval_big(&t, 30);
            assert!(lower.le(&exact), "{}", s);
            assert_eq!(lower, exact, "{} should be stable at fuel 30", s);
        }
    }
}
