//! Finite fragments of the applicative labelled Markov chain.
//!
//! States are typed closed programs `(M, σ)` and distinguished values
//! `(V̂, σ)`; the two are different states even when `M` is a value.
//! Labels are evaluation, argument passing (restricted to a finite
//! universe of closed values), projections, list destructors, literal
//! observations and a self-loop per type. Evaluation rows are exact
//! when the term's reduction graph closes within a budget; otherwise
//! they are fuel-bounded lower bounds with the missing mass recorded as
//! the row's deficit, so downstream analyses can work with sound
//! probability intervals.

use crate::dist::ValueDist;
use crate::eval::{eval_big, exact_dist, is_value};
use crate::rational::{format_rational, rat_one, rat_zero, Rational};
use crate::syntax::{infer, Term, Type, TypingContext};
use num::{BigUint, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Terms whose reduction graph stays within this many distinct nodes
/// get exact evaluation rows (deficit zero).
pub const EXACT_SOLVE_BUDGET: usize = 192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateKind {
    Program,
    ValueHat,
}

/// A chain state: a closed well-typed term together with its type, as
/// a program or as a distinguished value. Terms are stored canonically,
/// so alpha-variants collapse into one state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LmcState {
    pub kind: StateKind,
    pub term: Term,
    pub ty: Type,
}

impl LmcState {
    pub fn program(term: &Term, ty: Type) -> Self {
        LmcState { kind: StateKind::Program, term: term.canon(), ty }
    }

    pub fn value_hat(term: &Term, ty: Type) -> Self {
        debug_assert!(is_value(term));
        LmcState { kind: StateKind::ValueHat, term: term.canon(), ty }
    }
}

impl std::fmt::Display for LmcState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            StateKind::Program => write!(f, "({} : {})", self.term, self.ty),
            StateKind::ValueHat => write!(f, "(^{} : {})", self.term, self.ty),
        }
    }
}

/// Transition labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Eval,
    Arg(Term),
    FstL,
    SndL,
    Hd,
    Tl,
    NilL,
    Num(BigUint),
    BoolL(bool),
    TypeLbl(Type),
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Eval => write!(f, "eval"),
            Label::Arg(v) => write!(f, "arg({})", v),
            Label::FstL => write!(f, "fst"),
            Label::SndL => write!(f, "snd"),
            Label::Hd => write!(f, "hd"),
            Label::Tl => write!(f, "tl"),
            Label::NilL => write!(f, "nil"),
            Label::Num(n) => write!(f, "num({})", n),
            Label::BoolL(b) => write!(f, "bool({})", b),
            Label::TypeLbl(t) => write!(f, "ty({})", t),
        }
    }
}

/// The matrix row of `state` under `label`, with argument labels
/// restricted to `arg_universe`. Evaluation rows come from the
/// fuel-bounded evaluator, a lower bound of the true semantics; rows
/// not defined by the chain are empty.
pub fn successors(
    state: &LmcState,
    label: &Label,
    fuel: u64,
    arg_universe: &BTreeSet<Term>,
) -> BTreeMap<LmcState, Rational> {
    let (dist, _) = eval_row_with(state, label, arg_universe, |m| (eval_big(m, fuel), false));
    dist
}

/// Shared row construction. `eval_with` supplies the value distribution
/// of a program together with an exactness flag; the returned deficit
/// is `1 - mass` on fuel-bounded evaluation rows and zero on exact ones
/// (there the missing mass is proven divergence, not ignorance).
fn eval_row_with(
    state: &LmcState,
    label: &Label,
    arg_universe: &BTreeSet<Term>,
    eval_with: impl Fn(&Term) -> (ValueDist, bool),
) -> (BTreeMap<LmcState, Rational>, Rational) {
    let mut row = BTreeMap::new();
    let mut deficit = rat_zero();
    match (&state.kind, label) {
        (_, Label::TypeLbl(t)) => {
            if *t == state.ty {
                row.insert(state.clone(), rat_one());
            }
        }
        (StateKind::Program, Label::Eval) => {
            let (dist, exact) = eval_with(&state.term);
            for (v, w) in dist.iter() {
                row.insert(LmcState::value_hat(v, state.ty.clone()), w.clone());
            }
            if !exact {
                deficit = rat_one() - dist.mass();
            }
        }
        (StateKind::Program, _) => {}
        (StateKind::ValueHat, Label::Arg(w)) => {
            if let Type::Arrow(dom, cod) = &state.ty {
                let ok = arg_universe.contains(&w.canon())
                    && infer(&TypingContext::new(), w).ok().as_ref() == Some(dom.as_ref());
                if ok {
                    match &state.term {
                        Term::Lam(x, _, body) => {
                            row.insert(
                                LmcState::program(&body.subst(w, x), (**cod).clone()),
                                rat_one(),
                            );
                        }
                        Term::Fix(x, _, body) => {
                            let unfolded = Term::app(body.subst(&state.term, x), w.clone());
                            row.insert(LmcState::program(&unfolded, (**cod).clone()), rat_one());
                        }
                        _ => {}
                    }
                }
            }
        }
        (StateKind::ValueHat, Label::FstL) => {
            if let (Type::Prod(a, _), Term::Pair(l, _)) = (&state.ty, &state.term) {
                row.insert(LmcState::program(l, (**a).clone()), rat_one());
            }
        }
        (StateKind::ValueHat, Label::SndL) => {
            if let (Type::Prod(_, b), Term::Pair(_, r)) = (&state.ty, &state.term) {
                row.insert(LmcState::program(r, (**b).clone()), rat_one());
            }
        }
        (StateKind::ValueHat, Label::Num(k)) => {
            if let (Type::Int, Term::Num(n)) = (&state.ty, &state.term) {
                if n == k {
                    row.insert(state.clone(), rat_one());
                }
            }
        }
        (StateKind::ValueHat, Label::BoolL(b)) => {
            if let (Type::Bool, Term::Bool(v)) = (&state.ty, &state.term) {
                if v == b {
                    row.insert(state.clone(), rat_one());
                }
            }
        }
        (StateKind::ValueHat, Label::NilL) => {
            if let (Type::List(_), Term::Nil(_)) = (&state.ty, &state.term) {
                row.insert(state.clone(), rat_one());
            }
        }
        (StateKind::ValueHat, Label::Hd) => {
            if let (Type::List(el), Term::Cons(h, _)) = (&state.ty, &state.term) {
                row.insert(LmcState::program(h, (**el).clone()), rat_one());
            }
        }
        (StateKind::ValueHat, Label::Tl) => {
            if let (Type::List(_), Term::Cons(_, t)) = (&state.ty, &state.term) {
                row.insert(LmcState::program(t, state.ty.clone()), rat_one());
            }
        }
        (StateKind::ValueHat, Label::Eval) => {}
    }
    (row, deficit)
}

/// The labels a state can expose, given the argument universe.
fn out_labels(state: &LmcState, arg_universe: &BTreeSet<Term>) -> Vec<Label> {
    let mut labels = vec![Label::TypeLbl(state.ty.clone())];
    match state.kind {
        StateKind::Program => labels.push(Label::Eval),
        StateKind::ValueHat => match (&state.ty, &state.term) {
            (Type::Arrow(dom, _), _) => {
                for w in arg_universe {
                    if infer(&TypingContext::new(), w).ok().as_ref() == Some(dom.as_ref()) {
                        labels.push(Label::Arg(w.clone()));
                    }
                }
            }
            (Type::Prod(_, _), _) => {
                labels.push(Label::FstL);
                labels.push(Label::SndL);
            }
            (Type::Int, Term::Num(n)) => labels.push(Label::Num(n.clone())),
            (Type::Bool, Term::Bool(b)) => labels.push(Label::BoolL(*b)),
            (Type::List(_), Term::Nil(_)) => labels.push(Label::NilL),
            (Type::List(_), Term::Cons(_, _)) => {
                labels.push(Label::Hd);
                labels.push(Label::Tl);
            }
            _ => {}
        },
    }
    labels
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LmcError {
    #[error("state cap exceeded: fragment needs more than {0} states")]
    StateCap(usize),
}

/// An explored, immutable piece of the chain. States carry stable ids
/// in breadth-first discovery order. `frontier` lists states whose rows
/// were not explored; their behaviour is unknown.
#[derive(Debug, Clone)]
pub struct LmcFragment {
    states: Vec<LmcState>,
    index: BTreeMap<LmcState, usize>,
    transitions: BTreeMap<(usize, Label), BTreeMap<usize, Rational>>,
    deficits: BTreeMap<(usize, Label), Rational>,
    frontier: BTreeSet<usize>,
    arg_universe: BTreeSet<Term>,
    fuel: u64,
    empty_row: BTreeMap<usize, Rational>,
}

impl LmcFragment {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: usize) -> &LmcState {
        &self.states[id]
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, &LmcState)> {
        self.states.iter().enumerate()
    }

    pub fn id_of(&self, state: &LmcState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn is_frontier(&self, id: usize) -> bool {
        self.frontier.contains(&id)
    }

    pub fn frontier(&self) -> impl Iterator<Item = usize> + '_ {
        self.frontier.iter().copied()
    }

    pub fn arg_universe(&self) -> &BTreeSet<Term> {
        &self.arg_universe
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    /// The known row of an expanded state; `None` for frontier states
    /// (unknown, not empty).
    pub fn row(&self, id: usize, label: &Label) -> Option<&BTreeMap<usize, Rational>> {
        if self.is_frontier(id) {
            return None;
        }
        Some(self.transitions.get(&(id, label.clone())).unwrap_or(&self.empty_row))
    }

    pub fn deficit(&self, id: usize, label: &Label) -> Rational {
        self.deficits.get(&(id, label.clone())).cloned().unwrap_or_else(rat_zero)
    }

    /// Labels with a stored row anywhere in the fragment.
    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.transitions.keys().map(|(_, l)| l.clone()).collect()
    }

    /// Labels with a stored row at a specific state.
    pub fn labels_at(&self, id: usize) -> BTreeSet<Label> {
        self.transitions
            .keys()
            .filter(|(s, _)| *s == id)
            .map(|(_, l)| l.clone())
            .collect()
    }

    /// JSON export: states with stable ids, labelled edges with exact
    /// weights, and per-row deficits.
    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<_> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                serde_json::json!({
                    "id": i,
                    "kind": match s.kind { StateKind::Program => "program", StateKind::ValueHat => "value" },
                    "term": s.term.to_string(),
                    "type": s.ty.to_string(),
                    "frontier": self.is_frontier(i),
                })
            })
            .collect();
        let edges: Vec<_> = self
            .transitions
            .iter()
            .flat_map(|((s, l), row)| {
                row.iter().map(move |(t, w)| {
                    serde_json::json!({
                        "from": s,
                        "label": l.to_string(),
                        "to": t,
                        "prob": format_rational(w),
                    })
                })
            })
            .collect();
        let deficits: Vec<_> = self
            .deficits
            .iter()
            .filter(|(_, d)| !d.is_zero())
            .map(|((s, l), d)| {
                serde_json::json!({
                    "state": s,
                    "label": l.to_string(),
                    "deficit": format_rational(d),
                })
            })
            .collect();
        serde_json::json!({
            "fuel": self.fuel,
            "arg_universe": self.arg_universe.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "states": states,
            "edges": edges,
            "deficits": deficits,
        })
    }
}

/// Breadth-first closure of the transition relation up to `depth`
/// label-steps from `roots`. States discovered at distance `depth` stay
/// unexpanded, in the frontier. Rows use the exact solver when the
/// reduction graph closes, and fuel-bounded lower bounds with recorded
/// deficits otherwise.
pub fn build_fragment(
    roots: &[LmcState],
    fuel: u64,
    arg_universe: &BTreeSet<Term>,
    depth: usize,
    state_cap: usize,
) -> Result<LmcFragment, LmcError> {
    let arg_universe: BTreeSet<Term> = arg_universe.iter().map(|t| t.canon()).collect();
    let mut frag = LmcFragment {
        states: Vec::new(),
        index: BTreeMap::new(),
        transitions: BTreeMap::new(),
        deficits: BTreeMap::new(),
        frontier: BTreeSet::new(),
        arg_universe: arg_universe.clone(),
        fuel,
        empty_row: BTreeMap::new(),
    };
    let mut dist_of: Vec<usize> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    let intern = |frag: &mut LmcFragment,
                      dist_of: &mut Vec<usize>,
                      queue: &mut Vec<usize>,
                      s: LmcState,
                      d: usize|
     -> Result<usize, LmcError> {
        if let Some(&id) = frag.index.get(&s) {
            return Ok(id);
        }
        if frag.states.len() >= state_cap {
            return Err(LmcError::StateCap(state_cap));
        }
        let id = frag.states.len();
        frag.index.insert(s.clone(), id);
        frag.states.push(s);
        dist_of.push(d);
        queue.push(id);
        Ok(id)
    };
    for r in roots {
        intern(&mut frag, &mut dist_of, &mut queue, r.clone(), 0)?;
    }
    let evaluate = |m: &Term| -> (ValueDist, bool) {
        match exact_dist(m, EXACT_SOLVE_BUDGET) {
            Some(d) => (d, true),
            None => (eval_big(m, fuel), false),
        }
    };
    let mut head = 0usize;
    while head < queue.len() {
        let id = queue[head];
        head += 1;
        let d = dist_of[id];
        if d >= depth {
            frag.frontier.insert(id);
            continue;
        }
        let state = frag.states[id].clone();
        for label in out_labels(&state, &arg_universe) {
            let (row, deficit) = eval_row_with(&state, &label, &arg_universe, evaluate);
            let mut stored: BTreeMap<usize, Rational> = BTreeMap::new();
            for (target, w) in row {
                let tid = intern(&mut frag, &mut dist_of, &mut queue, target, d + 1)?;
                stored.insert(tid, w);
            }
            if matches!(label, Label::Eval) || !stored.is_empty() {
                frag.transitions.insert((id, label.clone()), stored);
            }
            if !deficit.is_zero() {
                frag.deficits.insert((id, label), deficit);
            }
        }
    }
    Ok(frag)
}

/// All closed terms of a given type with bounded syntax-tree size,
/// in deterministic order: variables in scope, numeric and boolean
/// literals, value forms with enumerated bodies, a diverging program,
/// and binary choices of smaller terms.
fn enumerate_terms(env: &[(String, Type)], ty: &Type, size: usize) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    if size == 0 {
        return out;
    }
    for (x, t) in env {
        if t == ty {
            out.push(Term::var(x));
        }
    }
    match ty {
        Type::Bool => {
            out.push(Term::Bool(false));
            out.push(Term::Bool(true));
        }
        Type::Int => {
            for n in 0..=(size as u64) {
                out.push(Term::num(n));
            }
        }
        Type::Arrow(dom, cod) => {
            if size >= 2 {
                let var = format!("a{}", env.len());
                let mut env2 = env.to_vec();
                env2.push((var.clone(), (**dom).clone()));
                for body in enumerate_terms(&env2, cod, size - 1) {
                    out.push(Term::Lam(var.clone(), (**dom).clone(), Box::new(body)));
                }
                let fvar = format!("g{}", env.len());
                let mut env3 = env.to_vec();
                env3.push((fvar.clone(), ty.clone()));
                for body in enumerate_terms(&env3, ty, size - 1) {
                    out.push(Term::Fix(fvar.clone(), ty.clone(), Box::new(body)));
                }
            }
        }
        Type::Prod(a, b) => {
            if size >= 3 {
                for l in enumerate_terms(env, a, size - 2) {
                    for r in enumerate_terms(env, b, size - 1 - l.size()) {
                        out.push(Term::pair(l.clone(), r));
                    }
                }
            }
        }
        Type::List(el) => {
            out.push(Term::Nil((**el).clone()));
            if size >= 3 {
                for h in enumerate_terms(env, el, size - 2) {
                    for t in enumerate_terms(env, ty, size - 1 - h.size()) {
                        out.push(Term::cons(h.clone(), t));
                    }
                }
            }
        }
    }
    if size >= 4 {
        out.push(Term::diverging(ty.clone()));
    }
    // dedup up to alpha, preserving first occurrence order
    let mut seen = BTreeSet::new();
    out.retain(|t| seen.insert(t.canon()));
    out
}

/// All closed values of type `ty` with syntax-tree size at most
/// `size_bound`, deterministically ordered. Numeric literals are capped
/// at the bound.
pub fn enumerate_values(ty: &Type, size_bound: usize) -> Vec<Term> {
    enumerate_terms(&[], ty, size_bound)
        .into_iter()
        .filter(is_value)
        .collect()
}

/// The argument universe for analyses rooted at type `ty`: enumerated
/// values for every arrow domain occurring inside `ty`.
pub fn arg_universe_for(ty: &Type, size_bound: usize) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for sub in ty.subtypes() {
        if let Type::Arrow(dom, _) = sub {
            for v in enumerate_values(&dom, size_bound) {
                out.insert(v.canon());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::syntax::parse_term;

    fn bb() -> Type {
        Type::arrow(Type::Bool, Type::Bool)
    }

    #[test]
    fn lambda_hat_argument_transition() {
        let v = parse_term("\\x:bool. x (+) true").unwrap();
        let hat = LmcState::value_hat(&v, bb());
        let universe: BTreeSet<Term> = [Term::Bool(true).canon()].into_iter().collect();
        let row = successors(&hat, &Label::Arg(Term::Bool(true)), 8, &universe);
        assert_eq!(row.len(), 1);
        let expect = LmcState::program(&parse_term("true (+) true").unwrap(), Type::Bool);
        assert_eq!(row.get(&expect), Some(&rat(1, 1)));
    }

    #[test]
    fn eval_row_from_evaluator() {
        // I (+) Omega at bool->bool evaluates to I-hat with 1/2
        let i = parse_term("\\x:bool. x").unwrap();
        let t = Term::choice(i.clone(), Term::diverging(bb()));
        let s = LmcState::program(&t, bb());
        let row = successors(&s, &Label::Eval, 2, &BTreeSet::new());
        assert_eq!(row.len(), 1);
        assert_eq!(row.get(&LmcState::value_hat(&i, bb())), Some(&rat(1, 2)));
    }

    #[test]
    fn numeral_self_loop_and_mismatch() {
        let five = Term::num(5);
        let hat = LmcState::value_hat(&five, Type::Int);
        let row = successors(&hat, &Label::Num(BigUint::from(5u32)), 2, &BTreeSet::new());
        assert_eq!(row.get(&hat), Some(&rat(1, 1)));
        let row = successors(&hat, &Label::Num(BigUint::from(4u32)), 2, &BTreeSet::new());
        assert!(row.is_empty());
    }

    #[test]
    fn fragment_depth_zero_is_all_frontier() {
        let s = LmcState::program(&Term::Bool(true), Type::Bool);
        let frag = build_fragment(&[s.clone()], 8, &BTreeSet::new(), 0, 100).unwrap();
        assert_eq!(frag.len(), 1);
        assert!(frag.is_frontier(0));
        assert_eq!(frag.row(0, &Label::Eval), None);
    }

    #[test]
    fn fragment_identity_structure() {
        let i = parse_term("\\x:bool. x").unwrap();
        let root = LmcState::program(&i, bb());
        let universe = arg_universe_for(&bb(), 1);
        let frag = build_fragment(&[root.clone()], 8, &universe, 1, 1000).unwrap();
        // root plus its hat
        assert_eq!(frag.id_of(&root), Some(0));
        let hat = LmcState::value_hat(&i, bb());
        let hid = frag.id_of(&hat).expect("hat discovered");
        assert!(frag.is_frontier(hid));
        let row = frag.row(0, &Label::Eval).unwrap();
        assert_eq!(row.get(&hid), Some(&rat(1, 1)));
        // type self-loop present on the expanded root
        let tyrow = frag.row(0, &Label::TypeLbl(bb())).unwrap();
        assert_eq!(tyrow.get(&0), Some(&rat(1, 1)));
    }

    #[test]
    fn exact_rows_have_no_deficit() {
        let t = Term::choice(parse_term("\\x:bool. x").unwrap(), Term::diverging(bb()));
        let root = LmcState::program(&t, bb());
        let frag = build_fragment(&[root], 8, &BTreeSet::new(), 2, 1000).unwrap();
        assert_eq!(frag.deficit(0, &Label::Eval), rat(0, 1));
        let row = frag.row(0, &Label::Eval).unwrap();
        let total: Rational = row.values().fold(rat(0, 1), |a, b| a + b);
        assert_eq!(total, rat(1, 2));
    }

    #[test]
    fn unsolvable_rows_keep_deficit() {
        let t = parse_term("(fix f:int->int. (\\y:int. y) (+) (\\y:int. f (y + 1))) 0").unwrap();
        let root = LmcState::program(&t, Type::Int);
        let frag = build_fragment(&[root], 8, &BTreeSet::new(), 1, 10_000).unwrap();
        let deficit = frag.deficit(0, &Label::Eval);
        assert!(deficit > rat(0, 1) && deficit < rat(1, 1));
        // and widening the fuel shrinks it
        let t2 = parse_term("(fix f:int->int. (\\y:int. y) (+) (\\y:int. f (y + 1))) 0").unwrap();
        let frag2 = build_fragment(&[LmcState::program(&t2, Type::Int)], 16, &BTreeSet::new(), 1, 10_000).unwrap();
        assert!(frag2.deficit(0, &Label::Eval) < deficit);
    }

    #[test]
    fn state_cap_is_enforced() {
        let t = parse_term("(fix f:int->int. (\\y:int. y) (+) (\\y:int. f (y + 1))) 0").unwrap();
        let root = LmcState::program(&t, Type::Int);
        let err = build_fragment(&[root], 24, &BTreeSet::new(), 3, 4).unwrap_err();
        assert_eq!(err, LmcError::StateCap(4));
    }

    #[test]
    fn enumerate_values_examples() {
        assert_eq!(
            enumerate_values(&Type::Bool, 1),
            vec![Term::Bool(false), Term::Bool(true)]
        );
        let ints = enumerate_values(&Type::Int, 1);
        assert_eq!(ints, vec![Term::num(0), Term::num(1)]);
        assert_eq!(enumerate_values(&Type::list(Type::Bool), 1), vec![Term::Nil(Type::Bool)]);
        // arrows need a binder and a body
        let funs = enumerate_values(&bb(), 2);
        assert!(funs.iter().any(|f| f.alpha_eq(&parse_term("\\x:bool. x").unwrap())));
        assert!(funs.iter().any(|f| f.alpha_eq(&parse_term("\\x:bool. true").unwrap())));
        for f in &funs {
            assert!(is_value(f) && f.is_closed());
            assert_eq!(infer(&TypingContext::new(), f).unwrap(), bb());
        }
    }

    #[test]
    fn row_stochasticity_bound() {
        let t = parse_term("(\\x:bool. x) (true (+) false)").unwrap();
        let root = LmcState::program(&t, Type::Bool);
        let frag = build_fragment(&[root], 8, &BTreeSet::new(), 3, 1000).unwrap();
        for (id, _) in frag.states() {
            if frag.is_frontier(id) {
                continue;
            }
            for label in frag.labels_at(id) {
                let row = frag.row(id, &label).unwrap();
                let total: Rational = row.values().fold(rat(0, 1), |a, b| a + b);
                assert!(&total + frag.deficit(id, &label) <= rat(1, 1));
                // non-eval rows are deterministic
                if label != Label::Eval && !row.is_empty() {
                    assert_eq!(row.len(), 1);
                    assert_eq!(total, rat(1, 1));
                }
            }
        }
    }
}
