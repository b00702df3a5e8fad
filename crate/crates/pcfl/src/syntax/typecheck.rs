//! Type assignment for terms and one-hole contexts.
//!
//! Checking is syntax-directed thanks to binder annotations; there is no
//! inference or unification. Context judgements `Γ ⊢ C (Δ; σ) : τ` track
//! the typing context Δ available to the term that will fill the hole:
//! binders crossed on the hole path either move from Δ into Γ (capture
//! is intended) or, when absent from Δ, are weakened away (the filling
//! term cannot mention them).

use super::{Context, Term, Type};
use std::collections::BTreeMap;
use thiserror::Error;

/// A finite partial map from variables to types. Each variable is bound
/// at most once; `extend` fails on clashes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypingContext(BTreeMap<String, Type>);

impl TypingContext {
    pub fn new() -> Self {
        TypingContext(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Type)>) -> Self {
        TypingContext(pairs.into_iter().collect())
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.0.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.contains_key(x)
    }

    /// `(x:σ, Γ)`, defined only when `x ∉ dom(Γ)`.
    pub fn extend(&self, x: &str, ty: Type) -> Result<TypingContext, TypeError> {
        if self.contains(x) {
            return Err(TypeError::DuplicateBinding(x.to_string()));
        }
        let mut m = self.0.clone();
        m.insert(x.to_string(), ty);
        Ok(TypingContext(m))
    }

    /// Scoped insertion used while descending under binders: an inner
    /// binder shadows an outer one, which is exactly the behaviour of
    /// the alpha-equivalence class of the term.
    fn shadow(&self, x: &str, ty: Type) -> TypingContext {
        let mut m = self.0.clone();
        m.insert(x.to_string(), ty);
        TypingContext(m)
    }

    fn remove(&self, x: &str) -> TypingContext {
        let mut m = self.0.clone();
        m.remove(x);
        TypingContext(m)
    }

    pub fn is_disjoint(&self, other: &TypingContext) -> bool {
        self.0.keys().all(|k| !other.contains(k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Type)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("variable `{0}` is already bound")]
    DuplicateBinding(String),
    #[error("expected type {expected}, found {found}")]
    Mismatch { expected: Type, found: Type },
    #[error("applied a term of non-function type {0}")]
    NotAFunction(Type),
    #[error("`if` branches have different types: {0} and {1}")]
    BranchMismatch(Type, Type),
    #[error("choice arms have different types: {0} and {1}")]
    ChoiceMismatch(Type, Type),
    #[error("fixpoint at non-function type {0}")]
    FixNotFunction(Type),
    #[error("fixpoint body has type {found}, annotation says {annotated}")]
    FixBodyMismatch { annotated: Type, found: Type },
    #[error("projection from non-product type {0}")]
    NotAProduct(Type),
    #[error("case scrutinee has non-list type {0}")]
    NotAList(Type),
}

/// Returns the unique type of `term` under `ctx`, or the first rule
/// violation encountered.
pub fn infer(ctx: &TypingContext, term: &Term) -> Result<Type, TypeError> {
    match term {
        Term::Var(x) => ctx.lookup(x).cloned().ok_or_else(|| TypeError::Unbound(x.clone())),
        Term::Num(_) => Ok(Type::Int),
        Term::Bool(_) => Ok(Type::Bool),
        Term::Nil(t) => Ok(Type::list(t.clone())),
        Term::Pair(a, b) => Ok(Type::prod(infer(ctx, a)?, infer(ctx, b)?)),
        Term::Cons(h, t) => {
            let ht = infer(ctx, h)?;
            let tt = infer(ctx, t)?;
            let want = Type::list(ht);
            if tt == want {
                Ok(want)
            } else {
                Err(TypeError::Mismatch { expected: want, found: tt })
            }
        }
        Term::Lam(x, t, body) => {
            let inner = ctx.shadow(x, t.clone());
            Ok(Type::arrow(t.clone(), infer(&inner, body)?))
        }
        Term::Fix(x, t, body) => {
            if !t.is_function() {
                return Err(TypeError::FixNotFunction(t.clone()));
            }
            let inner = ctx.shadow(x, t.clone());
            let bt = infer(&inner, body)?;
            if bt == *t {
                Ok(bt)
            } else {
                Err(TypeError::FixBodyMismatch { annotated: t.clone(), found: bt })
            }
        }
        Term::Choice(a, b) => {
            let ta = infer(ctx, a)?;
            let tb = infer(ctx, b)?;
            if ta == tb {
                Ok(ta)
            } else {
                Err(TypeError::ChoiceMismatch(ta, tb))
            }
        }
        Term::If(c, t, e) => {
            let tc = infer(ctx, c)?;
            if tc != Type::Bool {
                return Err(TypeError::Mismatch { expected: Type::Bool, found: tc });
            }
            let tt = infer(ctx, t)?;
            let te = infer(ctx, e)?;
            if tt == te {
                Ok(tt)
            } else {
                Err(TypeError::BranchMismatch(tt, te))
            }
        }
        Term::Op(op, a, b) => {
            for side in [a, b] {
                let t = infer(ctx, side)?;
                if t != Type::Int {
                    return Err(TypeError::Mismatch { expected: Type::Int, found: t });
                }
            }
            Ok(op.result_type())
        }
        Term::Fst(p) => match infer(ctx, p)? {
            Type::Prod(a, _) => Ok(*a),
            other => Err(TypeError::NotAProduct(other)),
        },
        Term::Snd(p) => match infer(ctx, p)? {
            Type::Prod(_, b) => Ok(*b),
            other => Err(TypeError::NotAProduct(other)),
        },
        Term::Case { scrutinee, nil, head, tail, cons } => {
            let st = infer(ctx, scrutinee)?;
            let elem = match st {
                Type::List(e) => *e,
                other => return Err(TypeError::NotAList(other)),
            };
            let tn = infer(ctx, nil)?;
            let inner = ctx.shadow(head, elem.clone()).shadow(tail, Type::list(elem));
            let tc = infer(&inner, cons)?;
            if tn == tc {
                Ok(tn)
            } else {
                Err(TypeError::BranchMismatch(tn, tc))
            }
        }
        Term::App(f, a) => match infer(ctx, f)? {
            Type::Arrow(dom, cod) => {
                let ta = infer(ctx, a)?;
                if ta == *dom {
                    Ok(*cod)
                } else {
                    Err(TypeError::Mismatch { expected: *dom, found: ta })
                }
            }
            other => Err(TypeError::NotAFunction(other)),
        },
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ContextTypeError {
    #[error("context has {0} holes, expected exactly one")]
    HoleCount(usize),
    #[error("hole typing context clashes with the ambient context on `{0}`")]
    HoleClash(String),
    #[error("binder `{binder}` crosses the hole with annotation {annotated}, but the hole context assigns it {assigned}")]
    BinderMismatch { binder: String, annotated: Type, assigned: Type },
    #[error("binder `{0}` shadows a variable already in scope on the hole path")]
    BinderShadows(String),
    #[error(transparent)]
    Term(#[from] TypeError),
}

/// Checks `gamma ⊢ ctx (delta; hole_ty) : τ` and returns τ.
///
/// Subterms off the hole path are checked with `infer` under `gamma`
/// alone. A binder on the hole path whose variable occurs in `delta`
/// must agree with its assigned type and moves into scope (the filled
/// term may mention it and will be captured); a binder absent from
/// `delta` is weakened away.
pub fn check_context(
    gamma: &TypingContext,
    ctx: &Context,
    delta: &TypingContext,
    hole_ty: &Type,
) -> Result<Type, ContextTypeError> {
    let holes = ctx.hole_count();
    if holes != 1 {
        return Err(ContextTypeError::HoleCount(holes));
    }
    go(gamma, ctx, delta, hole_ty)
}

fn cross_binder(
    gamma: &TypingContext,
    delta: &TypingContext,
    x: &str,
    annotated: &Type,
) -> Result<(TypingContext, TypingContext), ContextTypeError> {
    if gamma.contains(x) {
        return Err(ContextTypeError::BinderShadows(x.to_string()));
    }
    match delta.lookup(x) {
        Some(assigned) => {
            if assigned != annotated {
                return Err(ContextTypeError::BinderMismatch {
                    binder: x.to_string(),
                    annotated: annotated.clone(),
                    assigned: assigned.clone(),
                });
            }
            Ok((gamma.shadow(x, annotated.clone()), delta.remove(x)))
        }
        None => Ok((gamma.shadow(x, annotated.clone()), delta.clone())),
    }
}

fn go(
    gamma: &TypingContext,
    ctx: &Context,
    delta: &TypingContext,
    hole_ty: &Type,
) -> Result<Type, ContextTypeError> {
    let infer_in = |t: &Term| infer(gamma, t).map_err(ContextTypeError::from);
    match ctx {
        Context::Hole => {
            if let Some((x, _)) = gamma.iter().find(|(x, _)| delta.contains(x)) {
                return Err(ContextTypeError::HoleClash(x.clone()));
            }
            Ok(hole_ty.clone())
        }
        Context::Lam(x, t, c) => {
            let (g2, d2) = cross_binder(gamma, delta, x, t)?;
            let body = go(&g2, c, &d2, hole_ty)?;
            Ok(Type::arrow(t.clone(), body))
        }
        Context::Fix(x, t, c) => {
            if !t.is_function() {
                return Err(TypeError::FixNotFunction(t.clone()).into());
            }
            let (g2, d2) = cross_binder(gamma, delta, x, t)?;
            let body = go(&g2, c, &d2, hole_ty)?;
            if body == *t {
                Ok(body)
            } else {
                Err(TypeError::FixBodyMismatch { annotated: t.clone(), found: body }.into())
            }
        }
        Context::AppL(c, arg) => {
            let tf = go(gamma, c, delta, hole_ty)?;
            match tf {
                Type::Arrow(dom, cod) => {
                    let ta = infer_in(arg)?;
                    if ta == *dom {
                        Ok(*cod)
                    } else {
                        Err(TypeError::Mismatch { expected: *dom, found: ta }.into())
                    }
                }
                other => Err(TypeError::NotAFunction(other).into()),
            }
        }
        Context::AppR(f, c) => {
            let tf = infer_in(f)?;
            match tf {
                Type::Arrow(dom, cod) => {
                    let ta = go(gamma, c, delta, hole_ty)?;
                    if ta == *dom {
                        Ok(*cod)
                    } else {
                        Err(TypeError::Mismatch { expected: *dom, found: ta }.into())
                    }
                }
                other => Err(TypeError::NotAFunction(other).into()),
            }
        }
        Context::ChoiceL(c, t) => {
            let a = go(gamma, c, delta, hole_ty)?;
            let b = infer_in(t)?;
            if a == b {
                Ok(a)
            } else {
                Err(TypeError::ChoiceMismatch(a, b).into())
            }
        }
        Context::ChoiceR(t, c) => {
            let a = infer_in(t)?;
            let b = go(gamma, c, delta, hole_ty)?;
            if a == b {
                Ok(a)
            } else {
                Err(TypeError::ChoiceMismatch(a, b).into())
            }
        }
        Context::OpL(op, c, t) | Context::OpR(op, t, c) => {
            let a = go(gamma, c, delta, hole_ty)?;
            let b = infer_in(t)?;
            for side in [&a, &b] {
                if *side != Type::Int {
                    return Err(TypeError::Mismatch {
                        expected: Type::Int,
                        found: side.clone(),
                    }
                    .into());
                }
            }
            Ok(op.result_type())
        }
        Context::PairL(c, t) => Ok(Type::prod(go(gamma, c, delta, hole_ty)?, infer_in(t)?)),
        Context::PairR(t, c) => Ok(Type::prod(infer_in(t)?, go(gamma, c, delta, hole_ty)?)),
        Context::ConsL(c, t) => {
            let h = go(gamma, c, delta, hole_ty)?;
            let tt = infer_in(t)?;
            let want = Type::list(h);
            if tt == want {
                Ok(want)
            } else {
                Err(TypeError::Mismatch { expected: want, found: tt }.into())
            }
        }
        Context::ConsR(t, c) => {
            let h = infer_in(t)?;
            let tt = go(gamma, c, delta, hole_ty)?;
            let want = Type::list(h);
            if tt == want {
                Ok(want)
            } else {
                Err(TypeError::Mismatch { expected: want, found: tt }.into())
            }
        }
        Context::Fst(c) => match go(gamma, c, delta, hole_ty)? {
            Type::Prod(a, _) => Ok(*a),
            other => Err(TypeError::NotAProduct(other).into()),
        },
        Context::Snd(c) => match go(gamma, c, delta, hole_ty)? {
            Type::Prod(_, b) => Ok(*b),
            other => Err(TypeError::NotAProduct(other).into()),
        },
        Context::IfC(c, t, e) => {
            let tc = go(gamma, c, delta, hole_ty)?;
            if tc != Type::Bool {
                return Err(TypeError::Mismatch { expected: Type::Bool, found: tc }.into());
            }
            let tt = infer_in(t)?;
            let te = infer_in(e)?;
            if tt == te {
                Ok(tt)
            } else {
                Err(TypeError::BranchMismatch(tt, te).into())
            }
        }
        Context::IfT(g, c, e) => {
            let tg = infer_in(g)?;
            if tg != Type::Bool {
                return Err(TypeError::Mismatch { expected: Type::Bool, found: tg }.into());
            }
            let tt = go(gamma, c, delta, hole_ty)?;
            let te = infer_in(e)?;
            if tt == te {
                Ok(tt)
            } else {
                Err(TypeError::BranchMismatch(tt, te).into())
            }
        }
        Context::IfE(g, t, c) => {
            let tg = infer_in(g)?;
            if tg != Type::Bool {
                return Err(TypeError::Mismatch { expected: Type::Bool, found: tg }.into());
            }
            let tt = infer_in(t)?;
            let te = go(gamma, c, delta, hole_ty)?;
            if tt == te {
                Ok(tt)
            } else {
                Err(TypeError::BranchMismatch(tt, te).into())
            }
        }
        Context::CaseS { scrutinee, nil, head, tail, cons } => {
            let st = go(gamma, scrutinee, delta, hole_ty)?;
            let elem = match st {
                Type::List(e) => *e,
                other => return Err(TypeError::NotAList(other).into()),
            };
            let tn = infer_in(nil)?;
            let inner = gamma.shadow(head, elem.clone()).shadow(tail, Type::list(elem));
            let tc = infer(&inner, cons).map_err(ContextTypeError::from)?;
            if tn == tc {
                Ok(tn)
            } else {
                Err(TypeError::BranchMismatch(tn, tc).into())
            }
        }
        Context::CaseN { scrutinee, nil, head, tail, cons } => {
            let st = infer_in(scrutinee)?;
            let elem = match st {
                Type::List(e) => *e,
                other => return Err(TypeError::NotAList(other).into()),
            };
            let tn = go(gamma, nil, delta, hole_ty)?;
            let inner = gamma.shadow(head, elem.clone()).shadow(tail, Type::list(elem));
            let tc = infer(&inner, cons).map_err(ContextTypeError::from)?;
            if tn == tc {
                Ok(tn)
            } else {
                Err(TypeError::BranchMismatch(tn, tc).into())
            }
        }
        Context::CaseC { scrutinee, nil, head, tail, cons } => {
            let st = infer_in(scrutinee)?;
            let elem = match st {
                Type::List(e) => *e,
                other => return Err(TypeError::NotAList(other).into()),
            };
            let tn = infer_in(nil)?;
            let (g2, d2) = cross_binder(gamma, delta, head, &elem)?;
            let (g3, d3) = cross_binder(&g2, &d2, tail, &Type::list(elem))?;
            let tc = go(&g3, cons, &d3, hole_ty)?;
            if tn == tc {
                Ok(tn)
            } else {
                Err(TypeError::BranchMismatch(tn, tc).into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn empty() -> TypingContext {
        TypingContext::new()
    }

    #[test]
    fn identity_types_at_every_type() {
        for ty in [Type::Bool, Type::Int, Type::arrow(Type::Bool, Type::Int)] {
            let id = Term::lam("x", ty.clone(), Term::var("x"));
            assert_eq!(infer(&empty(), &id).unwrap(), Type::arrow(ty.clone(), ty));
        }
    }

    #[test]
    fn diverging_term_types_at_every_type() {
        for ty in [Type::Bool, Type::list(Type::Int), Type::arrow(Type::Int, Type::Bool)] {
            let omega = Term::diverging(ty.clone());
            assert_eq!(infer(&empty(), &omega).unwrap(), ty);
        }
    }

    #[test]
    fn fix_requires_function_type() {
        let bad = Term::fix("x", Type::Int, Term::num(3));
        assert_eq!(infer(&empty(), &bad), Err(TypeError::FixNotFunction(Type::Int)));
    }

    #[test]
    fn unbound_variable_reported() {
        assert_eq!(infer(&empty(), &Term::var("q")), Err(TypeError::Unbound("q".into())));
    }

    #[test]
    fn application_rule_mismatches() {
        let t = parse_term("(\\x:bool. x) 3").unwrap();
        assert!(matches!(infer(&empty(), &t), Err(TypeError::Mismatch { .. })));
        let t = parse_term("true false").unwrap();
        assert!(matches!(infer(&empty(), &t), Err(TypeError::NotAFunction(_))));
    }

    #[test]
    fn shadowing_behaves_like_renamed_term() {
        // \x:bool. \x:int. x  types as  bool -> int -> int
        let t = parse_term("\\x:bool. \\x:int. x").unwrap();
        assert_eq!(
            infer(&empty(), &t).unwrap(),
            Type::arrow(Type::Bool, Type::arrow(Type::Int, Type::Int))
        );
    }

    #[test]
    fn context_binder_moves_into_scope() {
        // ∅ ⊢ \x:σ.[.] ({x:σ}; τ) : σ -> τ
        let sigma = Type::Bool;
        let tau = Type::Int;
        let c = Context::Lam("x".into(), sigma.clone(), Box::new(Context::Hole));
        let delta = TypingContext::from_pairs([("x".to_string(), sigma.clone())]);
        let got = check_context(&empty(), &c, &delta, &tau).unwrap();
        assert_eq!(got, Type::arrow(sigma, tau));
    }

    #[test]
    fn context_constant_function() {
        // ∅ ⊢ (\x:σ. true) [.]  (∅; σ) : bool
        let sigma = Type::arrow(Type::Bool, Type::Bool);
        let c = Context::AppR(
            Box::new(Term::lam("x", sigma.clone(), Term::Bool(true))),
            Box::new(Context::Hole),
        );
        let got = check_context(&empty(), &c, &TypingContext::new(), &sigma).unwrap();
        assert_eq!(got, Type::Bool);
    }

    #[test]
    fn hole_context_clash_is_an_error() {
        let gamma = TypingContext::from_pairs([("x".to_string(), Type::Int)]);
        let delta = TypingContext::from_pairs([("x".to_string(), Type::Bool)]);
        let got = check_context(&gamma, &Context::Hole, &delta, &Type::Bool);
        assert_eq!(got, Err(ContextTypeError::HoleClash("x".into())));
    }

    #[test]
    fn filling_respects_types() {
        // Γ ⊢ C (Δ; σ): τ and Γ,Δ ⊢ M: σ  implies  Γ ⊢ C[M]: τ
        let sigma = Type::Bool;
        let c = Context::Lam("x".into(), sigma.clone(), Box::new(Context::Hole));
        let delta = TypingContext::from_pairs([("x".to_string(), sigma.clone())]);
        let tau = check_context(&empty(), &c, &delta, &sigma).unwrap();
        let m = Term::var("x"); // Δ ⊢ x : bool
        assert_eq!(infer(&delta, &m).unwrap(), sigma);
        let filled = c.fill(&m);
        assert_eq!(infer(&empty(), &filled).unwrap(), tau);
    }
}
