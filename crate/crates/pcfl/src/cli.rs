//! Batch commands behind the `pcfl` binary, plus the context
//! spot-check harness used to corroborate contextual-preorder claims
//! on sampled contexts.
//!
//! Exit-code convention (mapped by the binary): 0 success, 1 when the
//! analysis verdict is "not equivalent" (or a direction is refuted),
//! 2 on input errors, 3 on resource caps.

use crate::dist::mass;
use crate::embed::embed;
use crate::equivalence::{check_equiv, sim_preorder, CheckConfig, CheckError, Verdict};
use crate::eval::eval_big;
use crate::flow::{disentangle, ProbAssignment};
use crate::lmc::{arg_universe_for, build_fragment, LmcError, LmcFragment, LmcState};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::syntax::{
    check_context, infer, parse_term, parse_type, Context, Term, Type, TypingContext,
};
use crate::testing::{compile_test, find_distinguishing_test, parse_test, success_lower_bound, Test};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Analysis bounds; every report echoes them.
pub type Config = CheckConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("resource cap exceeded: {0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Resource(_) => 3,
        }
    }

    fn input(path: &str, message: impl std::fmt::Display) -> CliError {
        CliError::Input { path: path.to_string(), message: message.to_string() }
    }
}

fn from_check_error(path: &str, e: CheckError) -> CliError {
    match e {
        CheckError::Resource(r) => CliError::Resource(r.to_string()),
        other => CliError::input(path, other),
    }
}

/// Reads a source file. `#` comment lines are blanked rather than
/// removed, so parse errors keep their original line numbers.
pub fn load_term(path: &str) -> Result<Term, CliError> {
    let raw = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
    let src: Vec<&str> = raw
        .lines()
        .map(|l| if l.trim_start().starts_with('#') { "" } else { l })
        .collect();
    parse_term(&src.join("\n")).map_err(|e| CliError::input(path, e))
}

fn load_typed(path: &str) -> Result<(Term, Type), CliError> {
    let term = load_term(path)?;
    let ty = infer(&TypingContext::new(), &term).map_err(|e| CliError::input(path, e))?;
    Ok((term, ty))
}

/// `check`: parse and type a file.
pub fn cmd_check(path: &str) -> Result<serde_json::Value, CliError> {
    let (term, ty) = load_typed(path)?;
    Ok(serde_json::json!({
        "file": path,
        "term": term.to_string(),
        "type": ty.to_string(),
    }))
}

/// `eval`: fuel-bounded value distribution of a closed program.
pub fn cmd_eval(path: &str, fuel: u64) -> Result<serde_json::Value, CliError> {
    let (term, _) = load_typed(path)?;
    if !term.is_closed() {
        return Err(CliError::input(path, "program must be closed"));
    }
    Ok(eval_big(&term, fuel).to_json())
}

fn load_same_type(left: &str, right: &str) -> Result<(Term, Term, Type), CliError> {
    let (m, tm) = load_typed(left)?;
    let (n, tn) = load_typed(right)?;
    if tm != tn {
        return Err(CliError::input(
            right,
            format!("type {} does not match {} of {}", tn, tm, left),
        ));
    }
    Ok((m, n, tm))
}

/// `equiv`: bounded bisimilarity verdict for two programs of one type.
pub fn cmd_equiv(left: &str, right: &str, cfg: &Config) -> Result<Verdict, CliError> {
    let (m, n, ty) = load_same_type(left, right)?;
    check_equiv(&m, &n, &ty, cfg).map_err(|e| from_check_error(left, e))
}

/// `sim`: per-direction simulation report on the joint fragment.
pub fn cmd_sim(left: &str, right: &str, cfg: &Config) -> Result<serde_json::Value, CliError> {
    let (m, n, ty) = load_same_type(left, right)?;
    let universe = arg_universe_for(&ty, cfg.arg_size);
    let sl = LmcState::program(&m, ty.clone());
    let sr = LmcState::program(&n, ty.clone());
    let frag = build_fragment(&[sl.clone(), sr.clone()], cfg.fuel, &universe, cfg.depth, cfg.state_cap)
        .map_err(|e: LmcError| CliError::Resource(e.to_string()))?;
    let rel = sim_preorder(&frag);
    let (l, r) = (frag.id_of(&sl).unwrap(), frag.id_of(&sr).unwrap());
    let fwd = rel.contains(&(l, r));
    let bwd = rel.contains(&(r, l));
    Ok(serde_json::json!({
        "left": left,
        "right": right,
        "left_below_right": if fwd { "not_refuted_up_to_bound" } else { "refuted" },
        "right_below_left": if bwd { "not_refuted_up_to_bound" } else { "refuted" },
        "cfg": cfg_json(cfg),
    }))
}

/// `distinguish`: search for a test separating two programs.
pub fn cmd_distinguish(
    left: &str,
    right: &str,
    cfg: &Config,
) -> Result<Option<(Test, Rational, Rational)>, CliError> {
    let (m, n, ty) = load_same_type(left, right)?;
    match check_equiv(&m, &n, &ty, cfg).map_err(|e| from_check_error(left, e))? {
        Verdict::NotEquivalent { witness, p_left, p_right } => Ok(Some((witness, p_left, p_right))),
        Verdict::EquivalentUpToBound { .. } => Ok(None),
    }
}

/// `compile-test`: print the program- and value-state contexts of a
/// test at a type, after checking both against the expected typing.
pub fn cmd_compile_test(test_src: &str, type_src: &str) -> Result<serde_json::Value, CliError> {
    let t = parse_test(test_src).map_err(|e| CliError::input("<test>", e))?;
    let ty = parse_type(type_src).map_err(|e| CliError::input("<type>", e))?;
    let (c, d) = compile_test(&t, &ty);
    for ctx in [&c, &d] {
        let got = check_context(&TypingContext::new(), ctx, &TypingContext::new(), &ty)
            .map_err(|e| CliError::input("<test>", e))?;
        if got != Type::Bool {
            return Err(CliError::input("<test>", "compiled context is not boolean"));
        }
    }
    Ok(serde_json::json!({
        "test": t.to_string(),
        "type": ty.to_string(),
        "program_context": c.to_string(),
        "value_context": d.to_string(),
    }))
}

/// `embed`: translate a source file into the untyped calculus.
pub fn cmd_embed(path: &str) -> Result<String, CliError> {
    let (term, _) = load_typed(path)?;
    Ok(embed(&term).to_string())
}

/// `disentangle`: JSON in, JSON out. Input shape
/// `{"p":["1/2",...],"r":{"1":"1/2","1,2":"0",...}}`; output either
/// `{"s":{"k|i,j":"..."}}` or `{"invalid_cut":[...]}`.
pub fn cmd_disentangle(input: &str) -> Result<serde_json::Value, CliError> {
    let parsed: serde_json::Value =
        serde_json::from_str(input).map_err(|e| CliError::input("<json>", e))?;
    let p_raw = parsed["p"]
        .as_array()
        .ok_or_else(|| CliError::input("<json>", "field `p` must be an array"))?;
    let mut p = Vec::new();
    for v in p_raw {
        let s = v.as_str().ok_or_else(|| CliError::input("<json>", "p entries are strings"))?;
        p.push(
            parse_rational(s)
                .ok_or_else(|| CliError::input("<json>", format!("bad rational `{}`", s)))?,
        );
    }
    let mut r = BTreeMap::new();
    if let Some(obj) = parsed["r"].as_object() {
        for (key, v) in obj {
            let set: BTreeSet<usize> = key
                .split(',')
                .map(|part| {
                    part.trim().parse::<usize>().map_err(|_| {
                        CliError::input("<json>", format!("bad index set `{}`", key))
                    })
                })
                .collect::<Result<_, _>>()?;
            if set.is_empty() || set.iter().any(|&i| i == 0 || i > p.len()) {
                return Err(CliError::input("<json>", format!("index set `{}` out of range", key)));
            }
            let s = v.as_str().ok_or_else(|| CliError::input("<json>", "r entries are strings"))?;
            let w = parse_rational(s)
                .ok_or_else(|| CliError::input("<json>", format!("bad rational `{}`", s)))?;
            r.insert(set, w);
        }
    }
    let assignment = ProbAssignment { p, r };
    match disentangle(&assignment) {
        Ok(d) => {
            let mut s = serde_json::Map::new();
            for ((k, set), v) in &d.s {
                let key = format!(
                    "{}|{}",
                    k,
                    set.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
                );
                s.insert(key, serde_json::Value::String(format_rational(v)));
            }
            Ok(serde_json::json!({ "s": s }))
        }
        Err(cut) => Ok(serde_json::json!({
            "invalid_cut": cut.violated.into_iter().collect::<Vec<_>>(),
        })),
    }
}

pub fn cfg_json(cfg: &Config) -> serde_json::Value {
    serde_json::json!({
        "fuel": cfg.fuel,
        "arg_size": cfg.arg_size,
        "depth": cfg.depth,
        "test_depth": cfg.test_depth,
        "state_cap": cfg.state_cap,
    })
}

/// One row of a context spot-check.
#[derive(Debug, Clone)]
pub struct SpotRow {
    pub context: Context,
    pub mass_left: Rational,
    pub mass_right: Rational,
    pub dist_left: serde_json::Value,
    pub dist_right: serde_json::Value,
    pub le: bool,
    pub stable: bool,
}

/// Evaluates both terms under each sampled context and reports the
/// convergence masses with the `mass(C[M]) <= mass(C[N])` flag.
/// Corroborates, never proves, contextual-preorder claims. Ill-typed
/// contexts are reported as errors per row.
pub fn ctx_spot_check(
    m: &Term,
    n: &Term,
    ty: &Type,
    contexts: &[Context],
    fuel: u64,
) -> Vec<Result<SpotRow, String>> {
    contexts
        .iter()
        .map(|c| {
            let hole_env = TypingContext::new();
            check_context(&TypingContext::new(), c, &hole_env, ty)
                .map_err(|e| e.to_string())
                .map(|_| {
                    let left = c.fill(m);
                    let right = c.fill(n);
                    let dl = eval_big(&left, fuel);
                    let dr = eval_big(&right, fuel);
                    let stable = dl == eval_big(&left, fuel * 2)
                        && dr == eval_big(&right, fuel * 2);
                    SpotRow {
                        context: c.clone(),
                        mass_left: mass(&dl),
                        mass_right: mass(&dr),
                        dist_left: dl.to_json(),
                        dist_right: dr.to_json(),
                        le: mass(&dl) <= mass(&dr),
                        stable,
                    }
                })
        })
        .collect()
}

/// Deterministic context sample at a type: the always-converging
/// context plus compiled prefix chains and binary conjunctions over a
/// small type-aware label alphabet. Returns `min_count` contexts when
/// the alphabet allows, always at least two.
pub fn sample_contexts(ty: &Type, min_count: usize) -> Vec<Context> {
    use crate::lmc::{enumerate_values, Label};
    // observations available after evaluating a value of this type
    let mut labels = vec![Label::Eval];
    match ty {
        Type::Bool => labels.extend([Label::BoolL(true), Label::BoolL(false)]),
        Type::Int => labels.extend([
            Label::Num(0u32.into()),
            Label::Num(1u32.into()),
        ]),
        Type::Arrow(dom, _) => {
            for v in enumerate_values(dom, 2).into_iter().take(3) {
                labels.push(Label::Arg(v));
            }
        }
        Type::Prod(_, _) => labels.extend([Label::FstL, Label::SndL]),
        Type::List(_) => labels.extend([Label::NilL, Label::Hd, Label::Tl]),
    }
    // breadth-first prefix chains over the alphabet
    let mut chains: Vec<Test> = vec![Test::Omega];
    let mut frontier: Vec<Test> = chains.clone();
    while chains.len() < min_count * 2 && !frontier.is_empty() {
        let mut next = Vec::new();
        for t in &frontier {
            for l in &labels {
                next.push(Test::prefix(l.clone(), t.clone()));
            }
        }
        chains.extend(next.clone());
        frontier = next;
    }
    let mut tests: Vec<Test> = chains.iter().skip(1).cloned().collect();
    // a few conjunctions of shallow chains
    for t in chains.iter().skip(1).take(min_count / 2) {
        tests.push(Test::conj(vec![t.clone(), t.clone()]));
    }
    // evaluation-headed tests measure programs nontrivially; the rest
    // compile to diverging contexts and stay for coverage
    tests.sort_by_key(|t| !matches!(t, Test::Prefix(Label::Eval, _)));
    let mut out: Vec<Context> = Vec::new();
    let (omega_ctx, _) = compile_test(&Test::Omega, ty);
    out.push(omega_ctx);
    for t in &tests {
        if out.len() >= min_count {
            break;
        }
        let (c, _) = compile_test(t, ty);
        out.push(c);
    }
    out
}

/// Fragment export for external inspection.
pub fn fragment_json(frag: &LmcFragment) -> serde_json::Value {
    frag.to_json()
}

/// Direct success probability of a parsed test at a file's program,
/// reported as an exact-from-below rational together with stability.
pub fn test_probability(path: &str, test_src: &str, fuel: u64) -> Result<serde_json::Value, CliError> {
    let (term, ty) = load_typed(path)?;
    let t = parse_test(test_src).map_err(|e| CliError::input("<test>", e))?;
    let lo = success_lower_bound(&term, &ty, &t, fuel);
    let stable = lo == success_lower_bound(&term, &ty, &t, fuel * 2 + 8);
    Ok(serde_json::json!({
        "file": path,
        "test": t.to_string(),
        "probability_lower_bound": format_rational(&lo),
        "stable": stable,
    }))
}

/// Convenience wrapper for the acceptance suite: the raw distinguishing
/// search on a fresh fragment.
pub fn distinguish_on_fragment(
    m: &Term,
    n: &Term,
    ty: &Type,
    cfg: &Config,
) -> Result<Option<Test>, CliError> {
    let universe = arg_universe_for(ty, cfg.arg_size);
    let sl = LmcState::program(m, ty.clone());
    let sr = LmcState::program(n, ty.clone());
    let frag = build_fragment(&[sl.clone(), sr.clone()], cfg.fuel, &universe, cfg.depth, cfg.state_cap)
        .map_err(|e| CliError::Resource(e.to_string()))?;
    Ok(find_distinguishing_test(
        &frag,
        frag.id_of(&sl).unwrap(),
        frag.id_of(&sr).unwrap(),
        cfg.test_depth,
    ))
}

/// Loaded corpus manifest.
#[derive(Debug, Clone, serde::Deserialize)]
pub struct Manifest {
    pub programs: BTreeMap<String, ManifestProgram>,
    pub equiv_pairs: Vec<ManifestPair>,
    pub expected_masses: BTreeMap<String, String>,
}

#[derive(Debug, Clone, serde::Deserialize)]
pub struct ManifestProgram {
    pub file: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, serde::Deserialize)]
pub struct ManifestPair {
    pub left: String,
    pub right: String,
    pub expected: String,
    #[serde(default)]
    pub test_depth: Option<usize>,
    #[serde(default)]
    pub depth: Option<usize>,
}

impl Manifest {
    pub fn load(dir: &std::path::Path) -> Result<Manifest, CliError> {
        let path = dir.join("manifest.json");
        let raw = std::fs::read_to_string(&path)
            .map_err(|e| CliError::input(&path.display().to_string(), e))?;
        serde_json::from_str(&raw).map_err(|e| CliError::input(&path.display().to_string(), e))
    }
}

/// Sanity gate used by tests and the examples: every manifest program
/// parses, types at its declared type, and expected masses hold at a
/// stable fuel.
pub fn verify_manifest(dir: &std::path::Path, fuel: u64) -> Result<Vec<String>, CliError> {
    let manifest = Manifest::load(dir)?;
    let mut report = Vec::new();
    for (name, prog) in &manifest.programs {
        let path = dir.join(&prog.file);
        let (term, ty) = load_typed(&path.display().to_string())?;
        let declared = parse_type(&prog.ty)
            .map_err(|e| CliError::input(&prog.file, e))?;
        if ty != declared {
            return Err(CliError::input(
                &prog.file,
                format!("declared type {} but inferred {}", declared, ty),
            ));
        }
        if let Some(expect) = manifest.expected_masses.get(name) {
            let want = parse_rational(expect)
                .ok_or_else(|| CliError::input(&prog.file, "bad expected mass"))?;
            let got = eval_big(&term, fuel).mass();
            if got != want {
                return Err(CliError::input(
                    &prog.file,
                    format!("expected mass {} but evaluated to {}", expect, format_rational(&got)),
                ));
            }
        }
        report.push(format!("{}: {}", name, ty));
    }
    Ok(report)
}

/// The `(\x. (snd x) (fst x)) ([.] true false)` attack context from the
/// chosen-plaintext example, typed at the oracle pair type.
pub fn cpa_attack_context() -> Context {
    let pair_ty = Type::prod(Type::Bool, Type::arrow(Type::Bool, Type::Bool));
    let body = Term::app(Term::snd(Term::var("x")), Term::fst(Term::var("x")));
    Context::AppR(
        Box::new(Term::Lam("x".into(), pair_ty, Box::new(body))),
        Box::new(Context::AppL(
            Box::new(Context::AppL(Box::new(Context::Hole), Box::new(Term::Bool(true)))),
            Box::new(Term::Bool(false)),
        )),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn corpus_dir() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
    }

    fn corpus(name: &str) -> String {
        corpus_dir().join(name).display().to_string()
    }

    #[test]
    fn manifest_is_consistent() {
        let report = verify_manifest(&corpus_dir(), 64).unwrap();
        assert!(report.len() >= 14);
    }

    #[test]
    fn check_reports_types() {
        let j = cmd_check(&corpus("exp_fst.pcfl")).unwrap();
        assert_eq!(j["type"], "bool -> bool -> bool");
        let err = cmd_check(&corpus("no_such_file.pcfl")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn eval_of_diverging_program_has_zero_mass() {
        let j = cmd_eval(&corpus("omega.pcfl"), 64).unwrap();
        assert_eq!(j["mass"], "0");
        assert_eq!(j["support"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn disentangle_round_trip() {
        let out = cmd_disentangle(r#"{"p":["1/2","1/2"],"r":{"1":"1/2","2":"1/2","1,2":"0"}}"#)
            .unwrap();
        assert_eq!(out["s"]["1|1"], "1");
        assert_eq!(out["s"]["2|2"], "1");
        let out = cmd_disentangle(r#"{"p":["1"],"r":{}}"#).unwrap();
        assert_eq!(out["invalid_cut"][0], 1);
    }

    #[test]
    fn cpa_attack_separates_distributions() {
        let c = cpa_attack_context();
        let (m, ty) = (
            load_term(&corpus("exp_cpa_fst.pcfl")).unwrap(),
            parse_type("bool -> bool -> bool * (bool -> bool)").unwrap(),
        );
        let n = load_term(&corpus("exp_cpa_snd.pcfl")).unwrap();
        let got = check_context(&TypingContext::new(), &c, &TypingContext::new(), &ty).unwrap();
        assert_eq!(got, Type::Bool);
        let dl = eval_big(&c.fill(&m), 48);
        let dr = eval_big(&c.fill(&n), 48);
        assert_eq!(dl.get(&Term::Bool(true)), rat(1, 1));
        assert_eq!(dr.get(&Term::Bool(false)), rat(1, 1));
    }

    #[test]
    fn sample_contexts_terminates_on_ground_types() {
        for ty in [Type::Bool, Type::Int, parse_type("bool -> bool").unwrap()] {
            let contexts = sample_contexts(&ty, 10);
            assert!(contexts.len() >= 2, "{}", ty);
            for c in &contexts {
                let got =
                    check_context(&TypingContext::new(), c, &TypingContext::new(), &ty).unwrap();
                assert_eq!(got, Type::Bool);
            }
        }
    }

    #[test]
    fn parse_errors_keep_original_line_numbers() {
        let dir = std::env::temp_dir().join(format!("pcfl-cli-unit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.pcfl");
        std::fs::write(&path, "# a comment line\n\\x:bool").unwrap();
        let err = load_term(&path.display().to_string()).unwrap_err();
        assert!(err.to_string().contains("2:"), "{}", err);
    }

    #[test]
    fn spot_check_rows_typecheck_and_report() {
        let ty = parse_type("bool -> bool -> bool -> bool").unwrap();
        let m = load_term(&corpus("asym_left.pcfl")).unwrap();
        let n = load_term(&corpus("asym_right.pcfl")).unwrap();
        let contexts = sample_contexts(&ty, 8);
        assert!(contexts.len() >= 8);
        let rows = ctx_spot_check(&m, &n, &ty, &contexts, 32);
        for row in rows {
            let row = row.expect("sampled contexts typecheck");
            assert!(row.le, "context {} gave {} > {}", row.context, row.mass_left, row.mass_right);
        }
    }
}
