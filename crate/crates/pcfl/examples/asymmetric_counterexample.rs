//! Two programs that agree under every context but are not similar in
//! either direction: the coin is flipped at different moments, and only
//! a conjunctive test (running two copies of an evaluated state) can
//! tell the difference.
//!
//! ```
//! cargo run --example asymmetric_counterexample
//! ```

use pcfl::cli::{ctx_spot_check, load_term, sample_contexts, Config};
use pcfl::equivalence::{check_equiv, sim_preorder, Verdict};
use pcfl::lmc::{arg_universe_for, build_fragment, LmcState};
use pcfl::rational::format_rational;
use pcfl::syntax::parse_type;
use pcfl::testing::compile_test;
use std::path::Path;

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).display().to_string()
}

fn main() {
    let ty = parse_type("bool -> bool -> bool -> bool").unwrap();
    let m = load_term(&corpus("asym_left.pcfl")).unwrap();
    let n = load_term(&corpus("asym_right.pcfl")).unwrap();

    let cfg = Config { test_depth: 6, ..Config::default() };
    let mut witness_ctx = None;
    match check_equiv(&m, &n, &ty, &cfg).unwrap() {
        Verdict::NotEquivalent { witness, p_left, p_right } => {
            println!("not equivalent; witness test:");
            println!("  {}", witness);
            println!(
                "  succeeds with {} on the left, {} on the right",
                format_rational(&p_left),
                format_rational(&p_right)
            );
            witness_ctx = Some(compile_test(&witness, &ty).0);
        }
        other => println!("unexpected verdict: {:?}", other),
    }

    let universe = arg_universe_for(&ty, cfg.arg_size);
    let (sl, sr) = (LmcState::program(&m, ty.clone()), LmcState::program(&n, ty.clone()));
    let frag = build_fragment(&[sl.clone(), sr.clone()], cfg.fuel, &universe, cfg.depth, cfg.state_cap).unwrap();
    let rel = sim_preorder(&frag);
    let (l, r) = (frag.id_of(&sl).unwrap(), frag.id_of(&sr).unwrap());
    println!("\nsimulation: left below right {}, right below left {}", rel.contains(&(l, r)), rel.contains(&(r, l)));

    // contexts can only ever favour the right program; the compiled
    // witness context separates it strictly
    println!("\nconvergence mass under sampled contexts (left vs right):");
    let mut contexts = sample_contexts(&ty, 20);
    contexts.extend(witness_ctx);
    for row in ctx_spot_check(&m, &n, &ty, &contexts, 32) {
        let row = row.unwrap();
        println!(
            "  {} <= {}  {}",
            format_rational(&row.mass_left),
            format_rational(&row.mass_right),
            if row.le { "ok" } else { "VIOLATION" }
        );
    }
}
