//! An active adversary with an encryption oracle breaks the one-time
//! pad: a single context drives the two experiments to opposite
//! deterministic answers.
//!
//! ```
//! cargo run --example cpa_attack
//! ```

use pcfl::cli::{cpa_attack_context, load_term};
use pcfl::eval::eval_big;
use pcfl::syntax::{check_context, parse_type, TypingContext};
use std::path::Path;

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).display().to_string()
}

fn main() {
    let ty = parse_type("bool -> bool -> bool * (bool -> bool)").unwrap();
    let attack = cpa_attack_context();
    let result =
        check_context(&TypingContext::new(), &attack, &TypingContext::new(), &ty).unwrap();
    println!("attack context: {}", attack);
    println!("typed as ([.] : {}) -> {}\n", ty, result);

    for name in ["exp_cpa_fst.pcfl", "exp_cpa_snd.pcfl"] {
        let term = load_term(&corpus(name)).unwrap();
        let dist = eval_big(&attack.fill(&term), 48);
        println!("{name}: {}", serde_json::to_string(&dist.to_json()).unwrap());
    }
}
