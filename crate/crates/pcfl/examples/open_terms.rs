//! Comparing open terms: the open extension closes both sides under
//! every enumerated value for the free variables.
//!
//! ```
//! cargo run --example open_terms
//! ```

use pcfl::equivalence::{open_check, CheckConfig, Verdict};
use pcfl::syntax::{parse_term, Type, TypingContext};

fn main() {
    let gamma = TypingContext::from_pairs([("x".to_string(), Type::Bool)]);
    let cfg = CheckConfig::default();

    let cases = [
        ("x", "x"),
        ("x", "true"),
        ("if x then true else false", "x"),
    ];
    for (a, b) in cases {
        let m = parse_term(a).unwrap();
        let n = parse_term(b).unwrap();
        match open_check(&gamma, &m, &n, &Type::Bool, &cfg).unwrap() {
            Verdict::EquivalentUpToBound { .. } => {
                println!("x:bool |- {a} and {b}: equivalent up to bound")
            }
            Verdict::NotEquivalent { witness, p_left, p_right } => {
                println!("x:bool |- {a} and {b}: separated by {witness} ({p_left} vs {p_right})")
            }
        }
    }
}
