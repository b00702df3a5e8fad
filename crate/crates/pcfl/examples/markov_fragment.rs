//! Building and exporting a fragment of the applicative Markov chain.
//!
//! ```
//! cargo run --example markov_fragment
//! ```

use pcfl::lmc::{arg_universe_for, build_fragment, LmcState};
use pcfl::syntax::{parse_term, parse_type};

fn main() {
    let term = parse_term("(\\x:bool. x) (+) ((fix f:int->(bool->bool). f) 0)").unwrap();
    let ty = parse_type("bool -> bool").unwrap();
    let root = LmcState::program(&term, ty.clone());
    let universe = arg_universe_for(&ty, 1);
    let frag = build_fragment(&[root], 16, &universe, 4, 10_000).unwrap();

    println!("states:");
    for (id, state) in frag.states() {
        let marker = if frag.is_frontier(id) { " (frontier)" } else { "" };
        println!("  {:>2}  {}{}", id, state, marker);
    }
    println!("\nJSON export:\n{}", serde_json::to_string_pretty(&frag.to_json()).unwrap());
}
