//! Every test is a context: compiling tests to boolean program
//! contexts whose convergence mass equals the test's success
//! probability.
//!
//! ```
//! cargo run --example test_compiler
//! ```

use pcfl::eval::eval_big;
use pcfl::rational::format_rational;
use pcfl::syntax::{parse_term, parse_type};
use pcfl::testing::{bridge_check, compile_test, parse_test};

fn main() {
    let ty = parse_type("bool -> bool").unwrap();
    let term = parse_term("(\\x:bool. x) (+) ((fix f:int->(bool->bool). f) 0)").unwrap();

    for test_src in ["w", "eval.w", "eval.arg(true).eval.bool(true).w", "<eval.w, eval.w>"] {
        let test = parse_test(test_src).unwrap();
        let (c, d) = compile_test(&test, &ty);
        println!("test {}", test);
        println!("  program context: {}", c);
        println!("  value context:   {}", d);
        let filled = c.fill(&term);
        let mass = eval_big(&filled, 32).mass();
        let (pr, _, agree) = bridge_check(&term, &ty, &test, 32);
        println!(
            "  success probability {}  |  context mass {}  |  agree: {}",
            pr,
            format_rational(&mass),
            agree
        );
        println!();
    }
}
