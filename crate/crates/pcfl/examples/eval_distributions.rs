//! Exact value distributions of probabilistic programs.
//!
//! ```
//! cargo run --example eval_distributions
//! ```

use pcfl::eval::{eval_big, eval_small, exact_dist};
use pcfl::rational::format_rational;
use pcfl::syntax::parse_term;

fn main() {
    let samples = [
        ("fair coin", "true (+) false"),
        ("nested coin", "true (+) (true (+) false)"),
        ("beta redex", "(\\x:bool. x) (true (+) false)"),
        ("diverging", "(fix f:int->bool. f) 0"),
        ("geometric", "(fix f:int->int. (\\y:int. y) (+) (\\y:int. f (y + 1))) 0"),
    ];
    for (name, src) in samples {
        let term = parse_term(src).unwrap();
        let big = eval_big(&term, 24);
        let small = eval_small(&term, 48);
        println!("{name}: {src}");
        println!("  big-step  mass {}", format_rational(&big.mass()));
        for (v, w) in big.iter().take(6) {
            println!("    {}  {}", format_rational(w), v);
        }
        if big.len() > 6 {
            println!("    ... {} more values", big.len() - 6);
        }
        println!("  small-step mass {}", format_rational(&small.mass()));
        match exact_dist(&term, 192) {
            Some(exact) => println!("  exact mass {} (reduction graph closed)", format_rational(&exact.mass())),
            None => println!("  exact solution unavailable (reduction graph does not close)"),
        }
        println!();
    }
}
