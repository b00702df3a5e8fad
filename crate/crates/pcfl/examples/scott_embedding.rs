//! Embedding typed programs into the pure untyped calculus with Scott
//! encodings, and checking that convergence mass survives the trip.
//!
//! ```
//! cargo run --example scott_embedding
//! ```

use pcfl::embed::{embed, eval_untyped, mass_preservation};
use pcfl::syntax::parse_term;

fn main() {
    let samples = [
        "\\x:bool. x",
        "3",
        "1 + 2",
        "fst (true, 0)",
        "(\\x:bool. x) (true (+) false)",
        "if true (+) false then 0 else 1",
    ];
    for src in samples {
        let term = parse_term(src).unwrap();
        let image = embed(&term);
        println!("{src}");
        println!("  embeds to {}", image);
        let dist = eval_untyped(&image, 4000);
        println!("  untyped evaluation: mass {}", dist.mass());
        let (source, target, agree) = mass_preservation(&term, 24);
        println!("  mass preservation: source {}, target {}, agree {}", source, target, agree);
        println!();
    }
}
