//! The one-time-pad equivalences: encrypting either message, or
//! replacing the experiment by a fair coin, is behaviourally invisible.
//!
//! ```
//! cargo run --example otp_equivalences
//! ```

use pcfl::cli::{load_term, Config};
use pcfl::equivalence::{check_equiv, Verdict};
use pcfl::syntax::parse_type;
use std::path::Path;

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).display().to_string()
}

fn main() {
    let ty = parse_type("bool -> bool -> bool").unwrap();
    let cfg = Config::default();
    for (a, b) in [("exp_fst.pcfl", "exp_snd.pcfl"), ("exp.pcfl", "rnd.pcfl")] {
        let m = load_term(&corpus(a)).unwrap();
        let n = load_term(&corpus(b)).unwrap();
        match check_equiv(&m, &n, &ty, &cfg).unwrap() {
            Verdict::EquivalentUpToBound { .. } => {
                println!("{a} and {b}: equivalent up to bound (fuel {}, depth {})", cfg.fuel, cfg.depth)
            }
            Verdict::NotEquivalent { witness, p_left, p_right } => {
                println!("{a} and {b}: separated by {witness} ({p_left} vs {p_right})")
            }
        }
    }
}
