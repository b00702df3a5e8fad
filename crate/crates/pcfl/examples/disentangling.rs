//! The disentangling-sets solver: realising a probability assignment
//! as per-set coefficients via max-flow, or naming a violated set.
//!
//! ```
//! cargo run --example disentangling
//! ```

use pcfl::flow::{disentangle, lift_check, ProbAssignment};
use pcfl::rational::{format_rational, rat};
use std::collections::{BTreeMap, BTreeSet};

fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

fn main() {
    let feasible = ProbAssignment {
        p: vec![rat(1, 2), rat(1, 4)],
        r: [
            (set(&[1]), rat(1, 4)),
            (set(&[2]), rat(1, 4)),
            (set(&[1, 2]), rat(1, 2)),
        ]
        .into_iter()
        .collect(),
    };
    println!("feasible assignment:");
    match disentangle(&feasible) {
        Ok(d) => {
            for ((k, i), v) in &d.s {
                println!("  s[{} | {:?}] = {}", k, i, format_rational(v));
            }
            println!("  constraints hold: {}", d.satisfies(&feasible));
        }
        Err(cut) => println!("  unexpectedly invalid: {:?}", cut.violated),
    }

    let infeasible = ProbAssignment {
        p: vec![rat(1, 1), rat(1, 2)],
        r: [(set(&[1]), rat(1, 4)), (set(&[1, 2]), rat(1, 2))].into_iter().collect(),
    };
    println!("\ninfeasible assignment:");
    match disentangle(&infeasible) {
        Ok(_) => println!("  unexpectedly solved"),
        Err(cut) => println!("  violated index set: {:?}", cut.violated),
    }

    // the same machinery decides distribution lifting for simulation
    let d: BTreeMap<&str, _> = [("a", rat(1, 2)), ("b", rat(1, 2))].into_iter().collect();
    let e: BTreeMap<&str, _> = [("c", rat(1, 1))].into_iter().collect();
    println!(
        "\nlifting {{a: 1/2, b: 1/2}} below {{c: 1}} through a total relation: {}",
        lift_check(&d, &e, |_, _| true)
    );
}
