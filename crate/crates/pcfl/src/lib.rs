//! A typed call-by-value PCF with lazy lists and fair binary
//! probabilistic choice, together with the machinery to compare its
//! programs behaviourally:
//!
//! - exact probabilistic evaluation (big-step and small-step, plus an
//!   exact absorbing-chain solver for terms with finite reduction
//!   graphs), all arithmetic over arbitrary-precision rationals;
//! - finite fragments of the applicative labelled Markov chain whose
//!   states are typed programs and distinguished values;
//! - probabilistic bisimulation (partition refinement) and simulation
//!   (flow-checked preorder refinement) on those fragments;
//! - the conjunctive test language, exact success probabilities, a
//!   test-to-context compiler, and distinguishing-test search;
//! - a max-flow solver over exact rationals, the disentangling-sets
//!   solver built on it, and the distribution-lifting oracle;
//! - a Scott-encoding embedding into the untyped probabilistic
//!   lambda-calculus with its own call-by-value evaluator.
//!
//! See the `examples/` directory for one runnable demo per capability
//! and the `pcfl` binary for batch analyses of source files.

pub mod cli;
pub mod dist;
pub mod embed;
pub mod equivalence;
pub mod eval;
pub mod flow;
pub mod lmc;
pub mod rational;
pub mod syntax;
pub mod testing;

pub use dist::{mass, ValueDist};
pub use rational::{Interval, Rational};
pub use syntax::{
    check_context, infer, parse_term, parse_type, Context, ParseError, Term, Type, TypingContext,
};
