//! Probabilistic bisimulation and simulation on chain fragments, and
//! the bounded equivalence checker built on them.
//!
//! Bisimulation is computed by partition refinement over probability
//! intervals: a block splits only when two members have provably
//! disjoint intervals into some block under some label, so separation
//! is sound even with unexplored mass. Frontier states start in
//! singleton blocks — unknown behaviour is never merged. Simulation is
//! the greatest fixpoint of pair deletion, with row domination decided
//! by the flow lifting check (one max-flow per pair and label instead
//! of a subset enumeration); a pair is deleted only when the row's
//! explored mass already exceeds everything the candidate superior
//! could supply, deficit included.
//!
//! "Equivalent" verdicts are always qualified by the exploration
//! bounds: the true chain is infinite. "Not equivalent" verdicts carry
//! a distinguishing test whose success probabilities at the two roots
//! were verified by direct evaluation.

use crate::flow::lift_check;
use crate::lmc::{arg_universe_for, build_fragment, Label, LmcError, LmcFragment, LmcState};
use crate::rational::{format_rational, Interval, Rational};
use crate::syntax::{infer, Term, Type, TypeError, TypingContext};
use crate::testing::{find_distinguishing_test, success_lower_bound, Test};
use num::Zero;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Exploration bounds for equivalence checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub fuel: u64,
    pub arg_size: usize,
    pub depth: usize,
    pub test_depth: usize,
    pub state_cap: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { fuel: 32, arg_size: 2, depth: 6, test_depth: 4, state_cap: 100_000 }
    }
}

/// Map from fragment state id to block id; blocks partition the states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block: Vec<usize>,
}

impl Partition {
    pub fn block_of(&self, state: usize) -> usize {
        self.block[state]
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block[a] == self.block[b]
    }

    pub fn blocks(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (state, &b) in self.block.iter().enumerate() {
            out.entry(b).or_default().push(state);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    fn normalize(&mut self) {
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        for b in &self.block {
            let next = remap.len();
            remap.entry(*b).or_insert(next);
        }
        for b in &mut self.block {
            *b = remap[b];
        }
    }
}

/// A set of ordered state pairs; at the simulation fixpoint this is a
/// preorder on the fragment's equally-typed states.
pub type Relation = BTreeSet<(usize, usize)>;

/// Interval of probability that `state` moves under `label` into the
/// given block, with the row deficit widening the upper end.
fn block_interval(
    frag: &LmcFragment,
    partition: &Partition,
    state: usize,
    label: &Label,
    block: usize,
) -> Interval {
    let row = frag.row(state, label).expect("expanded state");
    let mut lo = Rational::zero();
    for (&target, w) in row {
        if partition.block_of(target) == block {
            lo += w;
        }
    }
    let hi = &lo + &frag.deficit(state, label);
    Interval::new(lo, hi).clamp_unit()
}

/// Can the refinement distinguish `a` from `b` in the current
/// partition? True when some label and target block have disjoint
/// probability intervals.
fn separable(frag: &LmcFragment, partition: &Partition, a: usize, b: usize) -> bool {
    let mut labels = frag.labels_at(a);
    labels.extend(frag.labels_at(b));
    for label in labels {
        let mut blocks: BTreeSet<usize> = BTreeSet::new();
        for id in [a, b] {
            if let Some(row) = frag.row(id, &label) {
                blocks.extend(row.keys().map(|&t| partition.block_of(t)));
            }
        }
        for block in blocks {
            let ia = block_interval(frag, partition, a, &label, block);
            let ib = block_interval(frag, partition, b, &label, block);
            if ia.disjoint(&ib) {
                return true;
            }
        }
    }
    false
}

/// Coarsest partition stable under interval refinement. Frontier
/// states are pinned to singleton blocks; expanded states start
/// together and a block splits into the connected components of the
/// "not provably different" graph, so only sound separations happen.
pub fn bisim_classes(frag: &LmcFragment) -> Partition {
    let n = frag.len();
    let mut partition = Partition { block: vec![0; n] };
    // frontier singletons, one expanded block
    let mut next = 1usize;
    for id in 0..n {
        if frag.is_frontier(id) {
            partition.block[id] = next;
            next += 1;
        }
    }
    let mut next_fresh = n + 1;
    loop {
        let mut changed = false;
        for (_, members) in partition.blocks() {
            if members.len() <= 1 {
                continue;
            }
            // connected components of the compatibility graph
            let k = members.len();
            let mut comp: Vec<usize> = (0..k).collect();
            fn find(comp: &mut Vec<usize>, i: usize) -> usize {
                if comp[i] != i {
                    let r = find(comp, comp[i]);
                    comp[i] = r;
                }
                comp[i]
            }
            for i in 0..k {
                for j in (i + 1)..k {
                    if !separable(frag, &partition, members[i], members[j]) {
                        let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
                        if ri != rj {
                            comp[ri] = rj;
                        }
                    }
                }
            }
            let roots: BTreeSet<usize> = (0..k).map(|i| find(&mut comp, i)).collect();
            if roots.len() > 1 {
                changed = true;
                let mut fresh: BTreeMap<usize, usize> = BTreeMap::new();
                for (pos, &m) in members.iter().enumerate() {
                    let root = find(&mut comp, pos);
                    let id = *fresh.entry(root).or_insert_with(|| {
                        let id = next_fresh;
                        next_fresh += 1;
                        id
                    });
                    partition.block[m] = id;
                }
            }
        }
        if !changed {
            partition.normalize();
            return partition;
        }
    }
}

/// Greatest simulation-style relation on the fragment: start from all
/// equally-typed pairs and delete `(s, t)` whenever some label's
/// explored row at `s` is not dominated, through the relation, by
/// `t`'s row plus its deficit. Deletion is sound; survival of a pair is
/// a bound-qualified "not refuted".
pub fn sim_preorder(frag: &LmcFragment) -> Relation {
    let n = frag.len();
    let mut rel: Relation = BTreeSet::new();
    for s in 0..n {
        for t in 0..n {
            if frag.state(s).ty == frag.state(t).ty {
                rel.insert((s, t));
            }
        }
    }
    loop {
        let mut delete: Vec<(usize, usize)> = Vec::new();
        'pairs: for &(s, t) in &rel {
            if s == t || frag.is_frontier(s) {
                continue; // reflexive pairs and unknown rows never fail
            }
            for label in frag.labels_at(s) {
                let s_row = frag.row(s, &label).expect("expanded");
                if s_row.is_empty() {
                    continue;
                }
                let d: BTreeMap<usize, Rational> =
                    s_row.iter().map(|(&k, v)| (k, v.clone())).collect();
                // unknown superior rows dominate anything
                let Some(t_row) = frag.row(t, &label) else { continue };
                // pad the superior with its deficit: a wildcard target
                // related to everything
                const WILDCARD: usize = usize::MAX;
                let mut e: BTreeMap<usize, Rational> =
                    t_row.iter().map(|(&k, v)| (k, v.clone())).collect();
                let deficit = frag.deficit(t, &label);
                if !deficit.is_zero() {
                    e.insert(WILDCARD, deficit);
                }
                let dominated = lift_check(&d, &e, |a, b| {
                    *b == WILDCARD || rel.contains(&(*a, *b))
                });
                if !dominated {
                    delete.push((s, t));
                    continue 'pairs;
                }
            }
        }
        if delete.is_empty() {
            return rel;
        }
        for p in delete {
            rel.remove(&p);
        }
    }
}

/// Outcome of a bounded equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Not refuted within the bounds; the true chain is infinite, so
    /// this is never absolute.
    EquivalentUpToBound { cfg: CheckConfig, arg_universe: Vec<Term> },
    /// Refuted: the witness test succeeds with provably different
    /// probabilities at the two roots.
    NotEquivalent { witness: Test, p_left: Rational, p_right: Rational },
}

impl Verdict {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Verdict::EquivalentUpToBound { cfg, arg_universe } => serde_json::json!({
                "verdict": "equivalent_up_to_bound",
                "cfg": {
                    "fuel": cfg.fuel,
                    "arg_size": cfg.arg_size,
                    "depth": cfg.depth,
                    "test_depth": cfg.test_depth,
                    "state_cap": cfg.state_cap,
                },
                "arg_universe": arg_universe.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            }),
            Verdict::NotEquivalent { witness, p_left, p_right } => serde_json::json!({
                "verdict": "not_equivalent",
                "witness_test": witness.to_string(),
                "p_left": format_rational(p_left),
                "p_right": format_rational(p_right),
            }),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("terms have different types: {0} and {1}")]
    TypeMismatch(Type, Type),
    #[error(transparent)]
    Resource(#[from] LmcError),
}

/// Confirms a candidate witness by direct evaluation: both success
/// probabilities must be stable under a fuel increase and different.
fn verify_witness(
    m: &Term,
    n: &Term,
    ty: &Type,
    t: &Test,
    fuel: u64,
) -> Option<(Rational, Rational)> {
    let more = fuel * 2 + 8;
    let pm = success_lower_bound(m, ty, t, fuel);
    let pn = success_lower_bound(n, ty, t, fuel);
    if pm == pn {
        return None;
    }
    let pm2 = success_lower_bound(m, ty, t, more);
    let pn2 = success_lower_bound(n, ty, t, more);
    if pm == pm2 && pn == pn2 {
        Some((pm, pn))
    } else {
        None
    }
}

/// Bounded equivalence check: build a joint fragment, refine, and on
/// separation search for a distinguishing test to report. Terms that
/// stay in one block are equivalent up to the bounds.
pub fn check_equiv(m: &Term, n: &Term, ty: &Type, cfg: &CheckConfig) -> Result<Verdict, CheckError> {
    let empty = TypingContext::new();
    for term in [m, n] {
        let found = infer(&empty, term)?;
        if found != *ty {
            return Err(CheckError::TypeMismatch(ty.clone(), found));
        }
    }
    let universe = arg_universe_for(ty, cfg.arg_size);
    let left = LmcState::program(m, ty.clone());
    let right = LmcState::program(n, ty.clone());
    let equivalent = Ok(Verdict::EquivalentUpToBound {
        cfg: cfg.clone(),
        arg_universe: universe.iter().cloned().collect(),
    });
    if left == right {
        return equivalent;
    }
    let frag = build_fragment(&[left.clone(), right.clone()], cfg.fuel, &universe, cfg.depth, cfg.state_cap)?;
    let (lid, rid) = (frag.id_of(&left).unwrap(), frag.id_of(&right).unwrap());
    let partition = bisim_classes(&frag);
    if partition.same_block(lid, rid) {
        return equivalent;
    }
    if let Some(witness) = find_distinguishing_test(&frag, lid, rid, cfg.test_depth) {
        if let Some((p_left, p_right)) = verify_witness(m, n, ty, &witness, cfg.fuel) {
            return Ok(Verdict::NotEquivalent { witness, p_left, p_right });
        }
    }
    // separated by refinement but no verified witness within the test
    // depth: report the bound-qualified verdict, never an unverified
    // separation
    equivalent
}

/// Open extension: checks all closures that send each variable of the
/// typing context to an enumerated closed value of its type. The first
/// separating closure decides.
pub fn open_check(
    gamma: &TypingContext,
    m: &Term,
    n: &Term,
    ty: &Type,
    cfg: &CheckConfig,
) -> Result<Verdict, CheckError> {
    for term in [m, n] {
        let found = infer(gamma, term)?;
        if found != *ty {
            return Err(CheckError::TypeMismatch(ty.clone(), found));
        }
    }
    let vars: Vec<(String, Type)> = gamma.iter().map(|(x, t)| (x.clone(), t.clone())).collect();
    let choices: Vec<Vec<Term>> = vars
        .iter()
        .map(|(_, t)| crate::lmc::enumerate_values(t, cfg.arg_size.max(1)))
        .collect();
    let equivalent =
        Ok(Verdict::EquivalentUpToBound { cfg: cfg.clone(), arg_universe: Vec::new() });
    if choices.iter().any(|c| c.is_empty()) {
        return equivalent; // no closure exists at this bound
    }
    let mut counters = vec![0usize; vars.len()];
    loop {
        let mut mm = m.clone();
        let mut nn = n.clone();
        for (i, (x, _)) in vars.iter().enumerate() {
            let v = &choices[i][counters[i]];
            mm = mm.subst(v, x);
            nn = nn.subst(v, x);
        }
        match check_equiv(&mm, &nn, ty, cfg)? {
            Verdict::NotEquivalent { witness, p_left, p_right } => {
                return Ok(Verdict::NotEquivalent { witness, p_left, p_right });
            }
            Verdict::EquivalentUpToBound { .. } => {}
        }
        // next closure, odometer style
        let mut i = 0;
        loop {
            if i == vars.len() {
                return equivalent;
            }
            counters[i] += 1;
            if counters[i] < choices[i].len() {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }
}
