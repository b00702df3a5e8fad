//! Max-flow over exact rationals, the disentangling-sets solver, and
//! the distribution-lifting oracle used by simulation checking.
//!
//! A probability assignment `({p_i}, {r_I})` is valid when every index
//! set draws no more mass than the sets meeting it supply:
//! `Σ_{i∈I} p_i ≤ Σ_{J∩I≠∅} r_J` for all `I`. The disentangling solver
//! realises such an assignment as coefficients `s_{k,I}` by computing a
//! maximum flow on a network whose nodes are the nonempty index sets;
//! validity holds exactly when the flow saturates the source, and a
//! violated set can be read off the minimum cut otherwise.

use crate::rational::{rat_one, rat_zero, Rational};
use num::Zero;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: Rational,
    flow: Rational,
}

/// A capacitated digraph. Edges are indexed by insertion order; each
/// `add_edge` also creates the reverse residual edge.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes], edges: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds a directed edge and returns its id. Capacities must be
    /// non-negative.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: Rational) -> usize {
        assert!(cap >= rat_zero(), "negative capacity");
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, flow: rat_zero() });
        self.adj[from].push(id);
        self.edges.push(Edge { to: from, cap: rat_zero(), flow: rat_zero() });
        self.adj[to].push(id + 1);
        id
    }

    fn residual(&self, eid: usize) -> Rational {
        let e = &self.edges[eid];
        &e.cap - &e.flow
    }

    /// Edmonds-Karp: repeatedly augments along a shortest residual
    /// path. Terminates for any capacities; with rationals the flow is
    /// exact.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> Rational {
        let mut total = rat_zero();
        loop {
            // BFS for a shortest augmenting path
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[source] = true;
            let mut q = VecDeque::new();
            q.push_back(source);
            'bfs: while let Some(u) = q.pop_front() {
                for &eid in &self.adj[u] {
                    let v = self.edges[eid].to;
                    if !seen[v] && self.residual(eid) > rat_zero() {
                        seen[v] = true;
                        pred[v] = Some(eid);
                        if v == sink {
                            break 'bfs;
                        }
                        q.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            // bottleneck along the path
            let mut bottleneck: Option<Rational> = None;
            let mut v = sink;
            while v != source {
                let eid = pred[v].expect("path");
                let r = self.residual(eid);
                bottleneck = Some(match bottleneck {
                    None => r,
                    Some(b) if r < b => r,
                    Some(b) => b,
                });
                v = self.edges[eid ^ 1].to;
            }
            let aug = bottleneck.expect("nonempty path");
            let mut v = sink;
            while v != source {
                let eid = pred[v].expect("path");
                self.edges[eid].flow += &aug;
                self.edges[eid ^ 1].flow -= &aug;
                v = self.edges[eid ^ 1].to;
            }
            total += aug;
        }
    }

    /// Flow currently assigned to edge `id` (as returned by `add_edge`).
    pub fn flow_on(&self, id: usize) -> Rational {
        self.edges[id].flow.clone()
    }

    /// Nodes reachable from `source` in the residual graph; after a
    /// max-flow run this is the source side of a minimum cut.
    pub fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        let mut q = VecDeque::from([source]);
        while let Some(u) = q.pop_front() {
            for &eid in &self.adj[u] {
                let v = self.edges[eid].to;
                if !seen[v] && self.residual(eid) > rat_zero() {
                    seen[v] = true;
                    q.push_back(v);
                }
            }
        }
        seen
    }

    /// Decomposes the current flow into source-to-sink paths, calling
    /// `visit(path_nodes, amount)` per path. Destroys the stored flow.
    fn decompose_paths(&mut self, source: usize, sink: usize, visit: &mut dyn FnMut(&[usize], &Rational)) {
        loop {
            // walk positive-flow edges from the source
            let mut path_nodes = vec![source];
            let mut path_edges = Vec::new();
            let mut u = source;
            while u != sink {
                let Some(&eid) = self.adj[u]
                    .iter()
                    .find(|&&eid| eid % 2 == 0 && self.edges[eid].flow > rat_zero())
                else {
                    return; // no flow left
                };
                path_edges.push(eid);
                u = self.edges[eid].to;
                path_nodes.push(u);
            }
            let amount = path_edges
                .iter()
                .map(|&e| self.edges[e].flow.clone())
                .min()
                .expect("nonempty path");
            for &e in &path_edges {
                self.edges[e].flow -= &amount;
            }
            visit(&path_nodes, &amount);
        }
    }
}

/// Convenience wrapper matching the operation contract: runs max-flow
/// and returns the value together with the per-edge flows.
pub fn max_flow(net: &mut FlowNetwork, source: usize, sink: usize) -> (Rational, Vec<Rational>) {
    let value = net.max_flow(source, sink);
    let flows = (0..net.edges.len() / 2).map(|i| net.flow_on(2 * i)).collect();
    (value, flows)
}

/// The `(p_i, r_I)` structure: `p` is indexed `1..=n`, `r` maps
/// nonempty subsets of `{1..n}` to weights. Missing subsets mean 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbAssignment {
    pub p: Vec<Rational>,
    pub r: BTreeMap<BTreeSet<usize>, Rational>,
}

impl ProbAssignment {
    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn r_of(&self, set: &BTreeSet<usize>) -> Rational {
        self.r.get(set).cloned().unwrap_or_else(rat_zero)
    }

    /// Brute-force validity: for every nonempty `I`,
    /// `Σ_{i∈I} p_i ≤ Σ_{J∩I≠∅} r_J`. Exponential; fine for small n.
    pub fn valid(&self) -> bool {
        let n = self.n();
        for mask in 1u32..(1 << n) {
            let lhs: Rational = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .fold(rat_zero(), |acc, i| acc + &self.p[i]);
            let mut rhs = rat_zero();
            for (set, w) in &self.r {
                if set.iter().any(|&i| mask & (1 << (i - 1)) != 0) {
                    rhs += w;
                }
            }
            if lhs > rhs {
                return false;
            }
        }
        true
    }
}

/// The solver's output: `s[(k, I)]` with `k ∈ I`, satisfying
/// `Σ_{k∈I} s_{k,I} ≤ 1` per set and `p_k ≤ Σ_{I∋k} s_{k,I}·r_I` per
/// index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disentangling {
    pub s: BTreeMap<(usize, BTreeSet<usize>), Rational>,
}

/// Why an assignment has no disentangling: some index set draws more
/// than the sets meeting it supply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidCut {
    pub violated: BTreeSet<usize>,
}

fn subsets(n: usize) -> Vec<BTreeSet<usize>> {
    (1u32..(1 << n))
        .map(|mask| (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect())
        .collect()
}

/// Builds the flow network of the disentangling construction and
/// extracts the coefficients from a path decomposition of a maximum
/// flow.
///
/// Nodes are the nonempty subsets of `{1..n}` plus source and sink;
/// the source feeds each singleton `{i}` with capacity `p_i`, each `I`
/// links to `I ∪ {i}`, and each `I` drains to the sink with capacity
/// `r_I`. The assignment is valid iff the maximum flow equals `Σ p_i`.
/// Intermediate capacities are effectively unbounded (`max(1, Σ p_i)`;
/// when total mass is at most 1, as in the probabilistic setting, this
/// is the constant 1).
pub fn disentangle(assignment: &ProbAssignment) -> Result<Disentangling, InvalidCut> {
    let n = assignment.n();
    assert!((1..=16).contains(&n), "index sets up to 16 elements");
    let sets = subsets(n);
    let set_index: BTreeMap<&BTreeSet<usize>, usize> =
        sets.iter().enumerate().map(|(i, s)| (s, i + 1)).collect();
    // node 0 = source, 1..=sets = subsets, last = sink
    let sink = sets.len() + 1;
    let mut net = FlowNetwork::new(sets.len() + 2);
    let total: Rational = assignment.p.iter().fold(rat_zero(), |a, b| a + b);
    let inter_cap = if total > rat_one() { total.clone() } else { rat_one() };
    for (i, p) in assignment.p.iter().enumerate() {
        let singleton: BTreeSet<usize> = [i + 1].into_iter().collect();
        net.add_edge(0, set_index[&singleton], p.clone());
    }
    for set in &sets {
        let from = set_index[set];
        for i in 1..=n {
            if !set.contains(&i) {
                let mut bigger = set.clone();
                bigger.insert(i);
                net.add_edge(from, set_index[&bigger], inter_cap.clone());
            }
        }
    }
    let mut sink_edge: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for set in &sets {
        net.add_edge(set_index[set], sink, assignment.r_of(set));
        sink_edge.insert(set_index[set], set.clone());
    }
    let value = net.max_flow(0, sink);
    if value != total {
        // the residual source side names a violated set: the singletons
        // still reachable draw more than the reachable sets supply
        let seen = net.residual_reachable(0);
        let violated: BTreeSet<usize> = (1..=n)
            .filter(|&i| {
                let singleton: BTreeSet<usize> = [i].into_iter().collect();
                seen[set_index[&singleton]]
            })
            .collect();
        // `violated` is nonempty: an unsaturated source edge leads to a
        // reachable singleton
        return Err(InvalidCut { violated });
    }
    // every flow path runs source -> {k} -> ... -> I -> sink with k ∈ I
    // throughout; s_{k,I} collects the mass of paths from k ending at I,
    // normalised by r_I
    let mut routed: BTreeMap<(usize, BTreeSet<usize>), Rational> = BTreeMap::new();
    let sets_ref = &sets;
    net.decompose_paths(0, sink, &mut |nodes, amount| {
        let first = nodes[1];
        let last = nodes[nodes.len() - 2];
        let k = *sets_ref[first - 1].iter().next().expect("singleton");
        let set = sets_ref[last - 1].clone();
        *routed.entry((k, set)).or_insert_with(rat_zero) += amount;
    });
    let mut s = BTreeMap::new();
    for ((k, set), amount) in routed {
        let r = assignment.r_of(&set);
        if !r.is_zero() {
            s.insert((k, set), amount / r);
        }
    }
    Ok(Disentangling { s })
}

impl Disentangling {
    /// Checks the two defining constraints against an assignment.
    pub fn satisfies(&self, assignment: &ProbAssignment) -> bool {
        let n = assignment.n();
        // every coefficient lies in [0,1] and is keyed by k ∈ I
        for ((k, set), v) in &self.s {
            if !set.contains(k) || *v < rat_zero() || *v > rat_one() {
                return false;
            }
        }
        // per-set budget
        for set in subsets(n) {
            let sum: Rational = self
                .s
                .iter()
                .filter(|((_, s), _)| *s == set)
                .fold(rat_zero(), |acc, (_, v)| acc + v);
            if sum > rat_one() {
                return false;
            }
        }
        // per-index coverage
        for k in 1..=n {
            let covered: Rational = self
                .s
                .iter()
                .filter(|((i, _), _)| *i == k)
                .fold(rat_zero(), |acc, ((_, set), v)| acc + v * assignment.r_of(set));
            if assignment.p[k - 1] > covered {
                return false;
            }
        }
        true
    }
}

/// Decides whether `d` is dominated by `e` through relation `rel`:
/// for all `X ⊆ supp(d)`, `d(X) ≤ e(rel(X))`. One max-flow instead of
/// `2^|supp(d)|` subset checks: source feeds each `a` with `d(a)`,
/// related pairs get unit capacity, each `b` drains `e(b)`; domination
/// holds iff the flow moves all of `d`'s mass.
pub fn lift_check<A: Ord + Clone, B: Ord + Clone>(
    d: &BTreeMap<A, Rational>,
    e: &BTreeMap<B, Rational>,
    rel: impl Fn(&A, &B) -> bool,
) -> bool {
    let d_mass: Rational = d.values().fold(rat_zero(), |a, b| a + b);
    if d_mass.is_zero() {
        return true;
    }
    let da: Vec<&A> = d.keys().collect();
    let eb: Vec<&B> = e.keys().collect();
    let mut net = FlowNetwork::new(2 + da.len() + eb.len());
    let sink = 1 + da.len() + eb.len();
    for (i, a) in da.iter().enumerate() {
        net.add_edge(0, 1 + i, d[a].clone());
        for (j, b) in eb.iter().enumerate() {
            if rel(a, b) {
                net.add_edge(1 + i, 1 + da.len() + j, rat_one());
            }
        }
    }
    for (j, b) in eb.iter().enumerate() {
        net.add_edge(1 + da.len() + j, sink, e[b].clone());
    }
    net.max_flow(0, sink) == d_mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn single_edge_flow() {
        let mut net = FlowNetwork::new(2);
        net.add_edge(0, 1, rat(3, 4));
        let (v, flows) = max_flow(&mut net, 0, 1);
        assert_eq!(v, rat(3, 4));
        assert_eq!(flows, vec![rat(3, 4)]);
    }

    #[test]
    fn two_disjoint_unit_paths() {
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, rat(1, 1));
        net.add_edge(1, 3, rat(1, 1));
        net.add_edge(0, 2, rat(1, 1));
        net.add_edge(2, 3, rat(1, 1));
        let (v, _) = max_flow(&mut net, 0, 3);
        assert_eq!(v, rat(2, 1));
    }

    #[test]
    fn diamond_with_bottleneck() {
        // min cut is the pair of sink edges: 1/4 + 1/4 = 1/2
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, rat(1, 1));
        net.add_edge(0, 2, rat(1, 1));
        net.add_edge(1, 3, rat(1, 4));
        net.add_edge(2, 3, rat(1, 4));
        let (v, _) = max_flow(&mut net, 0, 3);
        assert_eq!(v, rat(1, 2));
    }

    #[test]
    fn conservation_and_capacity_hold() {
        let mut net = FlowNetwork::new(5);
        let e = [
            net.add_edge(0, 1, rat(2, 3)),
            net.add_edge(0, 2, rat(1, 3)),
            net.add_edge(1, 3, rat(1, 2)),
            net.add_edge(2, 3, rat(1, 2)),
            net.add_edge(1, 2, rat(1, 6)),
            net.add_edge(3, 4, rat(5, 6)),
        ];
        let (v, flows) = max_flow(&mut net, 0, 4);
        assert_eq!(v, rat(5, 6));
        // capacity constraints
        let caps = [rat(2, 3), rat(1, 3), rat(1, 2), rat(1, 2), rat(1, 6), rat(5, 6)];
        for (i, _) in e.iter().enumerate() {
            assert!(flows[i] >= rat(0, 1) && flows[i] <= caps[i]);
        }
        // conservation at internal nodes 1, 2, 3
        assert_eq!(flows[0], &flows[2] + &flows[4]);
        assert_eq!(&flows[1] + &flows[4], flows[3]);
        assert_eq!(&flows[2] + &flows[3], flows[5]);
    }

    #[test]
    fn disentangle_forced_singleton() {
        let p = ProbAssignment {
            p: vec![rat(1, 2)],
            r: [(set(&[1]), rat(1, 2))].into_iter().collect(),
        };
        let d = disentangle(&p).unwrap();
        assert_eq!(d.s.get(&(1, set(&[1]))), Some(&rat(1, 1)));
        assert!(d.satisfies(&p));
    }

    #[test]
    fn disentangle_two_singletons() {
        let p = ProbAssignment {
            p: vec![rat(1, 2), rat(1, 2)],
            r: [
                (set(&[1]), rat(1, 2)),
                (set(&[2]), rat(1, 2)),
                (set(&[1, 2]), rat(0, 1)),
            ]
            .into_iter()
            .collect(),
        };
        let d = disentangle(&p).unwrap();
        assert_eq!(d.s.get(&(1, set(&[1]))), Some(&rat(1, 1)));
        assert_eq!(d.s.get(&(2, set(&[2]))), Some(&rat(1, 1)));
        assert!(d.s.keys().all(|(_, s)| *s != set(&[1, 2])));
        assert!(d.satisfies(&p));
    }

    #[test]
    fn disentangle_invalid_reports_cut() {
        let p = ProbAssignment { p: vec![rat(1, 1)], r: BTreeMap::new() };
        let err = disentangle(&p).unwrap_err();
        assert_eq!(err.violated, set(&[1]));
        assert!(!p.valid());
    }

    #[test]
    fn lift_check_examples() {
        let d: BTreeMap<&str, Rational> = [("a", rat(1, 1))].into_iter().collect();
        let e: BTreeMap<&str, Rational> = [("b", rat(1, 2))].into_iter().collect();
        assert!(lift_check(&d, &d, |x, y| x == y));
        assert!(!lift_check(&d, &e, |_, _| true));

        let d2: BTreeMap<&str, Rational> =
            [("a", rat(1, 2)), ("a2", rat(1, 2))].into_iter().collect();
        let e2: BTreeMap<&str, Rational> = [("b", rat(1, 1))].into_iter().collect();
        assert!(lift_check(&d2, &e2, |_, _| true));
    }

    /// Subset-enumeration oracle for the lifting condition; exponential
    /// and only used to validate the flow reformulation.
    fn lift_oracle<A: Ord + Clone, B: Ord + Clone>(
        d: &BTreeMap<A, Rational>,
        e: &BTreeMap<B, Rational>,
        rel: impl Fn(&A, &B) -> bool,
    ) -> bool {
        let keys: Vec<&A> = d.keys().collect();
        for mask in 0u32..(1 << keys.len()) {
            let chosen: Vec<&A> =
                keys.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, k)| *k).collect();
            let lhs: Rational = chosen.iter().map(|k| d[*k].clone()).fold(rat(0, 1), |a, b| a + b);
            let rhs: Rational = e
                .iter()
                .filter(|(b, _)| chosen.iter().any(|a| rel(a, b)))
                .fold(rat(0, 1), |acc, (_, w)| acc + w);
            if lhs > rhs {
                return false;
            }
        }
        true
    }

    // simple deterministic generator, so the test corpus is stable
    struct XorShift(u64);
    impl XorShift {
        fn next(&mut self) -> u64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            x
        }
        fn dyadic(&mut self, denom_pow: u32) -> Rational {
            let den = 1i64 << denom_pow;
            rat((self.next() % (den as u64 + 1)) as i64, den)
        }
    }

    #[test]
    fn lift_check_agrees_with_oracle_on_random_instances() {
        let mut rng = XorShift(0x9e3779b97f4a7c15);
        for case in 0..200 {
            let na = 1 + (rng.next() % 5) as usize;
            let nb = 1 + (rng.next() % 5) as usize;
            let mut d = BTreeMap::new();
            for i in 0..na {
                d.insert(i, rng.dyadic(4).min(rat(1, 4)));
            }
            let mut e = BTreeMap::new();
            for j in 0..nb {
                e.insert(j, rng.dyadic(4).min(rat(1, 4)));
            }
            let edges: BTreeSet<(usize, usize)> = (0..na)
                .flat_map(|i| (0..nb).map(move |j| (i, j)))
                .filter(|_| rng.next() % 2 == 0)
                .collect();
            let rel = |a: &usize, b: &usize| edges.contains(&(*a, *b));
            assert_eq!(lift_check(&d, &e, rel), lift_oracle(&d, &e, rel), "case {}", case);
        }
    }

    #[test]
    fn disentangle_iff_valid_on_random_instances() {
        let mut rng = XorShift(0x2545f4914f6cdd1d);
        let mut valid_count = 0;
        for case in 0..200 {
            let n = 1 + (rng.next() % 4) as usize;
            let p: Vec<Rational> = (0..n).map(|_| rng.dyadic(3)).collect();
            let mut r = BTreeMap::new();
            for s in subsets(n) {
                if rng.next() % 3 != 0 {
                    r.insert(s, rng.dyadic(3));
                }
            }
            let assignment = ProbAssignment { p, r };
            let valid = assignment.valid();
            match disentangle(&assignment) {
                Ok(d) => {
                    assert!(valid, "case {}: solver succeeded on invalid assignment", case);
                    assert!(d.satisfies(&assignment), "case {}: constraints violated", case);
                    valid_count += 1;
                }
                Err(cut) => {
                    assert!(!valid, "case {}: solver failed on valid assignment", case);
                    // the reported cut must actually violate validity
                    let lhs: Rational = cut
                        .violated
                        .iter()
                        .fold(rat(0, 1), |acc, &i| acc + &assignment.p[i - 1]);
                    let rhs: Rational = assignment
                        .r
                        .iter()
                        .filter(|(s, _)| s.iter().any(|i| cut.violated.contains(i)))
                        .fold(rat(0, 1), |acc, (_, w)| acc + w);
                    assert!(lhs > rhs, "case {}: reported cut is not violated", case);
                }
            }
        }
        assert!(valid_count > 20, "generator should produce a healthy mix, got {}", valid_count);
    }
}
