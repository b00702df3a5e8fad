//! Finite subdistributions: maps from values to exact weights with
//! total mass at most 1. The missing mass models divergence.

use crate::rational::{format_rational, rat_zero, Rational};
use crate::syntax::Term;
use num::Zero;
use std::collections::BTreeMap;

/// A finite map from keys to positive rational weights. Zero weights
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist<K: Ord + Clone> {
    weights: BTreeMap<K, Rational>,
}

impl<K: Ord + Clone> Default for Dist<K> {
    fn default() -> Self {
        Dist::empty()
    }
}

impl<K: Ord + Clone> Dist<K> {
    pub fn empty() -> Self {
        Dist { weights: BTreeMap::new() }
    }

    pub fn point(k: K) -> Self {
        let mut d = Dist::empty();
        d.add_weight(k, num::One::one());
        d
    }

    pub fn add_weight(&mut self, k: K, w: Rational) {
        if w.is_zero() {
            return;
        }
        let entry = self.weights.entry(k.clone()).or_insert_with(rat_zero);
        *entry += w;
        // weights stay positive in this crate, but keep the invariant
        // robust against cancelling arithmetic
        if entry.is_zero() {
            self.weights.remove(&k);
        }
    }

    pub fn get(&self, k: &K) -> Rational {
        self.weights.get(k).cloned().unwrap_or_else(rat_zero)
    }

    pub fn mass(&self) -> Rational {
        self.weights.values().fold(rat_zero(), |a, b| a + b)
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.weights.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scale(&self, w: &Rational) -> Dist<K> {
        if w.is_zero() {
            return Dist::empty();
        }
        Dist { weights: self.weights.iter().map(|(k, v)| (k.clone(), v * w)).collect() }
    }

    pub fn add(&mut self, other: &Dist<K>) {
        for (k, v) in other.iter() {
            self.add_weight(k.clone(), v.clone());
        }
    }

    /// Pointwise order on subdistributions.
    pub fn le(&self, other: &Dist<K>) -> bool {
        self.weights.iter().all(|(k, v)| *v <= other.get(k))
    }

    pub fn map_keys<J: Ord + Clone>(&self, f: impl Fn(&K) -> J) -> Dist<J> {
        let mut out = Dist::empty();
        for (k, v) in self.iter() {
            out.add_weight(f(k), v.clone());
        }
        out
    }
}

/// A subdistribution over values of the typed language. Keys are stored
/// as canonical alpha-representatives, so lookups are alpha-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValueDist(Dist<Term>);

impl ValueDist {
    pub fn empty() -> Self {
        ValueDist(Dist::empty())
    }

    pub fn point(v: &Term) -> Self {
        ValueDist(Dist::point(v.canon()))
    }

    pub fn add_weight(&mut self, v: &Term, w: Rational) {
        self.0.add_weight(v.canon(), w);
    }

    pub fn get(&self, v: &Term) -> Rational {
        self.0.get(&v.canon())
    }

    pub fn mass(&self) -> Rational {
        self.0.mass()
    }

    pub fn support(&self) -> impl Iterator<Item = &Term> {
        self.0.support()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, w: &Rational) -> ValueDist {
        ValueDist(self.0.scale(w))
    }

    pub fn add(&mut self, other: &ValueDist) {
        self.0.add(&other.0);
    }

    pub fn le(&self, other: &ValueDist) -> bool {
        self.0.le(&other.0)
    }

    /// Schema: `{"mass":"3/4","support":[{"value":"...","prob":"1/2"},...]}`
    /// with rationals as `num/den` strings, support sorted by printed term.
    pub fn to_json(&self) -> serde_json::Value {
        let mut support: Vec<(String, String)> =
            self.iter().map(|(v, w)| (v.to_string(), format_rational(w))).collect();
        support.sort();
        serde_json::json!({
            "mass": format_rational(&self.mass()),
            "support": support
                .into_iter()
                .map(|(value, prob)| serde_json::json!({"value": value, "prob": prob}))
                .collect::<Vec<_>>(),
        })
    }
}

/// The total weight of a subdistribution: the probability of
/// convergence it certifies.
pub fn mass(d: &ValueDist) -> Rational {
    d.mass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::syntax::Type;

    #[test]
    fn mass_examples() {
        let mut d = ValueDist::empty();
        assert_eq!(mass(&d), rat(0, 1));
        d.add_weight(&Term::lam("x", Type::Bool, Term::var("x")), rat(1, 2));
        assert_eq!(mass(&d), rat(1, 2));
        let mut d = ValueDist::empty();
        d.add_weight(&Term::num(0), rat(1, 2));
        d.add_weight(&Term::num(1), rat(1, 4));
        assert_eq!(mass(&d), rat(3, 4));
    }

    #[test]
    fn keys_identified_up_to_alpha() {
        let mut d = ValueDist::empty();
        d.add_weight(&Term::lam("x", Type::Bool, Term::var("x")), rat(1, 2));
        d.add_weight(&Term::lam("y", Type::Bool, Term::var("y")), rat(1, 4));
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(&Term::lam("z", Type::Bool, Term::var("z"))), rat(3, 4));
    }

    #[test]
    fn json_shape() {
        let mut d = ValueDist::empty();
        d.add_weight(&Term::num(3), rat(1, 2));
        let j = d.to_json();
        assert_eq!(j["mass"], "1/2");
        assert_eq!(j["support"][0]["value"], "3");
        assert_eq!(j["support"][0]["prob"], "1/2");
    }
}
