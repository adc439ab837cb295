//! Incremental path weights.
//!
//! Every catalog weight factors as an admissibility indicator times
//! `exp(ln_value(key, len))`, where `key` is an exact integer tally (the
//! self-intersection count for weakly SAW, the number of lattice edges for
//! anisotropic SAW). Enumeration bins counts by key and applies the real
//! factor late, so identity checks stay exact.

mod properties;

use std::collections::HashMap;

use crate::descriptor::WeightSpec;
use crate::graph::{EdgeLabel, VertexId};

pub use properties::{check_good_properties, PropertyReport, Violation};

/// Per-vertex visit counts along the current path.
pub trait VisitCounter {
    fn count(&self, v: VertexId) -> u32;
    fn add(&mut self, v: VertexId);
    fn remove(&mut self, v: VertexId);
}

/// Visit counts indexed by vertex id; for walks inside a sealed ball.
#[derive(Debug, Clone)]
pub struct DenseVisits(Vec<u16>);

impl DenseVisits {
    pub fn new(vertices: usize) -> Self {
        DenseVisits(vec![0; vertices])
    }
}

impl VisitCounter for DenseVisits {
    #[inline]
    fn count(&self, v: VertexId) -> u32 {
        self.0[v as usize] as u32
    }
    #[inline]
    fn add(&mut self, v: VertexId) {
        self.0[v as usize] += 1;
    }
    #[inline]
    fn remove(&mut self, v: VertexId) {
        self.0[v as usize] -= 1;
    }
}

/// Visit counts for walks on a lazily grown model.
#[derive(Debug, Clone, Default)]
pub struct SparseVisits(HashMap<VertexId, u32>);

impl VisitCounter for SparseVisits {
    fn count(&self, v: VertexId) -> u32 {
        self.0.get(&v).copied().unwrap_or(0)
    }
    fn add(&mut self, v: VertexId) {
        *self.0.entry(v).or_insert(0) += 1;
    }
    fn remove(&mut self, v: VertexId) {
        if let Some(c) = self.0.get_mut(&v) {
            *c -= 1;
            if *c == 0 {
                self.0.remove(&v);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Blocked,
    Allowed { key_delta: u32 },
}

pub(crate) fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn edge(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

/// Incremental state of a path under a weight. Clone to branch.
#[derive(Debug, Clone)]
pub struct WeightState<C = SparseVisits> {
    spec: WeightSpec,
    path: Vec<VertexId>,
    labels: Vec<EdgeLabel>,
    deltas: Vec<u32>,
    visits: C,
    key: u32,
    edges: HashMap<(VertexId, VertexId), u32>,
}

impl WeightState<SparseVisits> {
    pub fn new(spec: WeightSpec, start: VertexId) -> Self {
        Self::with_counter(spec, start, SparseVisits::default())
    }
}

impl<C: VisitCounter> WeightState<C> {
    pub fn with_counter(spec: WeightSpec, start: VertexId, mut visits: C) -> Self {
        visits.add(start);
        WeightState {
            spec,
            path: vec![start],
            labels: Vec::new(),
            deltas: Vec::new(),
            visits,
            key: 0,
            edges: HashMap::new(),
        }
    }

    pub fn spec(&self) -> WeightSpec {
        self.spec
    }

    /// Number of steps taken.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn endpoint(&self) -> VertexId {
        *self.path.last().expect("path is never empty")
    }

    pub fn path(&self) -> &[VertexId] {
        &self.path
    }

    pub fn labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn key(&self) -> u32 {
        self.key
    }

    pub fn visits(&self, v: VertexId) -> u32 {
        self.visits.count(v)
    }

    pub fn ln_weight(&self) -> f64 {
        self.spec.ln_value(self.key, self.len())
    }

    pub fn weight(&self) -> f64 {
        self.ln_weight().exp()
    }

    /// Decide whether stepping to `v` along `label` is admissible, without moving.
    #[inline]
    pub fn probe(&self, v: VertexId, label: EdgeLabel) -> Step {
        let seen = self.visits.count(v);
        match self.spec {
            WeightSpec::Saw if seen > 0 => Step::Blocked,
            WeightSpec::Saw => Step::Allowed { key_delta: 0 },
            WeightSpec::WeaklySaw { .. } => Step::Allowed { key_delta: seen },
            WeightSpec::Anisotropic { .. } if seen > 0 => Step::Blocked,
            WeightSpec::Anisotropic { .. } => Step::Allowed {
                key_delta: u32::from(label.is_lattice()),
            },
            WeightSpec::AtMostTwice if seen >= 2 => Step::Blocked,
            WeightSpec::AtMostTwice => Step::Allowed { key_delta: 0 },
            WeightSpec::PrimeGap => {
                let t = self.path.len();
                let bad = seen > 0
                    && self
                        .path
                        .iter()
                        .enumerate()
                        .any(|(i, &x)| x == v && !is_prime(t - i));
                if bad {
                    Step::Blocked
                } else {
                    Step::Allowed { key_delta: 0 }
                }
            }
            WeightSpec::TreeSpan => {
                let known = self.edges.contains_key(&edge(self.endpoint(), v));
                if !known && seen > 0 {
                    Step::Blocked
                } else {
                    Step::Allowed { key_delta: 0 }
                }
            }
            WeightSpec::PlantedViolation => Step::Allowed { key_delta: 0 },
        }
    }

    /// Step to `v`. A blocked step leaves the state untouched.
    #[inline]
    pub fn push(&mut self, v: VertexId, label: EdgeLabel) -> Step {
        let step = self.probe(v, label);
        if let Step::Allowed { key_delta } = step {
            if matches!(self.spec, WeightSpec::TreeSpan) {
                *self.edges.entry(edge(self.endpoint(), v)).or_insert(0) += 1;
            }
            self.visits.add(v);
            self.path.push(v);
            self.labels.push(label);
            self.deltas.push(key_delta);
            self.key += key_delta;
        }
        step
    }

    /// Undo the last successful `push`.
    #[inline]
    pub fn pop(&mut self) {
        let v = self.path.pop().expect("pop on trivial path");
        assert!(!self.path.is_empty(), "pop on trivial path");
        self.labels.pop();
        self.key -= self.deltas.pop().unwrap_or(0);
        self.visits.remove(v);
        if matches!(self.spec, WeightSpec::TreeSpan) {
            let e = edge(self.endpoint(), v);
            if let Some(c) = self.edges.get_mut(&e) {
                *c -= 1;
                if *c == 0 {
                    self.edges.remove(&e);
                }
            }
        }
    }

    /// Step to `v` and return the multiplicative factor on the total weight.
    pub fn extend(&mut self, v: VertexId, label: EdgeLabel) -> f64 {
        let before = self.ln_weight();
        match self.push(v, label) {
            Step::Blocked => 0.0,
            Step::Allowed { .. } => (self.ln_weight() - before).exp(),
        }
    }
}

/// Exact tally of a whole path from its definition, or `None` if inadmissible.
pub fn evaluate_key(spec: WeightSpec, path: &[VertexId], labels: &[EdgeLabel]) -> Option<u32> {
    assert_eq!(path.len(), labels.len() + 1);
    let n = path.len();
    let pairs = || (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)));
    let coincide = pairs().filter(|&(i, j)| path[i] == path[j]);
    match spec {
        WeightSpec::Saw => (coincide.count() == 0).then_some(0),
        WeightSpec::WeaklySaw { .. } => Some(coincide.count() as u32),
        WeightSpec::Anisotropic { .. } => {
            (coincide.count() == 0).then(|| labels.iter().filter(|l| l.is_lattice()).count() as u32)
        }
        WeightSpec::AtMostTwice => {
            let mut counts: HashMap<VertexId, u32> = HashMap::new();
            for &v in path {
                *counts.entry(v).or_insert(0) += 1;
            }
            counts.values().all(|&c| c <= 2).then_some(0)
        }
        WeightSpec::PrimeGap => coincide.clone().all(|(i, j)| is_prime(j - i)).then_some(0),
        WeightSpec::TreeSpan => {
            // connected graph with |E| = |V| - 1 is a tree
            let mut vertices: Vec<VertexId> = path.to_vec();
            vertices.sort_unstable();
            vertices.dedup();
            let mut edges: Vec<_> = path.windows(2).map(|w| edge(w[0], w[1])).collect();
            edges.sort_unstable();
            edges.dedup();
            (edges.len() + 1 == vertices.len()).then_some(0)
        }
        WeightSpec::PlantedViolation => Some(0),
    }
}

/// Natural log of the weight of a whole path; `-inf` if inadmissible.
pub fn evaluate_ln(spec: WeightSpec, path: &[VertexId], labels: &[EdgeLabel]) -> f64 {
    match evaluate_key(spec, path, labels) {
        Some(key) => spec.ln_value(key, labels.len()),
        None => f64::NEG_INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UP: EdgeLabel = EdgeLabel::Up;
    const DN: EdgeLabel = EdgeLabel::Down(0);

    #[test]
    fn trivial_path_has_weight_one() {
        for spec in [
            WeightSpec::Saw,
            WeightSpec::WeaklySaw { g: 1.0 },
            WeightSpec::Anisotropic { a: 2.0, b: 0.0 },
        ] {
            assert_eq!(WeightState::new(spec, 0).weight(), 1.0);
        }
    }

    #[test]
    fn saw_blocks_revisits() {
        let mut s = WeightState::new(WeightSpec::Saw, 0);
        assert_eq!(s.extend(1, UP), 1.0);
        assert_eq!(s.extend(0, DN), 0.0);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn weakly_saw_factor_counts_prior_visits() {
        let g = 0.7;
        let mut s = WeightState::new(WeightSpec::WeaklySaw { g }, 0);
        s.extend(1, UP);
        assert!((s.extend(0, DN) - (-g).exp()).abs() < 1e-15);
        s.extend(1, UP);
        // vertex 1 seen once before
        assert_eq!(s.key(), 2);
        s.extend(0, DN);
        assert_eq!(s.key(), 4);
        assert_eq!(
            evaluate_key(WeightSpec::WeaklySaw { g }, s.path(), s.labels()),
            Some(4)
        );
    }

    #[test]
    fn anisotropic_factors() {
        let lat = EdgeLabel::Lattice {
            axis: 0,
            positive: true,
        };
        let spec = WeightSpec::Anisotropic { a: 1.0, b: 0.5 };
        let mut s = WeightState::new(spec, 0);
        assert!((s.extend(1, lat) - 1f64.exp()).abs() < 1e-12);
        assert!((s.extend(2, UP) - 0.5f64.exp()).abs() < 1e-12);
        assert_eq!(s.extend(0, DN), 0.0);
    }

    #[test]
    fn prime_gap_allows_backtracking_only_at_prime_gaps() {
        let mut s = WeightState::new(WeightSpec::PrimeGap, 0);
        s.push(1, UP);
        // gap 2
        assert_eq!(s.push(0, DN), Step::Allowed { key_delta: 0 });
        s.push(5, DN);
        // t=4: vertex 1 was seen at t=1, gap 3
        assert_eq!(s.probe(1, UP), Step::Allowed { key_delta: 0 });
        s.push(6, DN);
        // t=5: vertex 0 was seen at t=0 and t=2, gaps 5 and 3
        assert_eq!(s.probe(0, UP), Step::Allowed { key_delta: 0 });
        // vertex 1 at t=1 would be gap 4
        assert_eq!(s.probe(1, UP), Step::Blocked);
    }

    #[test]
    fn tree_span_allows_retracing_but_not_cycles() {
        let mut s = WeightState::new(WeightSpec::TreeSpan, 0);
        s.push(1, UP);
        s.push(2, UP);
        assert_eq!(s.push(1, DN), Step::Allowed { key_delta: 0 });
        s.pop();
        // new edge 2-0 closes a triangle
        assert_eq!(s.push(0, DN), Step::Blocked);
    }

    #[test]
    fn pop_restores_state() {
        let mut s = WeightState::new(WeightSpec::WeaklySaw { g: 1.0 }, 0);
        s.push(1, UP);
        s.push(0, DN);
        s.pop();
        assert_eq!(s.key(), 0);
        assert_eq!(s.visits(0), 1);
        assert_eq!(s.endpoint(), 1);
    }
}
