//! Transitive graphs with a nonunimodular automorphism group.
//!
//! Vertices are interned lazily from the root by canonical address (a reduced
//! tree word, plus a lattice vector for products). Heights are integers in
//! units of `tau`, so `Δ(u, v) = exp(tau * (h(v) - h(u)))` is exact up to the
//! final exponential.

mod store;

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::descriptor::ModelSpec;
use crate::error::{Error, Result};
use store::{ProductStore, Store, TreeStore};

/// Interning handle. Id 0 is always the root.
pub type VertexId = u32;

pub const ROOT: VertexId = 0;

pub(crate) const NONE: u32 = u32::MAX;

/// The height set `{m * tau}` and the largest per-edge jump `t0_units`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeightLattice {
    pub tau: f64,
    pub t0_units: u32,
}

impl HeightLattice {
    pub fn t0(&self) -> f64 {
        self.tau * self.t0_units as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeLabel {
    Up,
    Down(u8),
    Flat,
    Lattice { axis: u8, positive: bool },
}

impl EdgeLabel {
    pub fn is_lattice(&self) -> bool {
        matches!(self, EdgeLabel::Lattice { .. })
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Up => write!(f, "up"),
            EdgeLabel::Down(i) => write!(f, "down-{i}"),
            EdgeLabel::Flat => write!(f, "flat"),
            EdgeLabel::Lattice { axis, positive } => {
                write!(f, "lattice{}e{axis}", if *positive { '+' } else { '-' })
            }
        }
    }
}

/// Static description of one neighbor slot; identical at every vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlotInfo {
    pub increment: i32,
    pub label: EdgeLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: VertexId,
    pub increment: i32,
    pub label: EdgeLabel,
}

/// Canonical address of a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Address {
    pub word: Vec<EdgeLabel>,
    pub lattice: Vec<i32>,
}

fn make_store(spec: ModelSpec) -> Store {
    match spec {
        ModelSpec::EndFixedTree { k } => Store::Tree(TreeStore::new(k as usize - 1, false)),
        ModelSpec::OrientedTree112 => Store::Tree(TreeStore::new(2, true)),
        ModelSpec::ProductTreeZd { k, d } => {
            Store::Product(ProductStore::new(k as usize - 1, d as usize))
        }
    }
}

fn lattice_of(spec: ModelSpec) -> HeightLattice {
    HeightLattice {
        tau: (spec.height_base() as f64).ln(),
        t0_units: 1,
    }
}

/// A lazily grown ball around the root. Single writer.
#[derive(Debug, Clone)]
pub struct GraphModel {
    spec: ModelSpec,
    lattice: HeightLattice,
    slots: Vec<SlotInfo>,
    store: Store,
}

impl GraphModel {
    pub fn new(spec: ModelSpec) -> Self {
        let store = make_store(spec);
        let slots = (0..store.arity())
            .map(|s| SlotInfo {
                increment: store.slot_increment(s),
                label: store.slot_label(s),
            })
            .collect();
        GraphModel {
            spec,
            lattice: lattice_of(spec),
            slots,
            store,
        }
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn lattice(&self) -> HeightLattice {
        self.lattice
    }

    pub fn slots(&self) -> &[SlotInfo] {
        &self.slots
    }

    pub fn degree(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.store.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// The neighbor behind `slot`, interning it if needed.
    pub fn neighbor(&mut self, v: VertexId, slot: usize) -> Result<VertexId> {
        self.check(v)?;
        if slot >= self.slots.len() {
            return Err(Error::OutOfRange(format!(
                "slot {slot} at degree {}",
                self.slots.len()
            )));
        }
        Ok(self.store.resolve(v, slot))
    }

    /// All neighbors in slot order.
    pub fn neighbors(&mut self, v: VertexId) -> Result<Vec<Neighbor>> {
        self.check(v)?;
        Ok((0..self.slots.len())
            .map(|s| Neighbor {
                vertex: self.store.resolve(v, s),
                increment: self.slots[s].increment,
                label: self.slots[s].label,
            })
            .collect())
    }

    pub fn height_units(&self, v: VertexId) -> Result<i64> {
        self.check(v)?;
        Ok(self.store.heights()[v as usize] as i64)
    }

    /// `Δ(u, v) = exp(tau * (h(v) - h(u)))`.
    pub fn modular_ratio(&self, u: VertexId, v: VertexId) -> Result<f64> {
        let m = self.height_units(v)? - self.height_units(u)?;
        Ok((self.lattice.tau * m as f64).exp())
    }

    /// Graph distance from the root, known from the address.
    pub fn depth(&self, v: VertexId) -> Result<u32> {
        self.check(v)?;
        Ok(self.store.depths()[v as usize])
    }

    pub fn address(&self, v: VertexId) -> Result<Address> {
        self.check(v)?;
        let (word, lattice) = self.store.address(v);
        Ok(Address { word, lattice })
    }

    /// Intern every vertex within `radius` of the root and freeze the result.
    pub fn seal_ball(mut self, radius: u32, limit: usize) -> Result<SealedBall> {
        let arity = self.slots.len();
        let mut seen = vec![false; self.store.len()];
        let mut queue = VecDeque::from([ROOT]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            if self.store.depths()[v as usize] >= radius {
                continue;
            }
            for slot in 0..arity {
                let u = self.store.resolve(v, slot);
                if self.store.len() > limit {
                    return Err(Error::SizeLimit {
                        radius,
                        count: self.store.len(),
                        limit,
                    });
                }
                if u as usize >= seen.len() {
                    seen.resize(u as usize + 1, false);
                }
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    queue.push_back(u);
                }
            }
        }
        for v in 0..self.store.len() as u32 {
            self.store.link_existing(v);
        }
        Ok(SealedBall {
            spec: self.spec,
            lattice: self.lattice,
            slots: self.slots,
            store: self.store,
            radius,
        })
    }
}

/// Immutable ball of a given radius; shareable across threads.
#[derive(Debug, Clone)]
pub struct SealedBall {
    spec: ModelSpec,
    lattice: HeightLattice,
    slots: Vec<SlotInfo>,
    store: Store,
    radius: u32,
}

impl SealedBall {
    pub fn build(spec: ModelSpec, radius: u32, limit: usize) -> Result<Self> {
        GraphModel::new(spec).seal_ball(radius, limit)
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn lattice(&self) -> HeightLattice {
        self.lattice
    }

    pub fn slots(&self) -> &[SlotInfo] {
        &self.slots
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    /// Flat neighbor array, `arity` entries per vertex, `u32::MAX` outside the ball.
    pub fn neighbor_table(&self) -> &[u32] {
        self.store.nbr()
    }

    pub fn heights(&self) -> &[i32] {
        self.store.heights()
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.store.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Interned neighbors in slot order; slots leaving the ball are skipped.
    pub fn neighbors(&self, v: VertexId) -> Result<Vec<Neighbor>> {
        self.check(v)?;
        let row = &self.store.nbr()[v as usize * self.arity()..(v as usize + 1) * self.arity()];
        Ok(row
            .iter()
            .zip(&self.slots)
            .filter(|(&u, _)| u != NONE)
            .map(|(&u, info)| Neighbor {
                vertex: u,
                increment: info.increment,
                label: info.label,
            })
            .collect())
    }

    pub fn height_units(&self, v: VertexId) -> Result<i64> {
        self.check(v)?;
        Ok(self.store.heights()[v as usize] as i64)
    }

    pub fn modular_ratio(&self, u: VertexId, v: VertexId) -> Result<f64> {
        let m = self.height_units(v)? - self.height_units(u)?;
        Ok((self.lattice.tau * m as f64).exp())
    }

    pub fn depth(&self, v: VertexId) -> Result<u32> {
        self.check(v)?;
        Ok(self.store.depths()[v as usize])
    }

    pub fn address(&self, v: VertexId) -> Result<Address> {
        self.check(v)?;
        let (word, lattice) = self.store.address(v);
        Ok(Address { word, lattice })
    }

    /// Breadth-first distance inside the ball.
    ///
    /// A path found inside the ball is only guaranteed shortest when every
    /// candidate geodesic stays inside it, which holds when
    /// `(d + depth(u) + depth(v)) / 2 <= radius`. Otherwise this is an error.
    pub fn graph_distance(&self, u: VertexId, v: VertexId) -> Result<u32> {
        self.check(u)?;
        self.check(v)?;
        let too_small = Error::BallTooSmall {
            from: u,
            to: v,
            radius: self.radius,
        };
        if u == v {
            return Ok(0);
        }
        let arity = self.arity();
        let nbr = self.store.nbr();
        let mut dist = vec![u32::MAX; self.store.len()];
        dist[u as usize] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            for &y in &nbr[x as usize * arity..(x as usize + 1) * arity] {
                if y == NONE || dist[y as usize] != u32::MAX {
                    continue;
                }
                dist[y as usize] = dx + 1;
                if y == v {
                    let d = dx + 1;
                    let du = self.store.depths()[u as usize];
                    let dv = self.store.depths()[v as usize];
                    return if d + du + dv <= 2 * self.radius {
                        Ok(d)
                    } else {
                        Err(too_small)
                    };
                }
                queue.push_back(y);
            }
        }
        Err(too_small)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(k: u32) -> GraphModel {
        GraphModel::new(ModelSpec::EndFixedTree { k })
    }

    #[test]
    fn root_neighbors_of_end_fixed_tree() {
        let mut g = tree(3);
        let n = g.neighbors(ROOT).unwrap();
        let incs: Vec<i32> = n.iter().map(|x| x.increment).collect();
        assert_eq!(incs, vec![1, -1, -1]);
        assert_eq!(g.modular_ratio(ROOT, n[0].vertex).unwrap(), 2.0);
        assert_eq!(g.modular_ratio(ROOT, ROOT).unwrap(), 1.0);
    }

    #[test]
    fn oriented_tree_increments() {
        let mut g = GraphModel::new(ModelSpec::OrientedTree112);
        let mut incs: Vec<i32> = g
            .neighbors(ROOT)
            .unwrap()
            .iter()
            .map(|x| x.increment)
            .collect();
        incs.sort();
        assert_eq!(incs, vec![-1, -1, 0, 1]);
        let head = g.neighbor(ROOT, 0).unwrap();
        assert_eq!(g.modular_ratio(ROOT, head).unwrap(), 2.0);
    }

    #[test]
    fn product_root_has_k_plus_2d_neighbors() {
        let mut g = GraphModel::new(ModelSpec::ProductTreeZd { k: 3, d: 1 });
        let mut incs: Vec<i32> = g
            .neighbors(ROOT)
            .unwrap()
            .iter()
            .map(|x| x.increment)
            .collect();
        incs.sort();
        assert_eq!(incs, vec![-1, -1, 0, 0, 1]);
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(
            SealedBall::build(ModelSpec::EndFixedTree { k: 3 }, 2, 1000)
                .unwrap()
                .len(),
            10
        );
        assert_eq!(
            SealedBall::build(ModelSpec::EndFixedTree { k: 3 }, 0, 1000)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            SealedBall::build(ModelSpec::ProductTreeZd { k: 3, d: 1 }, 1, 1000)
                .unwrap()
                .len(),
            6
        );
        assert!(matches!(
            SealedBall::build(ModelSpec::EndFixedTree { k: 4 }, 8, 100),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn distances_in_ball() {
        let mut g = tree(3);
        let child = g.neighbor(ROOT, 1).unwrap();
        let grandchild = g.neighbor(child, 2).unwrap();
        let ball = g.seal_ball(3, 1000).unwrap();
        assert_eq!(ball.graph_distance(ROOT, ROOT).unwrap(), 0);
        assert_eq!(ball.graph_distance(ROOT, child).unwrap(), 1);
        assert_eq!(ball.graph_distance(ROOT, grandchild).unwrap(), 2);
        assert_eq!(ball.graph_distance(grandchild, ROOT).unwrap(), 2);
    }

    #[test]
    fn distance_beyond_ball_is_an_error() {
        let ball = SealedBall::build(ModelSpec::EndFixedTree { k: 3 }, 2, 1000).unwrap();
        // two depth-2 vertices on opposite sides of the root
        let far: Vec<VertexId> = (0..ball.len() as u32)
            .filter(|&v| ball.depth(v).unwrap() == 2)
            .collect();
        let (a, b) = (far[0], *far.last().unwrap());
        assert!(matches!(
            ball.graph_distance(a, b),
            Err(Error::BallTooSmall { .. })
        ));
    }

    #[test]
    fn unknown_vertex() {
        let mut g = tree(3);
        assert!(matches!(g.neighbors(7), Err(Error::UnknownVertex(7))));
    }

    #[test]
    fn addresses_are_reduced_words() {
        let mut g = tree(4);
        let p = g.neighbor(ROOT, 0).unwrap();
        // the root is child 0 of its parent
        assert_eq!(g.neighbor(p, 1).unwrap(), ROOT);
        let sib = g.neighbor(p, 2).unwrap();
        assert_eq!(
            g.address(sib).unwrap().word,
            vec![EdgeLabel::Up, EdgeLabel::Down(1)]
        );
        assert_eq!(g.depth(sib).unwrap(), 2);
    }
}
