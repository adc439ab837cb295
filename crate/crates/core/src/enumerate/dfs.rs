//! Backtracking enumeration over a sealed ball.
//!
//! One pass fills the walk table and all four bridge/half-space tables: each
//! DFS node is a path, classified at its end from the running extrema. Work is
//! split by depth-2 prefixes, each prefix owning a private accumulator; the
//! merge is a plain integer sum, so results do not depend on scheduling.

use std::collections::HashMap;

use num_bigint::BigUint;
use rayon::prelude::*;

use super::table::CountTable;
use crate::descriptor::WeightSpec;
use crate::graph::{SealedBall, SlotInfo, VertexId, NONE, ROOT};
use crate::weight::{DenseVisits, Step, WeightState};

const SPLIT_DEPTH: usize = 2;

#[derive(Debug, Clone)]
pub(crate) struct DfsOutput {
    pub walks: CountTable,
    pub a: CountTable,
    pub d: CountTable,
    pub h: CountTable,
    pub r: CountTable,
    /// Per-endpoint counts indexed `n * keys + key`.
    pub two_point: Option<HashMap<VertexId, Vec<u64>>>,
    pub keys: usize,
}

#[derive(Clone)]
struct Acc {
    n_max: usize,
    keys: usize,
    tables: [Vec<u64>; 5],
    two_point: Option<HashMap<VertexId, Vec<u64>>>,
}

const WALKS: usize = 0;
const UP: usize = 1;
const DOWN: usize = 2;
const HALF: usize = 3;
const DESC: usize = 4;

impl Acc {
    fn new(n_max: usize, keys: usize, two_point: bool) -> Self {
        let size = (n_max + 1) * (2 * n_max + 1) * keys;
        Acc {
            n_max,
            keys,
            tables: std::array::from_fn(|_| vec![0; size]),
            two_point: two_point.then(HashMap::new),
        }
    }

    #[inline]
    fn idx(&self, n: usize, m: i32, key: u32) -> usize {
        (n * (2 * self.n_max + 1) + (m + self.n_max as i32) as usize) * self.keys + key as usize
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (mine, theirs) in self.tables.iter_mut().zip(&other.tables) {
            for (x, y) in mine.iter_mut().zip(theirs) {
                *x += y;
            }
        }
        if let (Some(mine), Some(theirs)) = (self.two_point.as_mut(), other.two_point) {
            for (v, counts) in theirs {
                let slot = mine.entry(v).or_insert_with(|| vec![0; counts.len()]);
                for (x, y) in slot.iter_mut().zip(&counts) {
                    *x += y;
                }
            }
        }
        self
    }

    fn into_output(self) -> DfsOutput {
        let n_max = self.n_max;
        let width = 2 * n_max + 1;
        let keys = self.keys;
        let convert = |data: &[u64]| {
            let mut t = CountTable::new(n_max);
            for (i, &c) in data.iter().enumerate() {
                if c != 0 {
                    let key = (i % keys) as u32;
                    let m = ((i / keys) % width) as i64 - n_max as i64;
                    let n = i / keys / width;
                    t.add(n, m, key, BigUint::from(c));
                }
            }
            t
        };
        DfsOutput {
            walks: convert(&self.tables[WALKS]),
            a: convert(&self.tables[UP]),
            d: convert(&self.tables[DOWN]),
            h: convert(&self.tables[HALF]),
            r: convert(&self.tables[DESC]),
            two_point: self.two_point,
            keys,
        }
    }
}

/// Running extrema of the current path; `min_pos` is over times `>= 1`.
#[derive(Clone, Copy)]
struct Extrema {
    height: i32,
    max: i32,
    min: i32,
    min_pos: i32,
}

impl Extrema {
    const START: Extrema = Extrema {
        height: 0,
        max: 0,
        min: 0,
        min_pos: i32::MAX,
    };

    #[inline]
    fn step(self, increment: i32) -> Extrema {
        let height = self.height + increment;
        Extrema {
            height,
            max: self.max.max(height),
            min: self.min.min(height),
            min_pos: self.min_pos.min(height),
        }
    }
}

struct Walker<'a> {
    nbr: &'a [u32],
    slots: &'a [SlotInfo],
    n_max: usize,
    state: WeightState<DenseVisits>,
}

impl Walker<'_> {
    #[inline]
    fn record(&self, acc: &mut Acc, n: usize, e: Extrema) {
        let key = self.state.key();
        let i = acc.idx(n, e.height, key);
        acc.tables[WALKS][i] += 1;
        if e.min >= 0 && e.height == e.max {
            acc.tables[UP][i] += 1;
        }
        if e.max <= 0 && e.height == e.min {
            let j = acc.idx(n, -e.height, key);
            acc.tables[DOWN][j] += 1;
        }
        if e.min_pos > 0 {
            acc.tables[HALF][i] += 1;
        }
        if e.min_pos >= 0 {
            acc.tables[DESC][i] += 1;
        }
        if let Some(tp) = acc.two_point.as_mut() {
            let len = (self.n_max + 1) * acc.keys;
            tp.entry(self.state.endpoint())
                .or_insert_with(|| vec![0; len])[n * acc.keys + key as usize] += 1;
        }
    }

    /// Record the current path and every extension up to `limit` steps.
    fn explore(&mut self, acc: &mut Acc, n: usize, e: Extrema, limit: usize) {
        self.record(acc, n, e);
        if n == limit {
            return;
        }
        let v = self.state.endpoint() as usize;
        let arity = self.slots.len();
        for s in 0..arity {
            let u = self.nbr[v * arity + s];
            if u == NONE {
                continue;
            }
            let info = self.slots[s];
            if let Step::Allowed { .. } = self.state.push(u, info.label) {
                self.explore(acc, n + 1, e.step(info.increment), limit);
                self.state.pop();
            }
        }
    }

    /// All admissible slot sequences of exactly `depth` steps.
    fn prefixes(&mut self, depth: usize, current: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if current.len() == depth {
            out.push(current.clone());
            return;
        }
        let v = self.state.endpoint() as usize;
        let arity = self.slots.len();
        for s in 0..arity {
            let u = self.nbr[v * arity + s];
            if u == NONE {
                continue;
            }
            if let Step::Allowed { .. } = self.state.push(u, self.slots[s].label) {
                current.push(s as u8);
                self.prefixes(depth, current, out);
                current.pop();
                self.state.pop();
            }
        }
    }
}

pub(crate) fn enumerate(
    ball: &SealedBall,
    weight: WeightSpec,
    n_max: usize,
    two_point: bool,
) -> DfsOutput {
    let keys = weight.max_key(n_max) as usize + 1;
    let nbr = ball.neighbor_table();
    let slots = ball.slots();
    let arity = slots.len();
    let new_walker = || Walker {
        nbr,
        slots,
        n_max,
        state: WeightState::with_counter(weight, ROOT, DenseVisits::new(ball.len())),
    };

    let split = SPLIT_DEPTH.min(n_max);
    let mut head = new_walker();
    let mut acc = Acc::new(n_max, keys, two_point);
    // lengths below the split depth are recorded here; the prefixes carry the rest
    if split > 0 {
        head.explore(&mut acc, 0, Extrema::START, split - 1);
    } else {
        head.record(&mut acc, 0, Extrema::START);
    }
    let mut prefixes = Vec::new();
    if split > 0 {
        head.prefixes(split, &mut Vec::new(), &mut prefixes);
    }
    drop(head);

    let merged = prefixes
        .par_iter()
        .map_init(new_walker, |walker, prefix| {
            let mut local = Acc::new(n_max, keys, two_point);
            let mut e = Extrema::START;
            for &s in prefix {
                let v = walker.state.endpoint() as usize;
                let info = slots[s as usize];
                let pushed = walker.state.push(nbr[v * arity + s as usize], info.label);
                debug_assert!(matches!(pushed, Step::Allowed { .. }));
                e = e.step(info.increment);
            }
            walker.explore(&mut local, split, e, n_max);
            for _ in prefix {
                walker.state.pop();
            }
            local
        })
        .reduce(|| Acc::new(n_max, keys, two_point), Acc::merge);
    acc.merge(merged).into_output()
}
