//! Exact fast path for SAW on the tree models.
//!
//! A self-avoiding walk on a tree is a non-backtracking path, so the number of
//! continuations depends only on the class of the last move (up, down, flat).
//! Walk counts follow from a recursion on (class, height); bridges add the
//! running maximum, half-space walks a height floor.

use num_bigint::BigUint;
use num_traits::Zero;

use super::table::CountTable;
use crate::descriptor::ModelSpec;
use crate::error::{Error, Result};

/// Last-move classes and how many moves of each class follow a given one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferRule {
    /// Height increment of a move of each class.
    pub increment: Vec<i32>,
    /// Moves of each class available from the root.
    pub start: Vec<u32>,
    /// `follow[c][c2]`: moves of class `c2` available after a move of class `c`.
    pub follow: Vec<Vec<u32>>,
}

impl TransferRule {
    pub fn for_model(model: ModelSpec) -> Result<Self> {
        match model {
            ModelSpec::EndFixedTree { k } => Ok(TransferRule {
                increment: vec![1, -1],
                start: vec![1, k - 1],
                follow: vec![vec![1, k - 2], vec![0, k - 1]],
            }),
            ModelSpec::OrientedTree112 => Ok(TransferRule {
                increment: vec![1, -1, 0],
                start: vec![1, 2, 1],
                follow: vec![vec![1, 1, 1], vec![0, 2, 1], vec![1, 2, 0]],
            }),
            other => Err(Error::Unsupported(format!(
                "transfer path needs a tree model, got {other}"
            ))),
        }
    }

    pub fn classes(&self) -> usize {
        self.increment.len()
    }

    fn mirrored(&self) -> Self {
        TransferRule {
            increment: self.increment.iter().map(|i| -i).collect(),
            ..self.clone()
        }
    }
}

fn add_scaled(target: &mut BigUint, value: &BigUint, times: u32) {
    match times {
        0 => {}
        1 => *target += value,
        t => *target += value * t,
    }
}

/// Dense layer over (class, height) with heights in `[-span, span]`.
struct HeightLayer {
    span: i64,
    cells: Vec<BigUint>,
}

impl HeightLayer {
    fn new(classes: usize, span: usize) -> Self {
        HeightLayer {
            span: span as i64,
            cells: vec![BigUint::zero(); classes * (2 * span + 1)],
        }
    }

    fn idx(&self, class: usize, h: i64) -> usize {
        class * (2 * self.span as usize + 1) + (h + self.span) as usize
    }

    fn clear(&mut self) {
        self.cells.iter_mut().for_each(|c| c.set_zero());
    }
}

/// Walk recursion restricted to heights allowed by `floor` at positive times.
/// Calls `visit(n, layer)` after each length.
fn walk_recursion(
    rule: &TransferRule,
    n_max: usize,
    allowed: impl Fn(i64) -> bool,
    mut visit: impl FnMut(usize, &HeightLayer),
) {
    let classes = rule.classes();
    let mut cur = HeightLayer::new(classes, n_max);
    let mut next = HeightLayer::new(classes, n_max);
    for (c, &mult) in rule.start.iter().enumerate() {
        let h = rule.increment[c] as i64;
        if n_max >= 1 && allowed(h) && mult > 0 {
            let i = cur.idx(c, h);
            cur.cells[i] = BigUint::from(mult);
        }
    }
    for n in 1..=n_max {
        visit(n, &cur);
        if n == n_max {
            break;
        }
        next.clear();
        let reach = n as i64;
        for c in 0..classes {
            for h in -reach..=reach {
                let value = &cur.cells[cur.idx(c, h)];
                if value.is_zero() {
                    continue;
                }
                for (c2, &mult) in rule.follow[c].iter().enumerate() {
                    let h2 = h + rule.increment[c2] as i64;
                    if mult == 0 || !allowed(h2) {
                        continue;
                    }
                    let j = next.idx(c2, h2);
                    add_scaled(&mut next.cells[j], value, mult);
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
}

fn height_table(rule: &TransferRule, n_max: usize, allowed: impl Fn(i64) -> bool) -> CountTable {
    let mut table = CountTable::new(n_max);
    table.add(0, 0, 0, BigUint::from(1u32));
    walk_recursion(rule, n_max, allowed, |n, layer| {
        for c in 0..rule.classes() {
            for h in -(n as i64)..=n as i64 {
                let v = &layer.cells[layer.idx(c, h)];
                if !v.is_zero() {
                    table.add(n, h, 0, v.clone());
                }
            }
        }
    });
    table
}

/// `N[n][m]` for SAW on a tree model.
pub fn walk_table(model: ModelSpec, n_max: usize) -> Result<CountTable> {
    let rule = TransferRule::for_model(model)?;
    Ok(height_table(&rule, n_max, |_| true))
}

/// `sum_m N[n][m]` for `n = 0..=n_max`, keeping one layer in memory.
pub fn layer_totals(model: ModelSpec, n_max: usize) -> Result<Vec<BigUint>> {
    let rule = TransferRule::for_model(model)?;
    let mut totals = vec![BigUint::from(1u32)];
    walk_recursion(
        &rule,
        n_max,
        |_| true,
        |_, layer| {
            totals.push(layer.cells.iter().sum());
        },
    );
    Ok(totals)
}

/// Up-bridges (heights never below 0, ending at the running maximum), by end height.
fn bridge_table(rule: &TransferRule, n_max: usize) -> CountTable {
    let classes = rule.classes();
    let side = n_max + 1;
    // state (class, max, gap below max); height = max - gap >= 0
    let idx = |c: usize, max: usize, gap: usize| (c * side + max) * side + gap;
    let mut cur = vec![BigUint::zero(); classes * side * side];
    let mut next = cur.clone();
    let mut table = CountTable::new(n_max);
    table.add(0, 0, 0, BigUint::from(1u32));
    let place =
        |cells: &mut Vec<BigUint>, c: usize, max: i64, h: i64, value: &BigUint, mult: u32| {
            let max2 = max.max(h);
            add_scaled(
                &mut cells[idx(c, max2 as usize, (max2 - h) as usize)],
                value,
                mult,
            );
        };
    if n_max == 0 {
        return table;
    }
    let one = BigUint::from(1u32);
    for (c, &mult) in rule.start.iter().enumerate() {
        let h = rule.increment[c] as i64;
        if h >= 0 {
            place(&mut cur, c, 0, h, &one, mult);
        }
    }
    for n in 1..=n_max {
        for c in 0..classes {
            for max in 0..=n.min(n_max) {
                let v = &cur[idx(c, max, 0)];
                if !v.is_zero() {
                    table.add(n, max as i64, 0, v.clone());
                }
            }
        }
        if n == n_max {
            break;
        }
        next.iter_mut().for_each(|x| x.set_zero());
        for c in 0..classes {
            for max in 0..=n {
                for gap in 0..=max {
                    let value = &cur[idx(c, max, gap)];
                    if value.is_zero() {
                        continue;
                    }
                    let h = (max - gap) as i64;
                    for (c2, &mult) in rule.follow[c].iter().enumerate() {
                        let h2 = h + rule.increment[c2] as i64;
                        if mult > 0 && h2 >= 0 {
                            place(&mut next, c2, max as i64, h2, value, mult);
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    table
}

/// Bridge and half-space tables for SAW on a tree model: `(a, d, h, r)`.
pub fn bridge_tables(model: ModelSpec, n_max: usize) -> Result<[CountTable; 4]> {
    let rule = TransferRule::for_model(model)?;
    let up = bridge_table(&rule, n_max);
    let down = bridge_table(&rule.mirrored(), n_max);
    let half = height_table(&rule, n_max, |h| h > 0);
    let desc = height_table(&rule, n_max, |h| h >= 0);
    Ok([up, down, half, desc])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn end_fixed_small_layers() {
        let t = walk_table(ModelSpec::EndFixedTree { k: 3 }, 2).unwrap();
        assert_eq!(t.get(1, 1, 0), BigUint::from(1u32));
        assert_eq!(t.get(1, -1, 0), BigUint::from(2u32));
        assert_eq!(t.get(2, 2, 0), BigUint::from(1u32));
        assert_eq!(t.get(2, 0, 0), BigUint::from(1u32));
        assert_eq!(t.get(2, -2, 0), BigUint::from(4u32));
    }

    #[test]
    fn totals_match_closed_count() {
        let totals = layer_totals(ModelSpec::OrientedTree112, 30).unwrap();
        for (n, t) in totals.iter().enumerate().skip(1) {
            assert_eq!(
                *t,
                BigUint::from(4u32) * BigUint::from(3u32).pow(n as u32 - 1)
            );
        }
    }

    #[test]
    fn end_fixed_up_bridges_go_straight_up() {
        let [a, d, h, _] = bridge_tables(ModelSpec::EndFixedTree { k: 3 }, 5).unwrap();
        for n in 0..=5 {
            assert_eq!(a.total(n), BigUint::from(1u32));
            assert_eq!(a.get(n, n as i64, 0), BigUint::from(1u32));
            assert_eq!(d.get(n, n as i64, 0), BigUint::from(2u32).pow(n as u32));
        }
        assert_eq!(h.get(2, 2, 0), BigUint::from(1u32));
    }

    #[test]
    fn products_are_unsupported() {
        assert!(walk_table(ModelSpec::ProductTreeZd { k: 3, d: 1 }, 3).is_err());
    }
}
