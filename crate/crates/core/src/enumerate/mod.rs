//! Exact height-resolved enumeration of walks, bridges and two-point functions.

mod dfs;
mod table;
pub mod transfer;
mod two_point;

use num_bigint::BigUint;

use crate::descriptor::{ModelSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::graph::{SealedBall, VertexId};

pub use table::{
    ln_big, ln_pow, log_sum_exp, BridgeTables, CountTable, HeightResolvedTable, Method, WalkTables,
};
pub use two_point::{PointClass, TwoPointTable};

/// Default cap on interned vertices when sealing a ball for enumeration.
pub const DEFAULT_VERTEX_LIMIT: usize = 40_000_000;

fn check_radius(ball: &SealedBall, n_max: usize) -> Result<()> {
    if (ball.radius() as usize) < n_max {
        return Err(Error::RadiusTooSmall {
            needed: n_max,
            radius: ball.radius(),
        });
    }
    Ok(())
}

fn assemble(
    model: ModelSpec,
    weight: WeightSpec,
    n_max: usize,
    method: Method,
    parts: [CountTable; 5],
) -> WalkTables {
    let [walks, a, d, h, r] = parts;
    WalkTables {
        walks: HeightResolvedTable {
            model,
            weight,
            n_max,
            method,
            counts: walks,
        },
        bridges: BridgeTables {
            model,
            weight,
            n_max,
            t0_units: 1,
            a,
            d,
            h,
            r,
        },
    }
}

/// Walk and bridge tables by backtracking over a sealed ball.
pub fn dfs_tables(ball: &SealedBall, weight: WeightSpec, n_max: usize) -> Result<WalkTables> {
    check_radius(ball, n_max)?;
    let out = dfs::enumerate(ball, weight, n_max, false);
    Ok(assemble(
        ball.spec(),
        weight,
        n_max,
        Method::Dfs,
        [out.walks, out.a, out.d, out.h, out.r],
    ))
}

/// `N[n][m]` by backtracking.
pub fn partition_table(
    ball: &SealedBall,
    weight: WeightSpec,
    n_max: usize,
) -> Result<HeightResolvedTable> {
    Ok(dfs_tables(ball, weight, n_max)?.walks)
}

/// Bridge tables by backtracking.
pub fn bridge_tables(ball: &SealedBall, weight: WeightSpec, n_max: usize) -> Result<BridgeTables> {
    Ok(dfs_tables(ball, weight, n_max)?.bridges)
}

/// Walk counts alone by the tree fast path. Bridges cost `O(n^3)` and are
/// skipped, so this reaches lengths in the thousands.
pub fn tree_transfer_walks(
    model: ModelSpec,
    weight: WeightSpec,
    n_max: usize,
) -> Result<HeightResolvedTable> {
    if weight != WeightSpec::Saw {
        return Err(Error::Unsupported(format!(
            "transfer path needs saw, got {weight}"
        )));
    }
    Ok(HeightResolvedTable {
        model,
        weight,
        n_max,
        method: Method::Transfer,
        counts: transfer::walk_table(model, n_max)?,
    })
}

/// The tree fast path; identical tables to [`dfs_tables`] for SAW on trees.
pub fn tree_transfer_tables(
    model: ModelSpec,
    weight: WeightSpec,
    n_max: usize,
) -> Result<WalkTables> {
    if weight != WeightSpec::Saw {
        return Err(Error::Unsupported(format!(
            "transfer path needs saw, got {weight}"
        )));
    }
    let walks = transfer::walk_table(model, n_max)?;
    let [a, d, h, r] = transfer::bridge_tables(model, n_max)?;
    Ok(assemble(
        model,
        weight,
        n_max,
        Method::Transfer,
        [walks, a, d, h, r],
    ))
}

/// Whether the transfer fast path applies.
pub fn transfer_applies(model: ModelSpec, weight: WeightSpec) -> bool {
    model.is_tree() && weight == WeightSpec::Saw
}

/// Pick the transfer path when it applies, otherwise seal a ball and backtrack.
pub fn compute_tables(
    model: ModelSpec,
    weight: WeightSpec,
    n_max: usize,
    method: Option<Method>,
) -> Result<WalkTables> {
    let method = method.unwrap_or(if transfer_applies(model, weight) {
        Method::Transfer
    } else {
        Method::Dfs
    });
    match method {
        Method::Transfer => tree_transfer_tables(model, weight, n_max),
        Method::Dfs => {
            let ball = SealedBall::build(model, n_max as u32, DEFAULT_VERTEX_LIMIT)?;
            dfs_tables(&ball, weight, n_max)
        }
    }
}

/// Per-vertex two-point counts by backtracking over a sealed ball.
pub fn two_point_table(
    ball: &SealedBall,
    weight: WeightSpec,
    n_max: usize,
) -> Result<TwoPointTable> {
    check_radius(ball, n_max)?;
    let out = dfs::enumerate(ball, weight, n_max, true);
    let keys = out.keys;
    let mut vertices: Vec<(VertexId, Vec<u64>)> =
        out.two_point.unwrap_or_default().into_iter().collect();
    vertices.sort_by_key(|(v, _)| *v);
    let mut classes = Vec::with_capacity(vertices.len());
    for (v, counts) in vertices {
        let coeffs = (0..=n_max)
            .map(|n| {
                (0..keys)
                    .map(|key| counts[n * keys + key] as f64 * weight.value(key as u32, n))
                    .sum()
            })
            .collect();
        classes.push(PointClass {
            distance: ball.depth(v)?,
            height: ball.height_units(v)?,
            multiplicity: BigUint::from(1u32),
            coeffs,
        });
    }
    Ok(TwoPointTable {
        model: ball.spec(),
        weight,
        n_max,
        classes,
    })
}
