//! Growth-rate bounds and critical brackets from finite tables.
//!
//! The upper edge is certified by `alpha_upper`, which is a genuine upper
//! bound for `alpha(z)` even with truncated series (dropping terms only shrinks
//! `A`). The lower edge takes the better of two certificates: the Fekete edge
//! `Z(lambda; q)^(-1/q) <= z_c`, which is rigorous, and `beta_lower` on
//! half-space series that look saturated at the truncation. The latter is not
//! rigorous, since a truncated `b` underestimates the full series, so brackets
//! that rely on it carry the `HeuristicLower` flag.

use serde::Serialize;

use super::series::LnSeries;
use crate::descriptor::{ModelSpec, WeightSpec};
use crate::enumerate::{compute_tables, BridgeTables, HeightResolvedTable, WalkTables};
use crate::error::Result;

/// Slack added on both sides of every emitted bracket.
pub const BRACKET_SLACK: f64 = 1e-9;

/// Bisection steps per edge.
pub const BISECTION_STEPS: usize = 60;

/// A half-space series is trusted when its last term carries at most this
/// share of the truncated sum.
pub const SATURATION: f64 = 1e-3;

const Z_FLOOR: f64 = 1e-12;

/// `t0` in natural units.
fn t0(bridges: &BridgeTables) -> f64 {
    bridges.t0_units as f64 * (bridges.model.height_base() as f64).ln()
}

/// `-log(z^2 A(z; j)) / (t0 (j + 2))`, an upper bound for `alpha(z)`;
/// `+inf` when the truncated slab series vanishes.
pub fn alpha_upper(bridges: &BridgeTables, z: f64, j: usize) -> f64 {
    let ln_a = bridges.ln_slab(z, j as i64);
    alpha_from_ln(ln_a, z, j, t0(bridges))
}

fn alpha_from_ln(ln_slab: f64, z: f64, j: usize, t0: f64) -> f64 {
    if ln_slab == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    -(2.0 * z.ln() + ln_slab) / (t0 * (j as f64 + 2.0))
}

/// `-log b(z; j) / (t0 (j + 1))` from the truncated half-space series.
pub fn beta_lower(walks: &HeightResolvedTable, z: f64, j: usize) -> f64 {
    let t0 = walks.tau();
    -walks.ln_half_space(z, j as i64) / (t0 * (j as f64 + 1.0))
}

/// Both exponent bounds at one `(z, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthBound {
    pub z: f64,
    pub n: usize,
    pub alpha_upper: f64,
    pub beta_lower: f64,
}

impl GrowthBound {
    pub fn new(tables: &WalkTables, z: f64, n: usize) -> Self {
        GrowthBound {
            z,
            n,
            alpha_upper: alpha_upper(&tables.bridges, z, n),
            beta_lower: beta_lower(&tables.walks, z, n),
        }
    }

    /// `alpha >= beta` holds for the true exponents, so a crossing is a
    /// truncation artifact.
    pub fn crossed(&self) -> bool {
        self.alpha_upper < self.beta_lower
    }
}

/// `max_q Z(lambda; q)^(-1/q)` over `1 <= q <= n_max`, with the maximizing `q`.
pub fn fekete_edge(walks: &HeightResolvedTable, lambda: f64) -> (f64, usize) {
    (1..=walks.n_max)
        .map(|q| ((-walks.ln_z(lambda, q) / q as f64).exp(), q))
        .filter(|(z, _)| z.is_finite())
        .fold(
            (0.0, 0),
            |best, cur| if cur.0 > best.0 { cur } else { best },
        )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketFlag {
    /// Width exceeds the requested tolerance.
    TruncationLimited,
    /// The lower edge comes from a truncated half-space series.
    HeuristicLower,
    /// No certificate found for the lower edge.
    NoLowerCertificate,
}

/// How the lower edge was certified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LowerEvidence {
    /// `Z(lambda; q)^(-1/q) >= z_lo`.
    Fekete {
        q: usize,
        edge: f64,
    },
    /// `beta_lower(z_lo, j) > max(lambda, 1 - lambda)`.
    HalfSpace {
        j: usize,
        beta_lower: f64,
    },
    None,
}

/// Evidence behind a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketEvidence {
    pub n_used: usize,
    /// Slab index and `alpha_upper` value at `z_hi`.
    pub alpha_slab: usize,
    pub alpha_upper: f64,
    pub lower: LowerEvidence,
    /// Largest `beta_lower` over trusted slabs at `z_lo`.
    pub beta_lower: f64,
    pub fekete_edge: f64,
}

/// `z_lo <= z_{c,lambda} <= z_hi`, with the evidence for each edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalBracket {
    pub lambda: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub evidence: BracketEvidence,
    pub flags: Vec<BracketFlag>,
}

impl CriticalBracket {
    pub fn width(&self) -> f64 {
        self.z_hi - self.z_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.z_lo + self.z_hi)
    }

    pub fn contains(&self, z: f64) -> bool {
        self.z_lo <= z && z <= self.z_hi
    }

    pub fn overlaps(&self, other: &CriticalBracket) -> bool {
        self.z_lo <= other.z_hi && other.z_lo <= self.z_hi
    }

    pub fn has(&self, flag: BracketFlag) -> bool {
        self.flags.contains(&flag)
    }

    /// Re-evaluate the certifying inequalities at the emitted edges.
    pub fn recheck(&self, tables: &WalkTables) -> bool {
        let theta = self.lambda.max(1.0 - self.lambda);
        let upper = alpha_upper(&tables.bridges, self.z_hi, self.evidence.alpha_slab) < theta;
        let lower = match self.evidence.lower {
            LowerEvidence::Fekete { q, .. } => {
                (-tables.walks.ln_z(self.lambda, q) / q as f64).exp() >= self.z_lo
            }
            LowerEvidence::HalfSpace { j, .. } => beta_lower(&tables.walks, self.z_lo, j) > theta,
            LowerEvidence::None => true,
        };
        upper && lower
    }
}

/// Bisect a predicate that is false below some point and true above it.
/// Returns the smallest sampled point where it holds.
fn first_true(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Bisect a predicate that is true below some point and false above it.
/// Returns the largest sampled point where it holds.
fn last_true(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Precomputed slab and half-space series for repeated bracket searches.
#[derive(Debug, Clone)]
pub struct BracketSeries {
    t0: f64,
    n_max: usize,
    slabs: Vec<LnSeries>,
    half_spaces: Vec<LnSeries>,
}

impl BracketSeries {
    pub fn new(tables: &WalkTables) -> Self {
        let bridges = &tables.bridges;
        let walks = &tables.walks;
        let units = bridges.t0_units as i64;
        let slabs_max = bridges.n_max / bridges.t0_units as usize;
        let slabs = (0..=slabs_max)
            .map(|j| {
                let j = j as i64;
                LnSeries::from_table(&bridges.a, bridges.weight, move |m| {
                    m >= j * units && m < (j + 1) * units
                })
            })
            .collect();
        let half_spaces = (0..=slabs_max)
            .map(|j| {
                LnSeries::from_table(&walks.counts, walks.weight, move |m| m >= j as i64 * units)
            })
            .collect();
        BracketSeries {
            t0: t0(bridges),
            n_max: bridges.n_max,
            slabs,
            half_spaces,
        }
    }

    /// Smallest `alpha_upper(z, j)` over slabs, with its slab.
    pub fn best_alpha(&self, z: f64) -> (f64, usize) {
        self.slabs
            .iter()
            .enumerate()
            .map(|(j, s)| (alpha_from_ln(s.ln_eval(z), z, j, self.t0), j))
            .fold(
                (f64::INFINITY, 0),
                |best, cur| if cur.0 < best.0 { cur } else { best },
            )
    }

    /// Largest `beta_lower(z, j)` over slabs whose series look saturated.
    pub fn best_beta(&self, z: f64) -> Option<(f64, usize)> {
        self.half_spaces
            .iter()
            .enumerate()
            .filter(|(_, s)| s.last_term_fraction(z) <= SATURATION)
            .map(|(j, s)| (-s.ln_eval(z) / (self.t0 * (j as f64 + 1.0)), j))
            .fold(None, |best: Option<(f64, usize)>, cur| match best {
                Some(b) if b.0 >= cur.0 => Some(b),
                _ => Some(cur),
            })
    }
}

/// Bracket `z_{c,lambda}` from precomputed series.
pub fn zc_bracket_from(
    tables: &WalkTables,
    series: &BracketSeries,
    lambda: f64,
    tol: f64,
) -> CriticalBracket {
    let theta = lambda.max(1.0 - lambda);

    // alpha_upper(1, 0) <= 0 because the trivial bridge alone gives A(1; 0) >= 1
    let upper_ok = |z: f64| series.best_alpha(z).0 < theta;
    let hi_search = if upper_ok(1.0) { 1.0 } else { 1.0 / Z_FLOOR };
    let z_hi_cert = first_true(upper_ok, Z_FLOOR, hi_search);
    let (alpha_val, alpha_slab) = series.best_alpha(z_hi_cert);

    let (fekete, q) = fekete_edge(&tables.walks, lambda);
    let beta_ok = |z: f64| series.best_beta(z).is_some_and(|(b, _)| b > theta);
    let beta_edge = if beta_ok(Z_FLOOR) {
        Some(last_true(beta_ok, Z_FLOOR, z_hi_cert))
    } else {
        None
    };

    let mut flags = Vec::new();
    let (z_lo_cert, lower) = match beta_edge {
        Some(zb) if zb > fekete => {
            flags.push(BracketFlag::HeuristicLower);
            let (b, j) = series.best_beta(zb).expect("certified above");
            (zb, LowerEvidence::HalfSpace { j, beta_lower: b })
        }
        _ if q > 0 => (fekete, LowerEvidence::Fekete { q, edge: fekete }),
        _ => {
            flags.push(BracketFlag::NoLowerCertificate);
            (Z_FLOOR, LowerEvidence::None)
        }
    };
    let beta_val = series
        .best_beta(z_lo_cert)
        .map_or(f64::NEG_INFINITY, |(b, _)| b);

    let z_lo = (z_lo_cert - BRACKET_SLACK).max(Z_FLOOR);
    let z_hi = z_hi_cert + BRACKET_SLACK;
    if z_hi - z_lo > tol {
        flags.push(BracketFlag::TruncationLimited);
    }
    CriticalBracket {
        lambda,
        z_lo,
        z_hi,
        evidence: BracketEvidence {
            n_used: series.n_max,
            alpha_slab,
            alpha_upper: alpha_val,
            lower,
            beta_lower: beta_val,
            fekete_edge: fekete,
        },
        flags,
    }
}

/// Bracket `z_{c,lambda}` from tables.
pub fn zc_bracket_tables(tables: &WalkTables, lambda: f64, tol: f64) -> CriticalBracket {
    zc_bracket_from(tables, &BracketSeries::new(tables), lambda, tol)
}

/// Enumerate and bracket in one call.
pub fn zc_bracket(
    model: ModelSpec,
    weight: WeightSpec,
    lambda: f64,
    n_max: usize,
    tol: f64,
) -> Result<CriticalBracket> {
    let tables = compute_tables(model, weight, n_max, None)?;
    Ok(zc_bracket_tables(&tables, lambda, tol))
}

/// Brackets over a grid of tilts, sharing the precomputed series.
pub fn bracket_scan(tables: &WalkTables, lambdas: &[f64], tol: f64) -> Vec<CriticalBracket> {
    let series = BracketSeries::new(tables);
    lambdas
        .iter()
        .map(|&l| zc_bracket_from(tables, &series, l, tol))
        .collect()
}

/// Monotonicity and symmetry of brackets across a grid of tilts.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    /// Midpoints are non-decreasing along the tilts `<= 1/2`, in grid order.
    pub monotone: bool,
    /// Tilts `<= 1/2` where consecutive brackets are disjoint, proving strict increase.
    pub strict_steps: usize,
    /// Every `lambda` bracket overlaps its `1 - lambda` bracket.
    pub symmetric: bool,
    pub brackets: Vec<CriticalBracket>,
    pub mirrored: Vec<CriticalBracket>,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.symmetric
    }
}

/// Brackets at each tilt in `lambdas` (expected sorted and `<= 1/2`) and at its mirror.
pub fn scan_report(tables: &WalkTables, lambdas: &[f64], tol: f64) -> ScanReport {
    let brackets = bracket_scan(tables, lambdas, tol);
    let mirror: Vec<f64> = lambdas.iter().map(|l| 1.0 - l).collect();
    let mirrored = bracket_scan(tables, &mirror, tol);
    let lower_half: Vec<&CriticalBracket> = brackets.iter().filter(|b| b.lambda <= 0.5).collect();
    let monotone = lower_half
        .windows(2)
        .all(|w| w[1].midpoint() >= w[0].midpoint());
    let strict_steps = lower_half
        .windows(2)
        .filter(|w| w[1].z_lo > w[0].z_hi)
        .count();
    let symmetric = brackets.iter().zip(&mirrored).all(|(a, b)| a.overlaps(b));
    ScanReport {
        monotone,
        strict_steps,
        symmetric,
        brackets,
        mirrored,
    }
}
