//! Exact and coefficient-wise identities every table must satisfy.

use num_bigint::BigUint;
use serde::Serialize;

use super::series::LnSeries;
use crate::descriptor::{ModelSpec, WeightSpec};
use crate::enumerate::{BridgeTables, CountTable, HeightResolvedTable, WalkTables};

/// Relative slack for floating-point inequalities.
pub const REL_SLACK: f64 = 1e-12;

const MAX_FAILURES: usize = 16;

/// An identity checked on exact integers.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExactCheck {
    pub checked: usize,
    pub failures: Vec<String>,
    pub failure_count: usize,
}

impl ExactCheck {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(msg);
        }
    }
}

/// An inequality `lhs <= rhs` checked in floating point; `max_ratio` is the
/// largest `lhs / rhs` seen.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub checked: usize,
    pub max_ratio: f64,
    pub failures: Vec<String>,
    pub failure_count: usize,
}

impl Default for InequalityCheck {
    fn default() -> Self {
        InequalityCheck {
            checked: 0,
            max_ratio: 0.0,
            failures: Vec::new(),
            failure_count: 0,
        }
    }
}

impl InequalityCheck {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    /// Record `exp(ln_lhs) <= exp(ln_rhs)`.
    fn record(&mut self, ln_lhs: f64, ln_rhs: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        if ln_lhs == f64::NEG_INFINITY {
            return;
        }
        let ratio = (ln_lhs - ln_rhs).exp();
        if ratio > self.max_ratio || self.max_ratio.is_nan() {
            self.max_ratio = ratio;
        }
        if !(ln_lhs <= ln_rhs + REL_SLACK) {
            self.failure_count += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(format!("{}: ratio {ratio}", what()));
            }
        }
    }
}

/// Outcome of [`verify_identities`].
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub model: ModelSpec,
    pub weight: WeightSpec,
    pub n_max: usize,
    pub lambdas: Vec<f64>,
    pub zs: Vec<f64>,
    /// `N[n][-m] = W^m N[n][m]`, per weight key.
    pub mtp: ExactCheck,
    /// `d[n][m] = W^m a[n][m]`, per weight key.
    pub bridge_reversal: ExactCheck,
    /// `(n+1) Z(lambda; n) <= sum_j Z(lambda; j) Z(lambda; n-j)`.
    pub differential: InequalityCheck,
    /// `Z(lambda; n+m) <= Z(lambda; n) Z(lambda; m)`.
    pub submultiplicative: InequalityCheck,
    /// `z^2 A(z; n) A(z; m) <= A(z; n+m+2)`, both sides truncated to the table degree.
    pub slab_supermultiplicative: InequalityCheck,
    /// `b(z; n+m+1) <= b(z; n) b(z; m)`, both sides truncated to the table degree.
    pub half_space_submultiplicative: InequalityCheck,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.mtp.passed()
            && self.bridge_reversal.passed()
            && self.differential.passed()
            && self.submultiplicative.passed()
            && self.slab_supermultiplicative.passed()
            && self.half_space_submultiplicative.passed()
    }

    /// Named verdicts, in a stable order.
    pub fn verdicts(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("mtp", self.mtp.passed()),
            ("bridge-reversal", self.bridge_reversal.passed()),
            ("differential-inequality", self.differential.passed()),
            ("submultiplicativity", self.submultiplicative.passed()),
            (
                "slab-supermultiplicativity",
                self.slab_supermultiplicative.passed(),
            ),
            (
                "half-space-submultiplicativity",
                self.half_space_submultiplicative.passed(),
            ),
        ]
    }
}

/// `N[n][-m] = W^m N[n][m]` for every entry, on exact integers.
pub fn check_mtp(walks: &CountTable, base: u32) -> ExactCheck {
    let mut check = ExactCheck::default();
    let w = BigUint::from(base);
    for (n, m, key, v) in walks.entries() {
        if m == 0 {
            continue;
        }
        check.checked += 1;
        let (up, down) = if m > 0 { (m, -m) } else { (-m, m) };
        let lhs = walks.get(n, down, key);
        let rhs = w.pow(up as u32) * walks.get(n, up, key);
        if lhs != rhs {
            check.fail(format!("n={n} m={m} key={key}: {lhs} != {rhs} (entry {v})"));
        }
    }
    check
}

/// `d[n][m] = W^m a[n][m]` over the union of both supports.
pub fn check_bridge_reversal(bridges: &BridgeTables) -> ExactCheck {
    let mut check = ExactCheck::default();
    let w = BigUint::from(bridges.model.height_base());
    let mut cells: Vec<(usize, i64, u32)> = bridges
        .a
        .entries()
        .chain(bridges.d.entries())
        .map(|(n, m, key, _)| (n, m, key))
        .collect();
    cells.sort_unstable();
    cells.dedup();
    for (n, m, key) in cells {
        check.checked += 1;
        let lhs = bridges.d.get(n, m, key);
        let rhs = w.pow(m as u32) * bridges.a.get(n, m, key);
        if lhs != rhs {
            check.fail(format!("n={n} m={m} key={key}: d={lhs} W^m a={rhs}"));
        }
    }
    check
}

/// `(n+1) Z(lambda; n) <= sum_{j<=n} Z(lambda; j) Z(lambda; n-j)` for all `n <= n_max`.
pub fn check_differential(walks: &HeightResolvedTable, lambdas: &[f64]) -> InequalityCheck {
    let mut check = InequalityCheck::default();
    for &lambda in lambdas {
        let ln_z: Vec<f64> = (0..=walks.n_max).map(|n| walks.ln_z(lambda, n)).collect();
        for n in 0..=walks.n_max {
            let lhs = ((n + 1) as f64).ln() + ln_z[n];
            let rhs = crate::enumerate::log_sum_exp((0..=n).map(|j| ln_z[j] + ln_z[n - j]));
            check.record(lhs, rhs, || format!("lambda={lambda} n={n}"));
        }
    }
    check
}

/// `Z(lambda; n+m) <= Z(lambda; n) Z(lambda; m)`.
pub fn check_submultiplicative(walks: &HeightResolvedTable, lambdas: &[f64]) -> InequalityCheck {
    let mut check = InequalityCheck::default();
    for &lambda in lambdas {
        let ln_z: Vec<f64> = (0..=walks.n_max).map(|n| walks.ln_z(lambda, n)).collect();
        for n in 1..=walks.n_max {
            for m in 1..=walks.n_max - n {
                check.record(ln_z[n + m], ln_z[n] + ln_z[m], || {
                    format!("lambda={lambda} n={n} m={m}")
                });
            }
        }
    }
    check
}

fn slab_series(bridges: &BridgeTables) -> Vec<LnSeries> {
    let units = bridges.t0_units as i64;
    (0..=bridges.n_max as i64 / units)
        .map(|j| {
            LnSeries::from_table(&bridges.a, bridges.weight, move |m| {
                m >= j * units && m < (j + 1) * units
            })
        })
        .collect()
}

fn half_space_series(walks: &HeightResolvedTable, units: i64) -> Vec<LnSeries> {
    (0..=walks.n_max as i64 / units)
        .map(|j| LnSeries::from_table(&walks.counts, walks.weight, move |m| m >= j * units))
        .collect()
}

/// Slab supermultiplicativity at sampled `z`, with the product truncated to the
/// same degree as the left side.
pub fn check_slab_supermultiplicative(bridges: &BridgeTables, zs: &[f64]) -> InequalityCheck {
    let mut check = InequalityCheck::default();
    let slabs = slab_series(bridges);
    let top = slabs.len();
    for n in 0..top {
        for m in 0..top {
            if n + m + 2 >= top {
                continue;
            }
            let product = slabs[n].truncated_product(&slabs[m]).shifted(2);
            for &z in zs {
                check.record(product.ln_eval(z), slabs[n + m + 2].ln_eval(z), || {
                    format!("z={z} n={n} m={m}")
                });
            }
        }
    }
    check
}

/// Half-space submultiplicativity at sampled `z`, truncated to the table degree.
pub fn check_half_space_submultiplicative(
    walks: &HeightResolvedTable,
    units: i64,
    zs: &[f64],
) -> InequalityCheck {
    let mut check = InequalityCheck::default();
    let half = half_space_series(walks, units);
    let top = half.len();
    for n in 0..top {
        for m in 0..top {
            if n + m + 1 >= top {
                continue;
            }
            let product = half[n].truncated_product(&half[m]);
            for &z in zs {
                check.record(half[n + m + 1].ln_eval(z), product.ln_eval(z), || {
                    format!("z={z} n={n} m={m}")
                });
            }
        }
    }
    check
}

/// Run every identity family on one set of tables.
pub fn verify_identities(tables: &WalkTables, lambdas: &[f64], zs: &[f64]) -> IdentityReport {
    let walks = &tables.walks;
    let bridges = &tables.bridges;
    IdentityReport {
        model: walks.model,
        weight: walks.weight,
        n_max: walks.n_max,
        lambdas: lambdas.to_vec(),
        zs: zs.to_vec(),
        mtp: check_mtp(&walks.counts, walks.model.height_base()),
        bridge_reversal: check_bridge_reversal(bridges),
        differential: check_differential(walks, lambdas),
        submultiplicative: check_submultiplicative(walks, lambdas),
        slab_supermultiplicative: check_slab_supermultiplicative(bridges, zs),
        half_space_submultiplicative: check_half_space_submultiplicative(
            walks,
            bridges.t0_units as i64,
            zs,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::tree_transfer_tables;

    #[test]
    fn small_end_fixed_identities() {
        let t = tree_transfer_tables(ModelSpec::EndFixedTree { k: 3 }, WeightSpec::Saw, 2).unwrap();
        assert_eq!(
            t.walks.counts.get(2, -2, 0),
            BigUint::from(4u32) * t.walks.counts.get(2, 2, 0)
        );
        assert_eq!(
            t.bridges.d.get(1, 1, 0),
            BigUint::from(2u32) * t.bridges.a.get(1, 1, 0)
        );
        let r = verify_identities(&t, &[0.0], &[0.3]);
        assert!(r.passed(), "{r:?}");
        // 3 Z(2) = 18 <= 21
        assert!(
            (r.differential.max_ratio - 1.0).abs() < 1e-12,
            "n=0 gives equality"
        );
    }

    #[test]
    fn a_broken_table_is_caught() {
        let mut t =
            tree_transfer_tables(ModelSpec::EndFixedTree { k: 3 }, WeightSpec::Saw, 3).unwrap();
        t.walks.counts.add(3, -1, 0, 1u32.into());
        t.bridges.d.add(2, 2, 0, 1u32.into());
        assert!(!check_mtp(&t.walks.counts, 2).passed());
        assert!(!check_bridge_reversal(&t.bridges).passed());
    }
}
