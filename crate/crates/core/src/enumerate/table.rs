use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::descriptor::{ModelSpec, WeightSpec};

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 960 {
        x.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("64 bits").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `ln(z^n)` with `0^0 = 1`.
pub fn ln_pow(z: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * z.ln()
    }
}

/// `ln(sum exp(terms))`, stable for large magnitudes.
pub fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms
        .into_iter()
        .filter(|t| *t > f64::NEG_INFINITY)
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Exact counts binned by length `n`, height `m` (in units of tau) and weight key.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountTable {
    layers: Vec<BTreeMap<(i64, u32), BigUint>>,
}

impl CountTable {
    pub fn new(n_max: usize) -> Self {
        CountTable {
            layers: vec![BTreeMap::new(); n_max + 1],
        }
    }

    pub fn n_max(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn add(&mut self, n: usize, m: i64, key: u32, value: BigUint) {
        if value.is_zero() {
            return;
        }
        *self.layers[n].entry((m, key)).or_default() += value;
    }

    pub fn get(&self, n: usize, m: i64, key: u32) -> BigUint {
        self.layers
            .get(n)
            .and_then(|l| l.get(&(m, key)))
            .cloned()
            .unwrap_or_default()
    }

    /// Sum over keys.
    pub fn get_all_keys(&self, n: usize, m: i64) -> BigUint {
        self.layer(n)
            .filter(|((mm, _), _)| *mm == m)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn layer(&self, n: usize) -> impl Iterator<Item = (&(i64, u32), &BigUint)> {
        self.layers.get(n).into_iter().flat_map(|l| l.iter())
    }

    /// Sum over heights and keys.
    pub fn total(&self, n: usize) -> BigUint {
        self.layer(n).map(|(_, v)| v).sum()
    }

    pub fn heights(&self, n: usize) -> Vec<i64> {
        let mut hs: Vec<i64> = self.layer(n).map(|((m, _), _)| *m).collect();
        hs.dedup();
        hs
    }

    pub fn keys(&self) -> Vec<u32> {
        let mut ks: Vec<u32> = self
            .layers
            .iter()
            .flat_map(|l| l.keys().map(|(_, k)| *k))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, i64, u32, &BigUint)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(n, l)| l.iter().map(move |((m, k), v)| (n, *m, *k, v)))
    }

    /// Keep only lengths `<= n_max`.
    pub fn truncated(&self, n_max: usize) -> CountTable {
        CountTable {
            layers: self.layers[..=n_max.min(self.n_max())].to_vec(),
        }
    }

    /// `ln sum_{m,key} count * exp(lambda*tau*m + ln w(key, n))` at one length.
    pub fn ln_tilted(&self, n: usize, lambda: f64, tau: f64, weight: WeightSpec) -> f64 {
        log_sum_exp(
            self.layer(n).map(|((m, key), v)| {
                ln_big(v) + lambda * tau * *m as f64 + weight.ln_value(*key, n)
            }),
        )
    }
}

/// How a table was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dfs,
    Transfer,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dfs => "dfs",
            Method::Transfer => "transfer",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "dfs" => Ok(Method::Dfs),
            "transfer" => Ok(Method::Transfer),
            other => Err(crate::error::Error::OutOfRange(format!(
                "unknown enumeration method `{other}`"
            ))),
        }
    }
}

/// `N[n][m]`: weighted counts of length-`n` walks from the root ending at height `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightResolvedTable {
    pub model: ModelSpec,
    pub weight: WeightSpec,
    pub n_max: usize,
    pub method: Method,
    pub counts: CountTable,
}

impl HeightResolvedTable {
    pub fn tau(&self) -> f64 {
        (self.model.height_base() as f64).ln()
    }

    /// `ln Z(lambda; n)`.
    pub fn ln_z(&self, lambda: f64, n: usize) -> f64 {
        self.counts.ln_tilted(n, lambda, self.tau(), self.weight)
    }

    /// `Z(lambda; n)` for `n = 0..=n_max`.
    pub fn tilted_z(&self, lambda: f64) -> Vec<f64> {
        (0..=self.n_max)
            .map(|n| self.ln_z(lambda, n).exp())
            .collect()
    }

    /// Truncated `chi(z, lambda) = sum_n z^n Z(lambda; n)`.
    pub fn chi(&self, z: f64, lambda: f64) -> f64 {
        (0..=self.n_max)
            .map(|n| (ln_pow(z, n) + self.ln_z(lambda, n)).exp())
            .sum()
    }

    /// Exact `Z(0; n)` for unweighted tables.
    pub fn count(&self, n: usize) -> BigUint {
        self.counts.total(n)
    }

    /// `ln b(z; j)` restricted to lengths `<= n_max`: walks ending at height `>= j * t0`.
    pub fn ln_half_space(&self, z: f64, j: i64) -> f64 {
        log_sum_exp((0..=self.n_max).flat_map(|n| {
            self.counts
                .layer(n)
                .filter(move |((m, _), _)| *m >= j)
                .map(move |((_, key), v)| ln_big(v) + ln_pow(z, n) + self.weight.ln_value(*key, n))
        }))
    }
}

/// Bridge and half-space tables, keyed like [`CountTable`].
///
/// `a` holds up-bridges by end height `m >= 0`, `d` down-bridges by depth
/// `m >= 0` below the root, `h` upper half-space walks and `r` reverse
/// descents by end height.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeTables {
    pub model: ModelSpec,
    pub weight: WeightSpec,
    pub n_max: usize,
    pub t0_units: u32,
    pub a: CountTable,
    pub d: CountTable,
    pub h: CountTable,
    pub r: CountTable,
}

impl BridgeTables {
    fn tau(&self) -> f64 {
        (self.model.height_base() as f64).ln()
    }

    fn ln_series(&self, table: &CountTable, z: f64, heights: impl Fn(i64) -> bool + Copy) -> f64 {
        log_sum_exp((0..=self.n_max).flat_map(|n| {
            table
                .layer(n)
                .filter(move |((m, _), _)| heights(*m))
                .map(move |((_, key), v)| ln_big(v) + ln_pow(z, n) + self.weight.ln_value(*key, n))
        }))
    }

    /// `ln a(z; m)` truncated at `n_max`.
    pub fn ln_a(&self, z: f64, m: i64) -> f64 {
        self.ln_series(&self.a, z, |x| x == m)
    }

    /// `ln d(z; m)` truncated at `n_max`.
    pub fn ln_d(&self, z: f64, m: i64) -> f64 {
        self.ln_series(&self.d, z, |x| x == m)
    }

    /// `ln A(z; j)`: up-bridges into the slab `[j*t0, (j+1)*t0)`, truncated at `n_max`.
    pub fn ln_slab(&self, z: f64, j: i64) -> f64 {
        let t0 = self.t0_units as i64;
        self.ln_series(&self.a, z, move |m| m >= j * t0 && m < (j + 1) * t0)
    }

    /// Exact slab counts `A[n][j]`.
    pub fn slab_table(&self) -> CountTable {
        let t0 = self.t0_units as i64;
        let mut out = CountTable::new(self.n_max);
        for (n, m, key, v) in self.a.entries() {
            out.add(n, m.div_euclid(t0), key, v.clone());
        }
        out
    }

    /// Truncated `sum_{m >= 1} a(z; m) W^{m/2}`, the exponent sum in the walk/bridge bound.
    pub fn bridge_exponent_sum(&self, z: f64) -> f64 {
        let tau = self.tau();
        (0..=self.n_max)
            .flat_map(|n| {
                self.a
                    .layer(n)
                    .filter(|((m, _), _)| *m >= 1)
                    .map(move |((m, key), v)| {
                        (ln_big(v)
                            + ln_pow(z, n)
                            + self.weight.ln_value(*key, n)
                            + 0.5 * tau * *m as f64)
                            .exp()
                    })
            })
            .sum()
    }
}

/// Everything one enumeration pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkTables {
    pub walks: HeightResolvedTable,
    pub bridges: BridgeTables,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn ln_big_handles_huge_values() {
        let x = BigUint::from(3u32).pow(2000);
        assert!((ln_big(&x) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(ln_big(&BigUint::from(0u32)), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let v = log_sum_exp([1f64.ln(), 2f64.ln(), 3f64.ln()]);
        assert!((v - 6f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
    }

    #[test]
    fn table_accumulates_and_totals() {
        let mut t = CountTable::new(2);
        t.add(1, 1, 0, 1u32.into());
        t.add(1, -1, 0, 2u32.into());
        t.add(1, -1, 0, 0u32.into());
        assert_eq!(t.total(1), BigUint::from(3u32));
        assert_eq!(t.get(1, -1, 0), BigUint::from(2u32));
        assert_eq!(t.heights(1), vec![-1, 1]);
    }
}
