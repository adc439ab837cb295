//! Samplers for the tilted path measures and displacement statistics.
//!
//! Randomness comes from ChaCha8: sample `i` of a run with seed `s` uses
//! `ChaCha8Rng::seed_from_u64(s)` on stream `i`, so runs are reproducible and
//! independent of the worker count.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{ModelSpec, WeightSpec};
use crate::enumerate::transfer::TransferRule;
use crate::enumerate::{two_point_table, HeightResolvedTable, TwoPointTable, DEFAULT_VERTEX_LIMIT};
use crate::error::{Error, Result};
use crate::graph::{GraphModel, SealedBall, ROOT};
use crate::weight::{Step, WeightState};

/// Longest walk the tree suffix sampler accepts.
pub const TREE_EXACT_LIMIT: usize = 1000;

/// Longest walk the enumerated sampler accepts.
pub const ENUMERATED_EXACT_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMethod {
    /// Sequential sampling with exact continuation weights on a tree.
    ExactSuffix,
    /// Endpoint drawn from the exact two-point table.
    ExactEnumerated,
    /// Sequential importance sampling.
    Rosenbluth,
}

impl std::str::FromStr for SampleMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-suffix" => Ok(SampleMethod::ExactSuffix),
            "exact-enumerated" => Ok(SampleMethod::ExactEnumerated),
            "rosenbluth" => Ok(SampleMethod::Rosenbluth),
            other => Err(Error::OutOfRange(format!(
                "unknown sampling method `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleMethod::ExactSuffix => "exact-suffix",
            SampleMethod::ExactEnumerated => "exact-enumerated",
            SampleMethod::Rosenbluth => "rosenbluth",
        })
    }
}

/// One sampled endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub index: usize,
    pub height_units: i64,
    pub distance: u32,
    /// Natural log of the importance weight; zero for exact methods.
    pub log_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub model: ModelSpec,
    pub weight: WeightSpec,
    pub lambda: f64,
    pub n: usize,
    pub method: SampleMethod,
    pub seed: u64,
    pub num_samples: usize,
    pub samples: Vec<Sample>,
    /// Trapped walks, dropped from `samples`.
    pub discarded: usize,
}

impl SampleRun {
    pub fn discard_rate(&self) -> f64 {
        if self.num_samples == 0 {
            0.0
        } else {
            self.discarded as f64 / self.num_samples as f64
        }
    }

    /// Importance weights rescaled so the largest is one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let max = self
            .samples
            .iter()
            .map(|s| s.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        self.samples
            .iter()
            .map(|s| (s.log_weight - max).exp())
            .collect()
    }

    /// `(sum w)^2 / sum w^2`.
    pub fn effective_sample_size(&self) -> f64 {
        let w = self.normalized_weights();
        let s: f64 = w.iter().sum();
        let s2: f64 = w.iter().map(|x| x * x).sum();
        if s2 == 0.0 {
            0.0
        } else {
            s * s / s2
        }
    }

    /// Weighted mean of `f` with a standard error based on the effective sample size.
    pub fn estimate(&self, f: impl Fn(&Sample) -> f64) -> Estimate {
        let w = self.normalized_weights();
        let total: f64 = w.iter().sum();
        if self.samples.is_empty() || total == 0.0 {
            return Estimate {
                mean: f64::NAN,
                std_error: f64::NAN,
            };
        }
        let mean = self
            .samples
            .iter()
            .zip(&w)
            .map(|(s, w)| w * f(s))
            .sum::<f64>()
            / total;
        // delta-method variance of the self-normalized estimator
        let var = self
            .samples
            .iter()
            .zip(&w)
            .map(|(s, w)| (w * (f(s) - mean)).powi(2))
            .sum::<f64>()
            / (total * total);
        Estimate {
            mean,
            std_error: var.sqrt(),
        }
    }

    /// Empirical law of the endpoint height.
    pub fn height_law(&self) -> BTreeMap<i64, Estimate> {
        let heights: std::collections::BTreeSet<i64> =
            self.samples.iter().map(|s| s.height_units).collect();
        heights
            .into_iter()
            .map(|m| {
                (
                    m,
                    self.estimate(|s| f64::from(u8::from(s.height_units == m))),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Exact law of the endpoint height under `P_{lambda,n}`.
pub fn exact_height_law(
    walks: &HeightResolvedTable,
    n: usize,
    lambda: f64,
) -> Result<BTreeMap<i64, f64>> {
    if n > walks.n_max {
        return Err(Error::OutOfRange(format!(
            "n = {n} beyond table n_max = {}",
            walks.n_max
        )));
    }
    let tau = walks.tau();
    let ln_z = walks.ln_z(lambda, n);
    let mut law = BTreeMap::new();
    for ((m, key), v) in walks.counts.layer(n) {
        let ln_p =
            crate::enumerate::ln_big(v) + walks.weight.ln_value(*key, n) + lambda * tau * *m as f64
                - ln_z;
        *law.entry(*m).or_insert(0.0) += ln_p.exp();
    }
    Ok(law)
}

/// Exact `E[d(o, X_n)] / n` under `P_{lambda,n}` from a two-point table.
pub fn exact_distance_ratio(two_point: &TwoPointTable, n: usize, lambda: f64) -> f64 {
    let tau = (two_point.model.height_base() as f64).ln();
    let (num, den) = two_point
        .classes
        .iter()
        .filter(|c| c.coeffs.get(n).is_some_and(|x| *x > 0.0))
        .fold((0.0, 0.0), |(num, den), c| {
            let w = (c.ln_multiplicity() + c.coeffs[n].ln() + lambda * tau * c.height as f64).exp();
            (num + w * c.distance as f64, den + w)
        });
    num / den / n.max(1) as f64
}

fn tree_suffix_applies(model: ModelSpec, weight: WeightSpec) -> bool {
    // anisotropic weights are constant in n on trees, which have no lattice edges
    model.is_tree() && weight.is_self_avoiding()
}

/// Exact samples from `P_{lambda,n}`.
pub fn sample_exact(
    model: ModelSpec,
    weight: WeightSpec,
    lambda: f64,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<SampleRun> {
    let (method, samples) = if tree_suffix_applies(model, weight) {
        if n > TREE_EXACT_LIMIT {
            return Err(Error::ExactOutOfReach {
                n,
                limit: TREE_EXACT_LIMIT,
            });
        }
        (
            SampleMethod::ExactSuffix,
            tree_suffix_samples(model, lambda, n, count, seed)?,
        )
    } else {
        if n > ENUMERATED_EXACT_LIMIT {
            return Err(Error::ExactOutOfReach {
                n,
                limit: ENUMERATED_EXACT_LIMIT,
            });
        }
        let ball = SealedBall::build(model, n as u32, DEFAULT_VERTEX_LIMIT)?;
        let table = two_point_table(&ball, weight, n)?;
        (
            SampleMethod::ExactEnumerated,
            enumerated_samples(&table, lambda, n, count, seed)?,
        )
    };
    Ok(SampleRun {
        model,
        weight,
        lambda,
        n,
        method,
        seed,
        num_samples: count,
        samples,
        discarded: 0,
    })
}

fn tree_suffix_samples(
    model: ModelSpec,
    lambda: f64,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Sample>> {
    let rule = TransferRule::for_model(model)?;
    let classes = rule.classes();
    let u = (model.height_base() as f64).powf(lambda);
    let tilt: Vec<f64> = rule.increment.iter().map(|&i| u.powi(i)).collect();
    // suffix[r][c]: tilted weight of all r-step continuations after a move of
    // class c, rescaled per layer; only ratios within a layer are used
    let mut suffix = vec![vec![1.0; classes]];
    for r in 1..n {
        let prev = &suffix[r - 1];
        let mut layer: Vec<f64> = (0..classes)
            .map(|c| {
                (0..classes)
                    .map(|c2| rule.follow[c][c2] as f64 * tilt[c2] * prev[c2])
                    .sum()
            })
            .collect();
        let max = layer.iter().copied().fold(0.0, f64::max);
        layer.iter_mut().for_each(|x| *x /= max);
        suffix.push(layer);
    }
    let first = (n > 0)
        .then(|| {
            WeightedIndex::new(
                (0..classes).map(|c| rule.start[c] as f64 * tilt[c] * suffix[n - 1][c]),
            )
            .map_err(|e| Error::OutOfRange(e.to_string()))
        })
        .transpose()?;
    let next: Vec<Vec<Option<WeightedIndex<f64>>>> = (0..n)
        .map(|r| {
            (0..classes)
                .map(|c| {
                    WeightedIndex::new(
                        (0..classes).map(|c2| rule.follow[c][c2] as f64 * tilt[c2] * suffix[r][c2]),
                    )
                    .ok()
                })
                .collect()
        })
        .collect();
    Ok((0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng_for(seed, index);
            let mut height = 0i64;
            if let Some(first) = &first {
                let mut class = first.sample(&mut rng);
                height += rule.increment[class] as i64;
                for remaining in (0..n - 1).rev() {
                    let dist = next[remaining][class]
                        .as_ref()
                        .expect("a tree always continues");
                    class = dist.sample(&mut rng);
                    height += rule.increment[class] as i64;
                }
            }
            Sample {
                index,
                height_units: height,
                distance: n as u32,
                log_weight: 0.0,
            }
        })
        .collect())
}

fn enumerated_samples(
    table: &TwoPointTable,
    lambda: f64,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Sample>> {
    let tau = (table.model.height_base() as f64).ln();
    let endpoints: Vec<_> = table
        .classes
        .iter()
        .filter(|c| c.coeffs.get(n).is_some_and(|x| *x > 0.0))
        .collect();
    let ln_w: Vec<f64> = endpoints
        .iter()
        .map(|c| c.ln_multiplicity() + c.coeffs[n].ln() + lambda * tau * c.height as f64)
        .collect();
    let max = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dist = WeightedIndex::new(ln_w.iter().map(|l| (l - max).exp()))
        .map_err(|e| Error::OutOfRange(e.to_string()))?;
    Ok((0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng_for(seed, index);
            let c = endpoints[dist.sample(&mut rng)];
            Sample {
                index,
                height_units: c.height,
                distance: c.distance,
                log_weight: 0.0,
            }
        })
        .collect())
}

/// Sequential importance sampling of `P_{lambda,n}`; trapped walks are discarded.
pub fn sample_rosenbluth(
    model: ModelSpec,
    weight: WeightSpec,
    lambda: f64,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<SampleRun> {
    let tau = (model.height_base() as f64).ln();
    let drawn: Vec<Result<Option<Sample>>> = (0..count)
        .into_par_iter()
        .map(|index| rosenbluth_one(model, weight, lambda * tau, n, rng_for(seed, index), index))
        .collect();
    let mut samples = Vec::with_capacity(count);
    let mut discarded = 0;
    for s in drawn {
        match s? {
            Some(s) => samples.push(s),
            None => discarded += 1,
        }
    }
    Ok(SampleRun {
        model,
        weight,
        lambda,
        n,
        method: SampleMethod::Rosenbluth,
        seed,
        num_samples: count,
        samples,
        discarded,
    })
}

fn rosenbluth_one(
    model: ModelSpec,
    weight: WeightSpec,
    tilt: f64,
    n: usize,
    mut rng: ChaCha8Rng,
    index: usize,
) -> Result<Option<Sample>> {
    let mut graph = GraphModel::new(model);
    let mut state = WeightState::new(weight, ROOT);
    let mut log_weight = 0.0;
    let mut height = 0i64;
    let mut factors = Vec::with_capacity(graph.degree());
    for len in 0..n {
        let v = state.endpoint();
        let ln_before = weight.ln_value(state.key(), len);
        factors.clear();
        for nb in graph.neighbors(v)? {
            let f = match state.probe(nb.vertex, nb.label) {
                Step::Blocked => 0.0,
                Step::Allowed { key_delta } => (weight.ln_value(state.key() + key_delta, len + 1)
                    - ln_before
                    + tilt * nb.increment as f64)
                    .exp(),
            };
            factors.push((f, nb));
        }
        let total: f64 = factors.iter().map(|(f, _)| f).sum();
        if total == 0.0 {
            return Ok(None);
        }
        let mut pick = rng.gen::<f64>() * total;
        let (_, chosen) = *factors
            .iter()
            .find(|(f, _)| {
                pick -= f;
                *f > 0.0 && pick < 0.0
            })
            .unwrap_or_else(|| {
                factors
                    .iter()
                    .rev()
                    .find(|(f, _)| *f > 0.0)
                    .expect("total > 0")
            });
        state.push(chosen.vertex, chosen.label);
        height += chosen.increment as i64;
        log_weight += total.ln();
    }
    Ok(Some(Sample {
        index,
        height_units: height,
        distance: graph.depth(state.endpoint())?,
        log_weight,
    }))
}

/// Displacement statistics of a run.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub n: usize,
    pub lambda: f64,
    pub samples: usize,
    pub effective_sample_size: f64,
    pub discard_rate: f64,
    /// `E[d(o, X_n)] / n`.
    pub distance_ratio: Estimate,
    /// `E[height in units] / n`.
    pub height_ratio: Estimate,
    /// `E[sgn(lambda - 1/2) log Delta(o, X_n)] / n`.
    pub signed_log_delta_ratio: Estimate,
    /// `(c, P(d(o, X_n) < c n))`.
    pub tails: Vec<(f64, Estimate)>,
}

pub fn drift_report(run: &SampleRun, cs: &[f64]) -> DriftReport {
    let n = run.n.max(1) as f64;
    let tau = (run.model.height_base() as f64).ln();
    let sign = if run.lambda > 0.5 {
        1.0
    } else if run.lambda < 0.5 {
        -1.0
    } else {
        0.0
    };
    let (dist, height, signed) = if run.n == 0 {
        let zero = Estimate {
            mean: 0.0,
            std_error: 0.0,
        };
        (zero, zero, zero)
    } else {
        (
            run.estimate(|s| s.distance as f64 / n),
            run.estimate(|s| s.height_units as f64 / n),
            run.estimate(|s| sign * tau * s.height_units as f64 / n),
        )
    };
    DriftReport {
        n: run.n,
        lambda: run.lambda,
        samples: run.samples.len(),
        effective_sample_size: run.effective_sample_size(),
        discard_rate: run.discard_rate(),
        distance_ratio: dist,
        height_ratio: height,
        signed_log_delta_ratio: signed,
        tails: cs
            .iter()
            .map(|&c| {
                (
                    c,
                    run.estimate(|s| f64::from(u8::from((s.distance as f64) < c * n))),
                )
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::tree_transfer_tables;

    #[test]
    fn exact_law_small_tree() {
        let t = tree_transfer_tables(ModelSpec::EndFixedTree { k: 3 }, WeightSpec::Saw, 2).unwrap();
        let law = exact_height_law(&t.walks, 2, 0.0).unwrap();
        assert!((law[&2] - 1.0 / 6.0).abs() < 1e-12);
        assert!((law[&0] - 1.0 / 6.0).abs() < 1e-12);
        assert!((law[&-2] - 4.0 / 6.0).abs() < 1e-12);
        let half = exact_height_law(&t.walks, 2, 0.5).unwrap();
        assert!((half[&2] - 0.4).abs() < 1e-12);
        assert!((half[&0] - 0.2).abs() < 1e-12);
        assert!((half[&-2] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn trivial_walk() {
        let run = sample_exact(
            ModelSpec::EndFixedTree { k: 3 },
            WeightSpec::Saw,
            0.3,
            0,
            5,
            1,
        )
        .unwrap();
        assert!(run
            .samples
            .iter()
            .all(|s| s.height_units == 0 && s.distance == 0));
        let d = drift_report(&run, &[0.5]);
        assert_eq!(d.distance_ratio.mean, 0.0);
    }

    #[test]
    fn empty_run() {
        let run = sample_rosenbluth(
            ModelSpec::EndFixedTree { k: 3 },
            WeightSpec::Saw,
            0.0,
            5,
            0,
            1,
        )
        .unwrap();
        assert!(run.samples.is_empty());
        assert_eq!(run.discard_rate(), 0.0);
        assert!(run.estimate(|s| s.distance as f64).mean.is_nan());
    }

    #[test]
    fn same_seed_same_stream() {
        let a = sample_rosenbluth(
            ModelSpec::ProductTreeZd { k: 3, d: 1 },
            WeightSpec::Saw,
            0.0,
            20,
            50,
            9,
        )
        .unwrap();
        let b = sample_rosenbluth(
            ModelSpec::ProductTreeZd { k: 3, d: 1 },
            WeightSpec::Saw,
            0.0,
            20,
            50,
            9,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_reach_is_reported() {
        assert!(matches!(
            sample_exact(
                ModelSpec::ProductTreeZd { k: 3, d: 1 },
                WeightSpec::Saw,
                0.0,
                40,
                1,
                0
            ),
            Err(Error::ExactOutOfReach { .. })
        ));
    }
}
