//! Closed forms for SAW on the two tree models.
//!
//! Both susceptibilities are rational in `z` with denominator
//! `1 - p(u) z + q z^2`, where `u = W^lambda`. Taylor coefficients come from
//! the linear recurrence as Laurent polynomials in `u`, so the coefficient of
//! `u^m z^n` is directly comparable with the enumerated count `N[n][m]`.

mod laurent;

use serde::Serialize;

use crate::descriptor::ModelSpec;
use crate::enumerate::CountTable;
use crate::error::{Error, Result};

pub use laurent::{rational_coefficients, Laurent};

/// `(k-1)^(-max(lambda, 1-lambda))`.
pub fn end_fixed_zc(k: u32, lambda: f64) -> f64 {
    (k as f64 - 1.0).powf(-lambda.max(1.0 - lambda))
}

/// `-log_{k-1} z`.
pub fn end_fixed_alpha(k: u32, z: f64) -> f64 {
    -z.ln() / (k as f64 - 1.0).ln()
}

fn check_z(z: f64, zc: f64) -> Result<()> {
    if !(z >= 0.0) {
        return Err(Error::OutOfRange(format!("z = {z} must be >= 0")));
    }
    if z >= zc {
        return Err(Error::Divergent { z, singularity: zc });
    }
    Ok(())
}

/// `chi(z, lambda) = (1 - z^2) / ((1 - W^(1-lambda) z)(1 - W^lambda z))`, `W = k - 1`.
pub fn end_fixed_chi(k: u32, z: f64, lambda: f64) -> Result<f64> {
    check_z(z, end_fixed_zc(k, lambda))?;
    let w = k as f64 - 1.0;
    Ok((1.0 - z * z) / ((1.0 - w.powf(1.0 - lambda) * z) * (1.0 - w.powf(lambda) * z)))
}

/// Coefficients of `end_fixed_chi` as Laurent polynomials in `u = (k-1)^lambda`.
pub fn end_fixed_coefficients(k: u32, n_max: usize) -> Vec<Laurent> {
    let w = k as i64 - 1;
    let p = &Laurent::monomial(1, 1) + &Laurent::monomial(-1, w);
    rational_coefficients(&[1, 0, -1], &p, w, n_max)
}

fn oriented_c(lambda: f64) -> f64 {
    2f64.powf(lambda) + 2f64.powf(1.0 - lambda) + 1.0
}

/// Smaller root of `1 - c z + 3 z^2`, `c = 2^lambda + 2^(1-lambda) + 1`.
pub fn oriented_zc(lambda: f64) -> f64 {
    let c = oriented_c(lambda);
    (c - (c * c - 12.0).max(0.0).sqrt()) / 6.0
}

/// Bridge decay rate on the oriented tree; `-inf` above the tiltability threshold.
pub fn oriented_alpha(z: f64) -> f64 {
    if z > oriented_zc(0.5) {
        return f64::NEG_INFINITY;
    }
    let disc = 9.0 * z.powi(4) - 6.0 * z.powi(3) - z * z - 2.0 * z + 1.0;
    ((3.0 * z * z - z + 1.0 + disc.max(0.0).sqrt()) / (2.0 * z)).log2()
}

/// The two numerators on offer for the oriented-tree susceptibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientedNumerator {
    /// `1 - z^2`
    OneMinusZSquared,
    /// `1 - 3 z^2`, as printed
    OneMinusThreeZSquared,
}

impl OrientedNumerator {
    pub const ALL: [OrientedNumerator; 2] = [
        OrientedNumerator::OneMinusZSquared,
        OrientedNumerator::OneMinusThreeZSquared,
    ];

    fn coeffs(self) -> [i64; 3] {
        match self {
            OrientedNumerator::OneMinusZSquared => [1, 0, -1],
            OrientedNumerator::OneMinusThreeZSquared => [1, 0, -3],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            OrientedNumerator::OneMinusZSquared => "1-z^2",
            OrientedNumerator::OneMinusThreeZSquared => "1-3z^2",
        }
    }

    /// Kebab-case name used by configs and the command line.
    pub fn name(self) -> &'static str {
        match self {
            OrientedNumerator::OneMinusZSquared => "one-minus-z-squared",
            OrientedNumerator::OneMinusThreeZSquared => "one-minus-three-z-squared",
        }
    }
}

impl std::str::FromStr for OrientedNumerator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OrientedNumerator::ALL
            .into_iter()
            .find(|c| c.name() == s || c.label() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown numerator `{s}`")))
    }
}

pub fn oriented_chi(numerator: OrientedNumerator, z: f64, lambda: f64) -> Result<f64> {
    check_z(z, oriented_zc(lambda))?;
    let [a, _, b] = numerator.coeffs();
    Ok((a as f64 + b as f64 * z * z) / (1.0 - oriented_c(lambda) * z + 3.0 * z * z))
}

/// Both candidate values, in the order of [`OrientedNumerator::ALL`].
pub fn oriented_chi_candidates(z: f64, lambda: f64) -> Result<[f64; 2]> {
    Ok([
        oriented_chi(OrientedNumerator::ALL[0], z, lambda)?,
        oriented_chi(OrientedNumerator::ALL[1], z, lambda)?,
    ])
}

/// Coefficients in `u = 2^lambda`.
pub fn oriented_coefficients(numerator: OrientedNumerator, n_max: usize) -> Vec<Laurent> {
    let p = &(&Laurent::monomial(1, 1) + &Laurent::monomial(-1, 2)) + &Laurent::constant(1);
    rational_coefficients(&numerator.coeffs(), &p, 3, n_max)
}

/// Evaluate Laurent coefficients at `u`.
pub fn coefficients_at(coeffs: &[Laurent], u: f64) -> Vec<f64> {
    coeffs.iter().map(|c| c.eval(u)).collect()
}

/// First length at which the coefficient of `u^m` differs from the
/// key-summed count `N[n][m]`, or `None` if all agree.
pub fn first_mismatch(coeffs: &[Laurent], walks: &CountTable, n_max: usize) -> Option<usize> {
    (0..=n_max.min(coeffs.len() - 1).min(walks.n_max())).find(|&n| {
        let mut from_table = Laurent::zero();
        for ((m, _), v) in walks.layer(n) {
            from_table = &from_table + &Laurent::monomial(*m, num_bigint::BigInt::from(v.clone()));
        }
        from_table != coeffs[n]
    })
}

/// Closed forms for one tree model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TreeFormulas {
    EndFixed { k: u32 },
    Oriented { numerator: OrientedNumerator },
}

impl TreeFormulas {
    /// The oriented susceptibility needs a numerator chosen by [`resolve_oriented`].
    pub fn for_model(model: ModelSpec, numerator: OrientedNumerator) -> Result<Self> {
        match model {
            ModelSpec::EndFixedTree { k } => Ok(TreeFormulas::EndFixed { k }),
            ModelSpec::OrientedTree112 => Ok(TreeFormulas::Oriented { numerator }),
            other => Err(Error::Unsupported(format!("no closed form for {other}"))),
        }
    }

    pub fn base(&self) -> f64 {
        match self {
            TreeFormulas::EndFixed { k } => *k as f64 - 1.0,
            TreeFormulas::Oriented { .. } => 2.0,
        }
    }

    pub fn zc(&self, lambda: f64) -> f64 {
        match *self {
            TreeFormulas::EndFixed { k } => end_fixed_zc(k, lambda),
            TreeFormulas::Oriented { .. } => oriented_zc(lambda),
        }
    }

    pub fn alpha(&self, z: f64) -> f64 {
        match *self {
            TreeFormulas::EndFixed { k } => end_fixed_alpha(k, z),
            TreeFormulas::Oriented { .. } => oriented_alpha(z),
        }
    }

    pub fn chi(&self, z: f64, lambda: f64) -> Result<f64> {
        match *self {
            TreeFormulas::EndFixed { k } => end_fixed_chi(k, z, lambda),
            TreeFormulas::Oriented { numerator } => oriented_chi(numerator, z, lambda),
        }
    }

    pub fn coefficients(&self, n_max: usize) -> Vec<Laurent> {
        match *self {
            TreeFormulas::EndFixed { k } => end_fixed_coefficients(k, n_max),
            TreeFormulas::Oriented { numerator } => oriented_coefficients(numerator, n_max),
        }
    }

    /// Taylor coefficients at a given tilt.
    pub fn coefficients_at(&self, lambda: f64, n_max: usize) -> Vec<f64> {
        coefficients_at(&self.coefficients(n_max), self.base().powf(lambda))
    }
}

/// Which oriented-tree numerator reproduces the enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct OrientedVerdict {
    pub n_max: usize,
    pub lambdas: Vec<f64>,
    /// Per candidate (order of [`OrientedNumerator::ALL`]) and tilt: do all
    /// coefficients agree to relative `1e-10`?
    pub numeric_match: Vec<Vec<bool>>,
    /// Per candidate: do the coefficients agree as Laurent polynomials?
    pub exact_match: Vec<bool>,
    pub selected: Option<OrientedNumerator>,
}

impl OrientedVerdict {
    pub fn unique(&self) -> bool {
        self.selected.is_some()
    }
}

/// Compare both candidates against the enumerated SAW table of the oriented tree.
pub fn resolve_oriented(walks: &CountTable, n_max: usize, lambdas: &[f64]) -> OrientedVerdict {
    let tau = 2f64.ln();
    let mut numeric_match = Vec::new();
    let mut exact_match = Vec::new();
    for cand in OrientedNumerator::ALL {
        let coeffs = oriented_coefficients(cand, n_max);
        exact_match.push(first_mismatch(&coeffs, walks, n_max).is_none());
        numeric_match.push(
            lambdas
                .iter()
                .map(|&lambda| {
                    let closed = coefficients_at(&coeffs, 2f64.powf(lambda));
                    (0..=n_max).all(|n| {
                        let z = walks
                            .ln_tilted(n, lambda, tau, crate::WeightSpec::Saw)
                            .exp();
                        (closed[n] - z).abs() <= 1e-10 * z.abs().max(1.0)
                    })
                })
                .collect::<Vec<bool>>(),
        );
    }
    let agreeing: Vec<OrientedNumerator> = OrientedNumerator::ALL
        .iter()
        .zip(&numeric_match)
        .filter(|(_, m)| m.iter().all(|x| *x))
        .map(|(c, _)| *c)
        .collect();
    OrientedVerdict {
        n_max,
        lambdas: lambdas.to_vec(),
        numeric_match,
        exact_match,
        selected: (agreeing.len() == 1).then(|| agreeing[0]),
    }
}
