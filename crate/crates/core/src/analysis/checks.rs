//! Numerical checks of the susceptibility, bubble and two-point inequalities.

use serde::Serialize;

use super::bracket::CriticalBracket;
use super::series::LnSeries;
use crate::closed_form::TreeFormulas;
use crate::enumerate::{BridgeTables, HeightResolvedTable, TwoPointTable};
use crate::error::{Error, Result};
use crate::ModelSpec;

/// Where the right-hand side of an inequality came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsSource {
    /// Exact closed form: the check is sound.
    ClosedForm,
    /// Truncated series: the check is heuristic.
    Truncated,
}

fn chi_series(walks: &HeightResolvedTable, lambda: f64) -> LnSeries {
    LnSeries::from_ln_coeffs((0..=walks.n_max).map(|n| walks.ln_z(lambda, n)).collect())
}

/// Truncated `B(z) = sum_x G(z; x)^2` up to total degree `degree`.
pub fn bubble(two_point: &TwoPointTable, z: f64, degree: usize) -> Result<f64> {
    if degree > 2 * two_point.n_max {
        return Err(Error::OutOfRange(format!(
            "bubble degree {degree} exceeds 2 * n_max = {}",
            2 * two_point.n_max
        )));
    }
    if !(z >= 0.0) {
        return Err(Error::OutOfRange(format!("z = {z} must be >= 0")));
    }
    Ok(LnSeries::from_coeffs(&two_point.bubble_coefficients(degree)).eval(z))
}

/// `B <= chi(., 1/2)^2`, both truncated to the same total degree.
#[derive(Debug, Clone, Serialize)]
pub struct BubbleCheck {
    pub z: f64,
    pub degree: usize,
    pub bubble: f64,
    pub chi_squared: f64,
    /// Degrees where the bubble coefficient exceeds the squared-susceptibility one.
    pub coefficient_excesses: Vec<usize>,
    pub pass: bool,
}

pub fn bubble_domination(
    two_point: &TwoPointTable,
    walks: &HeightResolvedTable,
    z: f64,
    degree: usize,
) -> Result<BubbleCheck> {
    let b = bubble(two_point, z, degree)?;
    if degree > 2 * walks.n_max {
        return Err(Error::OutOfRange(format!(
            "walk table too short for degree {degree}"
        )));
    }
    let chi = chi_series(walks, 0.5);
    let padded = LnSeries::from_ln_coeffs((0..=degree).map(|n| chi.ln_coeff(n)).collect());
    let squared = padded.truncated_product(&padded);
    let bubble_coeffs = two_point.bubble_coefficients(degree);
    let coefficient_excesses = (0..=degree)
        .filter(|&d| bubble_coeffs[d].ln() > squared.ln_coeff(d) + 1e-12)
        .collect();
    let chi_squared = squared.eval(z);
    Ok(BubbleCheck {
        z,
        degree,
        bubble: b,
        chi_squared,
        coefficient_excesses,
        pass: b <= chi_squared * (1.0 + 1e-12),
    })
}

/// Closed-form `sum_{m >= 1} a(z; m) W^{m/2}` on the end-fixed tree, where the
/// only up-bridge to height `m` is the straight climb of length `m`.
fn end_fixed_bridge_sum(k: u32, z: f64) -> Option<f64> {
    let s = (k as f64 - 1.0).sqrt() * z;
    (s < 1.0).then(|| s / (1.0 - s))
}

/// Outcome of [`madras_slade_check`].
#[derive(Debug, Clone, Serialize)]
pub struct MadrasSladeCheck {
    pub z: f64,
    /// Truncated `chi(z, 1/2)`, a lower bound for the full series.
    pub lhs: f64,
    /// `z^-1 exp[2 sum_{m >= 1} a(z; m) W^{m/2}]`.
    pub rhs: f64,
    pub rhs_source: RhsSource,
    /// `z` lies inside the bracket rather than below it.
    pub inside_bracket: bool,
    pub pass: bool,
}

/// `chi(z, 1/2) <= z^-1 exp[2 sum_{t > 0} a(z; t) e^{t/2}]`.
///
/// `tilt_threshold` brackets `z_{c,1/2}`; points at or above its upper edge are refused.
pub fn madras_slade_check(
    walks: &HeightResolvedTable,
    bridges: &BridgeTables,
    z: f64,
    tilt_threshold: &CriticalBracket,
) -> Result<MadrasSladeCheck> {
    if !(z > 0.0) || z >= tilt_threshold.z_hi {
        return Err(Error::OutOfRange(format!(
            "z = {z} is not below the tilt threshold bracket [{}, {}]",
            tilt_threshold.z_lo, tilt_threshold.z_hi
        )));
    }
    let lhs = walks.chi(z, 0.5);
    let closed = match (walks.model, walks.weight) {
        (ModelSpec::EndFixedTree { k }, crate::WeightSpec::Saw) => end_fixed_bridge_sum(k, z),
        _ => None,
    };
    let (sum, rhs_source) = match closed {
        Some(s) => (s, RhsSource::ClosedForm),
        None => (bridges.bridge_exponent_sum(z), RhsSource::Truncated),
    };
    let rhs = (2.0 * sum).exp() / z;
    Ok(MadrasSladeCheck {
        z,
        lhs,
        rhs,
        rhs_source,
        inside_bracket: z >= tilt_threshold.z_lo,
        pass: lhs <= rhs,
    })
}

/// Outcome of [`chito_z_bound`].
#[derive(Debug, Clone, Serialize)]
pub struct ChiToZBound {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub phi_y: f64,
    /// `[Phi(y) / (n+1)]^2 (x/y)^(2n)`, bounding `x^n c_n`.
    pub bound: f64,
    /// `x^n c_n` when `c_n` is known.
    pub actual: Option<f64>,
    /// `Phi(y)` came from a truncated series whose last term is not negligible.
    pub phi_flagged: bool,
    pub pass: bool,
}

/// Bound `x^n c_n` for a submultiplicative sequence from its generating
/// function `Phi` at `y <= x`.
///
/// `phi` supplies `Phi(y)` exactly; otherwise it is summed from `coeffs` and
/// flagged when the truncation is visible.
pub fn chito_z_bound(
    coeffs: &[f64],
    x: f64,
    y: f64,
    n: usize,
    phi: Option<f64>,
) -> Result<ChiToZBound> {
    if !(0.0 < y && y <= x) {
        return Err(Error::OutOfRange(format!(
            "need 0 < y <= x, got y = {y}, x = {x}"
        )));
    }
    let (phi_y, phi_flagged) = match phi {
        Some(p) => (p, false),
        None => {
            let s = LnSeries::from_coeffs(coeffs);
            (
                s.eval(y),
                s.last_term_fraction(y) > super::bracket::SATURATION,
            )
        }
    };
    let bound = (phi_y / (n as f64 + 1.0)).powi(2) * (x / y).powi(2 * n as i32);
    let actual = coeffs.get(n).map(|c| x.powi(n as i32) * c);
    Ok(ChiToZBound {
        n,
        x,
        y,
        phi_y,
        bound,
        actual,
        phi_flagged,
        pass: actual.is_none_or(|a| a <= bound * (1.0 + 1e-12)),
    })
}

/// `log` of the bound on `Z(1/2; n) z_t^n` along `y = n z_t / (n+1)`, with a
/// least-squares fit `log bound ~ a + b sqrt(n)`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthDiagnostic {
    pub ns: Vec<usize>,
    pub log_bounds: Vec<f64>,
    pub sqrt_slope: f64,
    pub intercept: f64,
    /// `max_n log bound / sqrt(n)`.
    pub max_normalized: f64,
}

/// Tilted analogue of the Hammersley–Welsh growth correction on a tree model.
pub fn critical_growth_diagnostic(
    formulas: &TreeFormulas,
    walks: &HeightResolvedTable,
) -> Result<GrowthDiagnostic> {
    let x = formulas.zc(0.5);
    let coeffs = walks.tilted_z(0.5);
    let mut ns = Vec::new();
    let mut log_bounds = Vec::new();
    for n in 1..=walks.n_max {
        let y = n as f64 * x / (n as f64 + 1.0);
        let phi = formulas.chi(y, 0.5)?;
        let b = chito_z_bound(&coeffs, x, y, n, Some(phi))?;
        if !b.pass {
            return Err(Error::OutOfRange(format!("bound fails at n = {n}")));
        }
        ns.push(n);
        log_bounds.push(b.bound.ln());
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).sqrt()).collect();
    let (intercept, sqrt_slope) = least_squares(&xs, &log_bounds);
    let max_normalized = xs
        .iter()
        .zip(&log_bounds)
        .map(|(s, l)| l / s)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GrowthDiagnostic {
        ns,
        log_bounds,
        sqrt_slope,
        intercept,
        max_normalized,
    })
}

/// `(intercept, slope)` of the least-squares line through the points.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (ys.first().copied().unwrap_or(f64::NAN), f64::NAN);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Constants of the untilted quantitative bounds.
#[derive(Debug, Clone, Serialize)]
pub struct QuantReport {
    pub mu_c: f64,
    pub z_c: f64,
    pub t0: f64,
    /// `4 mu_c^2 / (e^{3 t0 / 2} - e^{t0})`.
    pub exponent: f64,
    /// `mu_c^2 exp[exponent]`, the coefficient of `z_c / (z_c - z)` in the `chi` bound.
    pub chi_coefficient: f64,
    /// `mu_c^4 exp[2 exponent + 2]`, the coefficient of `mu_c^n` in the `Z(n)` bound.
    pub count_coefficient: f64,
    pub checks: Vec<QuantCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantCheck {
    pub z: f64,
    pub chi_truncated: f64,
    pub bound: f64,
    pub pass: bool,
}

impl QuantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Evaluate the explicit constants with `mu_c` from the untilted bracket midpoint
/// and check `chi(z) <= C z_c / (z_c - z) + C` at each sampled `z < z_c`.
pub fn quant_constants_report(
    walks: &HeightResolvedTable,
    untilted: &CriticalBracket,
    zs: &[f64],
) -> QuantReport {
    let z_c = untilted.midpoint();
    let mu_c = 1.0 / z_c;
    let t0 = walks.tau();
    quant_constants(walks, mu_c, t0, zs)
}

/// As [`quant_constants_report`] with `mu_c` given.
pub fn quant_constants(walks: &HeightResolvedTable, mu_c: f64, t0: f64, zs: &[f64]) -> QuantReport {
    let z_c = 1.0 / mu_c;
    let exponent = 4.0 * mu_c * mu_c / ((1.5 * t0).exp() - t0.exp());
    let chi_coefficient = mu_c * mu_c * exponent.exp();
    let count_coefficient = mu_c.powi(4) * (2.0 * exponent + 2.0).exp();
    let checks = zs
        .iter()
        .filter(|&&z| z < z_c)
        .map(|&z| {
            let chi_truncated = walks.chi(z, 0.0);
            let bound = chi_coefficient * z_c / (z_c - z) + chi_coefficient;
            QuantCheck {
                z,
                chi_truncated,
                bound,
                pass: chi_truncated <= bound,
            }
        })
        .collect();
    QuantReport {
        mu_c,
        z_c,
        t0,
        exponent,
        chi_coefficient,
        count_coefficient,
        checks,
    }
}

/// Outcome of [`two_point_decay_check`].
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub z: f64,
    pub lambda: f64,
    pub chi: f64,
    pub chi_source: RhsSource,
    pub checked: usize,
    pub violations: usize,
    /// Largest `G / (chi * W^{-|m|/2})` over checked points.
    pub max_ratio: f64,
    /// Fitted `c` in `max_{d(o,x) = d} G(z; x) ~ e^{-c d}`.
    pub decay_rate: f64,
    pub inside_bracket: bool,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `G(z; x) <= chi(z, 1/2) min{Delta(o,x), Delta(x,o)}^{1/2}` over the table,
/// plus a fitted exponential decay rate in the graph distance.
pub fn two_point_decay_check(
    two_point: &TwoPointTable,
    walks: &HeightResolvedTable,
    z: f64,
    tilt_threshold: &CriticalBracket,
    formulas: Option<&TreeFormulas>,
) -> Result<DecayReport> {
    if !(z > 0.0) || z >= tilt_threshold.z_hi {
        return Err(Error::OutOfRange(format!(
            "z = {z} is not below the tilt threshold bracket [{}, {}]",
            tilt_threshold.z_lo, tilt_threshold.z_hi
        )));
    }
    let lambda = 0.5;
    let (chi, chi_source) = match formulas {
        Some(f) => (f.chi(z, lambda)?, RhsSource::ClosedForm),
        None => (walks.chi(z, lambda), RhsSource::Truncated),
    };
    let tau = (two_point.model.height_base() as f64).ln();
    let mut checked = 0;
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    let mut best_by_distance: Vec<f64> = Vec::new();
    for class in &two_point.classes {
        let g = class.value(z);
        let cap = chi * (-0.5 * tau * class.height.abs() as f64).exp();
        checked += 1;
        let ratio = g / cap;
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + 1e-12 {
            violations += 1;
        }
        let d = class.distance as usize;
        if best_by_distance.len() <= d {
            best_by_distance.resize(d + 1, 0.0);
        }
        best_by_distance[d] = best_by_distance[d].max(g);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = best_by_distance
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > 0.0)
        .map(|(d, g)| (d as f64, g.ln()))
        .unzip();
    let (_, slope) = least_squares(&xs, &ys);
    Ok(DecayReport {
        z,
        lambda,
        chi,
        chi_source,
        checked,
        violations,
        max_ratio,
        decay_rate: -slope,
        inside_bracket: z >= tilt_threshold.z_lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::tree_transfer_tables;
    use crate::WeightSpec;

    #[test]
    fn bubble_at_zero_is_one() {
        let t = tree_transfer_tables(ModelSpec::EndFixedTree { k: 3 }, WeightSpec::Saw, 4).unwrap();
        let tp = TwoPointTable::geodesic(t.walks.model, &t.walks.counts);
        assert_eq!(bubble(&tp, 0.0, 8).unwrap(), 1.0);
        assert!(bubble(&tp, 0.1, 9).is_err());
    }

    #[test]
    fn chito_z_constant_sequence() {
        let n = 10;
        let coeffs = vec![1.0; 200];
        let y = n as f64 / (n as f64 + 1.0);
        let phi = 1.0 / (1.0 - y);
        let b = chito_z_bound(&coeffs, 1.0, y, n, Some(phi)).unwrap();
        let expected = ((n as f64 + 1.0) / n as f64).powi(2 * n as i32);
        assert!((b.bound - expected).abs() < 1e-9);
        assert!(b.pass);
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let (a, b) = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }
}
