use crate::descriptor::WeightSpec;
use crate::enumerate::{ln_big, ln_pow, log_sum_exp, CountTable};

/// A truncated power series with non-negative coefficients, stored as logs.
#[derive(Debug, Clone, PartialEq)]
pub struct LnSeries {
    ln_coeffs: Vec<f64>,
}

impl LnSeries {
    pub fn from_ln_coeffs(ln_coeffs: Vec<f64>) -> Self {
        LnSeries { ln_coeffs }
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        LnSeries {
            ln_coeffs: coeffs.iter().map(|c| c.ln()).collect(),
        }
    }

    /// Weighted counts of `table` at heights accepted by `keep`.
    pub fn from_table(table: &CountTable, weight: WeightSpec, keep: impl Fn(i64) -> bool) -> Self {
        let ln_coeffs = (0..=table.n_max())
            .map(|n| {
                log_sum_exp(
                    table
                        .layer(n)
                        .filter(|((m, _), _)| keep(*m))
                        .map(|((_, key), v)| ln_big(v) + weight.ln_value(*key, n)),
                )
            })
            .collect();
        LnSeries { ln_coeffs }
    }

    pub fn degree(&self) -> usize {
        self.ln_coeffs.len().saturating_sub(1)
    }

    pub fn ln_coeff(&self, n: usize) -> f64 {
        self.ln_coeffs.get(n).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn is_zero(&self) -> bool {
        self.ln_coeffs.iter().all(|c| *c == f64::NEG_INFINITY)
    }

    pub fn ln_eval(&self, z: f64) -> f64 {
        log_sum_exp(
            self.ln_coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c + ln_pow(z, n)),
        )
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.ln_eval(z).exp()
    }

    /// Share of the sum carried by the highest-degree term; a cheap proxy for
    /// how much the truncation still matters at `z`.
    pub fn last_term_fraction(&self, z: f64) -> f64 {
        let total = self.ln_eval(z);
        if total == f64::NEG_INFINITY {
            return 0.0;
        }
        let n = self.degree();
        (self.ln_coeff(n) + ln_pow(z, n) - total).exp()
    }

    /// Product truncated to degree `max(deg self, deg other)`.
    pub fn truncated_product(&self, other: &LnSeries) -> LnSeries {
        let deg = self.degree().max(other.degree());
        let ln_coeffs = (0..=deg)
            .map(|d| log_sum_exp((0..=d).map(|i| self.ln_coeff(i) + other.ln_coeff(d - i))))
            .collect();
        LnSeries { ln_coeffs }
    }

    /// Multiply by `z^shift`, keeping the degree.
    pub fn shifted(&self, shift: usize) -> LnSeries {
        let deg = self.degree();
        let ln_coeffs = (0..=deg)
            .map(|d| {
                if d >= shift {
                    self.ln_coeff(d - shift)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        LnSeries { ln_coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_and_multiplies() {
        let s = LnSeries::from_coeffs(&[1.0, 2.0, 0.0]);
        assert!((s.eval(0.5) - 2.0).abs() < 1e-12);
        assert_eq!(s.eval(0.0), 1.0);
        let sq = s.truncated_product(&s);
        assert!((sq.ln_coeff(2).exp() - 4.0).abs() < 1e-12);
        assert_eq!(sq.degree(), 2);
        let shifted = s.shifted(1);
        assert!((shifted.ln_coeff(1).exp() - 1.0).abs() < 1e-12);
        assert!((s.last_term_fraction(1.0)).abs() < 1e-12);
    }
}
