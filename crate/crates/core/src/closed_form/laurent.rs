use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Laurent polynomial in one variable `u` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Laurent(BTreeMap<i64, BigInt>);

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Laurent::monomial(0, c)
    }

    pub fn monomial(exp: i64, c: impl Into<BigInt>) -> Self {
        let mut map = BTreeMap::new();
        let c = c.into();
        if !c.is_zero() {
            map.insert(exp, c);
        }
        Laurent(map)
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.0.get(&exp).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.0.iter().map(|(e, c)| (*e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.0
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * u.powi(*e as i32))
            .sum()
    }

    fn add_term(&mut self, exp: i64, c: BigInt) {
        let slot = self.0.entry(exp).or_default();
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&exp);
        }
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent(self.0.iter().map(|(e, c)| (*e, -c)).collect())
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        self + &(-rhs)
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

/// Taylor coefficients of `P(z) / (1 - p z + q z^2)` where `P` has integer
/// coefficients and `p` is a Laurent polynomial in `u`.
pub fn rational_coefficients(numerator: &[i64], p: &Laurent, q: i64, n_max: usize) -> Vec<Laurent> {
    let q = Laurent::constant(q);
    let mut out: Vec<Laurent> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut c = Laurent::constant(numerator.get(n).copied().unwrap_or(0));
        if n >= 1 {
            c = &c + &(p * &out[n - 1]);
        }
        if n >= 2 {
            c = &c - &(&q * &out[n - 2]);
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let u = Laurent::monomial(1, 1);
        let inv = Laurent::monomial(-1, 2);
        let s = &u + &inv;
        let sq = &s * &s;
        assert_eq!(sq.coeff(2), 1.into());
        assert_eq!(sq.coeff(0), 4.into());
        assert_eq!(sq.coeff(-2), 4.into());
        assert!((&sq - &sq).is_zero());
        assert!((sq.eval(2.0) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_series() {
        // 1 / (1 - 3z) = sum 3^n z^n
        let c = rational_coefficients(&[1], &Laurent::constant(3), 0, 5);
        for (n, l) in c.iter().enumerate() {
            assert_eq!(l.coeff(0), BigInt::from(3).pow(n as u32));
        }
    }
}
