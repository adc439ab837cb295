use num_bigint::BigUint;

use super::table::{ln_big, CountTable};
use crate::descriptor::{ModelSpec, WeightSpec};

/// Endpoints that share a two-point function: one vertex, or all tree vertices
/// at a given distance and height.
#[derive(Debug, Clone)]
pub struct PointClass {
    pub distance: u32,
    pub height: i64,
    /// Number of vertices in the class.
    pub multiplicity: BigUint,
    /// Coefficient of `z^n` in `G(z; x)` for any `x` in the class.
    pub coeffs: Vec<f64>,
}

impl PointClass {
    pub fn value(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    pub fn ln_multiplicity(&self) -> f64 {
        ln_big(&self.multiplicity)
    }
}

/// `G_parts[x][n]`: weighted counts of length-`n` walks from the root to `x`.
#[derive(Debug, Clone)]
pub struct TwoPointTable {
    pub model: ModelSpec,
    pub weight: WeightSpec,
    pub n_max: usize,
    pub classes: Vec<PointClass>,
}

impl TwoPointTable {
    /// On a tree the only SAW to `x` is its geodesic, so `G(z; x) = z^d(x)`
    /// and the vertices at distance `d` and height `m` number `N[d][m]`.
    pub fn geodesic(model: ModelSpec, walks: &CountTable) -> Self {
        let n_max = walks.n_max();
        let classes = (0..=n_max)
            .flat_map(|d| {
                walks.layer(d).map(move |((m, _), count)| {
                    let mut coeffs = vec![0.0; n_max + 1];
                    coeffs[d] = 1.0;
                    PointClass {
                        distance: d as u32,
                        height: *m,
                        multiplicity: count.clone(),
                        coeffs,
                    }
                })
            })
            .collect();
        TwoPointTable {
            model,
            weight: WeightSpec::Saw,
            n_max,
            classes,
        }
    }

    /// `G_parts[root][n]`.
    pub fn root(&self) -> Option<&PointClass> {
        self.classes.iter().find(|c| c.distance == 0)
    }

    /// Coefficients of `B(z) = sum_x G(z; x)^2` up to total degree `degree`.
    pub fn bubble_coefficients(&self, degree: usize) -> Vec<f64> {
        let mut out = vec![0.0; degree + 1];
        for class in &self.classes {
            let mult = class.ln_multiplicity().exp();
            for (i, a) in class.coeffs.iter().enumerate().filter(|(_, a)| **a != 0.0) {
                for (j, b) in class.coeffs.iter().enumerate().filter(|(_, b)| **b != 0.0) {
                    if i + j <= degree {
                        out[i + j] += mult * a * b;
                    }
                }
            }
        }
        out
    }
}
