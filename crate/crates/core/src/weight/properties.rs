//! Randomized checks of the good-weight axioms.
//!
//! Contiguous pairs are drawn as random walks on a lazily grown model, half
//! uniform and half non-backtracking, so that both intersecting and disjoint
//! pairs show up often. Every check compares against the from-scratch
//! definition in [`evaluate_ln`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{evaluate_ln, WeightState};
use crate::descriptor::{ModelSpec, WeightSpec};
use crate::error::Result;
use crate::graph::{EdgeLabel, GraphModel, VertexId, ROOT};

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub property: String,
    pub first: Vec<VertexId>,
    pub second: Vec<VertexId>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub weight: WeightSpec,
    pub model: ModelSpec,
    pub trials: usize,
    pub seed: u64,
    pub disjoint_pairs: usize,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, property: &str) -> bool {
        self.violations.iter().any(|v| v.property == property)
    }
}

#[derive(Debug, Clone)]
struct Walk {
    vertices: Vec<VertexId>,
    labels: Vec<EdgeLabel>,
}

impl Walk {
    fn ln(&self, spec: WeightSpec) -> f64 {
        evaluate_ln(spec, &self.vertices, &self.labels)
    }

    fn reversed(&self, model: &mut GraphModel) -> Walk {
        let vertices: Vec<VertexId> = self.vertices.iter().rev().copied().collect();
        let labels = vertices
            .windows(2)
            .map(|w| label_between(model, w[0], w[1]))
            .collect();
        Walk { vertices, labels }
    }

    fn concat(&self, other: &Walk) -> Walk {
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Walk { vertices, labels }
    }
}

fn label_between(model: &mut GraphModel, u: VertexId, v: VertexId) -> EdgeLabel {
    model
        .neighbors(u)
        .expect("interned")
        .into_iter()
        .find(|n| n.vertex == v)
        .expect("consecutive vertices are adjacent")
        .label
}

fn random_walk(
    model: &mut GraphModel,
    rng: &mut ChaCha8Rng,
    start: VertexId,
    len: usize,
    nb: bool,
) -> Result<Walk> {
    let mut vertices = vec![start];
    let mut labels = Vec::with_capacity(len);
    for _ in 0..len {
        let here = *vertices.last().unwrap();
        let prev = vertices.len().checked_sub(2).map(|i| vertices[i]);
        let options: Vec<_> = model
            .neighbors(here)?
            .into_iter()
            .filter(|n| !nb || Some(n.vertex) != prev)
            .collect();
        let pick = options[rng.gen_range(0..options.len())];
        vertices.push(pick.vertex);
        labels.push(pick.label);
    }
    Ok(Walk { vertices, labels })
}

fn close(a: f64, b: f64) -> bool {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return a == b;
    }
    // relative error on the weights themselves, compared in log space
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn at_most(a: f64, b: f64) -> bool {
    a == f64::NEG_INFINITY || a <= b + REL_TOL * b.abs().max(1.0)
}

/// Disjoint concatenation: `w1(i) != w2(j)` for `i < |w1|`, `j > 0`.
fn disjoint(first: &Walk, second: &Walk) -> bool {
    let head = &first.vertices[..first.vertices.len() - 1];
    second.vertices[1..].iter().all(|v| !head.contains(v))
}

fn permute_children(labels: &[EdgeLabel], shift: u8, children: u8) -> Vec<EdgeLabel> {
    labels
        .iter()
        .map(|l| match *l {
            EdgeLabel::Down(i) => EdgeLabel::Down((i + shift) % children),
            other => other,
        })
        .collect()
}

fn fail(report: &mut PropertyReport, property: &str, a: &Walk, b: &Walk, detail: String) {
    if report.violations.len() < 32 {
        report.violations.push(Violation {
            property: property.to_string(),
            first: a.vertices.clone(),
            second: b.vertices.clone(),
            detail,
        });
    }
}

/// Run `trials` random contiguous pairs of lengths up to `max_len` each.
pub fn check_good_properties(
    weight: WeightSpec,
    model_spec: ModelSpec,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<PropertyReport> {
    let mut model = GraphModel::new(model_spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport {
        weight,
        model: model_spec,
        trials,
        seed,
        disjoint_pairs: 0,
        violations: Vec::new(),
    };
    let children = (model_spec.height_base()) as u8;

    let trivial = Walk {
        vertices: vec![ROOT],
        labels: vec![],
    };
    if trivial.ln(weight) != 0.0 {
        fail(
            &mut report,
            "non-degeneracy",
            &trivial,
            &trivial,
            "trivial path weight != 1".into(),
        );
    }
    for n in model.neighbors(ROOT)? {
        let w = Walk {
            vertices: vec![ROOT, n.vertex],
            labels: vec![n.label],
        };
        if !(w.ln(weight) >= 0.0) {
            fail(
                &mut report,
                "non-degeneracy",
                &w,
                &trivial,
                format!("length-1 weight {}", w.ln(weight).exp()),
            );
        }
    }

    for t in 0..trials {
        let nb = t % 2 == 1;
        let l1 = rng.gen_range(0..=max_len);
        let l2 = rng.gen_range(0..=max_len);
        let first = random_walk(&mut model, &mut rng, ROOT, l1, nb)?;
        let second = random_walk(
            &mut model,
            &mut rng,
            *first.vertices.last().unwrap(),
            l2,
            nb,
        )?;
        let joined = first.concat(&second);
        let (a, b, ab) = (first.ln(weight), second.ln(weight), joined.ln(weight));

        let sum = if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            a + b
        };
        if !at_most(ab, sum) {
            fail(
                &mut report,
                "repulsivity",
                &first,
                &second,
                format!("ln w(joined) = {ab} > {sum}"),
            );
        }
        if disjoint(&first, &second) {
            report.disjoint_pairs += 1;
            if !close(ab, sum) {
                fail(
                    &mut report,
                    "zero-range",
                    &first,
                    &second,
                    format!("ln w(joined) = {ab} != {sum}"),
                );
            }
        }
        let rev = joined.reversed(&mut model).ln(weight);
        if !close(ab, rev) {
            fail(
                &mut report,
                "reversibility",
                &joined,
                &trivial,
                format!("{ab} vs reversed {rev}"),
            );
        }
        if children > 1 {
            let relabeled = permute_children(&joined.labels, 1, children);
            let iso = evaluate_ln(weight, &joined.vertices, &relabeled);
            if !close(ab, iso) {
                fail(
                    &mut report,
                    "label-isotropy",
                    &joined,
                    &trivial,
                    format!("{ab} vs relabeled {iso}"),
                );
            }
        }

        let mut state = WeightState::new(weight, ROOT);
        let mut ln_product = 0.0;
        for (&v, &label) in joined.vertices[1..].iter().zip(&joined.labels) {
            let factor = state.extend(v, label);
            if factor == 0.0 {
                ln_product = f64::NEG_INFINITY;
                break;
            }
            ln_product += factor.ln();
        }
        let exact = if weight.is_indicator() {
            ln_product == ab
        } else {
            close(ln_product, ab)
        };
        if !exact {
            fail(
                &mut report,
                "incremental",
                &joined,
                &trivial,
                format!("product {ln_product} vs scratch {ab}"),
            );
        }
    }
    Ok(report)
}
