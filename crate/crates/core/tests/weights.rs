use proptest::prelude::*;
use tiltwalk::weight::check_good_properties;
use tiltwalk::weight::{evaluate_key, evaluate_ln, WeightState};
use tiltwalk::{GraphModel, ModelSpec, WeightSpec, ROOT};

const TRIALS: usize = 10_000;
const SEED: u64 = 0x5eed;

fn good_weights() -> Vec<WeightSpec> {
    let mut w = vec![
        WeightSpec::Saw,
        WeightSpec::WeaklySaw { g: 0.1 },
        WeightSpec::WeaklySaw { g: 1.0 },
        WeightSpec::AtMostTwice,
        WeightSpec::TreeSpan,
        WeightSpec::PrimeGap,
    ];
    for a in [0.0, 1.0] {
        for b in [0.0, 1.0] {
            w.push(WeightSpec::Anisotropic { a, b });
        }
    }
    w
}

#[test]
fn catalog_weights_are_good() {
    for model in [
        ModelSpec::ProductTreeZd { k: 3, d: 1 },
        ModelSpec::OrientedTree112,
    ] {
        for w in good_weights() {
            let r = check_good_properties(w, model, TRIALS, 8, SEED).unwrap();
            assert!(r.passed(), "{w} on {model}: {:?}", r.violations.first());
            assert!(
                r.disjoint_pairs > 0,
                "{w} on {model}: no disjoint pairs drawn"
            );
        }
    }
}

#[test]
fn planted_violation_is_reported_verbatim() {
    let r = check_good_properties(
        WeightSpec::PlantedViolation,
        ModelSpec::EndFixedTree { k: 3 },
        100,
        4,
        SEED,
    )
    .unwrap();
    assert!(r.violated("repulsivity"));
    let v = r
        .violations
        .iter()
        .find(|v| v.property == "repulsivity")
        .unwrap();
    assert!(!v.first.is_empty() && !v.second.is_empty());
}

#[test]
fn trivial_paths_weigh_one() {
    for w in good_weights() {
        assert_eq!(WeightState::new(w, ROOT).weight(), 1.0);
    }
    assert_eq!(
        WeightState::new(WeightSpec::Anisotropic { a: 2.0, b: 0.0 }, ROOT).weight(),
        1.0
    );
}

#[test]
fn anisotropic_step_factors() {
    let mut model = GraphModel::new(ModelSpec::ProductTreeZd { k: 3, d: 1 });
    let w = WeightSpec::Anisotropic { a: 0.5, b: 0.25 };
    let mut state = WeightState::new(w, ROOT);
    for nb in model.neighbors(ROOT).unwrap() {
        let mut s = state.clone();
        let f = s.extend(nb.vertex, nb.label);
        let expected = if nb.label.is_lattice() {
            0.5f64.exp()
        } else {
            0.25f64.exp()
        };
        assert!((f - expected).abs() < 1e-12);
    }
    let nb = model.neighbors(ROOT).unwrap()[0];
    state.extend(nb.vertex, nb.label);
    assert_eq!(state.extend(ROOT, nb.label), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_matches_definition(slots in prop::collection::vec(0usize..5, 0..14), g in 0.0f64..2.0) {
        let mut model = GraphModel::new(ModelSpec::ProductTreeZd { k: 3, d: 1 });
        let w = WeightSpec::WeaklySaw { g };
        let mut state = WeightState::new(w, ROOT);
        let mut product = 1.0;
        for s in slots {
            let v = state.endpoint();
            let nb = model.neighbors(v).unwrap()[s];
            product *= state.extend(nb.vertex, nb.label);
        }
        let scratch = evaluate_ln(w, state.path(), state.labels()).exp();
        prop_assert!((product - scratch).abs() <= 1e-12 * scratch.max(1.0));
        prop_assert_eq!(evaluate_key(w, state.path(), state.labels()), Some(state.key()));
    }
}
