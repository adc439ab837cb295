use proptest::prelude::*;
use tiltwalk::analysis::*;
use tiltwalk::closed_form::{end_fixed_zc, oriented_zc, OrientedNumerator, TreeFormulas};
use tiltwalk::enumerate::*;
use tiltwalk::{ModelSpec, WalkTables, WeightSpec};

fn tree(model: ModelSpec, n: usize) -> WalkTables {
    tree_transfer_tables(model, WeightSpec::Saw, n).unwrap()
}

fn exact_bracket(lambda: f64, zc: f64) -> CriticalBracket {
    let mut b = zc_bracket_tables(&tree(ModelSpec::EndFixedTree { k: 3 }, 2), lambda, 1.0);
    b.z_lo = zc;
    b.z_hi = zc;
    b
}

#[test]
fn end_fixed_brackets_contain_thresholds() {
    let t = tree(ModelSpec::EndFixedTree { k: 4 }, 14);
    for lambda in [0.0, 0.5] {
        let b = zc_bracket_tables(&t, lambda, 0.02);
        assert!(b.contains(end_fixed_zc(4, lambda)), "{b:?}");
        assert!(b.recheck(&t));
    }
}

#[test]
fn oriented_brackets_contain_thresholds() {
    let t = tree(ModelSpec::OrientedTree112, 14);
    for (lambda, zc) in [(0.0, 1.0 / 3.0), (0.5, 0.366406859)] {
        let b = zc_bracket_tables(&t, lambda, 0.02);
        assert!(b.contains(zc), "{b:?}");
        assert!((zc - oriented_zc(lambda)).abs() < 1e-9);
    }
}

#[test]
fn product_brackets_are_ordered() {
    let t = compute_tables(
        ModelSpec::ProductTreeZd { k: 3, d: 1 },
        WeightSpec::Saw,
        10,
        None,
    )
    .unwrap();
    let r = scan_report(&t, &[0.0, 0.25, 0.5], 0.02);
    assert!(r.passed());
    assert!(r.brackets.iter().all(|b| b.z_lo < b.z_hi && b.recheck(&t)));
}

#[test]
fn monotone_and_symmetric_on_trees() {
    let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    for model in [ModelSpec::EndFixedTree { k: 4 }, ModelSpec::OrientedTree112] {
        let r = scan_report(&tree(model, 14), &grid, 0.02);
        assert!(r.monotone && r.symmetric, "{model}");
    }
}

#[test]
fn growth_bounds_at_a_subcritical_point() {
    let t = tree(ModelSpec::EndFixedTree { k: 4 }, 12);
    let g = GrowthBound::new(&t, 0.5, 12);
    assert!(g.beta_lower > 0.5);
    assert!(g.alpha_upper >= g.beta_lower || g.crossed());
}

#[test]
fn identity_examples() {
    let t = tree(ModelSpec::EndFixedTree { k: 3 }, 2);
    let r = verify_identities(&t, &[0.0], &[0.5]);
    assert!(r.passed());
    // (n+1) Z(2) = 18 against Z0 Z2 + Z1 Z1 + Z2 Z0 = 21
    let z = t.walks.tilted_z(0.0);
    assert_eq!(
        (3.0 * z[2], z[0] * z[2] + z[1] * z[1] + z[2] * z[0]),
        (18.0, 21.0)
    );
}

#[test]
fn identities_hold_for_indicator_and_soft_weights() {
    for model in [
        ModelSpec::EndFixedTree { k: 3 },
        ModelSpec::ProductTreeZd { k: 3, d: 1 },
    ] {
        for w in [
            WeightSpec::AtMostTwice,
            WeightSpec::TreeSpan,
            WeightSpec::Anisotropic { a: 0.0, b: 1.0 },
        ] {
            let t = compute_tables(model, w, 6, Some(Method::Dfs)).unwrap();
            let r = verify_identities(&t, &[0.0, 0.25, 0.5], &[0.1, 0.3]);
            assert!(r.mtp.passed() && r.bridge_reversal.passed(), "{model} {w}");
        }
    }
}

#[test]
fn bubble_examples() {
    let t = tree(ModelSpec::EndFixedTree { k: 3 }, 40);
    let tp = TwoPointTable::geodesic(t.walks.model, &t.walks.counts);
    assert_eq!(bubble(&tp, 0.0, 40).unwrap(), 1.0);
    // (1 + z^2) / (1 - 2 z^2) at z = 1/2 with geodesics up to distance 40
    assert!((bubble(&tp, 0.5, 80).unwrap() - 2.5).abs() < 1e-9);
    let c = bubble_domination(&tp, &t.walks, 0.5, 40).unwrap();
    assert!(c.pass && c.chi_squared > 70.0, "{c:?}");
}

#[test]
fn madras_slade_examples() {
    let t = tree(ModelSpec::EndFixedTree { k: 4 }, 14);
    let zt = exact_bracket(0.5, end_fixed_zc(4, 0.5));
    for z in [1e-3, 0.4, 0.55] {
        let c = madras_slade_check(&t.walks, &t.bridges, z, &zt).unwrap();
        assert!(c.pass && c.rhs_source == RhsSource::ClosedForm, "{c:?}");
    }
    assert!(madras_slade_check(&t.walks, &t.bridges, 0.6, &zt).is_err());
}

#[test]
fn chito_z_on_end_fixed_counts() {
    let t = tree(ModelSpec::EndFixedTree { k: 4 }, 12);
    let z = t.walks.tilted_z(0.0);
    for n in 1..=12 {
        let y = n as f64 / (3.0 * (n as f64 + 1.0));
        let phi = (1.0 + y) / (1.0 - 3.0 * y);
        let b = chito_z_bound(&z, 1.0 / 3.0, y, n, Some(phi)).unwrap();
        let ratio = b.bound / b.actual.unwrap();
        let cap = std::f64::consts::E.powi(2) * (4.0f64 / 3.0).powi(4) * 2.0;
        assert!((1.0..=cap).contains(&ratio), "n={n} ratio={ratio}");
    }
    assert!(chito_z_bound(&z, 0.2, 0.3, 3, None).is_err());
}

#[test]
fn growth_correction_is_sub_root() {
    let t = tree(ModelSpec::EndFixedTree { k: 4 }, 14);
    let f = TreeFormulas::for_model(t.walks.model, OrientedNumerator::OneMinusZSquared).unwrap();
    let d = critical_growth_diagnostic(&f, &t.walks).unwrap();
    // log(bound) grows like log n here, well inside O(sqrt n)
    let tail: Vec<f64> =
        d.ns.iter()
            .zip(&d.log_bounds)
            .skip(4)
            .map(|(n, l)| l / (*n as f64).sqrt())
            .collect();
    assert!(tail.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{tail:?}");
}

#[test]
fn quant_constants_for_end_fixed() {
    let t = tree(ModelSpec::EndFixedTree { k: 4 }, 12);
    let r = quant_constants(&t.walks, 3.0, 3f64.ln(), &[0.1, 0.3]);
    assert!((r.exponent - 36.0 / (3f64.powf(1.5) - 3.0)).abs() < 1e-12);
    assert!((r.exponent - 16.392).abs() < 1e-3);
    assert!((r.chi_coefficient - 9.0 * r.exponent.exp()).abs() < 1e-6 * r.chi_coefficient);
    assert!(r.passed());
    let b = zc_bracket_tables(&tree(ModelSpec::EndFixedTree { k: 4 }, 14), 0.0, 0.02);
    let from_bracket = quant_constants_report(&t.walks, &b, &[0.3]);
    assert!((from_bracket.mu_c - 3.0).abs() < 0.1 && from_bracket.passed());
}

#[test]
fn decay_on_trees_and_products() {
    let t = tree(ModelSpec::EndFixedTree { k: 3 }, 12);
    let tp = TwoPointTable::geodesic(t.walks.model, &t.walks.counts);
    let f = TreeFormulas::for_model(t.walks.model, OrientedNumerator::OneMinusZSquared).unwrap();
    let r = two_point_decay_check(
        &tp,
        &t.walks,
        0.5,
        &exact_bracket(0.5, 2f64.sqrt().recip()),
        Some(&f),
    )
    .unwrap();
    assert!(r.passed());
    assert!((r.decay_rate - 2f64.ln()).abs() < 1e-9, "{}", r.decay_rate);

    let model = ModelSpec::ProductTreeZd { k: 3, d: 1 };
    let pt = compute_tables(model, WeightSpec::Saw, 12, None).unwrap();
    let ball = tiltwalk::SealedBall::build(model, 12, DEFAULT_VERTEX_LIMIT).unwrap();
    let tp = two_point_table(&ball, WeightSpec::Saw, 12).unwrap();
    let zt = zc_bracket_tables(&pt, 0.5, 0.02);
    let r = two_point_decay_check(&tp, &pt.walks, 0.25, &zt, None).unwrap();
    assert!(r.passed() && r.decay_rate > 0.0 && r.chi_source == RhsSource::Truncated);
    assert!(two_point_decay_check(&tp, &pt.walks, 0.4, &zt, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brackets_recheck(lambda in 0.0f64..1.0) {
        let t = tree(ModelSpec::OrientedTree112, 10);
        let b = zc_bracket_tables(&t, lambda, 0.02);
        prop_assert!(b.z_lo > 0.0 && b.z_lo <= b.z_hi);
        prop_assert!(b.recheck(&t));
        prop_assert!(b.contains(oriented_zc(lambda)));
        let mirror = zc_bracket_tables(&t, 1.0 - lambda, 0.02);
        prop_assert!(b.overlaps(&mirror));
    }

    #[test]
    fn end_fixed_brackets_contain_formula(lambda in -0.5f64..1.5) {
        let t = tree(ModelSpec::EndFixedTree { k: 3 }, 10);
        let b = zc_bracket_tables(&t, lambda, 0.02);
        prop_assert!(b.contains(end_fixed_zc(3, lambda)));
    }
}
