use tiltwalk::enumerate::tree_transfer_tables;
use tiltwalk::sampler::*;
use tiltwalk::{ModelSpec, WeightSpec};

const K3: ModelSpec = ModelSpec::EndFixedTree { k: 3 };

/// Every height's empirical frequency is within `sigmas` binomial standard errors.
fn matches_exact(run: &SampleRun, sigmas: f64) -> Result<(), String> {
    let t = tree_transfer_tables(run.model, WeightSpec::Saw, run.n).unwrap();
    let law = exact_height_law(&t.walks, run.n, run.lambda).unwrap();
    let count = run.samples.len() as f64;
    for (m, p) in &law {
        let freq = run.samples.iter().filter(|s| s.height_units == *m).count() as f64 / count;
        let se = (p * (1.0 - p) / count).sqrt().max(1e-12);
        if (freq - p).abs() > sigmas * se {
            return Err(format!(
                "m={m}: freq {freq} vs {p} ({} se)",
                (freq - p).abs() / se
            ));
        }
    }
    Ok(())
}

#[test]
fn exact_sampler_matches_height_law() {
    for (model, n, lambda) in [
        (K3, 4, 0.0),
        (K3, 7, 0.3),
        (K3, 10, 0.5),
        (ModelSpec::OrientedTree112, 6, 0.8),
    ] {
        let run = sample_exact(model, WeightSpec::Saw, lambda, n, 100_000, 17).unwrap();
        assert_eq!(run.method, SampleMethod::ExactSuffix);
        matches_exact(&run, 4.0).unwrap();
    }
}

#[test]
fn untilted_length_two() {
    let run = sample_exact(K3, WeightSpec::Saw, 0.0, 2, 60_000, 3).unwrap();
    let freq =
        |m: i64| run.samples.iter().filter(|s| s.height_units == m).count() as f64 / 60_000.0;
    for (m, p) in [(2, 1.0 / 6.0), (0, 1.0 / 6.0), (-2, 4.0 / 6.0)] {
        assert!((freq(m) - p).abs() < 4.0 * (p * (1.0 - p) / 60_000.0).sqrt());
    }
    let drift = drift_report(&run, &[]);
    assert!(drift.height_ratio.mean < 0.0);
}

#[test]
fn critical_tilt_is_symmetric() {
    let t = tree_transfer_tables(K3, WeightSpec::Saw, 10).unwrap();
    let law = exact_height_law(&t.walks, 10, 0.5).unwrap();
    for (m, p) in &law {
        assert!((p - law[&-m]).abs() < 1e-12);
    }
    let run = sample_exact(K3, WeightSpec::Saw, 0.5, 10, 50_000, 5).unwrap();
    let d = drift_report(&run, &[0.5]);
    assert!(d.height_ratio.mean.abs() < 4.0 * d.height_ratio.std_error);
    assert_eq!(d.signed_log_delta_ratio.mean, 0.0);
}

#[test]
fn rosenbluth_agrees_with_exact_on_a_tree() {
    let n = 8;
    let lambda = 0.3;
    let run = sample_rosenbluth(K3, WeightSpec::Saw, lambda, n, 100_000, 23).unwrap();
    assert_eq!(run.discarded, 0);
    let t = tree_transfer_tables(K3, WeightSpec::Saw, n).unwrap();
    let exact = exact_height_law(&t.walks, n, lambda).unwrap();
    let mean: f64 = exact.iter().map(|(m, p)| *m as f64 * p).sum();
    let est = run.estimate(|s| s.height_units as f64);
    assert!(
        (est.mean - mean).abs() <= 3.0 * est.std_error,
        "{est:?} vs {mean}"
    );
    // per-height bins get a wider band since there are nine of them
    let law = run.height_law();
    for (m, p) in exact {
        let e = law[&m];
        assert!(
            (e.mean - p).abs() <= 4.0 * e.std_error,
            "m={m}: {e:?} vs {p}"
        );
    }
}

#[test]
fn enumerated_sampler_on_products() {
    let model = ModelSpec::ProductTreeZd { k: 3, d: 1 };
    let run = sample_exact(model, WeightSpec::Saw, 0.0, 3, 20_000, 1).unwrap();
    assert_eq!(run.method, SampleMethod::ExactEnumerated);
    assert!(run
        .samples
        .iter()
        .all(|s| s.distance <= 3 && s.distance % 2 == 1));
    let weakly = sample_exact(
        ModelSpec::EndFixedTree { k: 3 },
        WeightSpec::WeaklySaw { g: 0.5 },
        0.0,
        4,
        100,
        1,
    )
    .unwrap();
    assert_eq!(weakly.method, SampleMethod::ExactEnumerated);
}

#[test]
fn seeds_determine_streams() {
    let a = sample_exact(K3, WeightSpec::Saw, 0.2, 30, 1000, 99).unwrap();
    let b = sample_exact(K3, WeightSpec::Saw, 0.2, 30, 1000, 99).unwrap();
    let c = sample_exact(K3, WeightSpec::Saw, 0.2, 30, 1000, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let d = one.install(|| sample_exact(K3, WeightSpec::Saw, 0.2, 30, 1000, 99).unwrap());
    assert_eq!(a, d);
}

#[test]
fn long_tree_walks_drift_down_without_tilt() {
    let run = sample_exact(K3, WeightSpec::Saw, 0.0, 1000, 200, 2).unwrap();
    let d = drift_report(&run, &[0.5, 1.0]);
    // W^m of the walks of height m head down, so height/n tends to -1
    assert!(d.height_ratio.mean < -0.99, "{:?}", d.height_ratio);
    assert_eq!(d.distance_ratio.mean, 1.0);
}
