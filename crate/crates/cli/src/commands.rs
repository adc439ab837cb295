//! One function per subcommand. Each writes its artifacts and fills in the
//! manifest; the caller decides the exit status from the recorded verdicts.

use std::io::BufReader;

use serde::Serialize;
use serde_json::json;
use tiltwalk::analysis::{scan_report, verify_identities, zc_bracket_from, BracketSeries};
use tiltwalk::closed_form::{first_mismatch, resolve_oriented};
use tiltwalk::enumerate::{transfer_applies, tree_transfer_walks, HeightResolvedTable};
use tiltwalk::persist::{cache_key, cached_tables, read_tables, write_tables, TableCache};
use tiltwalk::sampler::{drift_report, sample_exact, sample_rosenbluth};
use tiltwalk::weight::check_good_properties;
use tiltwalk::{
    CriticalBracket, Method, ModelSpec, OrientedNumerator, TreeFormulas, WalkTables, WeightSpec,
};

use crate::config::{RunConfig, SamplerChoice};
use crate::manifest::{CacheInfo, Manifest};
use crate::output::{hash_input, write_json, Artifact, CsvArtifact};
use crate::{CliError, Command};

/// Longest random path in the weight property suite.
const PROPERTY_MAX_LEN: usize = 8;

pub fn execute(command: Command, cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    match command {
        Command::Enumerate => enumerate(cfg, m),
        Command::Analyze => analyze(cfg, m),
        Command::ClosedForm => closed_form(cfg, m),
        Command::Sample => sample(cfg, m),
        Command::Verify => verify(cfg, m),
    }
}

/// Tables from `cfg.tables`, the cache, or a fresh enumeration.
fn obtain_tables(cfg: &RunConfig, m: &mut Manifest) -> Result<WalkTables, CliError> {
    if let Some(path) = &cfg.tables {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        m.inputs.push(hash_input("tables", path, &bytes));
        return m
            .timed("read-tables", || {
                read_tables(BufReader::new(bytes.as_slice()))
            })
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
    }
    let model = cfg.model.expect("resolved");
    let weight = cfg.weight.expect("resolved");
    let n_max = cfg.n_max.expect("resolved");
    let cache = match (cfg.no_cache, &cfg.cache_dir) {
        (Some(true), _) | (_, None) => None,
        (_, Some(dir)) => Some(TableCache::new(dir)),
    };
    let (tables, status) = m.timed("enumerate", || {
        cached_tables(cache.as_ref(), model, weight, n_max, cfg.method)
    })?;
    let status = serde_json::to_value(status).expect("status serializes");
    m.cache = Some(CacheInfo {
        status: status.as_str().unwrap_or_default().to_string(),
        key: cache_key(model, weight, n_max),
        path: cache.map(|c| c.path_for(model, weight, n_max)),
    });
    Ok(tables)
}

fn tables_summary(t: &WalkTables) -> serde_json::Value {
    walks_summary(&t.walks)
}

fn walks_summary(w: &HeightResolvedTable) -> serde_json::Value {
    json!({
        "model": w.model.to_string(),
        "weight": w.weight.to_string(),
        "n_max": w.n_max,
        "method": w.method.name(),
    })
}

/// Nothing downstream needs bridges, so the walk-only transfer path will do.
fn walks_only(cfg: &RunConfig) -> bool {
    let (Some(model), Some(weight)) = (cfg.model, cfg.weight) else {
        return false;
    };
    cfg.tables.is_none()
        && cfg.tables_out.is_none()
        && (cfg.no_cache == Some(true) || cfg.cache_dir.is_none())
        && cfg.method != Some(Method::Dfs)
        && transfer_applies(model, weight)
}

fn enumerate(cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    let full = if walks_only(cfg) {
        None
    } else {
        Some(obtain_tables(cfg, m)?)
    };
    let walks_table;
    let walks = match &full {
        Some(t) => &t.walks,
        None => {
            let (model, weight) = (cfg.model.expect("resolved"), cfg.weight.expect("resolved"));
            let n_max = cfg.n_max.expect("resolved");
            walks_table = m.timed("enumerate", || tree_transfer_walks(model, weight, n_max))?;
            &walks_table
        }
    };
    let mut csv = CsvArtifact::create(
        "enumerate",
        cfg.out.as_deref(),
        &["n", "m_units", "key", "count_decimal"],
    )?;
    let mut rows = 0usize;
    for (n, height, key, count) in walks.counts.entries() {
        csv.row([
            n.to_string(),
            height.to_string(),
            key.to_string(),
            count.to_string(),
        ])?;
        rows += 1;
    }
    m.outputs.push(csv.finish()?);
    let base = walks.model.height_base();
    m.verdict(
        "mtp",
        tiltwalk::analysis::check_mtp(&walks.counts, base).passed(),
    );
    if let Some(tables) = &full {
        if let Some(path) = &cfg.tables_out {
            let mut artifact = Artifact::create("tables", Some(path))?;
            write_tables(&mut artifact, tables)?;
            m.outputs.push(artifact.finish()?);
        }
        m.verdict(
            "bridge-reversal",
            tiltwalk::analysis::check_bridge_reversal(&tables.bridges).passed(),
        );
    }
    let mut summary = walks_summary(walks);
    summary["rows"] = json!(rows);
    summary["walks_of_max_length"] = json!(walks.count(walks.n_max).to_string());
    m.summary = summary;
    Ok(())
}

fn flags_field(b: &CriticalBracket) -> String {
    b.flags
        .iter()
        .map(|f| {
            serde_json::to_value(f)
                .expect("flag serializes")
                .as_str()
                .unwrap_or_default()
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("|")
}

/// Closed forms apply to self-avoiding walks on the two trees.
fn formulas_for(t: &WalkTables) -> Option<TreeFormulas> {
    if t.walks.weight != WeightSpec::Saw {
        return None;
    }
    TreeFormulas::for_model(t.walks.model, OrientedNumerator::OneMinusZSquared).ok()
}

#[derive(Serialize)]
struct ExponentBounds {
    z: f64,
    alpha_upper: f64,
    alpha_slab: usize,
    beta_lower: Option<f64>,
    beta_slab: Option<usize>,
}

fn analyze(cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    let tables = obtain_tables(cfg, m)?;
    let lambdas = cfg.lambdas.clone().expect("resolved");
    let tol = cfg.tol.expect("resolved");
    let series = m.timed("bracket-series", || BracketSeries::new(&tables));
    let brackets: Vec<CriticalBracket> = m.timed("brackets", || {
        lambdas
            .iter()
            .map(|&l| zc_bracket_from(&tables, &series, l, tol))
            .collect()
    });

    let mut csv = CsvArtifact::create(
        "analyze",
        cfg.out.as_deref(),
        &["lambda", "z_lo", "z_hi", "n_used", "flags"],
    )?;
    for b in &brackets {
        csv.row([
            b.lambda.to_string(),
            b.z_lo.to_string(),
            b.z_hi.to_string(),
            b.evidence.n_used.to_string(),
            flags_field(b),
        ])?;
    }
    m.outputs.push(csv.finish()?);

    m.verdict(
        "bracket-recheck",
        brackets.iter().all(|b| b.recheck(&tables)),
    );
    let mut lower: Vec<f64> = lambdas.iter().copied().filter(|&l| l <= 0.5).collect();
    lower.sort_by(f64::total_cmp);
    lower.dedup();
    let scan = (!lower.is_empty()).then(|| m.timed("scan", || scan_report(&tables, &lower, tol)));
    if let Some(scan) = &scan {
        m.verdict("midpoint-monotone", scan.monotone);
        m.verdict("mirror-overlap", scan.symmetric);
    }
    let closed: Option<Vec<f64>> =
        formulas_for(&tables).map(|f| lambdas.iter().map(|&l| f.zc(l)).collect());
    if let Some(zc) = &closed {
        m.verdict(
            "closed-form-inside-bracket",
            brackets.iter().zip(zc).all(|(b, &z)| b.contains(z)),
        );
    }
    let bounds: Vec<ExponentBounds> = cfg
        .zs
        .iter()
        .flatten()
        .map(|&z| {
            let (alpha_upper, alpha_slab) = series.best_alpha(z);
            let beta = series.best_beta(z);
            ExponentBounds {
                z,
                alpha_upper,
                alpha_slab,
                beta_lower: beta.map(|b| b.0),
                beta_slab: beta.map(|b| b.1),
            }
        })
        .collect();
    if let Some(path) = &cfg.report {
        let report = json!({
            "tables": tables_summary(&tables),
            "tol": tol,
            "brackets": brackets,
            "scan": scan,
            "closed_form_zc": closed,
            "exponent_bounds": bounds,
        });
        m.outputs.push(write_json("report", path, &report)?);
    }
    let mut summary = tables_summary(&tables);
    summary["brackets"] = brackets
        .iter()
        .map(|b| json!({"lambda": b.lambda, "z_lo": b.z_lo, "z_hi": b.z_hi, "width": b.width()}))
        .collect();
    m.summary = summary;
    Ok(())
}

fn closed_form(cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    let model = cfg.model.expect("resolved");
    let numerator = cfg.numerator.unwrap_or(OrientedNumerator::OneMinusZSquared);
    let formulas = TreeFormulas::for_model(model, numerator)?;
    let lambdas = cfg.lambdas.clone().expect("resolved");
    if let Some(count) = cfg.coeffs {
        let mut csv = CsvArtifact::create(
            "closed-form-coeffs",
            cfg.out.as_deref(),
            &["lambda", "n", "coefficient"],
        )?;
        for &lambda in &lambdas {
            for (n, c) in formulas
                .coefficients_at(lambda, count - 1)
                .iter()
                .enumerate()
            {
                csv.row([lambda.to_string(), n.to_string(), c.to_string()])?;
            }
        }
        m.outputs.push(csv.finish()?);
    } else {
        let mut csv = CsvArtifact::create(
            "closed-form-values",
            cfg.out.as_deref(),
            &["lambda", "z", "z_c", "alpha", "chi"],
        )?;
        for &lambda in &lambdas {
            for &z in cfg.zs.iter().flatten() {
                let chi = formulas.chi(z, lambda).unwrap_or(f64::INFINITY);
                csv.row([
                    lambda.to_string(),
                    z.to_string(),
                    formulas.zc(lambda).to_string(),
                    formulas.alpha(z).to_string(),
                    chi.to_string(),
                ])?;
            }
        }
        m.outputs.push(csv.finish()?);
    }
    m.summary = json!({ "formulas": formulas });
    Ok(())
}

fn sample(cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    let model = cfg.model.expect("resolved");
    let weight = cfg.weight.expect("resolved");
    let (lambda, n) = (cfg.lambda.expect("resolved"), cfg.n.expect("resolved"));
    let (count, seed) = (cfg.count.expect("resolved"), cfg.seed.expect("resolved"));
    let run = m.timed("sample", || match cfg.sampler.expect("resolved") {
        SamplerChoice::Exact => sample_exact(model, weight, lambda, n, count, seed),
        SamplerChoice::Rosenbluth => sample_rosenbluth(model, weight, lambda, n, count, seed),
        SamplerChoice::Auto => match sample_exact(model, weight, lambda, n, count, seed) {
            Err(tiltwalk::Error::ExactOutOfReach { .. }) => {
                sample_rosenbluth(model, weight, lambda, n, count, seed)
            }
            other => other,
        },
    })?;
    let mut csv = CsvArtifact::create(
        "sample",
        cfg.out.as_deref(),
        &["sample_idx", "height_units", "distance", "log_weight"],
    )?;
    for s in &run.samples {
        csv.row([
            s.index.to_string(),
            s.height_units.to_string(),
            s.distance.to_string(),
            s.log_weight.to_string(),
        ])?;
    }
    m.outputs.push(csv.finish()?);
    m.summary = json!({
        "method": run.method,
        "discarded": run.discarded,
        "drift": drift_report(&run, &[0.5]),
    });
    Ok(())
}

fn verify(cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    let tables = obtain_tables(cfg, m)?;
    let (model, weight, n_max) = (tables.walks.model, tables.walks.weight, tables.walks.n_max);
    let lambdas = cfg.lambdas.clone().expect("resolved");
    let zs = cfg.zs.clone().expect("resolved");
    let identities = m.timed("identities", || verify_identities(&tables, &lambdas, &zs));
    for (name, passed) in identities.verdicts() {
        m.verdict(name, passed);
    }
    let trials = cfg.trials.expect("resolved");
    let seed = cfg.seed.expect("resolved");
    let properties = m.timed("weight-properties", || {
        check_good_properties(weight, model, trials, PROPERTY_MAX_LEN, seed)
    })?;
    m.verdict("weight-properties", properties.passed());

    let mut closed = serde_json::Value::Null;
    match (model, weight) {
        (ModelSpec::EndFixedTree { k }, WeightSpec::Saw) => {
            let coeffs = TreeFormulas::EndFixed { k }.coefficients(n_max);
            let mismatch = first_mismatch(&coeffs, &tables.walks.counts, n_max);
            m.verdict("closed-form-coefficients", mismatch.is_none());
            closed = json!({ "first_mismatch": mismatch });
        }
        (ModelSpec::OrientedTree112, WeightSpec::Saw) => {
            let verdict = resolve_oriented(&tables.walks.counts, n_max, &[0.0, 0.5]);
            m.verdict("oriented-numerator-unique", verdict.unique());
            let value = serde_json::to_value(&verdict).expect("verdict serializes");
            m.oriented_verdict = Some(value.clone());
            closed = value;
        }
        _ => {}
    }
    for v in &m.verdicts {
        println!("{}: {}", v.name, if v.passed { "pass" } else { "FAIL" });
    }
    if let Some(path) = &cfg.report {
        let report = json!({
            "tables": tables_summary(&tables),
            "identities": identities,
            "weight_properties": properties,
            "closed_form": closed,
        });
        m.outputs.push(write_json("report", path, &report)?);
    }
    m.summary = tables_summary(&tables);
    Ok(())
}
