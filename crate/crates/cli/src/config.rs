//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tiltwalk::{Method, ModelSpec, OrientedNumerator, WeightSpec};

use crate::CliError;

/// Which sampler `sample` should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerChoice {
    /// Exact when the length is within reach, Rosenbluth otherwise.
    Auto,
    /// Exact sampling; fails past the exact limits.
    Exact,
    /// Sequential importance sampling with weights.
    Rosenbluth,
}

/// Every knob of a run. Fields left unset fall back to per-command defaults,
/// which [`RunConfig::resolve`] writes back so the manifest echo is explicit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    pub weight: Option<WeightSpec>,
    pub n_max: Option<usize>,
    /// Enumeration method; unset picks the transfer path when it applies.
    pub method: Option<Method>,
    pub lambdas: Option<Vec<f64>>,
    pub zs: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub coeffs: Option<usize>,
    pub numerator: Option<OrientedNumerator>,
    pub lambda: Option<f64>,
    pub n: Option<usize>,
    pub count: Option<usize>,
    pub sampler: Option<SamplerChoice>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
    pub tables: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub no_cache: Option<bool>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub tables_out: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:ident, $over:ident, $($field:ident),*) => {
        RunConfig { $($field: $over.$field.or($base.$field)),* }
    };
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_COUNT: usize = 1000;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Usage(format!("{} is not UTF-8", path.display())))?;
        Ok((RunConfig::from_toml(text)?, bytes))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        let base = self;
        overlay_fields!(
            base, over, model, weight, n_max, method, lambdas, zs, tol, coeffs, numerator, lambda,
            n, count, sampler, seed, trials, threads, tables, cache_dir, no_cache, out, report,
            tables_out, manifest
        )
    }

    /// Check every field and fill in the defaults `command` relies on.
    pub fn resolve(mut self, command: crate::Command) -> Result<RunConfig, CliError> {
        use crate::Command::*;
        self.validate()?;
        let needs_tables = matches!(command, Enumerate | Analyze | Verify);
        if needs_tables && self.tables.is_none() || matches!(command, Sample | ClosedForm) {
            self.require_model(command)?;
        }
        if matches!(command, Enumerate | Sample) || needs_tables && self.tables.is_none() {
            self.weight.get_or_insert(WeightSpec::Saw);
        }
        if needs_tables && self.tables.is_none() {
            let weakly = matches!(self.weight, Some(WeightSpec::WeaklySaw { .. }));
            self.n_max.get_or_insert(if weakly { 12 } else { 14 });
            if self.no_cache != Some(true) && self.cache_dir.is_none() {
                self.cache_dir =
                    std::env::var_os(tiltwalk::persist::CACHE_DIR_ENV).map(PathBuf::from);
            }
        }
        match command {
            Enumerate => {}
            Analyze => {
                self.lambdas
                    .get_or_insert_with(|| vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
                self.zs.get_or_insert_with(Vec::new);
                self.tol.get_or_insert(DEFAULT_TOL);
            }
            Verify => {
                self.lambdas.get_or_insert_with(|| vec![0.0, 0.25, 0.5]);
                self.zs.get_or_insert_with(|| vec![0.1, 0.2, 0.3]);
                self.trials.get_or_insert(DEFAULT_TRIALS);
                self.seed.get_or_insert(0);
            }
            ClosedForm => {
                let model = self.model.expect("checked above");
                if !model.is_tree() {
                    return Err(CliError::Usage(format!("no closed forms for {model}")));
                }
                match (self.coeffs, &self.zs) {
                    (None, None) => {
                        return Err(CliError::Usage(
                            "closed-form needs --coeffs N or --z".into(),
                        ))
                    }
                    (Some(_), Some(_)) => {
                        return Err(CliError::Usage(
                            "closed-form takes --coeffs or --z, not both".into(),
                        ))
                    }
                    _ => {}
                }
                self.lambdas.get_or_insert_with(|| vec![0.0]);
                if model == ModelSpec::OrientedTree112 {
                    self.numerator
                        .get_or_insert(OrientedNumerator::OneMinusZSquared);
                }
            }
            Sample => {
                if self.n.is_none() {
                    return Err(CliError::Usage("sample needs --n".into()));
                }
                self.lambda.get_or_insert(0.0);
                self.count.get_or_insert(DEFAULT_COUNT);
                self.sampler.get_or_insert(SamplerChoice::Auto);
                self.seed.get_or_insert(0);
            }
        }
        Ok(self)
    }

    fn require_model(&self, command: crate::Command) -> Result<(), CliError> {
        match self.model {
            Some(_) => Ok(()),
            None => Err(CliError::Usage(format!(
                "{} needs a model (--model or `model` in the config)",
                command.name()
            ))),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        for &l in self.lambdas.iter().flatten().chain(&self.lambda) {
            if !l.is_finite() {
                return usage(format!("tilt {l} is not finite"));
            }
        }
        for &z in self.zs.iter().flatten() {
            if !(z > 0.0 && z < 1.0) {
                return usage(format!("z = {z} must lie in (0, 1)"));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return usage(format!("tol = {tol} must lie in (0, 1)"));
            }
        }
        for (name, v) in [
            ("count", self.count),
            ("trials", self.trials),
            ("threads", self.threads),
            ("coeffs", self.coeffs),
        ] {
            if v == Some(0) {
                return usage(format!("{name} must be positive"));
            }
        }
        if self.lambdas.as_ref().is_some_and(Vec::is_empty) {
            return usage("the tilt grid is empty".into());
        }
        if let (Some(model), Some(numerator)) = (self.model, self.numerator) {
            if model != ModelSpec::OrientedTree112 {
                return usage(format!(
                    "numerator {} only applies to the oriented tree",
                    numerator.name()
                ));
            }
        }
        if self.no_cache == Some(true) && self.cache_dir.is_some() {
            return usage("both a cache directory and no_cache given".into());
        }
        if self.tables.is_some()
            && (self.model.is_some() || self.weight.is_some() || self.n_max.is_some())
        {
            return usage("tables come from the table file; drop model, weight and n_max".into());
        }
        Ok(())
    }
}

/// Parse a grid: comma-separated values, each either a number or an
/// inclusive range `start:stop:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        };
        match fields.as_slice() {
            [v] => out.push(num(v)?),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if ![start, stop, step].iter().all(|v| v.is_finite()) || step <= 0.0 || stop < start
                {
                    return Err(format!("range `{part}` needs start <= stop and step > 0"));
                }
                let steps = ((stop - start) / step + 1e-9).floor() as usize;
                // round away accumulated binary noise such as 0.30000000000000004
                out.extend((0..=steps).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12));
            }
            _ => return Err(format!("`{part}` is neither a number nor start:stop:step")),
        }
    }
    if out.is_empty() {
        return Err("empty grid".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Command;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0,0.25, 0.5").unwrap(), vec![0.0, 0.25, 0.5]);
        assert_eq!(
            parse_grid("0:0.5:0.1").unwrap(),
            vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
        );
        assert_eq!(parse_grid("1,0:0.2:0.1").unwrap(), vec![1.0, 0.0, 0.1, 0.2]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("modle = \"end-fixed-tree:k=3\"").is_err());
        let c =
            RunConfig::from_toml("model = \"end-fixed-tree:k=3\"\nlambdas = [0.0, 0.5]").unwrap();
        assert_eq!(c.model, Some(ModelSpec::EndFixedTree { k: 3 }));
    }

    #[test]
    fn empty_config_is_a_usage_error() {
        let c = RunConfig::from_toml("").unwrap();
        for cmd in [
            Command::Enumerate,
            Command::Verify,
            Command::Sample,
            Command::ClosedForm,
            Command::Analyze,
        ] {
            assert!(
                matches!(c.clone().resolve(cmd), Err(CliError::Usage(_))),
                "{cmd:?}"
            );
        }
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_toml("model = \"end-fixed-tree:k=3\"\nn_max = 5").unwrap();
        let flags = RunConfig {
            n_max: Some(7),
            ..RunConfig::default()
        };
        let c = file.overlay(flags).resolve(Command::Enumerate).unwrap();
        assert_eq!(c.n_max, Some(7));
        assert_eq!(c.weight, Some(WeightSpec::Saw));
    }

    #[test]
    fn weakly_default_length() {
        let c = RunConfig::from_toml(
            "model = \"end-fixed-tree:k=3\"\nweight = \"weakly-saw:g=0.5\"\nno_cache = true",
        )
        .unwrap()
        .resolve(Command::Verify)
        .unwrap();
        assert_eq!(c.n_max, Some(12));
    }

    #[test]
    fn bad_values() {
        let bad = ["zs = [1.5]", "tol = 0.0", "count = 0", "lambdas = []"];
        for text in bad {
            let c =
                RunConfig::from_toml(&format!("model = \"end-fixed-tree:k=3\"\n{text}")).unwrap();
            assert!(c.resolve(Command::Analyze).is_err(), "{text}");
        }
    }
}
