//! Textual descriptors for models and weights.
//!
//! Descriptors are `name` or `name:key=value,key=value`, e.g.
//! `end-fixed-tree:k=4`, `product-tree-zd:k=3,d=1`, `weakly-saw:g=0.5`.
//! They round-trip through `Display`/`FromStr` and are the identity used by
//! run configs and the table cache.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which transitive graph and nonunimodular group to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelSpec {
    /// k-regular tree with the group fixing one end.
    EndFixedTree { k: u32 },
    /// 4-regular tree with the group preserving a (1,1,2)-orientation.
    OrientedTree112,
    /// End-fixed k-regular tree times the d-dimensional integer lattice.
    ProductTreeZd { k: u32, d: u32 },
}

/// Which weight function from the catalog to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Saw,
    WeaklySaw {
        g: f64,
    },
    Anisotropic {
        a: f64,
        b: f64,
    },
    AtMostTwice,
    PrimeGap,
    TreeSpan,
    /// Deliberately non-repulsive weight `2^(len^2)`, used to exercise the
    /// property checker.
    PlantedViolation,
}

fn split_params(input: &str) -> Result<(&str, BTreeMap<&str, &str>)> {
    let (name, rest) = match input.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (input.trim(), None),
    };
    let mut params = BTreeMap::new();
    if let Some(rest) = rest {
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::descriptor(input, format!("expected key=value, got `{part}`"))
            })?;
            if params.insert(key.trim(), value.trim()).is_some() {
                return Err(Error::descriptor(
                    input,
                    format!("duplicate parameter `{key}`"),
                ));
            }
        }
    }
    Ok((name, params))
}

fn take<T: FromStr>(input: &str, params: &mut BTreeMap<&str, &str>, key: &str) -> Result<T> {
    let raw = params
        .remove(key)
        .ok_or_else(|| Error::descriptor(input, format!("missing parameter `{key}`")))?;
    raw.parse()
        .map_err(|_| Error::descriptor(input, format!("cannot parse `{key}={raw}`")))
}

fn finish(input: &str, params: BTreeMap<&str, &str>) -> Result<()> {
    match params.keys().next() {
        Some(key) => Err(Error::descriptor(
            input,
            format!("unknown parameter `{key}`"),
        )),
        None => Ok(()),
    }
}

fn non_negative(input: &str, key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::descriptor(
            input,
            format!("`{key}` must be finite and >= 0"),
        ))
    }
}

impl ModelSpec {
    /// Degree of every vertex.
    pub fn degree(&self) -> usize {
        match *self {
            ModelSpec::EndFixedTree { k } => k as usize,
            ModelSpec::OrientedTree112 => 4,
            ModelSpec::ProductTreeZd { k, d } => (k + 2 * d) as usize,
        }
    }

    /// `e^tau` as an integer: the modular ratio of one height unit.
    pub fn height_base(&self) -> u32 {
        match *self {
            ModelSpec::EndFixedTree { k } | ModelSpec::ProductTreeZd { k, .. } => k - 1,
            ModelSpec::OrientedTree112 => 2,
        }
    }

    pub fn is_tree(&self) -> bool {
        !matches!(self, ModelSpec::ProductTreeZd { .. })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::EndFixedTree { k } => write!(f, "end-fixed-tree:k={k}"),
            ModelSpec::OrientedTree112 => write!(f, "oriented-tree-112"),
            ModelSpec::ProductTreeZd { k, d } => write!(f, "product-tree-zd:k={k},d={d}"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let (name, mut params) = split_params(input)?;
        let spec = match name {
            "end-fixed-tree" => ModelSpec::EndFixedTree {
                k: take(input, &mut params, "k")?,
            },
            "oriented-tree-112" => ModelSpec::OrientedTree112,
            "product-tree-zd" => ModelSpec::ProductTreeZd {
                k: take(input, &mut params, "k")?,
                d: take(input, &mut params, "d")?,
            },
            other => return Err(Error::descriptor(input, format!("unknown model `{other}`"))),
        };
        finish(input, params)?;
        match spec {
            ModelSpec::EndFixedTree { k } | ModelSpec::ProductTreeZd { k, .. }
                if !(3..=255).contains(&k) =>
            {
                Err(Error::descriptor(input, "k must be in 3..=255"))
            }
            ModelSpec::ProductTreeZd { d, .. } if !(1..=16).contains(&d) => {
                Err(Error::descriptor(input, "d must be in 1..=16"))
            }
            spec => Ok(spec),
        }
    }
}

impl WeightSpec {
    /// Indicator weights take values in {0, 1}.
    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            WeightSpec::Saw | WeightSpec::AtMostTwice | WeightSpec::PrimeGap | WeightSpec::TreeSpan
        )
    }

    /// Weights that forbid every revisit, so walks on a tree are non-backtracking paths.
    pub fn is_self_avoiding(&self) -> bool {
        matches!(self, WeightSpec::Saw | WeightSpec::Anisotropic { .. })
    }

    /// Natural log of the weight of a length-`len` path whose exact tally is `key`.
    ///
    /// The tally is the number of self-intersections for weakly SAW, the number
    /// of lattice edges for anisotropic SAW, and zero for everything else.
    pub fn ln_value(&self, key: u32, len: usize) -> f64 {
        match *self {
            WeightSpec::WeaklySaw { g } => -g * key as f64,
            WeightSpec::Anisotropic { a, b } => a * key as f64 + b * (len as f64 - key as f64),
            WeightSpec::PlantedViolation => std::f64::consts::LN_2 * (len * len) as f64,
            _ => 0.0,
        }
    }

    pub fn value(&self, key: u32, len: usize) -> f64 {
        self.ln_value(key, len).exp()
    }

    /// Largest tally a path of length `n_max` can carry.
    pub fn max_key(&self, n_max: usize) -> u32 {
        match self {
            WeightSpec::WeaklySaw { .. } => (n_max * n_max.saturating_sub(1) / 2) as u32,
            WeightSpec::Anisotropic { .. } => n_max as u32,
            _ => 0,
        }
    }

    pub fn is_keyed(&self) -> bool {
        matches!(
            self,
            WeightSpec::WeaklySaw { .. } | WeightSpec::Anisotropic { .. }
        )
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Saw => write!(f, "saw"),
            WeightSpec::WeaklySaw { g } => write!(f, "weakly-saw:g={g}"),
            WeightSpec::Anisotropic { a, b } => write!(f, "anisotropic:a={a},b={b}"),
            WeightSpec::AtMostTwice => write!(f, "at-most-twice"),
            WeightSpec::PrimeGap => write!(f, "prime-gap"),
            WeightSpec::TreeSpan => write!(f, "tree-span"),
            WeightSpec::PlantedViolation => write!(f, "planted-violation"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let (name, mut params) = split_params(input)?;
        let spec = match name {
            "saw" => WeightSpec::Saw,
            "weakly-saw" => {
                let g = take(input, &mut params, "g")?;
                WeightSpec::WeaklySaw {
                    g: non_negative(input, "g", g)?,
                }
            }
            "anisotropic" => {
                let a = take(input, &mut params, "a")?;
                let b = take(input, &mut params, "b")?;
                WeightSpec::Anisotropic {
                    a: non_negative(input, "a", a)?,
                    b: non_negative(input, "b", b)?,
                }
            }
            "at-most-twice" => WeightSpec::AtMostTwice,
            "prime-gap" => WeightSpec::PrimeGap,
            "tree-span" => WeightSpec::TreeSpan,
            "planted-violation" => WeightSpec::PlantedViolation,
            other => {
                return Err(Error::descriptor(
                    input,
                    format!("unknown weight `{other}`"),
                ))
            }
        };
        finish(input, params)?;
        Ok(spec)
    }
}

macro_rules! serde_via_str {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(ModelSpec);
serde_via_str!(WeightSpec);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog() {
        assert_eq!(
            "end-fixed-tree:k=4".parse::<ModelSpec>().unwrap(),
            ModelSpec::EndFixedTree { k: 4 }
        );
        assert_eq!(
            "product-tree-zd:d=1,k=3".parse::<ModelSpec>().unwrap(),
            ModelSpec::ProductTreeZd { k: 3, d: 1 }
        );
        assert_eq!(
            "weakly-saw:g=0.5".parse::<WeightSpec>().unwrap(),
            WeightSpec::WeaklySaw { g: 0.5 }
        );
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "end-fixed-tree",
            "end-fixed-tree:k=2",
            "end-fixed-tree:k=4,x=1",
            "cube",
            "",
        ] {
            assert!(bad.parse::<ModelSpec>().is_err(), "{bad}");
        }
        for bad in [
            "weakly-saw",
            "weakly-saw:g=-1",
            "anisotropic:a=1",
            "saw:g=1",
            "weakly-saw:g=nan",
        ] {
            assert!(bad.parse::<WeightSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for m in [
            ModelSpec::EndFixedTree { k: 3 },
            ModelSpec::OrientedTree112,
            ModelSpec::ProductTreeZd { k: 5, d: 2 },
        ] {
            assert_eq!(m.to_string().parse::<ModelSpec>().unwrap(), m);
        }
        for w in [
            WeightSpec::Saw,
            WeightSpec::WeaklySaw { g: 0.1 },
            WeightSpec::Anisotropic { a: 1.0, b: 0.0 },
            WeightSpec::TreeSpan,
        ] {
            assert_eq!(w.to_string().parse::<WeightSpec>().unwrap(), w);
        }
    }
}
