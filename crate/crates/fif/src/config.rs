//! Run configuration: a JSON document whose fields all have defaults, with
//! command-line flags applied on top.

use std::fmt;
use std::fs;
use std::path::Path;

use fif_core::baseline::{IfConfig, IfMode};
use fif_core::{DictionarySpec, ForestConfig, HeightLimit, InnerProduct, InnerProductSpec};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dictionary size used for continuous families that do not set one.
pub const DEFAULT_DICT_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Fif,
    IfAxis,
    IfExtended,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fif" => Ok(Method::Fif),
            "if_axis" | "if" => Ok(Method::IfAxis),
            "if_extended" | "eif" => Ok(Method::IfExtended),
            _ => Err(Error::Config(format!(
                "unknown method {s:?} (expected fif, if_axis or if_extended)"
            ))),
        }
    }
}

/// Size given to continuous dictionaries that leave theirs unset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictSize {
    Fixed(usize),
    /// A fresh atom at every split.
    Infinite,
}

impl Default for DictSize {
    fn default() -> Self {
        DictSize::Fixed(DEFAULT_DICT_SIZE)
    }
}

impl DictSize {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "infinite" | "inf" => Ok(DictSize::Infinite),
            _ => s
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .map(DictSize::Fixed)
                .ok_or_else(|| Error::Config(format!("bad dictionary size {s:?}"))),
        }
    }
}

impl Serialize for DictSize {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DictSize::Fixed(k) => s.serialize_u64(*k as u64),
            DictSize::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for DictSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct SizeVisitor;

        impl Visitor<'_> for SizeVisitor {
            type Value = DictSize;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(r#"a positive integer or "infinite""#)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<DictSize, E> {
                if v == 0 {
                    return Err(E::invalid_value(de::Unexpected::Unsigned(v), &self));
                }
                Ok(DictSize::Fixed(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<DictSize, E> {
                u64::try_from(v)
                    .map_err(|_| E::invalid_value(de::Unexpected::Signed(v), &self))
                    .and_then(|v| self.visit_u64(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<DictSize, E> {
                match v {
                    "infinite" => Ok(DictSize::Infinite),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(SizeVisitor)
    }
}

/// Everything a command needs besides file paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub method: Method,
    pub n_trees: usize,
    /// `null` means `min(256, n)`.
    pub psi: Option<usize>,
    pub height_limit: HeightLimit,
    pub min_leaf_size: usize,
    pub dictionary: DictionarySpec,
    pub dict_size: DictSize,
    pub inner_product: InnerProductSpec,
    /// Required by every command that draws random numbers.
    pub seed: Option<u64>,
    /// `null` means all available cores.
    pub threads: Option<usize>,
    /// Benchmark: number of seeds, `seed, seed + 1, ...`.
    pub seeds: usize,
    pub normal_labels: Option<Vec<i64>>,
    pub anomaly_labels: Option<Vec<i64>>,
    /// Benchmark: keep only the first this many anomalies of each split.
    pub train_anomalies: Option<usize>,
    pub test_anomalies: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let forest = ForestConfig::default();
        Self {
            method: Method::Fif,
            n_trees: forest.n_trees,
            psi: forest.psi,
            height_limit: forest.height_limit,
            min_leaf_size: forest.min_leaf_size,
            dictionary: DictionarySpec::gaussian_wavelet(None),
            dict_size: DictSize::default(),
            inner_product: forest.inner_product,
            seed: None,
            threads: None,
            seeds: 10,
            normal_labels: None,
            anomaly_labels: None,
            train_anomalies: None,
            test_anomalies: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::Config("a seed is required (--seed or \"seed\" in the config)".into())
        })
    }

    /// The dictionary with the default size applied to unsized continuous
    /// families.
    pub fn resolved_dictionary(&self) -> DictionarySpec {
        let mut dict = self.dictionary.clone();
        if let (true, None, DictSize::Fixed(k)) = (dict.is_continuous(), dict.size(), self.dict_size) {
            dict.set_size(Some(k));
        }
        dict
    }

    pub fn forest_config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            psi: self.psi,
            height_limit: self.height_limit,
            min_leaf_size: self.min_leaf_size,
            dictionary: self.resolved_dictionary(),
            inner_product: self.inner_product.clone(),
            seed,
        }
    }

    pub fn if_config(&self, seed: u64) -> IfConfig {
        IfConfig {
            n_trees: self.n_trees,
            psi: self.psi,
            height_limit: self.height_limit,
            min_leaf_size: self.min_leaf_size,
            mode: match self.method {
                Method::IfExtended => IfMode::Extended,
                _ => IfMode::Axis,
            },
            seed,
        }
    }

    /// Short method label used in reports, e.g. `fif:cosine:l2`.
    pub fn method_label(&self) -> String {
        match self.method {
            Method::IfAxis => "if_axis".into(),
            Method::IfExtended => "if_extended".into(),
            Method::Fif => {
                let dict = serde_json::to_value(&self.dictionary)
                    .ok()
                    .and_then(|v| v.get("dict").and_then(|d| d.as_str()).map(str::to_owned))
                    .unwrap_or_else(|| "custom".into());
                let ip = match &self.inner_product {
                    InnerProductSpec::Single(ip) => ip_label(ip),
                    InnerProductSpec::PerChannel(list) => {
                        list.iter().map(ip_label).collect::<Vec<_>>().join("+")
                    }
                };
                format!("fif:{dict}:{ip}")
            }
        }
    }
}

fn ip_label(ip: &InnerProduct) -> String {
    match ip {
        InnerProduct::L2 => "l2".into(),
        InnerProduct::Deriv => "deriv".into(),
        InnerProduct::Combined { alpha } => format!("combined({alpha})"),
    }
}

/// Parses `l2`, `deriv` or `combined:<alpha>`.
pub fn parse_inner_product(s: &str) -> Result<InnerProduct> {
    let ip = match s {
        "l2" => InnerProduct::L2,
        "deriv" => InnerProduct::Deriv,
        _ => match s.strip_prefix("combined:") {
            Some(alpha) => InnerProduct::Combined {
                alpha: alpha
                    .parse()
                    .map_err(|_| Error::Config(format!("bad alpha in {s:?}")))?,
            },
            None => {
                return Err(Error::Config(format!(
                    "unknown inner product {s:?} (expected l2, deriv or combined:<alpha>)"
                )))
            }
        },
    };
    ip.validate()?;
    Ok(ip)
}

/// Parses a dictionary family name, optionally with a dyadic depth
/// (`dyadic:5`). Parameters take their defaults.
pub fn parse_dictionary(s: &str) -> Result<DictionarySpec> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let levels = arg
        .map(|a| {
            a.parse::<u32>()
                .map_err(|_| Error::Config(format!("bad dyadic depth in {s:?}")))
        })
        .transpose()?;
    let spec = match name {
        "cosine" => DictionarySpec::cosine(None),
        "mexican_hat" => DictionarySpec::mexican_hat(None),
        "gaussian_wavelet" => DictionarySpec::gaussian_wavelet(None),
        "brownian" => DictionarySpec::Brownian { size: None },
        "bbridge" => DictionarySpec::BrownianBridge { size: None },
        "dyadic" => DictionarySpec::Dyadic { levels },
        "dyadic_deriv" => DictionarySpec::DyadicDeriv { levels },
        "uniform_ind" => DictionarySpec::UniformIndicator { size: None },
        "uniform_ind_deriv" => DictionarySpec::UniformIndicatorDeriv { size: None },
        "self" => DictionarySpec::SelfData,
        "local_self" => DictionarySpec::LocalSelf,
        "sinuscosine2d" => DictionarySpec::sinus_cosine(None),
        _ => return Err(Error::Config(format!("unknown dictionary {s:?}"))),
    };
    if arg.is_some() && !matches!(name, "dyadic" | "dyadic_deriv") {
        return Err(Error::Config(format!("dictionary {name} takes no argument")));
    }
    spec.validate()?;
    Ok(spec)
}

pub fn parse_height_limit(s: &str) -> Result<HeightLimit> {
    match s {
        "auto" => Ok(HeightLimit::Auto),
        "unlimited" => Ok(HeightLimit::Unlimited),
        _ => s
            .parse()
            .ok()
            .filter(|&d| d >= 1)
            .map(HeightLimit::Depth)
            .ok_or_else(|| Error::Config(format!("bad height limit {s:?}"))),
    }
}

pub fn parse_labels(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad class label {v:?}")))
        })
        .collect()
}
