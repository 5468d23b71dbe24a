//! Model files: JSON documents holding a fitted forest, the configuration it
//! was fitted with and the fixed algorithmic choices behind its scores.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fif_core::baseline::{IfMode, IsolationForest, VectorDataset};
use fif_core::forest::{decision_flags, ForestRepr};
use fif_core::{FIForest, FunctionalDataset, ScoreReport};
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::config::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::parallel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "forest", rename_all = "snake_case")]
pub enum Model {
    Fif(Box<ForestRepr>),
    IfAxis(Box<IsolationForest>),
    IfExtended(Box<IsolationForest>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub decisions: BTreeMap<String, String>,
    #[serde(flatten)]
    pub model: Model,
}

/// A model ready to score.
#[derive(Debug, Clone)]
pub enum Fitted {
    Fif(FIForest),
    If(IsolationForest),
}

impl Fitted {
    /// Fits the method selected by `config` on `data`, whose labels are
    /// ignored.
    pub fn fit(pool: &ThreadPool, config: &RunConfig, seed: u64, data: &FunctionalDataset) -> Result<Self> {
        Ok(match config.method {
            Method::Fif => Fitted::Fif(parallel::fit_fif(pool, data, &config.forest_config(seed))?),
            Method::IfAxis | Method::IfExtended => {
                let rows = VectorDataset::try_from(data)?;
                Fitted::If(parallel::fit_if(pool, &rows, &config.if_config(seed))?)
            }
        })
    }

    pub fn c_psi(&self) -> f64 {
        match self {
            Fitted::Fif(f) => f.c_psi(),
            Fitted::If(f) => f.c_psi(),
        }
    }

    pub fn n_trees(&self) -> usize {
        match self {
            Fitted::Fif(f) => f.trees().len(),
            Fitted::If(f) => f.trees().len(),
        }
    }

    pub fn mean_path_lengths(&self, pool: &ThreadPool, data: &FunctionalDataset) -> Result<Vec<f64>> {
        match self {
            Fitted::Fif(f) => parallel::fif_mean_path_lengths(pool, f, data),
            Fitted::If(f) => {
                let rows = VectorDataset::try_from(data)?;
                parallel::if_mean_path_lengths(pool, f, &rows)
            }
        }
    }

    pub fn score_report(&self, pool: &ThreadPool, data: &FunctionalDataset) -> Result<ScoreReport> {
        let means = self.mean_path_lengths(pool, data)?;
        Ok(ScoreReport::from_mean_path_lengths(&means, self.c_psi()))
    }

    pub fn to_file(&self) -> ModelFile {
        let model = match self {
            Fitted::Fif(f) => Model::Fif(Box::new(f.to_repr())),
            Fitted::If(f) => match f.config().mode {
                IfMode::Axis => Model::IfAxis(Box::new(f.clone())),
                IfMode::Extended => Model::IfExtended(Box::new(f.clone())),
            },
        };
        ModelFile {
            format_version: FORMAT_VERSION,
            decisions: decision_flags()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            model,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(match file.model {
            Model::Fif(repr) => Fitted::Fif(FIForest::from_repr(*repr)?),
            Model::IfAxis(f) | Model::IfExtended(f) => {
                f.validate()?;
                Fitted::If(*f)
            }
        })
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &Fitted) -> Result<()> {
    let path = path.as_ref();
    let mut json = serde_json::to_string_pretty(&model.to_file())
        .map_err(|e| Error::Internal(format!("cannot serialize model: {e}")))?;
    json.push('\n');
    fs::write(path, json).map_err(|source| Error::Write {
        path: path.into(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Fitted> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.into(),
        source,
    })?;
    if text.trim().is_empty() {
        return Err(Error::EmptyInput { path: path.into() });
    }
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::format(path, format!("invalid model file: {e}")))?;
    Fitted::from_file(file)
}
