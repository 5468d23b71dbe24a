//! Isolation Forest and Extended Isolation Forest on finite-dimensional
//! vectors.
//!
//! Both grow trees with the same engine as the functional forest; a split is a
//! coordinate (axis mode) or a unit direction (extended mode) instead of an atom.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curves::{FunctionalDataset, Label};
use crate::engine::{grow, Growth, IsolationTree, SplitRule};
use crate::error::{Error, Result};
use crate::forest::{avg_bst_path, HeightLimit, ScoreReport};
use crate::rng::{self, ForestRng};

/// `n x d` matrix of finite reals, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDataset {
    d: usize,
    rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Label>>,
}

impl VectorDataset {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::EmptyDataset);
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidConfig("vectors need at least one coordinate".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(Self { d, rows, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                expected: self.rows.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }
}

impl TryFrom<&FunctionalDataset> for VectorDataset {
    type Error = Error;

    /// Treats every sampled value (all channels, concatenated) as a coordinate.
    fn try_from(data: &FunctionalDataset) -> Result<Self> {
        let rows = data.curves().iter().map(|c| c.flatten()).collect();
        let out = Self::new(rows)?;
        match data.labels() {
            Some(labels) => out.with_labels(labels.to_vec()),
            None => Ok(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IfMode {
    /// Split on a coordinate drawn uniformly.
    Axis,
    /// Split on a direction drawn uniformly on the unit sphere.
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IfConfig {
    pub n_trees: usize,
    pub psi: Option<usize>,
    pub height_limit: HeightLimit,
    pub min_leaf_size: usize,
    pub mode: IfMode,
    pub seed: u64,
}

impl Default for IfConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            psi: None,
            height_limit: HeightLimit::Auto,
            min_leaf_size: 1,
            mode: IfMode::Axis,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IfSplit {
    Axis(usize),
    /// Unit-norm direction.
    Direction(Vec<f64>),
}

impl IfSplit {
    pub fn project(&self, x: &[f64]) -> f64 {
        match self {
            IfSplit::Axis(m) => x[*m],
            IfSplit::Direction(u) => u.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }
}

struct VectorRule<'a> {
    data: &'a VectorDataset,
    mode: IfMode,
}

impl SplitRule for VectorRule<'_> {
    type Split = IfSplit;

    fn draw(&self, rng: &mut ForestRng) -> Result<IfSplit> {
        Ok(match self.mode {
            IfMode::Axis => IfSplit::Axis(rng.random_range(0..self.data.d)),
            IfMode::Extended => IfSplit::Direction(unit_direction(self.data.d, rng)),
        })
    }

    fn project(&self, split: &IfSplit, member: usize) -> f64 {
        split.project(self.data.row(member))
    }
}

/// Normalized standard Gaussian vector, redrawn in the (measure zero) event
/// of a zero norm.
fn unit_direction(d: usize, rng: &mut ForestRng) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = libm::sqrt(u.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            return u.into_iter().map(|v| v / norm).collect();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationForest {
    config: IfConfig,
    d: usize,
    psi: usize,
    c_psi: f64,
    trees: Vec<IsolationTree<IfSplit>>,
}

impl IsolationForest {
    pub fn fit(data: &VectorDataset, config: &IfConfig) -> Result<Self> {
        let plan = IfPlan::new(data, config)?;
        let trees = (0..config.n_trees)
            .map(|i| plan.build_tree(i))
            .collect::<Result<Vec<_>>>()?;
        plan.finish(trees)
    }

    pub fn config(&self) -> &IfConfig {
        &self.config
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn c_psi(&self) -> f64 {
        self.c_psi
    }

    pub fn trees(&self) -> &[IsolationTree<IfSplit>] {
        &self.trees
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::LengthMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(())
    }

    pub fn mean_path_length(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let total: f64 = self.trees.iter().map(|t| t.path_length(|s| s.project(x))).sum();
        Ok(total / self.trees.len() as f64)
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let mean = self.mean_path_length(x)?;
        Ok(if self.c_psi > 0.0 {
            libm::exp2(-mean / self.c_psi)
        } else {
            1.0
        })
    }

    pub fn scores(&self, data: &VectorDataset) -> Result<Vec<f64>> {
        data.rows().iter().map(|r| self.score(r)).collect()
    }

    pub fn score_report(&self, data: &VectorDataset) -> Result<ScoreReport> {
        let means = data
            .rows()
            .iter()
            .map(|r| self.mean_path_length(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreReport::from_mean_path_lengths(&means, self.c_psi))
    }

    /// Checks the invariants a deserialized model must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::CorruptModel("forest without trees".into()));
        }
        if self.c_psi != avg_bst_path(self.psi) {
            return Err(Error::CorruptModel("c(psi) does not match psi".into()));
        }
        for tree in &self.trees {
            let count = tree.nodes().len();
            if count == 0 {
                return Err(Error::CorruptModel("tree without nodes".into()));
            }
            for node in tree.nodes() {
                if let crate::engine::Node::Split {
                    split, left, right, ..
                } = node
                {
                    let ok = match split {
                        IfSplit::Axis(m) => *m < self.d,
                        IfSplit::Direction(u) => u.len() == self.d,
                    };
                    if !ok || *left >= count || *right >= count {
                        return Err(Error::CorruptModel("malformed split".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Shared state for growing the trees of one baseline forest, in any order.
pub struct IfPlan<'a> {
    data: &'a VectorDataset,
    config: IfConfig,
    psi: usize,
    growth: Growth,
}

impl<'a> IfPlan<'a> {
    pub fn new(data: &'a VectorDataset, config: &IfConfig) -> Result<Self> {
        if config.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        if config.min_leaf_size == 0 {
            return Err(Error::InvalidConfig("min_leaf_size must be >= 1".into()));
        }
        if config.height_limit == HeightLimit::Depth(0) {
            return Err(Error::InvalidConfig("height_limit must be >= 1".into()));
        }
        let psi = config.psi.unwrap_or(data.n().min(crate::forest::DEFAULT_MAX_PSI));
        if psi == 0 || psi > data.n() {
            return Err(Error::InvalidConfig(format!(
                "psi must satisfy 1 <= psi <= n (psi = {psi}, n = {})",
                data.n()
            )));
        }
        Ok(Self {
            data,
            config: config.clone(),
            psi,
            growth: Growth {
                height_limit: config.height_limit.resolve(psi),
                min_leaf_size: config.min_leaf_size,
            },
        })
    }

    pub fn n_trees(&self) -> usize {
        self.config.n_trees
    }

    pub fn build_tree(&self, index: usize) -> Result<IsolationTree<IfSplit>> {
        let mut rng = rng::tree_rng(self.config.seed, index);
        let mut members = index::sample(&mut rng, self.data.n(), self.psi).into_vec();
        members.sort_unstable();
        let rule = VectorRule {
            data: self.data,
            mode: self.config.mode,
        };
        grow(&rule, members, self.growth, &mut rng)
    }

    pub fn finish(self, trees: Vec<IsolationTree<IfSplit>>) -> Result<IsolationForest> {
        if trees.len() != self.config.n_trees {
            return Err(Error::InvalidConfig(format!(
                "expected {} trees, got {}",
                self.config.n_trees,
                trees.len()
            )));
        }
        Ok(IsolationForest {
            config: self.config,
            d: self.data.d(),
            psi: self.psi,
            c_psi: avg_bst_path(self.psi),
            trees,
        })
    }
}

pub fn fit_if(data: &VectorDataset, config: &IfConfig) -> Result<IsolationForest> {
    IsolationForest::fit(data, config)
}

pub fn score_if(forest: &IsolationForest, x: &[f64]) -> Result<f64> {
    forest.score(x)
}
