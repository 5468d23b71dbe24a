//! The forest: fitting, anomaly score, depth and direction importance.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use libm::{exp2, log};
use rand::seq::index;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::curves::{FunctionalDataset, MultiCurve, TimeGrid};
use crate::dictionary::{Atom, AtomParams, Dictionary, DictionarySpec, Pool, SamplingContext};
use crate::engine::{IsolationTree, Node};
use crate::error::{Error, Result};
use crate::inner::{InnerProductSpec, Prepared, Projector};
use crate::rng;
use crate::tree::{grow_tree, FITree, SplitAtom, TreeInputs, TreeParams};

const EULER_GAMMA: f64 = 0.5772156649;

/// Largest default subsample size.
pub const DEFAULT_MAX_PSI: usize = 256;

/// Average path length of an unsuccessful search in a binary search tree
/// built on `m` keys: `0` for `m <= 1`, `1` for `m = 2`, otherwise
/// `2 H(m-1) - 2 (m-1) / m` with `H(i) ~ ln(i) + gamma`.
pub fn avg_bst_path(m: usize) -> f64 {
    match m {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let m = m as f64;
            2.0 * (log(m - 1.0) + EULER_GAMMA) - 2.0 * (m - 1.0) / m
        }
    }
}

/// `2^(-mean / c)`; a zero normalizer (subsample of one) gives 1.
fn score_from_mean(mean: f64, c_psi: f64) -> f64 {
    if c_psi > 0.0 {
        exp2(-mean / c_psi)
    } else {
        1.0
    }
}

/// Height limit of every tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeightLimit {
    /// `ceil(log2(psi))`, at least 1.
    #[default]
    Auto,
    Unlimited,
    Depth(usize),
}

impl HeightLimit {
    pub fn resolve(self, psi: usize) -> Option<usize> {
        match self {
            HeightLimit::Auto => Some(ceil_log2(psi).max(1)),
            HeightLimit::Unlimited => None,
            HeightLimit::Depth(d) => Some(d),
        }
    }
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl Serialize for HeightLimit {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            HeightLimit::Auto => s.serialize_str("auto"),
            HeightLimit::Unlimited => s.serialize_str("unlimited"),
            HeightLimit::Depth(d) => s.serialize_u64(*d as u64),
        }
    }
}

impl<'de> Deserialize<'de> for HeightLimit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        struct HeightVisitor;

        impl Visitor<'_> for HeightVisitor {
            type Value = HeightLimit;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(r#""auto", "unlimited" or a positive depth"#)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> core::result::Result<HeightLimit, E> {
                match v {
                    "auto" => Ok(HeightLimit::Auto),
                    "unlimited" => Ok(HeightLimit::Unlimited),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> core::result::Result<HeightLimit, E> {
                Ok(HeightLimit::Depth(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> core::result::Result<HeightLimit, E> {
                usize::try_from(v)
                    .map(HeightLimit::Depth)
                    .map_err(|_| E::invalid_value(de::Unexpected::Signed(v), &self))
            }
        }

        d.deserialize_any(HeightVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Subsample size per tree; `None` means `min(256, n)`.
    pub psi: Option<usize>,
    pub height_limit: HeightLimit,
    pub min_leaf_size: usize,
    pub dictionary: DictionarySpec,
    pub inner_product: InnerProductSpec,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            psi: None,
            height_limit: HeightLimit::Auto,
            min_leaf_size: 1,
            dictionary: DictionarySpec::gaussian_wavelet(Some(1000)),
            inner_product: InnerProductSpec::default(),
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn resolve_psi(&self, n: usize) -> usize {
        self.psi.unwrap_or(n.min(DEFAULT_MAX_PSI))
    }

    fn tree_params(&self, psi: usize) -> TreeParams {
        TreeParams {
            height_limit: self.height_limit.resolve(psi),
            min_leaf_size: self.min_leaf_size,
        }
    }

    pub fn validate(&self, n: usize, channels: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        let psi = self.resolve_psi(n);
        if psi == 0 || psi > n {
            return Err(Error::InvalidConfig(format!(
                "psi must satisfy 1 <= psi <= n (psi = {psi}, n = {n})"
            )));
        }
        if self.height_limit == HeightLimit::Depth(0) {
            return Err(Error::InvalidConfig("height_limit must be >= 1".into()));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::InvalidConfig("min_leaf_size must be >= 1".into()));
        }
        self.inner_product.validate(channels)?;
        self.dictionary.validate()
    }
}

/// Shared state for growing the trees of one forest.
///
/// Trees are independent given the plan, so callers may grow them in any
/// order or in parallel and pass them to [`FitPlan::finish`] in index order.
pub struct FitPlan<'a> {
    data: &'a FunctionalDataset,
    config: ForestConfig,
    psi: usize,
    params: TreeParams,
    projector: Projector,
    prepared: Vec<Prepared>,
    dictionary: Dictionary,
}

impl<'a> FitPlan<'a> {
    pub fn new(data: &'a FunctionalDataset, config: &ForestConfig) -> Result<Self> {
        config.validate(data.n(), data.channels())?;
        let projector = Projector::new(data.grid().clone());
        let ctx = SamplingContext {
            projector: &projector,
            channels: data.channels(),
            pool: Pool::all(data.curves()),
        };
        let dictionary = Dictionary::from_spec(&config.dictionary, &ctx, &mut rng::dictionary_rng(config.seed))?;
        Self::assemble(data, config, projector, dictionary)
    }

    /// Uses `dictionary` in place of the one described by the configuration.
    pub fn with_dictionary(
        data: &'a FunctionalDataset,
        config: &ForestConfig,
        dictionary: Dictionary,
    ) -> Result<Self> {
        config.validate(data.n(), data.channels())?;
        if let Some(atoms) = dictionary.atoms() {
            if let Some(a) = atoms.iter().find(|a| a.n_channels() != data.channels()) {
                return Err(Error::ChannelMismatch {
                    expected: data.channels(),
                    found: a.n_channels(),
                });
            }
        }
        let projector = Projector::new(data.grid().clone());
        Self::assemble(data, config, projector, dictionary)
    }

    fn assemble(
        data: &'a FunctionalDataset,
        config: &ForestConfig,
        projector: Projector,
        dictionary: Dictionary,
    ) -> Result<Self> {
        let prepared = data
            .curves()
            .iter()
            .map(|c| projector.prepare(c))
            .collect::<Result<Vec<_>>>()?;
        let psi = config.resolve_psi(data.n());
        Ok(Self {
            data,
            config: config.clone(),
            psi,
            params: config.tree_params(psi),
            projector,
            prepared,
            dictionary,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.config.n_trees
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    /// Subsample of tree `index`: `psi` distinct curves drawn without
    /// replacement from the tree's own RNG stream, then the tree itself.
    pub fn build_tree(&self, index: usize) -> Result<FITree> {
        let mut rng = rng::tree_rng(self.config.seed, index);
        let members = index::sample(&mut rng, self.data.n(), self.psi).into_vec();
        let inputs = TreeInputs {
            projector: &self.projector,
            curves: self.data.curves(),
            prepared: &self.prepared,
            channels: self.data.channels(),
            dictionary: &self.dictionary,
            ip: &self.config.inner_product,
        };
        grow_tree(&inputs, members, self.params, &mut rng)
    }

    pub fn finish(self, trees: Vec<FITree>) -> Result<FIForest> {
        if trees.len() != self.config.n_trees {
            return Err(Error::InvalidConfig(format!(
                "expected {} trees, got {}",
                self.config.n_trees,
                trees.len()
            )));
        }
        let dictionary = self.dictionary.atoms().map(<[Arc<Atom>]>::to_vec);
        let needs_pool = self.config.dictionary.uses_pool()
            || dictionary.as_ref().is_some_and(|atoms| {
                atoms.iter().any(|a| a.params().iter().any(refers_to_pool))
            });
        Ok(FIForest {
            config: self.config,
            channels: self.data.channels(),
            psi: self.psi,
            params: self.params,
            c_psi: avg_bst_path(self.psi),
            dictionary,
            pool: needs_pool.then(|| self.data.curves().to_vec()),
            trees,
            projector: self.projector,
        })
    }
}

fn refers_to_pool(p: &AtomParams) -> bool {
    matches!(p, AtomParams::SelfData { .. } | AtomParams::LocalSelf { .. })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMode {
    /// +1 per isolating split.
    Naive,
    /// +(node size / psi) per isolating split.
    Adaptive,
}

/// A fitted functional isolation forest.
#[derive(Debug, Clone)]
pub struct FIForest {
    config: ForestConfig,
    channels: usize,
    psi: usize,
    params: TreeParams,
    c_psi: f64,
    dictionary: Option<Vec<Arc<Atom>>>,
    pool: Option<Vec<MultiCurve>>,
    trees: Vec<FITree>,
    projector: Projector,
}

impl FIForest {
    pub fn fit(data: &FunctionalDataset, config: &ForestConfig) -> Result<Self> {
        let plan = FitPlan::new(data, config)?;
        let trees = (0..plan.n_trees())
            .map(|i| plan.build_tree(i))
            .collect::<Result<Vec<_>>>()?;
        plan.finish(trees)
    }

    pub fn fit_with_dictionary(
        data: &FunctionalDataset,
        config: &ForestConfig,
        dictionary: Dictionary,
    ) -> Result<Self> {
        let plan = FitPlan::with_dictionary(data, config, dictionary)?;
        let trees = (0..plan.n_trees())
            .map(|i| plan.build_tree(i))
            .collect::<Result<Vec<_>>>()?;
        plan.finish(trees)
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn grid(&self) -> &TimeGrid {
        self.projector.grid()
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn height_limit(&self) -> Option<usize> {
        self.params.height_limit
    }

    pub fn c_psi(&self) -> f64 {
        self.c_psi
    }

    pub fn trees(&self) -> &[FITree] {
        &self.trees
    }

    /// Atoms of the finite dictionary, if the forest used one.
    pub fn dictionary(&self) -> Option<&[Arc<Atom>]> {
        self.dictionary.as_deref()
    }

    /// Training curves kept for self-data atoms.
    pub fn pool(&self) -> Option<&[MultiCurve]> {
        self.pool.as_deref()
    }

    /// Checks grid and channel count, then caches the curve for projection.
    pub fn prepare(&self, x: &MultiCurve) -> Result<Prepared> {
        if x.n_channels() != self.channels {
            return Err(Error::ChannelMismatch {
                expected: self.channels,
                found: x.n_channels(),
            });
        }
        self.projector.prepare(x).map_err(|_| Error::GridMismatch)
    }

    fn check_dataset(&self, data: &FunctionalDataset) -> Result<()> {
        if data.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        if data.channels() != self.channels {
            return Err(Error::ChannelMismatch {
                expected: self.channels,
                found: data.channels(),
            });
        }
        Ok(())
    }

    pub fn path_lengths(&self, x: &Prepared) -> Vec<f64> {
        self.trees
            .iter()
            .map(|t| t.path_length(&self.projector, x))
            .collect()
    }

    pub fn mean_path_length(&self, x: &Prepared) -> f64 {
        let total: f64 = self
            .trees
            .iter()
            .map(|t| t.path_length(&self.projector, x))
            .sum();
        total / self.trees.len() as f64
    }

    pub fn score_prepared(&self, x: &Prepared) -> f64 {
        score_from_mean(self.mean_path_length(x), self.c_psi)
    }

    /// `2^(-mean path length / c(psi))`, in `(0, 1]`.
    pub fn score(&self, x: &MultiCurve) -> Result<f64> {
        Ok(self.score_prepared(&self.prepare(x)?))
    }

    /// `1 - score`: high for central curves.
    pub fn depth(&self, x: &MultiCurve) -> Result<f64> {
        Ok(1.0 - self.score(x)?)
    }

    pub fn scores(&self, data: &FunctionalDataset) -> Result<Vec<f64>> {
        self.check_dataset(data)?;
        data.curves().iter().map(|c| self.score(c)).collect()
    }

    pub fn score_report(&self, data: &FunctionalDataset) -> Result<ScoreReport> {
        self.check_dataset(data)?;
        let means = data
            .curves()
            .iter()
            .map(|c| Ok(self.mean_path_length(&self.prepare(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreReport::from_mean_path_lengths(&means, self.c_psi))
    }

    /// Per-atom credit for splits that isolate a single training curve from
    /// a node holding at least three.
    ///
    /// Indexed by dictionary position for finite dictionaries, and by
    /// training-curve index for self-data dictionaries.
    pub fn direction_importance(&self, mode: ImportanceMode) -> Result<Vec<f64>> {
        let len = match (&self.dictionary, &self.config.dictionary) {
            (Some(atoms), _) => atoms.len(),
            (None, DictionarySpec::SelfData) => self.pool.as_ref().map_or(0, Vec::len),
            _ => return Err(Error::InfiniteDictionary),
        };
        let mut importance = alloc::vec![0.0; len];
        for tree in &self.trees {
            let nodes = tree.nodes();
            for node in nodes {
                let Node::Split {
                    split,
                    size,
                    left,
                    right,
                    ..
                } = node
                else {
                    continue;
                };
                if *size < 3 {
                    continue;
                }
                let singletons = [left, right]
                    .iter()
                    .filter(|&&&child| nodes[child].size() == 1)
                    .count();
                if singletons == 0 {
                    continue;
                }
                let key = match (split.index, split.atom.params().first()) {
                    (Some(i), _) => i,
                    (None, Some(AtomParams::SelfData { index })) => *index,
                    _ => return Err(Error::InfiniteDictionary),
                };
                let credit = match mode {
                    ImportanceMode::Naive => 1.0,
                    ImportanceMode::Adaptive => *size as f64 / tree.psi() as f64,
                };
                importance[key] += credit * singletons as f64;
            }
        }
        Ok(importance)
    }

    pub fn to_repr(&self) -> ForestRepr {
        let trees = self
            .trees
            .iter()
            .map(|t| TreeRepr {
                psi: t.psi(),
                nodes: t
                    .nodes()
                    .iter()
                    .map(|n| match n {
                        Node::Leaf { size, depth } => Node::Leaf {
                            size: *size,
                            depth: *depth,
                        },
                        Node::Split {
                            split,
                            threshold,
                            size,
                            depth,
                            left,
                            right,
                        } => Node::Split {
                            split: SplitRepr {
                                index: split.index,
                                atom: split.index.is_none().then(|| split.atom.params().to_vec()),
                            },
                            threshold: *threshold,
                            size: *size,
                            depth: *depth,
                            left: *left,
                            right: *right,
                        },
                    })
                    .collect(),
            })
            .collect();
        ForestRepr {
            config: self.config.clone(),
            grid: self.grid().clone(),
            channels: self.channels,
            psi: self.psi,
            height_limit: self.params.height_limit,
            min_leaf_size: self.params.min_leaf_size,
            c_psi: self.c_psi,
            dictionary: self
                .dictionary
                .as_ref()
                .map(|atoms| atoms.iter().map(|a| a.params().to_vec()).collect()),
            pool: self.pool.clone(),
            trees,
        }
    }

    /// Rebuilds a forest from its plain-data form, re-evaluating every atom.
    pub fn from_repr(repr: ForestRepr) -> Result<Self> {
        let projector = Projector::new(repr.grid);
        let pool = repr.pool;
        let pool_slice: &[MultiCurve] = pool.as_deref().unwrap_or(&[]);
        if let Some(c) = pool_slice.iter().find(|c| c.n_channels() != repr.channels) {
            return Err(Error::ChannelMismatch {
                expected: repr.channels,
                found: c.n_channels(),
            });
        }
        let evaluate = |params: Vec<AtomParams>| -> Result<Arc<Atom>> {
            if params.len() != repr.channels {
                return Err(Error::ChannelMismatch {
                    expected: repr.channels,
                    found: params.len(),
                });
            }
            Ok(Arc::new(Atom::evaluate(params, &projector, pool_slice)?))
        };
        let dictionary = repr
            .dictionary
            .map(|atoms| atoms.into_iter().map(evaluate).collect::<Result<Vec<_>>>())
            .transpose()?;
        if repr.c_psi != avg_bst_path(repr.psi) {
            return Err(Error::CorruptModel(format!(
                "stored c(psi) {} does not match psi {}",
                repr.c_psi, repr.psi
            )));
        }
        let params = TreeParams {
            height_limit: repr.height_limit,
            min_leaf_size: repr.min_leaf_size,
        };
        let mut trees = Vec::with_capacity(repr.trees.len());
        for tree in repr.trees {
            let count = tree.nodes.len();
            let nodes = tree
                .nodes
                .into_iter()
                .map(|n| {
                    Ok(match n {
                        Node::Leaf { size, depth } => Node::Leaf { size, depth },
                        Node::Split {
                            split,
                            threshold,
                            size,
                            depth,
                            left,
                            right,
                        } => {
                            if left >= count || right >= count {
                                return Err(Error::CorruptModel("child index out of range".into()));
                            }
                            let atom = match (split.index, split.atom) {
                                (Some(i), _) => dictionary
                                    .as_ref()
                                    .and_then(|d| d.get(i))
                                    .cloned()
                                    .ok_or_else(|| {
                                        Error::CorruptModel(format!("missing dictionary atom {i}"))
                                    })?,
                                (None, Some(params)) => evaluate(params)?,
                                (None, None) => {
                                    return Err(Error::CorruptModel("split without atom".into()))
                                }
                            };
                            Node::Split {
                                split: SplitAtom {
                                    index: split.index,
                                    atom,
                                },
                                threshold,
                                size,
                                depth,
                                left,
                                right,
                            }
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if nodes.is_empty() {
                return Err(Error::CorruptModel("tree without nodes".into()));
            }
            trees.push(FITree::from_parts(
                IsolationTree::from_nodes(nodes),
                tree.psi,
                params,
                repr.config.inner_product.clone(),
            ));
        }
        if trees.is_empty() {
            return Err(Error::CorruptModel("forest without trees".into()));
        }
        Ok(Self {
            config: repr.config,
            channels: repr.channels,
            psi: repr.psi,
            params,
            c_psi: repr.c_psi,
            dictionary,
            pool,
            trees,
            projector,
        })
    }
}

/// Depth of `x` with respect to each forest (one forest per class).
pub fn depth_map(forests: &[FIForest], x: &MultiCurve) -> Result<Vec<f64>> {
    let Some(first) = forests.first() else {
        return Err(Error::InvalidConfig("depth map needs at least one forest".into()));
    };
    if forests.iter().any(|f| f.grid() != first.grid()) {
        return Err(Error::GridMismatch);
    }
    forests.iter().map(|f| f.depth(x)).collect()
}

/// Plain-data form of a split atom: its dictionary index, or its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<Vec<AtomParams>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRepr {
    pub psi: usize,
    /// Preorder.
    pub nodes: Vec<Node<SplitRepr>>,
}

/// Everything needed to rebuild a forest and reproduce its scores exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestRepr {
    pub config: ForestConfig,
    pub grid: TimeGrid,
    pub channels: usize,
    pub psi: usize,
    pub height_limit: Option<usize>,
    pub min_leaf_size: usize,
    pub c_psi: f64,
    pub dictionary: Option<Vec<Vec<AtomParams>>>,
    pub pool: Option<Vec<MultiCurve>>,
    pub trees: Vec<TreeRepr>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreEntry {
    pub score: f64,
    pub depth: f64,
    pub mean_path_length: f64,
    /// 1 for the highest score; ties go to the lower index.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    entries: Vec<ScoreEntry>,
}

impl ScoreReport {
    pub fn from_mean_path_lengths(means: &[f64], c_psi: f64) -> Self {
        let scores: Vec<f64> = means.iter().map(|&m| score_from_mean(m, c_psi)).collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut rank = alloc::vec![0; scores.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r + 1;
        }
        let entries = scores
            .iter()
            .zip(means)
            .zip(rank)
            .map(|((&score, &mean_path_length), rank)| ScoreEntry {
                score,
                depth: 1.0 - score,
                mean_path_length,
                rank,
            })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[ScoreEntry] {
        &self.entries
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    /// Observation indices from most to least anomalous.
    pub fn ranked_indices(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by_key(|&i| self.entries[i].rank);
        order
    }
}

/// Human-readable summary of fixed algorithmic choices, stored in model files.
pub fn decision_flags() -> Vec<(&'static str, String)> {
    alloc::vec![
        ("c_psi", "2*(ln(m-1)+0.5772156649)-2*(m-1)/m; c(2)=1; c(<=1)=0".into()),
        ("split_value", "uniform in [min,max] of node projections".into()),
        (
            "empty_child",
            format!(
                "redraw split value up to {} times, then leaf",
                crate::engine::THRESHOLD_ATTEMPTS
            ),
        ),
        (
            "degenerate_split",
            format!("leaf when max-min of projections <= {:e}", crate::engine::DEGENERATE_SPREAD),
        ),
        ("subsampling", "without replacement, one ChaCha8 stream per tree".into()),
        ("quadrature", "trapezoidal rule on the sample grid".into()),
        ("derivative", "forward differences, last value repeated".into()),
        (
            "combined_norm_floor",
            format!("normalized terms with |f||g| < {:e} contribute 0", crate::inner::NORM_FLOOR),
        ),
        (
            "importance",
            "credit the isolating split's atom once per singleton child of a node of size >= 3"
                .into(),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::synth;
    use crate::inner::InnerProduct;
    use alloc::vec;

    #[test]
    fn c_values() {
        assert_eq!(avg_bst_path(0), 0.0);
        assert_eq!(avg_bst_path(1), 0.0);
        assert_eq!(avg_bst_path(2), 1.0);
        // frozen from an independent evaluation of 2(ln 255 + gamma) - 2*255/256
        assert!((avg_bst_path(256) - 10.244770920116851).abs() < 1e-12);
        assert!((avg_bst_path(16) - 4.6955317320044205).abs() < 1e-12);
    }

    #[test]
    fn score_endpoints() {
        let c = avg_bst_path(256);
        assert_eq!(score_from_mean(c, c), 0.5);
        assert_eq!(score_from_mean(0.0, c), 1.0);
        assert!((score_from_mean(3.0, c) - 0.8162979184402687).abs() < 1e-12);
    }

    #[test]
    fn height_limit_defaults() {
        assert_eq!(HeightLimit::Auto.resolve(256), Some(8));
        assert_eq!(HeightLimit::Auto.resolve(105), Some(7));
        assert_eq!(HeightLimit::Auto.resolve(64), Some(6));
        assert_eq!(HeightLimit::Auto.resolve(1), Some(1));
        assert_eq!(HeightLimit::Unlimited.resolve(9), None);
    }

    #[test]
    fn height_limit_json() {
        let h: HeightLimit = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(h, HeightLimit::Auto);
        let h: HeightLimit = serde_json::from_str("12").unwrap();
        assert_eq!(h, HeightLimit::Depth(12));
        assert!(serde_json::from_str::<HeightLimit>("\"tall\"").is_err());
        assert_eq!(serde_json::to_string(&HeightLimit::Unlimited).unwrap(), "\"unlimited\"");
    }

    fn small_config() -> ForestConfig {
        ForestConfig {
            n_trees: 20,
            dictionary: DictionarySpec::cosine(Some(50)),
            seed: 4,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn psi_larger_than_n_rejected() {
        let data = synth::gen_brownian_dataset(10, 20, 1).unwrap();
        let config = ForestConfig {
            psi: Some(11),
            ..small_config()
        };
        assert!(matches!(FIForest::fit(&data, &config), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn full_subsample_sees_all_data() {
        let data = synth::gen_brownian_dataset(10, 20, 1).unwrap();
        let config = ForestConfig {
            psi: Some(10),
            height_limit: HeightLimit::Unlimited,
            dictionary: DictionarySpec::Brownian { size: None },
            ..small_config()
        };
        let forest = FIForest::fit(&data, &config).unwrap();
        for tree in forest.trees() {
            assert_eq!(tree.nodes()[0].size(), 10);
        }
    }

    #[test]
    fn default_tree_count() {
        let data = synth::gen_brownian_dataset(30, 20, 1).unwrap();
        let config = ForestConfig {
            dictionary: DictionarySpec::cosine(Some(20)),
            ..ForestConfig::default()
        };
        let forest = FIForest::fit(&data, &config).unwrap();
        assert_eq!(forest.trees().len(), 100);
        assert_eq!(forest.psi(), 30);
    }

    #[test]
    fn fit_is_deterministic() {
        let data = synth::gen_brownian_dataset(40, 30, 2).unwrap();
        let a = FIForest::fit(&data, &small_config()).unwrap();
        let b = FIForest::fit(&data, &small_config()).unwrap();
        assert_eq!(a.to_repr(), b.to_repr());
        assert_eq!(a.scores(&data).unwrap(), b.scores(&data).unwrap());
    }

    #[test]
    fn repr_round_trip_preserves_scores() {
        let data = synth::gen_brownian_dataset(40, 30, 2).unwrap();
        for dictionary in [
            DictionarySpec::cosine(Some(30)),
            DictionarySpec::Brownian { size: None },
            DictionarySpec::SelfData,
            DictionarySpec::LocalSelf,
            DictionarySpec::UniformIndicatorDeriv { size: None },
        ] {
            let config = ForestConfig {
                dictionary,
                inner_product: InnerProduct::Combined { alpha: 0.3 }.into(),
                ..small_config()
            };
            let forest = FIForest::fit(&data, &config).unwrap();
            let json = serde_json::to_string(&forest.to_repr()).unwrap();
            let back: ForestRepr = serde_json::from_str(&json).unwrap();
            let restored = FIForest::from_repr(back).unwrap();
            assert_eq!(forest.scores(&data).unwrap(), restored.scores(&data).unwrap());
        }
    }

    #[test]
    fn score_bounds_and_depth() {
        let data = synth::gen_brownian_dataset(50, 30, 5).unwrap();
        let forest = FIForest::fit(&data, &small_config()).unwrap();
        let report = forest.score_report(&data).unwrap();
        let mut ranks: Vec<usize> = report.entries().iter().map(|e| e.rank).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, (1..=50).collect::<Vec<_>>());
        for (e, c) in report.entries().iter().zip(data.curves()) {
            assert!(e.score > 0.0 && e.score <= 1.0);
            assert_eq!(e.depth + e.score, 1.0);
            assert_eq!(forest.depth(c).unwrap(), e.depth);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let data = synth::gen_brownian_dataset(20, 30, 5).unwrap();
        let other = synth::gen_brownian_dataset(20, 31, 5).unwrap();
        let forest = FIForest::fit(&data, &small_config()).unwrap();
        assert_eq!(forest.score(other.curve(0)), Err(Error::GridMismatch));
        assert_eq!(forest.scores(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn importance_requires_finite_dictionary() {
        let data = synth::gen_brownian_dataset(20, 30, 5).unwrap();
        let config = ForestConfig {
            dictionary: DictionarySpec::cosine(None),
            ..small_config()
        };
        let forest = FIForest::fit(&data, &config).unwrap();
        assert_eq!(
            forest.direction_importance(ImportanceMode::Naive),
            Err(Error::InfiniteDictionary)
        );
    }

    #[test]
    fn depth_map_dimensions() {
        let a = synth::gen_brownian_dataset(20, 30, 5).unwrap();
        let b = synth::gen_brownian_dataset(20, 30, 6).unwrap();
        let fa = FIForest::fit(&a, &small_config()).unwrap();
        let fb = FIForest::fit(&b, &small_config()).unwrap();
        let phi = depth_map(&[fa.clone(), fb], a.curve(0)).unwrap();
        assert_eq!(phi.len(), 2);
        assert!(phi.iter().all(|d| (0.0..=1.0).contains(d)));
        assert_eq!(depth_map(core::slice::from_ref(&fa), a.curve(0)).unwrap(), vec![fa.depth(a.curve(0)).unwrap()]);
    }
}
