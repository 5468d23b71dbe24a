//! Functional isolation trees.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::curves::{FunctionalDataset, MultiCurve};
use crate::dictionary::{Atom, Dictionary, Pool, SamplingContext};
use crate::engine::{grow, Growth, IsolationTree, Node, SplitRule};
use crate::error::{Error, Result};
use crate::inner::{InnerProductSpec, Prepared, Projector};
use crate::rng::ForestRng;

/// Split variable of an internal node: the atom, and its position in the
/// forest dictionary when that dictionary is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAtom {
    pub index: Option<usize>,
    pub atom: Arc<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Maximum leaf depth; `None` for unlimited.
    pub height_limit: Option<usize>,
    /// Nodes holding at most this many curves are leaves.
    pub min_leaf_size: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            height_limit: None,
            min_leaf_size: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FITree {
    tree: IsolationTree<SplitAtom>,
    psi: usize,
    params: TreeParams,
    ip: InnerProductSpec,
}

struct FunctionalRule<'a> {
    prepared: &'a [Prepared],
    dictionary: &'a Dictionary,
    ctx: SamplingContext<'a>,
    ip: &'a InnerProductSpec,
}

impl SplitRule for FunctionalRule<'_> {
    type Split = SplitAtom;

    fn draw(&self, rng: &mut ForestRng) -> Result<SplitAtom> {
        let (index, atom) = self.dictionary.draw(&self.ctx, rng)?;
        Ok(SplitAtom { index, atom })
    }

    fn project(&self, split: &SplitAtom, member: usize) -> f64 {
        self.ctx
            .projector
            .inner(&self.prepared[member], split.atom.prepared(), self.ip)
    }
}

/// Inputs shared by every tree of a forest.
pub(crate) struct TreeInputs<'a> {
    pub projector: &'a Projector,
    pub curves: &'a [MultiCurve],
    pub prepared: &'a [Prepared],
    pub channels: usize,
    pub dictionary: &'a Dictionary,
    pub ip: &'a InnerProductSpec,
}

pub(crate) fn grow_tree(
    inputs: &TreeInputs<'_>,
    mut members: Vec<usize>,
    params: TreeParams,
    rng: &mut ForestRng,
) -> Result<FITree> {
    if members.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.min_leaf_size == 0 {
        return Err(Error::InvalidConfig("min_leaf_size must be >= 1".into()));
    }
    if params.height_limit == Some(0) {
        return Err(Error::InvalidConfig("height limit must be >= 1".into()));
    }
    members.sort_unstable();
    let psi = members.len();
    let rule = FunctionalRule {
        prepared: inputs.prepared,
        dictionary: inputs.dictionary,
        ctx: SamplingContext {
            projector: inputs.projector,
            channels: inputs.channels,
            pool: Pool {
                curves: inputs.curves,
                members: Some(&members),
            },
        },
        ip: inputs.ip,
    };
    let growth = Growth {
        height_limit: params.height_limit,
        min_leaf_size: params.min_leaf_size,
    };
    let tree = grow(&rule, members.clone(), growth, rng)?;
    Ok(FITree {
        tree,
        psi,
        params,
        ip: inputs.ip.clone(),
    })
}

/// Grows one tree on the curves of `data` listed in `members`.
///
/// Self-data atoms are drawn from those members.
pub fn build_tree(
    data: &FunctionalDataset,
    members: &[usize],
    dictionary: &Dictionary,
    ip: &InnerProductSpec,
    params: TreeParams,
    rng: &mut ForestRng,
) -> Result<FITree> {
    ip.validate(data.channels())?;
    if let Some(&bad) = members.iter().find(|&&m| m >= data.n()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "member {bad} out of range for {} curves",
            data.n()
        )));
    }
    let projector = Projector::new(data.grid().clone());
    let prepared = data
        .curves()
        .iter()
        .map(|c| projector.prepare(c))
        .collect::<Result<Vec<_>>>()?;
    let inputs = TreeInputs {
        projector: &projector,
        curves: data.curves(),
        prepared: &prepared,
        channels: data.channels(),
        dictionary,
        ip,
    };
    grow_tree(&inputs, members.to_vec(), params, rng)
}

impl FITree {
    pub(crate) fn from_parts(
        tree: IsolationTree<SplitAtom>,
        psi: usize,
        params: TreeParams,
        ip: InnerProductSpec,
    ) -> Self {
        Self { tree, psi, params, ip }
    }

    pub fn structure(&self) -> &IsolationTree<SplitAtom> {
        &self.tree
    }

    pub fn nodes(&self) -> &[Node<SplitAtom>] {
        self.tree.nodes()
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn inner_product(&self) -> &InnerProductSpec {
        &self.ip
    }

    pub fn internal_count(&self) -> usize {
        self.tree.internal_count()
    }

    pub fn leaf_count(&self) -> usize {
        self.tree.leaf_count()
    }

    /// Projection of a prepared curve onto a node's atom.
    pub fn project(&self, projector: &Projector, x: &Prepared, split: &SplitAtom) -> f64 {
        projector.inner(x, split.atom.prepared(), &self.ip)
    }

    /// Index of the leaf `x` falls into.
    pub fn leaf_of(&self, projector: &Projector, x: &Prepared) -> usize {
        self.tree.route(|s| self.project(projector, x, s))
    }

    /// Depth of the leaf reached by `x` plus `c(m)` for a leaf of size `m`.
    pub fn path_length(&self, projector: &Projector, x: &Prepared) -> f64 {
        self.tree.path_length(|s| self.project(projector, x, s))
    }

    /// [`Self::path_length`] for a raw curve on `projector`'s grid.
    pub fn path_length_of(&self, projector: &Projector, x: &MultiCurve) -> Result<f64> {
        let prepared = projector.prepare(x).map_err(|_| Error::GridMismatch)?;
        Ok(self.path_length(projector, &prepared))
    }
}
