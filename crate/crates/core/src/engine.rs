//! Randomized isolation-tree growth shared by the functional forest and the
//! finite-dimensional baselines.
//!
//! A split rule draws a *split* (an atom, a coordinate or a direction) and
//! projects training members onto it. Growth and routing are agnostic to
//! what the split is.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forest::avg_bst_path;
use crate::rng::ForestRng;

/// Projections whose spread is at most this are treated as all equal.
pub const DEGENERATE_SPREAD: f64 = 1e-12;

/// Threshold redraws allowed before a node whose upper child would stay empty
/// is declared a leaf.
pub const THRESHOLD_ATTEMPTS: usize = 8;

pub(crate) trait SplitRule {
    type Split;

    fn draw(&self, rng: &mut ForestRng) -> Result<Self::Split>;

    fn project(&self, split: &Self::Split, member: usize) -> f64;
}

/// Tree node, stored in preorder. The left child of the node at `i` is at
/// `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node<S> {
    Split {
        split: S,
        threshold: f64,
        /// Training curves that reached this node.
        size: usize,
        depth: usize,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
        depth: usize,
    },
}

impl<S> Node<S> {
    pub fn size(&self) -> usize {
        match *self {
            Node::Split { size, .. } | Node::Leaf { size, .. } => size,
        }
    }

    pub fn depth(&self) -> usize {
        match *self {
            Node::Split { depth, .. } | Node::Leaf { depth, .. } => depth,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Growth {
    /// `None` grows until every node is isolated or degenerate.
    pub height_limit: Option<usize>,
    pub min_leaf_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree<S> {
    nodes: Vec<Node<S>>,
}

impl<S> IsolationTree<S> {
    pub(crate) fn from_nodes(nodes: Vec<Node<S>>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_leaf()).count()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(Node::depth).max().unwrap_or(0)
    }

    /// Index of the leaf reached by a point with the given projections.
    pub fn route(&self, mut project: impl FnMut(&S) -> f64) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    split,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if project(split) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Leaf depth plus `c(m)` for a leaf holding `m` training points.
    pub fn path_length(&self, project: impl FnMut(&S) -> f64) -> f64 {
        let leaf = &self.nodes[self.route(project)];
        leaf.depth() as f64 + avg_bst_path(leaf.size())
    }
}

pub(crate) fn grow<R: SplitRule>(
    rule: &R,
    members: Vec<usize>,
    growth: Growth,
    rng: &mut ForestRng,
) -> Result<IsolationTree<R::Split>> {
    let mut nodes = Vec::new();
    grow_node(rule, members, 0, growth, rng, &mut nodes)?;
    Ok(IsolationTree { nodes })
}

fn grow_node<R: SplitRule>(
    rule: &R,
    members: Vec<usize>,
    depth: usize,
    growth: Growth,
    rng: &mut ForestRng,
    nodes: &mut Vec<Node<R::Split>>,
) -> Result<usize> {
    let at = nodes.len();
    let size = members.len();
    nodes.push(Node::Leaf { size, depth });
    if size <= growth.min_leaf_size || growth.height_limit.is_some_and(|h| depth >= h) {
        return Ok(at);
    }

    let split = rule.draw(rng)?;
    let projections: Vec<f64> = members.iter().map(|&m| rule.project(&split, m)).collect();
    let (lo, hi) = projections
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo <= DEGENERATE_SPREAD {
        return Ok(at);
    }

    let mut threshold = None;
    for _ in 0..THRESHOLD_ATTEMPTS {
        let kappa = lo + rng.random::<f64>() * (hi - lo);
        if projections.iter().any(|&v| v > kappa) {
            threshold = Some(kappa);
            break;
        }
    }
    let Some(threshold) = threshold else {
        return Ok(at);
    };

    let (mut below, mut above) = (Vec::new(), Vec::new());
    for (&m, &v) in members.iter().zip(&projections) {
        if v <= threshold {
            below.push(m);
        } else {
            above.push(m);
        }
    }
    let left = grow_node(rule, below, depth + 1, growth, rng, nodes)?;
    let right = grow_node(rule, above, depth + 1, growth, rng, nodes)?;
    nodes[at] = Node::Split {
        split,
        threshold,
        size,
        depth,
        left,
        right,
    };
    Ok(at)
}
