//! Functional Isolation Forest.
//!
//! An isolation forest for curve data. Every internal node of a functional
//! isolation tree draws an *atom* from a dictionary of functions, projects the
//! curves reaching the node onto it with a chosen scalar product, and splits at
//! a threshold drawn uniformly between the smallest and largest projection.
//! Anomalous curves are isolated after fewer splits, so their mean path length
//! across the forest is short and their score
//!
//! ```text
//! s(x) = 2^( -mean_path_length(x) / c(psi) )
//! ```
//!
//! is close to one. `1 - s(x)` is a depth (centrality) measure.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! benchmark harness and the command line live in the companion `fif` crate.
//!
//! ```
//! use fif_core::{
//!     synth, DictionarySpec, FIForest, ForestConfig, InnerProduct, InnerProductSpec,
//! };
//!
//! let data = synth::gen_cuevas105(7);
//! let config = ForestConfig {
//!     dictionary: DictionarySpec::gaussian_wavelet(Some(200)),
//!     inner_product: InnerProductSpec::Single(InnerProduct::Combined { alpha: 0.5 }),
//!     seed: 1,
//!     ..ForestConfig::default()
//! };
//! let forest = FIForest::fit(&data, &config).unwrap();
//! let report = forest.score_report(&data).unwrap();
//! // the five planted anomalies are the last five curves
//! let top: Vec<usize> = report.ranked_indices().into_iter().take(5).collect();
//! assert!(top.iter().all(|&i| i >= 100));
//! ```
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod curves;
pub mod dictionary;
mod engine;
mod error;
pub mod forest;
pub mod inner;
pub mod metrics;
pub mod rng;
pub mod tree;

pub use crate::curves::{finite_difference, synth, Curve, FunctionalDataset, Label, MultiCurve, TimeGrid};
pub use crate::dictionary::{Atom, AtomParams, Dictionary, DictionarySpec, MixtureComponent, Range};
pub use crate::engine::{IsolationTree, Node};
pub use crate::error::{Error, Result};
pub use crate::forest::{
    avg_bst_path, depth_map, FIForest, FitPlan, ForestConfig, ForestRepr, HeightLimit,
    ImportanceMode, ScoreEntry, ScoreReport,
};
pub use crate::inner::{
    combined_inner, deriv_inner, l2_inner, mv_inner, InnerProduct, InnerProductSpec, Prepared,
    Projector,
};
pub use crate::metrics::auc;
pub use crate::tree::{build_tree, FITree, SplitAtom, TreeParams};
