//! Multi-threaded fitting and scoring.
//!
//! Every tree draws from its own RNG stream, so the output does not depend
//! on the number of threads or on scheduling.

use fif_core::baseline::{IfConfig, IfPlan, IsolationForest, VectorDataset};
use fif_core::{FIForest, FitPlan, ForestConfig, FunctionalDataset};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// A rayon pool with `threads` workers, or one per core when `None`.
pub fn pool(threads: Option<usize>) -> Result<ThreadPool> {
    if threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(format!("cannot start thread pool: {e}")))
}

pub fn fit_fif(pool: &ThreadPool, data: &FunctionalDataset, config: &ForestConfig) -> Result<FIForest> {
    let plan = FitPlan::new(data, config)?;
    let trees = pool.install(|| {
        (0..plan.n_trees())
            .into_par_iter()
            .map(|i| plan.build_tree(i))
            .collect::<fif_core::Result<Vec<_>>>()
    })?;
    Ok(plan.finish(trees)?)
}

pub fn fit_if(pool: &ThreadPool, data: &VectorDataset, config: &IfConfig) -> Result<IsolationForest> {
    let plan = IfPlan::new(data, config)?;
    let trees = pool.install(|| {
        (0..plan.n_trees())
            .into_par_iter()
            .map(|i| plan.build_tree(i))
            .collect::<fif_core::Result<Vec<_>>>()
    })?;
    Ok(plan.finish(trees)?)
}

/// Mean path lengths of every curve in `data`, in row order.
pub fn fif_mean_path_lengths(
    pool: &ThreadPool,
    forest: &FIForest,
    data: &FunctionalDataset,
) -> Result<Vec<f64>> {
    let out = pool.install(|| {
        data.curves()
            .par_iter()
            .map(|x| forest.prepare(x).map(|p| forest.mean_path_length(&p)))
            .collect::<fif_core::Result<Vec<_>>>()
    })?;
    Ok(out)
}

pub fn if_mean_path_lengths(
    pool: &ThreadPool,
    forest: &IsolationForest,
    data: &VectorDataset,
) -> Result<Vec<f64>> {
    let out = pool.install(|| {
        data.rows()
            .par_iter()
            .map(|x| forest.mean_path_length(x))
            .collect::<fif_core::Result<Vec<_>>>()
    })?;
    Ok(out)
}
