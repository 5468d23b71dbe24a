//! Files, command-line front end and experiment drivers for the functional
//! isolation forest in `fif-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod parallel;

pub use crate::config::RunConfig;
pub use crate::error::{Error, Result};
pub use crate::model::{load_model, save_model, Fitted};
