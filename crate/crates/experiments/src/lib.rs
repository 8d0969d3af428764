//! Experiment drivers: synthetic panels, per-subsample fit tables, density
//! exports, GCLT convergence and variance divergence, plus the `heavytail`
//! command-line front end.

pub mod config;
pub mod density;
pub mod error;
pub mod fit_table;
pub mod gclt;
pub mod parallel;
pub mod reference;
pub mod run;
pub mod synth;
pub mod vardiv;

pub use config::Config;
pub use error::{Error, Result};
pub use run::{run, run_pipeline, Verb};
