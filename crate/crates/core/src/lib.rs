pub mod bridge;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod formats;
pub mod ingest;
pub mod model;
pub mod optimizer;
pub mod rng;
pub mod similarity;
pub mod synthetic;

pub use error::{Error, Result};
