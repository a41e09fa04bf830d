//! Average-case reductions from planted dense subgraph problems to
//! general submatrix detection, with the computable pairs, rejection
//! kernels, graph cloning, detectors and exact oracles they rely on.

pub mod cli;
pub mod clone;
pub mod config;
pub mod detect;
pub mod dump;
pub mod error;
pub mod kernel;
pub mod oracle;
pub mod pairs;
pub mod reduction;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
