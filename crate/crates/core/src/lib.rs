//! Spectral graph filters in Newton interpolation form, with a
//! homophily-aware penalty on the filter shape.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: CSR graphs, the normalized Laplacian, homophily, splits.
//! - [`linalg`]: sparse products and a dense symmetric eigensolver.
//! - [`csbm`]: two-class contextual stochastic block model.
//! - [`filter`]: divided differences, Newton evaluation, filter application.
//! - [`model`]: the NewtonNet predictor, its losses, gradients and trainer.
//! - [`experiments`]: frequency-importance sweep, Monte Carlo checks of the
//!   homophily/frequency relations, and a `K` scaling benchmark.
//! - [`io`] and [`cli`]: file formats and the `newtonnet` command.
//!
//! See `examples/` for one runnable program per capability.

pub mod cli;
pub mod csbm;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
pub use graph::{Graph, LabeledSplit};
