//! Topological embeddings of attributed graphs.
//!
//! A graph's node features are turned into a complete weighted graph of
//! pairwise Pearson correlations (its functional connectivity). The
//! connectivity is decomposed in closed form into birth values (the maximum
//! spanning forest) and death values (every other edge), and each value set is
//! sampled through its empirical quantile function at a fixed resolution. The
//! resulting vectors have the same length for every graph and their scaled
//! p-norm distance converges to the 1-D p-Wasserstein distance between the
//! underlying value sets.
//!
//! | Module | Role |
//! |--------|------|
//! | [`graphstore`] | TUDataset loader, validation, canonical writer |
//! | [`featsynth`] | node feature matrices (attributes, one-hot labels, degree profile) |
//! | [`fconn`] | Pearson functional connectivity |
//! | [`pgh`] | birth/death decomposition, Betti curves, brute-force oracle |
//! | [`embed`] | quantile sampling and `m`/`n` selection |
//! | [`wasser`] | exact 1-D Wasserstein distances and barycenters |
//! | [`learn`] | MLP classifier, stratified CV, metrics |
//! | [`pipeline`] | dataset-level wiring with a bounded worker pool |

pub mod embed;
pub mod error;
pub mod fconn;
pub mod featsynth;
pub mod graphstore;
pub mod learn;
pub mod pgh;
pub mod pipeline;
pub mod wasser;

pub use error::{Error, ErrorKind, Result};
