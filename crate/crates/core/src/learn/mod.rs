//! Classifier over topological embeddings and its evaluation protocols.

pub mod cv;
pub mod metrics;
pub mod mlp;

pub use cv::{
    crossval_vectors, crossval_with, derive_seed, stratified_kfold, CvConfig, EvalReport,
    FoldResult, Learner, MlpLearner, Protocol, Standardizer,
};
pub use metrics::{weighted_f1, Confusion};
pub use mlp::{gradient_check, train, train_vectors, MlpConfig, MlpModel};
