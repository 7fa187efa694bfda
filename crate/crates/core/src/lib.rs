//! Adversarial edge-mask explanations for graph convolutional networks.
//!
//! A target GCN is trained on a node- or graph-classification benchmark.
//! A generator then learns to emit per-edge weights supported on the input
//! adjacency, guided by a discriminator, by the target model's own outputs
//! and by deletion-based ground truth. The top-K weighted edges of a mask
//! form the explanation, which is scored by re-running the frozen target.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix the
//! scalar to `f64`, which is what the pipeline and CLI use.

// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod datasets;
pub mod distill;
pub mod explainer;
pub mod error;
pub mod evaluation;
pub mod gnn;
pub mod graph;
pub mod nn;
pub mod pipeline;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = autodiff::Matrix<f64>;
pub type Tape64 = autodiff::Tape<f64>;
pub type Graph64 = graph::Graph<f64>;
pub type WeightMatrix64 = graph::WeightMatrix<f64>;
pub type Explanation64 = graph::Explanation<f64>;
pub type Dataset64 = datasets::DatasetBundle<f64>;
pub type TargetModel64 = gnn::TargetModel<f64>;
