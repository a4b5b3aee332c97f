#![allow(clippy::needless_range_loop)]

//! Anomaly-event detection over multi-source, time-evolving graph data.
//!
//! The crate is organized as a small set of composable stages:
//!
//! * [`numerics`] — dense matrices, a symmetric eigensolver, standardization
//!   and PCA preprocessing.
//! * [`spectral`] — Gaussian similarity graphs, Laplacians, spectral
//!   embeddings, k-means, and two-way cut objectives (NCut/RCut/MinMaxCut).
//! * [`fusion`] — multi-view feature spaces, soft cluster memberships, and
//!   cross-view inconsistency scores.
//! * [`gnn`] — fixed-point message passing over graph snapshots and an
//!   unsupervised contrastive snapshot embedder.
//! * [`rrcf`] — robust random cut forests over shingled embedding streams
//!   with CoDisp anomaly scores.
//! * [`pipeline`] — synthetic data generation, end-to-end detection runs,
//!   and evaluation metrics (accuracy, Macro-F1, ROC/AUC).
//!
//! Every stage is deterministic given its seed; all randomness flows from
//! explicit [`rng::Rng`] streams so reruns produce byte-identical artifacts.

pub mod error;
pub mod fmt;
pub mod fusion;
pub mod gnn;
pub mod numerics;
pub mod pipeline;
pub mod rng;
pub mod rrcf;
pub mod spectral;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, DenseVector};
