//! Dataset quality scoring for tabular classification.
//!
//! The score `q_a` combines how well a suite of classifiers does on a dataset
//! (normalized by the number of classes) with how much their accuracy moves
//! when a small fraction of errors is injected into the training data.
//! `q_a` lies in `[0, 1]`; lower is better.

pub mod cli;
pub mod corruption;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod metric;
pub mod models;
pub mod seed;
pub mod synthetic;

pub use dataset::{Dataset, TrainTestSplit};
pub use error::{Error, Result};
