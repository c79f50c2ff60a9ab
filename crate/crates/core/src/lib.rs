//! Context-aware recommendation: contextual rating data, contextual and
//! context-free recommenders, and an evaluation harness driven by
//! configuration files.
//!
//! The crate is organised around a [`RatingTable`] of
//! `(user, item, rating, situation)` tuples. Models are trained with
//! [`engine::fit`] and scored with [`TrainedModel::predict`] or [`TrainedModel::rank`];
//! [`eval::evaluate`] runs cross-validation or a holdout split.

pub mod baselines;
pub mod camf;
pub mod config;
pub mod cptf;
pub mod cslim;
pub mod engine;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod runner;
pub mod schema;
pub mod sgd;
pub mod splitting;
pub mod synthetic;
pub mod table;

pub use config::{parse_config, ExperimentConfig};
pub use engine::{fit, fit_named, Algorithm, HyperParams, TrainedModel};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalOptions, EvalReport, Protocol, Task};
pub use ingest::{prepare_workspace, read_ratings_file, SourceFormat};
pub use schema::{ContextSchema, ContextSituation};
pub use table::{compute_stats, DatasetStats, RatingTable};
