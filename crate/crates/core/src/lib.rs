//! Causal diagrams, linear Gaussian structural equation models and the
//! Monte Carlo machinery for comparing change-score, baseline-adjusted and
//! unadjusted regressions of a follow-up outcome on a baseline exposure.
//!
//! The crate is `no_std` (with `alloc`); file formats, parallel drivers and
//! the command line live in the `changescore` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod dag;
pub mod dataset;
pub mod dsl;
pub mod mc;
pub mod ols;
pub mod role;
pub mod scenario;
pub mod sem;
pub mod stats;
pub mod strategy;

pub use analysis::{
    make_change_score, oldham_correlation, run_model, run_strategy, AnalysisError, AnalysisModel,
    AnalysisResult, OldhamCorrelations,
};
pub use dag::{Dag, DagBuilder, DagError, Edge, Node, NodeKind};
pub use dataset::{Column, ColumnKind, Dataset, DatasetError, Provenance};
pub use dsl::{parse_dag, print_dag, ParseError};
pub use mc::{run_replications, sample_dataset, McError, ReplicationSummary};
pub use ols::{fit_ols, OlsError, OlsFit};
pub use role::{
    classify_baseline_role, recommend_strategy, Estimand, Recommendation, Role, RoleError,
};
pub use scenario::{builtin, builtin_with, LatentPaths, ScenarioError, ScenarioId, ScenarioSpec};
pub use sem::{CovMatrix, LinearSem, Scale, SemError};
pub use stats::{summarize, Summary};
pub use strategy::{Bindings, Strategy};
