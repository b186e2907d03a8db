//! Causal role of the baseline outcome and the analysis it calls for.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::dag::{Dag, DagError, NodeKind};
use crate::strategy::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Causes the follow-up outcome but is causally unrelated to the exposure.
    CompetingExposure,
    /// Causes both the exposure and the follow-up outcome.
    Confounder,
    /// Lies on a causal path from the exposure to the follow-up outcome.
    Mediator,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::CompetingExposure => "CompetingExposure",
            Role::Confounder => "Confounder",
            Role::Mediator => "Mediator",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimand {
    TotalEffect,
    /// Only meaningful when the baseline outcome is a mediator.
    DirectEffect,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoleError {
    #[error(transparent)]
    Graph(#[from] DagError),
    #[error("`{0}` must be an observed node")]
    NotObserved(String),
    #[error("exposure, baseline and follow-up must be distinct nodes")]
    NotDistinct,
    #[error("no directed path from `{0}` to `{1}`")]
    NoCausalPath(String, String),
    #[error("edges run both ways between `{0}` and `{1}`")]
    BothDirections(String, String),
    #[error("baseline `{0}` is not an ancestor of follow-up `{1}`")]
    BaselineNotAncestor(String, String),
    #[error("unsupported pattern: {0}")]
    UnsupportedPattern(&'static str),
    #[error(
        "the direct effect is only defined when the baseline outcome is a mediator (role: {0})"
    )]
    InvalidEstimand(Role),
}

/// Classifies the role of `baseline` for the effect of `exposure` on `followup`.
///
/// Only the three single-edge patterns are recognised: `baseline -> exposure`
/// (confounder), `exposure -> baseline` (mediator), or no connection between
/// them with `baseline` an ancestor of `followup` (competing exposure).
pub fn classify_baseline_role(
    dag: &Dag,
    exposure: &str,
    baseline: &str,
    followup: &str,
) -> Result<Role, RoleError> {
    let x = dag.index_of(exposure)?;
    let b = dag.index_of(baseline)?;
    let y = dag.index_of(followup)?;
    if x == b || x == y || b == y {
        return Err(RoleError::NotDistinct);
    }
    for v in [x, b, y] {
        if dag.node(v).kind != NodeKind::Observed {
            return Err(RoleError::NotObserved(dag.name(v).to_string()));
        }
    }
    if !dag.has_directed_path(x, y) {
        return Err(RoleError::NoCausalPath(
            exposure.to_string(),
            followup.to_string(),
        ));
    }
    if dag.has_directed_path(y, x) || dag.has_directed_path(y, b) {
        return Err(RoleError::UnsupportedPattern(
            "follow-up precedes exposure or baseline",
        ));
    }

    let b_to_x = dag.has_edge(b, x);
    let x_to_b = dag.has_edge(x, b);
    match (b_to_x, x_to_b) {
        (true, true) => Err(RoleError::BothDirections(
            baseline.to_string(),
            exposure.to_string(),
        )),
        (true, false) => Ok(Role::Confounder),
        (false, true) => Ok(Role::Mediator),
        (false, false) => {
            if dag.has_directed_path(b, x) || dag.has_directed_path(x, b) {
                return Err(RoleError::UnsupportedPattern(
                    "exposure and baseline are linked only through intermediate nodes",
                ));
            }
            if !dag.has_directed_path(b, y) {
                return Err(RoleError::BaselineNotAncestor(
                    baseline.to_string(),
                    followup.to_string(),
                ));
            }
            Ok(Role::CompetingExposure)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recommendation {
    pub strategy: Strategy,
    pub warnings: Vec<String>,
}

/// Picks the analysis that targets `estimand` given the baseline outcome's role.
/// A change-score analysis is never recommended.
pub fn recommend_strategy(role: Role, estimand: Estimand) -> Result<Recommendation, RoleError> {
    let (strategy, warnings): (Strategy, &[&str]) = match (role, estimand) {
        (Role::Confounder, Estimand::TotalEffect) => (
            Strategy::FollowUpAdjusted,
            &["the baseline outcome confounds the exposure; adjusting for it is required"],
        ),
        (Role::Mediator, Estimand::TotalEffect) => (
            Strategy::FollowUpUnadjusted,
            &["adjusting for the baseline outcome would block the mediated path and leave only the direct effect"],
        ),
        (Role::Mediator, Estimand::DirectEffect) => (
            Strategy::FollowUpAdjusted,
            &["conditioning on a mediator estimates the direct effect only without mediator-outcome confounding; an unmeasured common cause of baseline and follow-up outcome biases it (collider bias)"],
        ),
        (Role::CompetingExposure, Estimand::TotalEffect) => (
            Strategy::FollowUpUnadjusted,
            &[
                "a change-score analysis is also unbiased here, and only in this pattern",
                "adjusting for the baseline outcome can reduce residual confounding by blocking paths through it",
            ],
        ),
        (role, Estimand::DirectEffect) => return Err(RoleError::InvalidEstimand(role)),
    };
    Ok(Recommendation {
        strategy,
        warnings: warnings.iter().map(|w| w.to_string()).collect(),
    })
}
