//! The eight built-in scenarios relating baseline waist circumference (`WC0`)
//! to baseline and follow-up log insulin (`IC0`, `IC1`), plus user scenarios.
//!
//! | id  | role of `IC0`      | extra structure                      |
//! |-----|--------------------|--------------------------------------|
//! | 1A  | competing exposure |                                      |
//! | 1B  | competing exposure | latent `U` -> WC0, IC0, IC1          |
//! | 2A  | confounder         |                                      |
//! | 2B  | confounder         | latent `U`                           |
//! | 3A  | mediator           |                                      |
//! | 3B  | mediator           | latent `U`                           |
//! | 3A+ | mediator           | latent `U2` -> IC0, IC1              |
//! | 3B+ | mediator           | latent `U` and `U2`                  |
//!
//! Coefficients are defined by formulas on the raw-unit targets (total effect
//! 0.200, direct 0.050 and indirect 0.150 Log[mmol/L]/dm) rather than by
//! rounded standardized values.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::dag::{Dag, DagBuilder, NodeKind};
use crate::role::Role;
use crate::sem::{LinearSem, Scale, SemError};
use crate::strategy::{Bindings, Strategy};

pub const EXPOSURE: &str = "WC0";
pub const BASELINE: &str = "IC0";
pub const FOLLOWUP: &str = "IC1";

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_REPS: usize = 10_000;

pub const WC0_SCALE: Scale = Scale { mean: 9.5, sd: 1.6 };
pub const IC0_SCALE: Scale = Scale {
    mean: 4.00,
    sd: 0.74,
};
pub const IC1_SCALE: Scale = Scale {
    mean: 4.20,
    sd: 0.74,
};

/// sd(IC) / sd(WC0): converts a standardized WC0 -> IC coefficient to Log[mmol/L]/dm.
pub const SD_RATIO: f64 = 0.74 / 1.6;
/// Total effect of WC0 on IC1 in raw units.
pub const TOTAL_EFFECT: f64 = 0.200;
pub const DIRECT_EFFECT: f64 = 0.050;
pub const INDIRECT_EFFECT: f64 = 0.150;
/// Path IC0 -> IC1 in every scenario.
pub const STABILITY: f64 = 0.65;
/// Standardized direct WC0 -> IC1 path when it carries the whole effect.
pub const TOTAL_STD: f64 = TOTAL_EFFECT / SD_RATIO;
/// Standardized direct WC0 -> IC1 path in the mediator scenarios.
pub const DIRECT_STD: f64 = DIRECT_EFFECT / SD_RATIO;
/// WC0 -> IC0 in the mediator scenarios, so that it times [`STABILITY`] carries the indirect effect.
pub const MEDIATOR_PATH: f64 = INDIRECT_EFFECT / SD_RATIO / STABILITY;
/// IC0 -> WC0 in the confounder scenarios.
pub const CONFOUNDER_PATH: f64 = 0.5;
/// Correlation induced between WC0 and IC0 by `U`, and between IC0 and IC1 by `U2`.
pub const LATENT_CORRELATION: f64 = 0.08;
/// Unadjusted coefficient targeted for the confounded scenarios 1B and 3B.
pub const CONFOUNDED_UNADJUSTED: f64 = 0.228;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    S1A,
    S1B,
    S2A,
    S2B,
    S3A,
    S3B,
    S3APlus,
    S3BPlus,
}

impl ScenarioId {
    /// Column order of the results table.
    pub const ALL: [ScenarioId; 8] = [
        ScenarioId::S1A,
        ScenarioId::S1B,
        ScenarioId::S2A,
        ScenarioId::S2B,
        ScenarioId::S3A,
        ScenarioId::S3B,
        ScenarioId::S3APlus,
        ScenarioId::S3BPlus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::S1A => "1A",
            ScenarioId::S1B => "1B",
            ScenarioId::S2A => "2A",
            ScenarioId::S2B => "2B",
            ScenarioId::S3A => "3A",
            ScenarioId::S3B => "3B",
            ScenarioId::S3APlus => "3A+",
            ScenarioId::S3BPlus => "3B+",
        }
    }

    pub fn role(self) -> Role {
        match self {
            ScenarioId::S1A | ScenarioId::S1B => Role::CompetingExposure,
            ScenarioId::S2A | ScenarioId::S2B => Role::Confounder,
            _ => Role::Mediator,
        }
    }

    /// Has the latent confounder `U` of all three variables.
    pub fn confounded(self) -> bool {
        matches!(
            self,
            ScenarioId::S1B | ScenarioId::S2B | ScenarioId::S3B | ScenarioId::S3BPlus
        )
    }

    /// Has the latent mediator-outcome confounder `U2`.
    pub fn mediator_outcome_confounded(self) -> bool {
        matches!(self, ScenarioId::S3APlus | ScenarioId::S3BPlus)
    }

    /// The scenario without `U2`; identity for the others.
    pub fn parent(self) -> ScenarioId {
        match self {
            ScenarioId::S3APlus => ScenarioId::S3A,
            ScenarioId::S3BPlus => ScenarioId::S3B,
            other => other,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioId::S1A => "IC0 and WC0 unrelated; WC0 -> IC1 directly",
            ScenarioId::S1B => "as 1A with an unmeasured confounder U of WC0, IC0 and IC1",
            ScenarioId::S2A => "IC0 causes WC0 and IC1",
            ScenarioId::S2B => "as 2A with an unmeasured confounder U",
            ScenarioId::S3A => "WC0 affects IC1 directly and through IC0",
            ScenarioId::S3B => "as 3A with an unmeasured confounder U",
            ScenarioId::S3APlus => "as 3A with mediator-outcome confounding by U2",
            ScenarioId::S3BPlus => "as 3B with mediator-outcome confounding by U2",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scenario `{0}` (expected one of 1A, 1B, 2A, 2B, 3A, 3B, 3A+, 3B+)")]
pub struct UnknownScenario(pub String);

impl FromStr for ScenarioId {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let canonical = s.trim().to_ascii_uppercase().replace("PLUS", "+");
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == canonical)
            .ok_or_else(|| UnknownScenario(s.to_string()))
    }
}

/// Coefficients of the latent confounders' paths (standardized).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentPaths {
    pub u_exposure: f64,
    pub u_baseline: f64,
    pub u_followup: f64,
    pub u2_baseline: f64,
    pub u2_followup: f64,
}

impl LatentPaths {
    /// `U -> WC0` and `U -> IC0` are `sqrt(0.08)`, so they induce a correlation
    /// of 0.08 between exposure and baseline. `U -> IC1` is solved so the
    /// follow-up unadjusted coefficient of 1B (and 3B) is 0.228:
    /// `sqrt(0.08) * u_followup = 0.228 / SD_RATIO - TOTAL_STD - STABILITY * 0.08`.
    /// `U2 -> IC0` and `U2 -> IC1` are both `sqrt(0.08)`.
    pub fn calibrated() -> Self {
        let root = libm::sqrt(LATENT_CORRELATION);
        let residual =
            CONFOUNDED_UNADJUSTED / SD_RATIO - TOTAL_STD - STABILITY * LATENT_CORRELATION;
        LatentPaths {
            u_exposure: root,
            u_baseline: root,
            u_followup: residual / root,
            u2_baseline: root,
            u2_followup: root,
        }
    }

    /// Every latent path `sqrt(0.08)`. Inadmissible for 2B: the follow-up
    /// outcome's parents would explain more than all of its variance.
    pub fn symmetric() -> Self {
        let root = libm::sqrt(LATENT_CORRELATION);
        LatentPaths {
            u_exposure: root,
            u_baseline: root,
            u_followup: root,
            u2_baseline: root,
            u2_followup: root,
        }
    }
}

impl Default for LatentPaths {
    fn default() -> Self {
        Self::calibrated()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error("binding `{0}` names no node in the model")]
    UnknownBinding(String),
    #[error("binding `{0}` must name an observed node")]
    UnobservedBinding(String),
    #[error("bindings must name three distinct nodes")]
    RepeatedBinding,
}

/// A model plus the roles its variables play and the replication protocol defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub label: String,
    pub id: Option<ScenarioId>,
    pub sem: LinearSem,
    pub bindings: Bindings,
    pub n: usize,
    pub reps: usize,
}

impl ScenarioSpec {
    /// A user scenario; checks that the bindings name distinct observed nodes.
    pub fn new(label: &str, sem: LinearSem, bindings: Bindings) -> Result<Self, ScenarioError> {
        let names = [&bindings.exposure, &bindings.baseline, &bindings.followup];
        for name in names {
            let v = sem
                .dag()
                .index_of(name)
                .map_err(|_| ScenarioError::UnknownBinding(name.clone()))?;
            if sem.dag().node(v).kind != NodeKind::Observed {
                return Err(ScenarioError::UnobservedBinding(name.clone()));
            }
        }
        if names[0] == names[1] || names[0] == names[2] || names[1] == names[2] {
            return Err(ScenarioError::RepeatedBinding);
        }
        Ok(ScenarioSpec {
            label: label.to_string(),
            id: None,
            sem,
            bindings,
            n: DEFAULT_N,
            reps: DEFAULT_REPS,
        })
    }

    /// Analytic value each strategy estimates in this scenario.
    pub fn oracle(&self, strategy: Strategy) -> Result<f64, SemError> {
        self.sem.expected_coefficient(strategy, &self.bindings)
    }
}

fn scenario_dag(id: ScenarioId, paths: &LatentPaths) -> Dag {
    let mut b = DagBuilder::new()
        .node(EXPOSURE, NodeKind::Observed)
        .node(BASELINE, NodeKind::Observed)
        .node(FOLLOWUP, NodeKind::Observed);
    b.push_edge(BASELINE, FOLLOWUP, Some(STABILITY));
    match id.role() {
        Role::CompetingExposure => b.push_edge(EXPOSURE, FOLLOWUP, Some(TOTAL_STD)),
        Role::Confounder => {
            b.push_edge(BASELINE, EXPOSURE, Some(CONFOUNDER_PATH));
            b.push_edge(EXPOSURE, FOLLOWUP, Some(TOTAL_STD));
        }
        Role::Mediator => {
            b.push_edge(EXPOSURE, BASELINE, Some(MEDIATOR_PATH));
            b.push_edge(EXPOSURE, FOLLOWUP, Some(DIRECT_STD));
        }
    }
    if id.confounded() {
        b = b.node("U", NodeKind::Latent);
        b.push_edge("U", EXPOSURE, Some(paths.u_exposure));
        b.push_edge("U", BASELINE, Some(paths.u_baseline));
        b.push_edge("U", FOLLOWUP, Some(paths.u_followup));
    }
    // "+" variants: the parent scenario's graph plus U2.
    if id.mediator_outcome_confounded() {
        b = b.node("U2", NodeKind::Latent);
        b.push_edge("U2", BASELINE, Some(paths.u2_baseline));
        b.push_edge("U2", FOLLOWUP, Some(paths.u2_followup));
    }
    b.build().expect("built-in graphs are acyclic")
}

pub fn builtin_scales() -> BTreeMap<String, Scale> {
    let mut scales = BTreeMap::new();
    scales.insert(EXPOSURE.to_string(), WC0_SCALE);
    scales.insert(BASELINE.to_string(), IC0_SCALE);
    scales.insert(FOLLOWUP.to_string(), IC1_SCALE);
    scales
}

/// Built-in scenario with custom latent-path coefficients.
pub fn builtin_with(id: ScenarioId, paths: &LatentPaths) -> Result<ScenarioSpec, SemError> {
    let sem = LinearSem::new(scenario_dag(id, paths), &builtin_scales())?;
    Ok(ScenarioSpec {
        label: id.as_str().to_string(),
        id: Some(id),
        sem,
        bindings: Bindings::new(EXPOSURE, BASELINE, FOLLOWUP),
        n: DEFAULT_N,
        reps: DEFAULT_REPS,
    })
}

/// Built-in scenario with the default (calibrated) latent paths.
pub fn builtin(id: ScenarioId) -> ScenarioSpec {
    builtin_with(id, &LatentPaths::default()).expect("default built-ins are admissible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.as_str().parse::<ScenarioId>(), Ok(id));
        }
        assert_eq!("3bplus".parse::<ScenarioId>(), Ok(ScenarioId::S3BPlus));
        assert!("4A".parse::<ScenarioId>().is_err());
    }

    #[test]
    fn shapes() {
        let s = builtin(ScenarioId::S1A);
        assert_eq!(s.sem.dag().len(), 3);
        assert_eq!(s.sem.dag().edges().len(), 2);
        let s = builtin(ScenarioId::S3APlus);
        assert_eq!(s.sem.dag().node(3).name, "U2");
        assert_eq!(s.sem.dag().node(3).kind, NodeKind::Latent);
        let s = builtin(ScenarioId::S2B);
        assert!(s.sem.dag().index_of("U").is_ok());
    }

    #[test]
    fn symmetric_latent_paths_break_2b() {
        let r = builtin_with(ScenarioId::S2B, &LatentPaths::symmetric());
        assert!(
            matches!(r, Err(SemError::NonPositiveResidual { ref node, .. }) if node == FOLLOWUP)
        );
        // The others remain admissible.
        for id in ScenarioId::ALL
            .into_iter()
            .filter(|&i| i != ScenarioId::S2B)
        {
            assert!(builtin_with(id, &LatentPaths::symmetric()).is_ok(), "{id}");
        }
    }

    #[test]
    fn user_scenario_bindings() {
        let base = builtin(ScenarioId::S3APlus).sem;
        assert!(matches!(
            ScenarioSpec::new("x", base.clone(), Bindings::new("WC0", "U2", "IC1")),
            Err(ScenarioError::UnobservedBinding(_))
        ));
        assert!(matches!(
            ScenarioSpec::new("x", base.clone(), Bindings::new("WC0", "Q", "IC1")),
            Err(ScenarioError::UnknownBinding(_))
        ));
        assert!(matches!(
            ScenarioSpec::new("x", base, Bindings::new("WC0", "IC1", "IC1")),
            Err(ScenarioError::RepeatedBinding)
        ));
    }
}
