//! The regression strategies applied to a sample, and the tautological
//! correlation between a measurement and its own change score.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::mc::rng_from_seed;
use crate::ols::{fit_ols, OlsError, OlsFit};
use crate::stats::correlation;
use crate::strategy::{Bindings, Strategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Ols(#[from] OlsError),
    #[error("baseline and follow-up columns differ in length")]
    LengthMismatch,
    #[error("need at least {min} rows, got {n}")]
    TooFewRows { n: usize, min: usize },
}

/// A fitted model form: one of the three strategies, or the change score
/// regressed on exposure and baseline (which matches the adjusted model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalysisModel {
    Strategy(Strategy),
    ChangeScoreAdjusted,
}

impl AnalysisModel {
    pub fn key(self) -> &'static str {
        match self {
            AnalysisModel::Strategy(s) => s.key(),
            AnalysisModel::ChangeScoreAdjusted => "change-score-adjusted",
        }
    }
}

impl From<Strategy> for AnalysisModel {
    fn from(s: Strategy) -> Self {
        AnalysisModel::Strategy(s)
    }
}

impl fmt::Display for AnalysisModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for AnalysisModel {
    type Err = crate::strategy::UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "change-score-adjusted" => Ok(AnalysisModel::ChangeScoreAdjusted),
            other => other.parse::<Strategy>().map(AnalysisModel::Strategy),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub model: AnalysisModel,
    /// Exposure coefficient, outcome units per exposure unit.
    pub coefficient: f64,
    pub fit: OlsFit,
    pub bindings: Bindings,
}

/// Element-wise `followup - baseline`.
pub fn make_change_score(baseline: &[f64], followup: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    if baseline.len() != followup.len() {
        return Err(AnalysisError::LengthMismatch);
    }
    Ok(followup
        .iter()
        .zip(baseline)
        .map(|(y1, y0)| y1 - y0)
        .collect())
}

pub fn run_strategy(
    data: &Dataset,
    strategy: Strategy,
    bindings: &Bindings,
) -> Result<AnalysisResult, AnalysisError> {
    run_model(data, strategy.into(), bindings)
}

pub fn run_model(
    data: &Dataset,
    model: AnalysisModel,
    bindings: &Bindings,
) -> Result<AnalysisResult, AnalysisError> {
    let x = data.analysis_column(&bindings.exposure)?;
    let y0 = data.analysis_column(&bindings.baseline)?;
    let y1 = data.analysis_column(&bindings.followup)?;
    let fit = fit_columns(model, bindings, x, y0, y1)?;
    Ok(AnalysisResult {
        model,
        coefficient: fit.coefficients[0],
        fit,
        bindings: bindings.clone(),
    })
}

/// Fits `model` on raw slices; the exposure is always the first regressor.
pub fn fit_columns(
    model: AnalysisModel,
    bindings: &Bindings,
    x: &[f64],
    y0: &[f64],
    y1: &[f64],
) -> Result<OlsFit, AnalysisError> {
    let xb = (bindings.exposure.as_str(), x);
    let y0b = (bindings.baseline.as_str(), y0);
    Ok(match model {
        AnalysisModel::Strategy(Strategy::ChangeScore) => {
            fit_ols(&[xb], &make_change_score(y0, y1)?)?
        }
        AnalysisModel::Strategy(Strategy::FollowUpAdjusted) => fit_ols(&[xb, y0b], y1)?,
        AnalysisModel::Strategy(Strategy::FollowUpUnadjusted) => fit_ols(&[xb], y1)?,
        AnalysisModel::ChangeScoreAdjusted => fit_ols(&[xb, y0b], &make_change_score(y0, y1)?)?,
    })
}

/// Correlations of baseline and follow-up with their difference.
/// `None` where a column has zero variance.
pub fn change_score_correlations(
    baseline: &[f64],
    followup: &[f64],
) -> Result<(Option<f64>, Option<f64>), AnalysisError> {
    let delta = make_change_score(baseline, followup)?;
    Ok((correlation(baseline, &delta), correlation(followup, &delta)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OldhamCorrelations {
    /// corr(baseline, change); tends to -1/sqrt(2).
    pub baseline: f64,
    /// corr(follow-up, change); tends to +1/sqrt(2).
    pub followup: f64,
}

/// Draws two independent standard-normal measurements and correlates each with their difference.
pub fn oldham_correlation(n: usize, seed: u64) -> Result<OldhamCorrelations, AnalysisError> {
    if n < 10 {
        return Err(AnalysisError::TooFewRows { n, min: 10 });
    }
    let mut rng = rng_from_seed(seed);
    let mut y0 = Vec::with_capacity(n);
    let mut y1 = Vec::with_capacity(n);
    for _ in 0..n {
        y0.push(StandardNormal.sample(&mut rng));
        y1.push(StandardNormal.sample(&mut rng));
    }
    let (b, f) = change_score_correlations(&y0, &y1)?;
    // Continuous draws: zero variance has probability zero.
    Ok(OldhamCorrelations {
        baseline: b.unwrap_or(f64::NAN),
        followup: f.unwrap_or(f64::NAN),
    })
}
