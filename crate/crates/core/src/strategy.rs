//! The three regression strategies compared throughout the crate.

use core::fmt;
use core::str::FromStr;

/// A regression model for the effect of a baseline exposure on change in an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// `followup - baseline ~ exposure`
    ChangeScore,
    /// `followup ~ exposure + baseline`
    FollowUpAdjusted,
    /// `followup ~ exposure`
    FollowUpUnadjusted,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::ChangeScore,
        Strategy::FollowUpAdjusted,
        Strategy::FollowUpUnadjusted,
    ];

    /// Short machine name, also accepted by `FromStr`.
    pub fn key(self) -> &'static str {
        match self {
            Strategy::ChangeScore => "change-score",
            Strategy::FollowUpAdjusted => "adjusted",
            Strategy::FollowUpUnadjusted => "unadjusted",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Strategy::ChangeScore => "change-score",
            Strategy::FollowUpAdjusted => "follow-up adjusted for baseline",
            Strategy::FollowUpUnadjusted => "follow-up unadjusted for baseline",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy (expected change-score, adjusted or unadjusted)")]
pub struct UnknownStrategy;

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "change-score" | "change_score" | "ChangeScore" => Ok(Strategy::ChangeScore),
            "adjusted" | "FollowUpAdjusted" => Ok(Strategy::FollowUpAdjusted),
            "unadjusted" | "FollowUpUnadjusted" => Ok(Strategy::FollowUpUnadjusted),
            _ => Err(UnknownStrategy),
        }
    }
}

/// Which columns play exposure, baseline outcome and follow-up outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bindings {
    pub exposure: alloc::string::String,
    pub baseline: alloc::string::String,
    pub followup: alloc::string::String,
}

impl Bindings {
    pub fn new(exposure: &str, baseline: &str, followup: &str) -> Self {
        Bindings {
            exposure: exposure.into(),
            baseline: baseline.into(),
            followup: followup.into(),
        }
    }
}
