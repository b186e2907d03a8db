//! Sampling from a [`LinearSem`] and the replication protocol.
//!
//! Replicate `i` (1-based) draws its dataset from `replicate_seed(master, i)`,
//! so results never depend on the order or thread on which replicates run.
//! Because the seed does not depend on the strategy, the strategies of one
//! scenario are compared on common random numbers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::analysis::{fit_columns, AnalysisError, AnalysisModel};
use crate::dag::NodeKind;
use crate::dataset::{ColumnKind, Dataset, Provenance};
use crate::scenario::ScenarioSpec;
use crate::sem::LinearSem;
use crate::stats::{summarize, Summary};
use crate::strategy::Strategy;

/// Largest tolerated fraction of failed (singular) replicates.
pub const MAX_FAILURE_RATE: f64 = 0.001;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser over `master` offset by the replicate index.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n` rows by evaluating the structural equations in topological order.
///
/// Columns follow the DAG's node order; latent nodes become `Latent` columns
/// and deterministic nodes `Derived` ones, computed exactly from their parents.
pub fn sample_dataset(sem: &LinearSem, n: usize, seed: u64, label: &str) -> Dataset {
    let dag = sem.dag();
    let k = dag.len();
    let mut rng = rng_from_seed(seed);
    let coeff = sem.internal_coefficients();
    let supplied = sem.coefficients();
    let residual_sd = sem.residual_sds();
    let means = sem.raw_means();
    let units = sem.units();

    // `z` holds mean-centred values on the internal scale; `raw` the output.
    let mut z: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut raw: Vec<Vec<f64>> = vec![Vec::new(); k];
    for &v in dag.topological_order() {
        let incoming: Vec<(usize, usize)> = dag
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.to == v)
            .map(|(i, e)| (i, e.from))
            .collect();
        if dag.node(v).kind == NodeKind::Deterministic {
            let values: Vec<f64> = (0..n)
                .map(|row| {
                    incoming
                        .iter()
                        .fold(0.0, |acc, &(i, p)| acc + supplied[i] * raw[p][row])
                })
                .collect();
            z[v] = values.iter().map(|x| x - means[v]).collect();
            raw[v] = values;
        } else {
            let mut zv = Vec::with_capacity(n);
            #[allow(clippy::needless_range_loop)]
            for row in 0..n {
                let signal: f64 = incoming.iter().map(|&(i, p)| coeff[i] * z[p][row]).sum();
                let e: f64 = StandardNormal.sample(&mut rng);
                zv.push(signal + residual_sd[v] * e);
            }
            raw[v] = zv.iter().map(|x| means[v] + units[v] * x).collect();
            z[v] = zv;
        }
    }

    let mut data = Dataset::new(
        n,
        Provenance {
            label: label.into(),
            seed: Some(seed),
        },
    );
    for (v, values) in raw.into_iter().enumerate() {
        let node = dag.node(v);
        let kind = match node.kind {
            NodeKind::Observed => ColumnKind::Observed,
            NodeKind::Latent => ColumnKind::Latent,
            NodeKind::Deterministic => ColumnKind::Derived,
        };
        data.push_column(&node.name, kind, values)
            .expect("one column per distinct node, n rows each");
    }
    data
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("n = {n} is too small; the strategy needs at least {min} rows")]
    TooFewRows { n: usize, min: usize },
    #[error("at least one replication is required")]
    NoReplications,
    #[error("{failures} of {reps} replicates failed (limit 0.1%): {first}")]
    TooManyFailures {
        failures: usize,
        reps: usize,
        first: AnalysisError,
    },
}

/// Median exposure coefficient and 95% simulation limits over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub scenario: String,
    pub strategy: Strategy,
    /// Replicates requested.
    pub reps: usize,
    /// Replicates skipped because the fit failed.
    pub failures: usize,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ReplicationSummary {
    pub fn summary(&self) -> Summary {
        Summary {
            median: self.median,
            lower: self.lower,
            upper: self.upper,
        }
    }
}

fn min_rows(strategies: &[Strategy]) -> usize {
    strategies
        .iter()
        .map(|s| match s {
            Strategy::FollowUpAdjusted => 4,
            _ => 3,
        })
        .max()
        .unwrap_or(3)
}

/// Checks the `n`/`reps` preconditions shared by every replication driver.
pub fn check_protocol(strategies: &[Strategy], n: usize, reps: usize) -> Result<(), McError> {
    let min = min_rows(strategies);
    if n < min {
        return Err(McError::TooFewRows { n, min });
    }
    if reps == 0 {
        return Err(McError::NoReplications);
    }
    Ok(())
}

/// One replicate: sample with the replicate's seed and fit every strategy on the same data.
pub fn replicate_once(
    spec: &ScenarioSpec,
    strategies: &[Strategy],
    n: usize,
    master_seed: u64,
    index: u64,
) -> Vec<Result<f64, AnalysisError>> {
    let data = sample_dataset(
        &spec.sem,
        n,
        replicate_seed(master_seed, index),
        &spec.label,
    );
    let b = &spec.bindings;
    let cols = (
        data.analysis_column(&b.exposure),
        data.analysis_column(&b.baseline),
        data.analysis_column(&b.followup),
    );
    strategies
        .iter()
        .map(|&s| match &cols {
            (Ok(x), Ok(y0), Ok(y1)) => {
                fit_columns(AnalysisModel::Strategy(s), b, x, y0, y1).map(|f| f.coefficients[0])
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => Err(AnalysisError::Data(e.clone())),
        })
        .collect()
}

/// Reduces per-replicate estimates (in replicate order) to a summary,
/// skipping failed fits unless they exceed [`MAX_FAILURE_RATE`].
pub fn summarize_estimates(
    scenario: &str,
    strategy: Strategy,
    estimates: &[Result<f64, AnalysisError>],
) -> Result<ReplicationSummary, McError> {
    let reps = estimates.len();
    if reps == 0 {
        return Err(McError::NoReplications);
    }
    let ok: Vec<f64> = estimates
        .iter()
        .filter_map(|e| e.as_ref().ok().copied())
        .collect();
    let failures = reps - ok.len();
    if failures as f64 > MAX_FAILURE_RATE * reps as f64 || ok.is_empty() {
        let first = estimates
            .iter()
            .find_map(|e| e.as_ref().err().cloned())
            .expect("failures > 0");
        return Err(McError::TooManyFailures {
            failures,
            reps,
            first,
        });
    }
    let s = summarize(&ok).expect("non-empty");
    Ok(ReplicationSummary {
        scenario: scenario.into(),
        strategy,
        reps,
        failures,
        median: s.median,
        lower: s.lower,
        upper: s.upper,
    })
}

/// Sequential replication driver: `reps` datasets of `n` rows, one estimate each.
pub fn run_replications(
    spec: &ScenarioSpec,
    strategy: Strategy,
    n: usize,
    reps: usize,
    master_seed: u64,
) -> Result<ReplicationSummary, McError> {
    check_protocol(&[strategy], n, reps)?;
    let estimates: Vec<Result<f64, AnalysisError>> = (1..=reps as u64)
        .map(|i| {
            replicate_once(spec, &[strategy], n, master_seed, i)
                .pop()
                .expect("one strategy")
        })
        .collect();
    summarize_estimates(&spec.label, strategy, &estimates)
}
