//! Parallel replication drivers.
//!
//! Replicates are indexed `1..=reps` and seeded from the master seed by
//! index, so the worker count only changes scheduling, never results.

use changescore_core::mc::{check_protocol, replicate_once, summarize_estimates};
use changescore_core::{AnalysisError, ReplicationSummary, ScenarioId, ScenarioSpec, Strategy};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::report::{Table1Cell, Table1Metadata, Table1Report};

/// Per-replicate estimates for one scenario, indexed `[strategy][replicate - 1]`.
#[derive(Debug, Clone)]
pub struct ScenarioEstimates {
    pub scenario: String,
    pub strategies: Vec<Strategy>,
    pub estimates: Vec<Vec<Result<f64, AnalysisError>>>,
}

pub fn thread_pool(workers: Option<usize>) -> Result<ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Usage("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    builder
        .build()
        .map_err(|e| Error::Format(format!("cannot start worker pool: {e}")))
}

/// Runs every replicate of `spec`, fitting all `strategies` on each sampled dataset.
pub fn replicate_scenario(
    pool: &ThreadPool,
    spec: &ScenarioSpec,
    strategies: &[Strategy],
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<ScenarioEstimates> {
    check_protocol(strategies, n, reps)?;
    let rows: Vec<Vec<Result<f64, AnalysisError>>> = pool.install(|| {
        (1..=reps as u64)
            .into_par_iter()
            .map(|i| replicate_once(spec, strategies, n, seed, i))
            .collect()
    });
    let mut estimates = vec![Vec::with_capacity(reps); strategies.len()];
    for row in rows {
        for (k, e) in row.into_iter().enumerate() {
            estimates[k].push(e);
        }
    }
    Ok(ScenarioEstimates {
        scenario: spec.label.clone(),
        strategies: strategies.to_vec(),
        estimates,
    })
}

impl ScenarioEstimates {
    pub fn summaries(&self) -> Result<Vec<ReplicationSummary>> {
        self.strategies
            .iter()
            .zip(&self.estimates)
            .map(|(&s, est)| Ok(summarize_estimates(&self.scenario, s, est)?))
            .collect()
    }

    /// Tidy CSV: `scenario,strategy,replicate,estimate`; failed fits leave `estimate` empty.
    pub fn write_tidy<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for (s, est) in self.strategies.iter().zip(&self.estimates) {
            for (i, e) in est.iter().enumerate() {
                let value = e.as_ref().map(|v| v.to_string()).unwrap_or_default();
                w.write_record([
                    self.scenario.as_str(),
                    s.key(),
                    &(i + 1).to_string(),
                    &value,
                ])?;
            }
        }
        Ok(())
    }
}

pub fn tidy_csv(all: &[ScenarioEstimates]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "strategy", "replicate", "estimate"])?;
    for s in all {
        s.write_tidy(&mut w)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// Parallel counterpart of the core sequential driver; identical results.
pub fn run_replications(
    pool: &ThreadPool,
    spec: &ScenarioSpec,
    strategy: Strategy,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<ReplicationSummary> {
    let est = replicate_scenario(pool, spec, &[strategy], n, reps, seed)?;
    Ok(est.summaries()?.remove(0))
}

/// All eight built-in scenarios under all three strategies.
pub fn reproduce_table1(
    pool: &ThreadPool,
    reps: usize,
    n: usize,
    seed: u64,
) -> Result<(Table1Report, Vec<ScenarioEstimates>)> {
    let mut cells = Vec::with_capacity(24);
    let mut all = Vec::with_capacity(8);
    for id in ScenarioId::ALL {
        let spec = changescore_core::builtin(id);
        let est = replicate_scenario(pool, &spec, &Strategy::ALL, n, reps, seed)?;
        for summary in est.summaries()? {
            let oracle = spec.oracle(summary.strategy)?;
            cells.push(Table1Cell::new(summary, oracle));
        }
        all.push(est);
    }
    let report = Table1Report {
        metadata: Table1Metadata {
            seed,
            reps,
            n,
            generated_at: None,
        },
        cells,
    };
    Ok((report, all))
}
