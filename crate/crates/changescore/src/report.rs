//! Replication reports and the 8 x 3 scenario table: JSON, CSV and markdown renderings.
//!
//! JSON and CSV carry full precision (shortest round-trip decimal), so a CSV
//! re-parse reproduces the JSON numbers exactly. Markdown shows 3 decimals.

use std::fmt::Write as _;

use changescore_core::{ReplicationSummary, ScenarioId, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::Usage(format!(
                "unknown format `{other}` (expected json, csv or markdown)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Metadata {
    pub seed: u64,
    pub reps: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

/// One scenario/strategy cell: simulated summary next to the analytic value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub scenario: String,
    pub strategy: String,
    pub reps: usize,
    pub failures: usize,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub oracle: f64,
    pub abs_error: f64,
}

impl Table1Cell {
    pub fn new(s: ReplicationSummary, oracle: f64) -> Self {
        Table1Cell {
            scenario: s.scenario,
            strategy: s.strategy.key().to_string(),
            reps: s.reps,
            failures: s.failures,
            median: s.median,
            lower: s.lower,
            upper: s.upper,
            oracle,
            abs_error: (s.median - oracle).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub metadata: Table1Metadata,
    pub cells: Vec<Table1Cell>,
}

const CSV_HEADER: [&str; 9] = [
    "scenario",
    "strategy",
    "reps",
    "failures",
    "median",
    "lower",
    "upper",
    "oracle",
    "abs_error",
];

pub fn cells_to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialisable") + "\n"
}

pub fn cells_to_csv(cells: &[Table1Cell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for c in cells {
        w.write_record([
            c.scenario.clone(),
            c.strategy.clone(),
            c.reps.to_string(),
            c.failures.to_string(),
            c.median.to_string(),
            c.lower.to_string(),
            c.upper.to_string(),
            c.oracle.to_string(),
            c.abs_error.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

pub fn cells_from_csv(text: &str) -> Result<Vec<Table1Cell>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

impl Table1Report {
    pub fn cell(&self, scenario: ScenarioId, strategy: Strategy) -> Option<&Table1Cell> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario.as_str() && c.strategy == strategy.key())
    }

    pub fn to_json(&self) -> String {
        cells_to_json(self)
    }

    pub fn to_csv(&self) -> Result<String> {
        cells_to_csv(&self.cells)
    }

    /// Strategies as rows, scenarios as columns, limits in parentheses,
    /// followed by the analytic values in the same layout.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(
            out,
            "Regression coefficient for the exposure (95% simulation limits); {} replicates of n = {}, seed {}.",
            m.reps, m.n, m.seed
        );
        if let Some(t) = &m.generated_at {
            let _ = writeln!(out, "Generated {t}.");
        }
        out.push('\n');
        self.grid(&mut out, |c| {
            format!("{} ({}, {})", fmt3(c.median), fmt3(c.lower), fmt3(c.upper))
        });
        out.push_str("\nAnalytic expected coefficients:\n\n");
        self.grid(&mut out, |c| fmt3(c.oracle));
        out
    }

    fn grid(&self, out: &mut String, render: impl Fn(&Table1Cell) -> String) {
        let ids = ScenarioId::ALL;
        out.push_str("| Method of analysis |");
        for id in ids {
            let _ = write!(out, " {} |", id.as_str());
        }
        out.push_str("\n|---|");
        for _ in ids {
            out.push_str("---|");
        }
        out.push_str("\n| Baseline outcome is |");
        for id in ids {
            let _ = write!(out, " {} |", role_label(id));
        }
        out.push('\n');
        for s in Strategy::ALL {
            let _ = write!(out, "| {} |", s.label());
            for id in ids {
                let text = self.cell(id, s).map(&render).unwrap_or_else(|| "-".into());
                let _ = write!(out, " {text} |");
            }
            out.push('\n');
        }
    }
}

fn role_label(id: ScenarioId) -> &'static str {
    use changescore_core::Role;
    match id.role() {
        Role::CompetingExposure => "competing exposure",
        Role::Confounder => "confounder",
        Role::Mediator => "mediator",
    }
}

/// Three decimals, without a negative sign on values that round to zero.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table1Report {
        let cells = ScenarioId::ALL
            .iter()
            .flat_map(|&id| {
                Strategy::ALL.iter().map(move |&s| {
                    Table1Cell::new(
                        ReplicationSummary {
                            scenario: id.as_str().into(),
                            strategy: s,
                            reps: 10,
                            failures: 0,
                            median: 0.1 + 1.0 / 3.0,
                            lower: -0.0001,
                            upper: 0.7,
                        },
                        0.2,
                    )
                })
            })
            .collect();
        Table1Report {
            metadata: Table1Metadata {
                seed: 1,
                reps: 10,
                n: 100,
                generated_at: None,
            },
            cells,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let r = sample();
        assert_eq!(cells_from_csv(&r.to_csv().unwrap()).unwrap(), r.cells);
        let back: Table1Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn markdown_layout() {
        let md = sample().to_markdown();
        assert!(md.contains("| Method of analysis | 1A | 1B | 2A | 2B | 3A | 3B | 3A+ | 3B+ |"));
        assert!(md.contains("| change-score |"));
        assert!(md.contains("0.433 (0.000, 0.700)"));
        assert_eq!(md.matches("| follow-up adjusted for baseline |").count(), 2);
    }
}
