//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use changescore_core::scenario::{DEFAULT_N, DEFAULT_REPS};
use changescore_core::{
    builtin, classify_baseline_role, oldham_correlation, parse_dag, print_dag, recommend_strategy,
    run_model, sample_dataset, AnalysisModel, Bindings, Dag, Estimand, ScenarioId, ScenarioSpec,
    Strategy,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::{
    load_scenario_file, read_dataset_csv, read_text, scenario_to_json, write_dataset_csv,
    write_text,
};
use crate::report::{cells_to_csv, cells_to_json, fmt3, Format, Table1Cell};
use crate::runner::{replicate_scenario, reproduce_table1, thread_pool, tidy_csv};

pub const DEFAULT_SEED: u64 = 20_190_416;

#[derive(Debug, Parser)]
#[command(
    name = "changescore",
    version,
    about = "Change-score versus baseline-adjusted analyses on linear causal models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in scenarios.
    ListScenarios,
    /// Sample a dataset from a scenario and write it as CSV.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write latent columns.
        #[arg(long)]
        include_latent: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit one analysis strategy to a CSV dataset.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_model)]
        strategy: AnalysisModel,
        #[command(flatten)]
        bindings: BindingArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat sampling and analysis for one scenario.
    Replicate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// One strategy; all three when omitted.
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Reproduce the full table: 8 scenarios by 3 strategies.
    Table1 {
        #[command(flatten)]
        run: RunArgs,
        /// Record the generation time in the report.
        #[arg(long)]
        timestamp: bool,
    },
    /// Analytic expected coefficients for a scenario.
    Oracle {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, value_enum, default_value_t = OracleFormat::Json)]
        format: OracleFormat,
    },
    /// Test a d-separation statement.
    Dsep {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Classify the baseline outcome's role and recommend an analysis.
    Classify {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        bindings: BindingArgs,
        #[arg(long, value_enum, default_value_t = EstimandArg::Total)]
        estimand: EstimandArg,
    },
    /// Correlation of two independent measurements with their difference.
    Oldham {
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print a scenario's graph in the DAG text format.
    Dag {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Write a scenario as an editable JSON file.
    ExportScenario {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    /// Built-in id (1A, 3A+, ...) or a scenario JSON file.
    #[arg(long)]
    pub scenario: String,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GraphArg {
    /// DAG text file.
    #[arg(long)]
    pub dag: Option<PathBuf>,
    /// Built-in id or scenario JSON file.
    #[arg(long)]
    pub scenario: Option<String>,
}

#[derive(Debug, Args)]
pub struct BindingArgs {
    #[arg(long, default_value = "WC0")]
    pub exposure: String,
    #[arg(long, default_value = "IC0")]
    pub baseline: String,
    #[arg(long, default_value = "IC1")]
    pub followup: String,
}

impl BindingArgs {
    fn bindings(&self) -> Bindings {
        Bindings::new(&self.exposure, &self.baseline, &self.followup)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// json, csv or markdown.
    #[arg(long, default_value = "markdown")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write every replicate's estimate as tidy CSV.
    #[arg(long)]
    pub estimates_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimandArg {
    Total,
    Direct,
}

fn parse_model(s: &str) -> std::result::Result<AnalysisModel, String> {
    s.parse().map_err(|_| {
        "expected change-score, adjusted, unadjusted or change-score-adjusted".to_string()
    })
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse()
        .map_err(|_| "expected change-score, adjusted or unadjusted".to_string())
}

pub fn resolve_scenario(arg: &str) -> Result<ScenarioSpec> {
    if let Ok(id) = arg.parse::<ScenarioId>() {
        return Ok(builtin(id));
    }
    let path = Path::new(arg);
    if path.exists() {
        load_scenario_file(path)
    } else {
        Err(Error::Usage(format!(
            "`{arg}` is neither a built-in scenario (see list-scenarios) nor an existing file"
        )))
    }
}

fn resolve_graph(arg: &GraphArg) -> Result<Dag> {
    match (&arg.dag, &arg.scenario) {
        (Some(path), _) => Ok(parse_dag(&read_text(path)?)?),
        (None, Some(s)) => Ok(resolve_scenario(s)?.sem.dag().clone()),
        (None, None) => Err(Error::Usage(
            "either --dag or --scenario is required".into(),
        )),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::Write {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    strategy: &'a str,
    coefficient: f64,
    intercept: f64,
    all_coefficients: serde_json::Map<String, serde_json::Value>,
    n: usize,
    bindings: BindingsOut<'a>,
}

#[derive(Serialize)]
struct BindingsOut<'a> {
    exposure: &'a str,
    baseline: &'a str,
    followup: &'a str,
}

#[derive(Serialize)]
struct OracleOutput {
    scenario: String,
    change_score: f64,
    adjusted: f64,
    unadjusted: f64,
}

#[derive(Serialize)]
struct OldhamOutput {
    n: usize,
    seed: u64,
    baseline_change: f64,
    followup_change: f64,
}

/// Runs one command, writing primary output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::ListScenarios => {
            let mut text = String::new();
            for id in ScenarioId::ALL {
                text.push_str(&format!(
                    "{:<4} {:<18} {}\n",
                    id.as_str(),
                    id.role().to_string(),
                    id.description()
                ));
            }
            emit(out, None, &text)
        }
        Command::Simulate {
            scenario,
            n,
            seed,
            include_latent,
            out: path,
        } => {
            let spec = resolve_scenario(&scenario.scenario)?;
            let data = sample_dataset(&spec.sem, n, seed, &spec.label);
            let mut buf = Vec::new();
            write_dataset_csv(&data, include_latent, &mut buf)?;
            emit(
                out,
                path.as_deref(),
                std::str::from_utf8(&buf).expect("utf-8"),
            )
        }
        Command::Analyze {
            data,
            strategy,
            bindings,
            out: path,
        } => {
            let ds = read_dataset_csv(&data)?;
            let b = bindings.bindings();
            let res = run_model(&ds, strategy, &b)?;
            let all = res
                .fit
                .names
                .iter()
                .zip(&res.fit.coefficients)
                .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                .collect();
            let doc = AnalyzeOutput {
                strategy: strategy.key(),
                coefficient: res.coefficient,
                intercept: res.fit.intercept,
                all_coefficients: all,
                n: res.fit.n,
                bindings: BindingsOut {
                    exposure: &b.exposure,
                    baseline: &b.baseline,
                    followup: &b.followup,
                },
            };
            emit(out, path.as_deref(), &cells_to_json(&doc))
        }
        Command::Replicate {
            scenario,
            strategy,
            run,
        } => {
            let spec = resolve_scenario(&scenario.scenario)?;
            let strategies = match strategy {
                Some(s) => vec![s],
                None => Strategy::ALL.to_vec(),
            };
            let pool = thread_pool(run.workers)?;
            let est = replicate_scenario(&pool, &spec, &strategies, run.n, run.reps, run.seed)?;
            let mut cells = Vec::new();
            for s in est.summaries()? {
                let oracle = spec.oracle(s.strategy)?;
                cells.push(Table1Cell::new(s, oracle));
            }
            if let Some(p) = &run.estimates_out {
                write_text(p, &tidy_csv(std::slice::from_ref(&est))?)?;
            }
            let text = match run.format {
                Format::Json => cells_to_json(&cells),
                Format::Csv => cells_to_csv(&cells)?,
                Format::Markdown => {
                    replicate_markdown(&spec.label, run.n, run.reps, run.seed, &cells)
                }
            };
            emit(out, run.out.as_deref(), &text)
        }
        Command::Table1 { run, timestamp } => {
            let pool = thread_pool(run.workers)?;
            let (mut report, est) = reproduce_table1(&pool, run.reps, run.n, run.seed)?;
            if timestamp {
                report.metadata.generated_at = Some(
                    humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string(),
                );
            }
            if let Some(p) = &run.estimates_out {
                write_text(p, &tidy_csv(&est)?)?;
            }
            let text = match run.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv()?,
                Format::Markdown => report.to_markdown(),
            };
            emit(out, run.out.as_deref(), &text)
        }
        Command::Oracle { scenario, format } => {
            let spec = resolve_scenario(&scenario.scenario)?;
            let o = OracleOutput {
                scenario: spec.label.clone(),
                change_score: spec.oracle(Strategy::ChangeScore)?,
                adjusted: spec.oracle(Strategy::FollowUpAdjusted)?,
                unadjusted: spec.oracle(Strategy::FollowUpUnadjusted)?,
            };
            let text = match format {
                OracleFormat::Json => cells_to_json(&o),
                OracleFormat::Text => format!(
                    "{}: change-score {}, adjusted {}, unadjusted {}\n",
                    o.scenario,
                    fmt3(o.change_score),
                    fmt3(o.adjusted),
                    fmt3(o.unadjusted)
                ),
            };
            emit(out, None, &text)
        }
        Command::Dsep { graph, x, y, given } => {
            let dag = resolve_graph(&graph)?;
            let sep = dag.d_separated(&refs(&x), &refs(&y), &refs(&given))?;
            emit(
                out,
                None,
                if sep {
                    "d-separated\n"
                } else {
                    "not d-separated\n"
                },
            )
        }
        Command::Classify {
            graph,
            bindings,
            estimand,
        } => {
            let dag = resolve_graph(&graph)?;
            let b = bindings.bindings();
            let role = classify_baseline_role(&dag, &b.exposure, &b.baseline, &b.followup)?;
            let estimand = match estimand {
                EstimandArg::Total => Estimand::TotalEffect,
                EstimandArg::Direct => Estimand::DirectEffect,
            };
            let rec = recommend_strategy(role, estimand)?;
            let mut text = format!("{role}; recommended: {}\n", rec.strategy.label());
            for w in &rec.warnings {
                text.push_str(&format!("note: {w}\n"));
            }
            emit(out, None, &text)
        }
        Command::Oldham { n, seed } => {
            let r = oldham_correlation(n, seed)?;
            let doc = OldhamOutput {
                n,
                seed,
                baseline_change: r.baseline,
                followup_change: r.followup,
            };
            emit(out, None, &cells_to_json(&doc))
        }
        Command::Dag { scenario } => {
            let spec = resolve_scenario(&scenario.scenario)?;
            emit(out, None, &(print_dag(spec.sem.dag()) + "\n"))
        }
        Command::ExportScenario {
            scenario,
            out: path,
        } => {
            let spec = resolve_scenario(&scenario.scenario)?;
            emit(out, path.as_deref(), &scenario_to_json(&spec))
        }
    }
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn replicate_markdown(
    label: &str,
    n: usize,
    reps: usize,
    seed: u64,
    cells: &[Table1Cell],
) -> String {
    let mut s = format!(
        "Scenario {label}: {reps} replicates of n = {n}, seed {seed}.\n\n| Strategy | Median (95% limits) | Expected | Failures |\n|---|---|---|---|\n"
    );
    for c in cells {
        s.push_str(&format!(
            "| {} | {} ({}, {}) | {} | {} |\n",
            c.strategy,
            fmt3(c.median),
            fmt3(c.lower),
            fmt3(c.upper),
            fmt3(c.oracle),
            c.failures
        ));
    }
    s
}
