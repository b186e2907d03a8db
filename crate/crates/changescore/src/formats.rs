//! On-disk formats: model/scenario JSON, dataset CSV and number rendering.
//!
//! Model JSON: `{"nodes": [{"name", "kind", "mean", "sd"}], "edges": [{"from", "to", "beta"}]}`
//! where `kind` is `observed`, `latent` or `deterministic` (the last without
//! `mean`/`sd`). A scenario file is a model document plus
//! `"bindings": {"exposure", "baseline", "followup"}` and an optional `"label"`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use changescore_core::{
    Bindings, ColumnKind, Dag, Dataset, LinearSem, NodeKind, Provenance, Scale, ScenarioSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDoc {
    Observed,
    Latent,
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub name: String,
    pub kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemDocument {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingsDoc {
    pub exposure: String,
    pub baseline: String,
    pub followup: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    pub bindings: BindingsDoc,
}

impl SemDocument {
    pub fn from_sem(sem: &LinearSem) -> Self {
        let dag = sem.dag();
        let nodes = dag
            .nodes()
            .iter()
            .map(|n| {
                let scale = sem.scale(&n.name).expect("own node");
                NodeDoc {
                    name: n.name.clone(),
                    kind: match n.kind {
                        NodeKind::Observed => KindDoc::Observed,
                        NodeKind::Latent => KindDoc::Latent,
                        NodeKind::Deterministic => KindDoc::Deterministic,
                    },
                    mean: scale.map(|s| s.mean),
                    sd: scale.map(|s| s.sd),
                }
            })
            .collect();
        let edges = dag
            .edges()
            .iter()
            .zip(sem.coefficients())
            .map(|(e, &beta)| EdgeDoc {
                from: dag.name(e.from).to_string(),
                to: dag.name(e.to).to_string(),
                beta,
            })
            .collect();
        SemDocument { nodes, edges }
    }

    pub fn to_sem(&self) -> Result<LinearSem> {
        let mut builder = Dag::builder();
        let mut scales = BTreeMap::new();
        for n in &self.nodes {
            let kind = match n.kind {
                KindDoc::Observed => NodeKind::Observed,
                KindDoc::Latent => NodeKind::Latent,
                KindDoc::Deterministic => NodeKind::Deterministic,
            };
            builder = builder.node(&n.name, kind);
            match (kind, n.mean, n.sd) {
                (NodeKind::Deterministic, None, None) => {}
                (NodeKind::Deterministic, _, _) => {
                    return Err(Error::Format(format!(
                        "deterministic node `{}` must not declare mean or sd",
                        n.name
                    )))
                }
                (_, Some(mean), Some(sd)) => {
                    scales.insert(n.name.clone(), Scale::new(mean, sd));
                }
                (_, None, None) => {}
                _ => {
                    return Err(Error::Format(format!(
                        "node `{}` must declare both mean and sd, or neither",
                        n.name
                    )))
                }
            }
        }
        for e in &self.edges {
            builder.push_edge(&e.from, &e.to, Some(e.beta));
        }
        Ok(LinearSem::new(builder.build()?, &scales)?)
    }
}

impl ScenarioDocument {
    pub fn from_spec(spec: &ScenarioSpec) -> Self {
        let sem = SemDocument::from_sem(&spec.sem);
        ScenarioDocument {
            label: Some(spec.label.clone()),
            nodes: sem.nodes,
            edges: sem.edges,
            bindings: BindingsDoc {
                exposure: spec.bindings.exposure.clone(),
                baseline: spec.bindings.baseline.clone(),
                followup: spec.bindings.followup.clone(),
            },
        }
    }

    pub fn to_spec(&self, default_label: &str) -> Result<ScenarioSpec> {
        let sem = SemDocument {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        }
        .to_sem()?;
        let b = &self.bindings;
        let label = self.label.as_deref().unwrap_or(default_label);
        Ok(ScenarioSpec::new(
            label,
            sem,
            Bindings::new(&b.exposure, &b.baseline, &b.followup),
        )?)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioSpec> {
    let doc: ScenarioDocument = serde_json::from_str(&read_text(path)?)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("user");
    doc.to_spec(stem)
}

pub fn scenario_to_json(spec: &ScenarioSpec) -> String {
    serde_json::to_string_pretty(&ScenarioDocument::from_spec(spec)).expect("serialisable") + "\n"
}

/// `printf("%.17g")`: 17 significant digits, trailing zeros trimmed.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

/// Writes the dataset as CSV with a header row; latent columns only on request.
pub fn write_dataset_csv<W: Write>(data: &Dataset, include_latent: bool, out: W) -> Result<()> {
    let cols: Vec<_> = data
        .columns()
        .iter()
        .filter(|c| include_latent || c.kind != ColumnKind::Latent)
        .collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(cols.iter().map(|c| c.name.as_str()))?;
    for row in 0..data.n_rows() {
        w.write_record(cols.iter().map(|c| fmt_g17(c.values[row])))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// Reads a CSV with a header row; every column is treated as observed.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (line, record) in r.records().enumerate() {
        let record = record?;
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Format(format!(
                    "row {}, column `{}`: `{field}` is not a number",
                    line + 2,
                    headers[j]
                ))
            })?;
            columns[j].push(v);
        }
    }
    let n = columns.first().map_or(0, Vec::len);
    let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    let mut data = Dataset::new(
        n,
        Provenance {
            label: label.to_string(),
            seed: None,
        },
    );
    for (name, values) in headers.iter().zip(columns) {
        data.push_column(name, ColumnKind::Observed, values)
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    Ok(data)
}
