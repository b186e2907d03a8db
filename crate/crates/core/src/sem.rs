//! Linear Gaussian structural equation models over a [`Dag`].
//!
//! Every non-deterministic node `v` is generated on a standardized scale as
//!
//! ```text
//! z_v = sum_p beta_pv * z_p + residual_sd_v * e_v,   e_v ~ N(0, 1)
//! ```
//!
//! with residual variances solved so that `Var(z_v) = 1`, then mapped to raw
//! units as `mean_v + sd_v * z_v`. Deterministic nodes are exact raw-unit
//! combinations of their parents (`+1 * follow-up - 1 * baseline` for a change
//! score); their coefficients are fixed, never solved, and they carry no noise.
//! On the standardized scale a deterministic node stays in raw units (unit
//! scale 1, mean-centred), so its diagonal entry is a derived variance.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dag::{Dag, DagError, NodeKind};
use crate::strategy::{Bindings, Strategy};

/// Mean and standard deviation of a node in raw units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub mean: f64,
    pub sd: f64,
}

impl Scale {
    pub const STANDARD: Scale = Scale { mean: 0.0, sd: 1.0 };

    pub fn new(mean: f64, sd: f64) -> Self {
        Scale { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemError {
    #[error(transparent)]
    Graph(#[from] DagError),
    #[error("edge `{0} -> {1}` has no coefficient")]
    MissingCoefficient(String, String),
    #[error("coefficient on `{0} -> {1}` is not finite")]
    NonFiniteCoefficient(String, String),
    #[error("node `{0}` needs a finite mean and a positive sd")]
    InvalidScale(String),
    #[error("scale given for unknown node `{0}`")]
    UnknownScale(String),
    #[error(
        "node `{node}`: parents explain variance {explained}, leaving a negative residual variance"
    )]
    NonPositiveResidual { node: String, explained: f64 },
    #[error("`{0}` must be an observed node")]
    NotObserved(String),
    #[error("exposure and baseline are perfectly correlated; the adjusted model is singular")]
    Singular,
}

/// Explained-variance overshoot tolerated as rounding before a residual is rejected.
const RESIDUAL_SLACK: f64 = 1e-12;

/// Dense symmetric matrix indexed by node name.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    names: Vec<String>,
    values: Vec<f64>,
}

impl CovMatrix {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim() + j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Entry for a pair of names; `None` if either name is unknown.
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.at(self.index_of(a)?, self.index_of(b)?))
    }

    /// Principal submatrix over `idx`, row-major.
    pub fn submatrix(&self, idx: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(idx.len() * idx.len());
        for &i in idx {
            for &j in idx {
                out.push(self.at(i, j));
            }
        }
        out
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.dim().max(1))
    }
}

/// A [`Dag`] with path coefficients, raw-unit scales and solved residual variances.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSem {
    dag: Dag,
    /// Per edge, as supplied: standardized for ordinary children, raw for deterministic ones.
    coeff: Vec<f64>,
    /// Per edge, on the internal (standardized) scale.
    internal_coeff: Vec<f64>,
    scale: Vec<Option<Scale>>,
    /// Unit of the internal scale: declared sd, or 1 for deterministic nodes.
    unit: Vec<f64>,
    mean: Vec<f64>,
    residual_sd: Vec<f64>,
    cov: Vec<f64>,
}

impl LinearSem {
    /// Builds a model from a DAG whose edges all carry `beta` coefficients.
    ///
    /// Scales default to mean 0, sd 1; scales of deterministic nodes are
    /// derived and any supplied value is ignored. Residual variances are solved
    /// immediately (see [`LinearSem::residual_variance`]).
    pub fn new(dag: Dag, scales: &BTreeMap<String, Scale>) -> Result<Self, SemError> {
        for name in scales.keys() {
            if dag.index_of(name).is_err() {
                return Err(SemError::UnknownScale(name.clone()));
            }
        }
        let mut coeff = Vec::with_capacity(dag.edges().len());
        for e in dag.edges() {
            let (from, to) = (dag.name(e.from).to_string(), dag.name(e.to).to_string());
            match e.beta {
                None => return Err(SemError::MissingCoefficient(from, to)),
                Some(b) if !b.is_finite() => return Err(SemError::NonFiniteCoefficient(from, to)),
                Some(b) => coeff.push(b),
            }
        }
        let scale: Vec<Option<Scale>> = dag
            .nodes()
            .iter()
            .map(|n| match n.kind {
                NodeKind::Deterministic => Ok(None),
                _ => {
                    let s = scales.get(&n.name).copied().unwrap_or(Scale::STANDARD);
                    if s.mean.is_finite() && s.sd.is_finite() && s.sd > 0.0 {
                        Ok(Some(s))
                    } else {
                        Err(SemError::InvalidScale(n.name.clone()))
                    }
                }
            })
            .collect::<Result<_, _>>()?;

        let k = dag.len();
        let mut sem = LinearSem {
            unit: scale.iter().map(|s| s.map_or(1.0, |s| s.sd)).collect(),
            internal_coeff: vec![0.0; coeff.len()],
            mean: vec![0.0; k],
            residual_sd: vec![0.0; k],
            cov: vec![0.0; k * k],
            dag,
            coeff,
            scale,
        };
        sem.solve_residual_variances()?;
        Ok(sem)
    }

    /// Fills residual variances, means and the internal-scale covariance in topological order.
    ///
    /// For an ordinary node the residual variance is `1 - Var(sum beta_p z_p)`
    /// computed from the ancestor covariances already in place; deterministic
    /// nodes get no residual.
    fn solve_residual_variances(&mut self) -> Result<(), SemError> {
        let k = self.dag.len();
        for (i, e) in self.dag.edges().iter().enumerate() {
            self.internal_coeff[i] = match self.dag.node(e.to).kind {
                NodeKind::Deterministic => self.coeff[i] * self.unit[e.from],
                _ => self.coeff[i],
            };
        }
        let incoming: Vec<Vec<(usize, f64)>> = (0..k)
            .map(|v| {
                self.dag
                    .edges()
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.to == v)
                    .map(|(i, e)| (e.from, self.internal_coeff[i]))
                    .collect()
            })
            .collect();

        let order = self.dag.topological_order().to_vec();
        for (pos, &v) in order.iter().enumerate() {
            let done = &order[..pos];
            for &u in done {
                let c: f64 = incoming[v]
                    .iter()
                    .map(|&(p, w)| w * self.cov[p * k + u])
                    .sum();
                self.cov[v * k + u] = c;
                self.cov[u * k + v] = c;
            }
            let explained: f64 = incoming[v]
                .iter()
                .map(|&(p, w)| w * self.cov[v * k + p])
                .sum();
            match self.scale[v] {
                Some(s) => {
                    let residual = 1.0 - explained;
                    if residual < -RESIDUAL_SLACK {
                        return Err(SemError::NonPositiveResidual {
                            node: self.dag.name(v).to_string(),
                            explained,
                        });
                    }
                    self.residual_sd[v] = libm::sqrt(residual.max(0.0));
                    self.cov[v * k + v] = 1.0;
                    self.mean[v] = s.mean;
                }
                None => {
                    self.residual_sd[v] = 0.0;
                    self.cov[v * k + v] = explained;
                    self.mean[v] = self
                        .dag
                        .edges()
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| e.to == v)
                        .map(|(i, e)| self.coeff[i] * self.mean[e.from])
                        .sum();
                }
            }
        }
        Ok(())
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    /// Supplied coefficient of edge `from -> to`, if the edge exists.
    pub fn coefficient(&self, from: &str, to: &str) -> Result<Option<f64>, SemError> {
        let (f, t) = (self.dag.index_of(from)?, self.dag.index_of(to)?);
        Ok(self.dag.edge_index(f, t).map(|i| self.coeff[i]))
    }

    /// Coefficients in edge order, as supplied.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeff
    }

    /// Declared scale; `None` for deterministic nodes.
    pub fn scale(&self, name: &str) -> Result<Option<Scale>, SemError> {
        Ok(self.scale[self.dag.index_of(name)?])
    }

    pub fn mean(&self, name: &str) -> Result<f64, SemError> {
        Ok(self.mean[self.dag.index_of(name)?])
    }

    /// Raw-unit standard deviation (derived for deterministic nodes).
    pub fn sd(&self, name: &str) -> Result<f64, SemError> {
        let v = self.dag.index_of(name)?;
        Ok(self.unit[v] * libm::sqrt(self.cov[v * self.dag.len() + v]))
    }

    /// Residual variance on the standardized scale; 0 for deterministic nodes.
    pub fn residual_variance(&self, name: &str) -> Result<f64, SemError> {
        let v = self.dag.index_of(name)?;
        Ok(self.residual_sd[v] * self.residual_sd[v])
    }

    pub(crate) fn residual_sds(&self) -> &[f64] {
        &self.residual_sd
    }

    pub(crate) fn internal_coefficients(&self) -> &[f64] {
        &self.internal_coeff
    }

    pub(crate) fn raw_means(&self) -> &[f64] {
        &self.mean
    }

    pub(crate) fn units(&self) -> &[f64] {
        &self.unit
    }

    /// Model-implied covariance of every node.
    ///
    /// `standardized = true` gives correlations among ordinary nodes;
    /// `false` gives raw-unit covariances, which sampling targets.
    pub fn implied_covariance(&self, standardized: bool) -> CovMatrix {
        let k = self.dag.len();
        let values = if standardized {
            self.cov.clone()
        } else {
            let mut raw = self.cov.clone();
            for i in 0..k {
                for j in 0..k {
                    raw[i * k + j] *= self.unit[i] * self.unit[j];
                }
            }
            raw
        };
        CovMatrix {
            names: self.dag.nodes().iter().map(|n| n.name.clone()).collect(),
            values,
        }
    }

    /// Raw-unit covariance of two named nodes.
    pub fn raw_cov(&self, a: &str, b: &str) -> Result<f64, SemError> {
        let (i, j) = (self.dag.index_of(a)?, self.dag.index_of(b)?);
        Ok(self.cov[i * self.dag.len() + j] * self.unit[i] * self.unit[j])
    }

    /// Total standardized effect of `x` on `y` by path tracing: the sum over
    /// directed paths of the product of edge coefficients. Zero without a path.
    pub fn total_effect(&self, x: &str, y: &str) -> Result<f64, SemError> {
        let (x, y) = (self.dag.index_of(x)?, self.dag.index_of(y)?);
        if x == y {
            return Ok(0.0);
        }
        let edges = self.dag.edges();
        let mut total = 0.0;
        // Depth-first over (node, product of coefficients so far).
        let mut stack = vec![(x, 1.0)];
        while let Some((v, product)) = stack.pop() {
            for (i, e) in edges.iter().enumerate().filter(|(_, e)| e.from == v) {
                let p = product * self.internal_coeff[i];
                if e.to == y {
                    total += p;
                } else {
                    stack.push((e.to, p));
                }
            }
        }
        Ok(total)
    }

    /// Matrix of all total effects, `T[to][from] = sum_{k>=1} B^k`, where
    /// `B[to][from]` holds the standardized edge coefficients. `B` is nilpotent.
    pub fn total_effect_matrix(&self) -> Vec<Vec<f64>> {
        let k = self.dag.len();
        let mut b = vec![vec![0.0; k]; k];
        for (i, e) in self.dag.edges().iter().enumerate() {
            b[e.to][e.from] = self.internal_coeff[i];
        }
        let mut total = vec![vec![0.0; k]; k];
        let mut power = b.clone();
        for _ in 0..k {
            if power.iter().flatten().all(|&v| v == 0.0) {
                break;
            }
            for i in 0..k {
                for j in 0..k {
                    total[i][j] += power[i][j];
                }
            }
            let mut next = vec![vec![0.0; k]; k];
            for i in 0..k {
                for m in 0..k {
                    if power[i][m] != 0.0 {
                        for j in 0..k {
                            next[i][j] += power[i][m] * b[m][j];
                        }
                    }
                }
            }
            power = next;
        }
        total
    }

    /// Standardized coefficient of the single edge `x -> y` (0 when absent).
    pub fn direct_effect(&self, x: &str, y: &str) -> Result<f64, SemError> {
        let (f, t) = (self.dag.index_of(x)?, self.dag.index_of(y)?);
        Ok(self
            .dag
            .edge_index(f, t)
            .map_or(0.0, |i| self.internal_coeff[i]))
    }

    /// Converts a standardized coefficient to `y` units per `x` unit.
    pub fn to_unstandardized(&self, coef: f64, x: &str, y: &str) -> Result<f64, SemError> {
        let (x, y) = (self.dag.index_of(x)?, self.dag.index_of(y)?);
        Ok(coef * self.unit[y] / self.unit[x])
    }

    /// Population value of the exposure coefficient each strategy estimates,
    /// from the raw-unit implied covariance (outcome units per exposure unit).
    pub fn expected_coefficient(
        &self,
        strategy: Strategy,
        bindings: &Bindings,
    ) -> Result<f64, SemError> {
        for name in [&bindings.exposure, &bindings.baseline, &bindings.followup] {
            let v = self.dag.index_of(name)?;
            if self.dag.node(v).kind != NodeKind::Observed {
                return Err(SemError::NotObserved(name.clone()));
            }
        }
        let (x, y0, y1) = (&bindings.exposure, &bindings.baseline, &bindings.followup);
        let cxx = self.raw_cov(x, x)?;
        let cx0 = self.raw_cov(x, y0)?;
        let cx1 = self.raw_cov(x, y1)?;
        Ok(match strategy {
            Strategy::FollowUpUnadjusted => cx1 / cxx,
            Strategy::ChangeScore => (cx1 - cx0) / cxx,
            Strategy::FollowUpAdjusted => {
                let c00 = self.raw_cov(y0, y0)?;
                let c01 = self.raw_cov(y0, y1)?;
                let det = cxx * c00 - cx0 * cx0;
                if det <= 1e-12 * cxx * c00 {
                    return Err(SemError::Singular);
                }
                (cx1 * c00 - cx0 * c01) / det
            }
        })
    }
}
