//! Ordinary least squares with an intercept.
//!
//! Regressors are centred (which absorbs the intercept), scaled to unit norm
//! and factorised with Householder QR. The design is rejected as rank
//! deficient when the ratio of the smallest to the largest diagonal entry of
//! `R` falls below [`MIN_RCOND`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Reciprocal-condition threshold below which a design counts as collinear.
pub const MIN_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OlsError {
    #[error("column lengths differ")]
    LengthMismatch,
    #[error("{n} rows cannot support {regressors} regressors plus an intercept (need at least {needed})", needed = regressors + 2)]
    InsufficientRows { n: usize, regressors: usize },
    #[error("non-finite value in column `{0}`")]
    NonFinite(String),
    #[error("rank-deficient design (reciprocal condition {rcond:e})")]
    RankDeficient { rcond: f64 },
}

/// A least-squares fit. Coefficients are in response units per regressor unit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub rss: f64,
    pub n: usize,
}

impl OlsFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }

    /// Residuals `y - yhat` for the columns the model was fitted on.
    pub fn residuals(&self, columns: &[&[f64]], response: &[f64]) -> Vec<f64> {
        (0..response.len())
            .map(|i| {
                let fitted = self.intercept
                    + self
                        .coefficients
                        .iter()
                        .zip(columns)
                        .map(|(b, c)| b * c[i])
                        .sum::<f64>();
                response[i] - fitted
            })
            .collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Regresses `response` on the named `columns` plus an intercept.
pub fn fit_ols(columns: &[(&str, &[f64])], response: &[f64]) -> Result<OlsFit, OlsError> {
    let n = response.len();
    let k = columns.len();
    if columns.iter().any(|(_, c)| c.len() != n) {
        return Err(OlsError::LengthMismatch);
    }
    if n < k + 2 {
        return Err(OlsError::InsufficientRows { n, regressors: k });
    }
    for (name, c) in columns {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(OlsError::NonFinite((*name).into()));
        }
    }
    if response.iter().any(|v| !v.is_finite()) {
        return Err(OlsError::NonFinite("response".into()));
    }

    let x_means: Vec<f64> = columns.iter().map(|(_, c)| mean(c)).collect();
    let y_mean = mean(response);

    // Centred, unit-norm columns; `a[j]` is column j.
    let mut scales = Vec::with_capacity(k);
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(k);
    for ((_, c), m) in columns.iter().zip(&x_means) {
        let centred: Vec<f64> = c.iter().map(|v| v - m).collect();
        let s = norm(&centred);
        if s == 0.0 {
            return Err(OlsError::RankDeficient { rcond: 0.0 });
        }
        scales.push(s);
        a.push(centred.into_iter().map(|v| v / s).collect());
    }
    let mut qty: Vec<f64> = response.iter().map(|v| v - y_mean).collect();

    // Householder QR, applying each reflector to the remaining columns and to y.
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        let col = &a[j][j..];
        let alpha = {
            let nrm = norm(col);
            if col[0] > 0.0 {
                -nrm
            } else {
                nrm
            }
        };
        let mut v: Vec<f64> = col.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        r[j][j] = alpha;
        if vnorm2 > 0.0 {
            let reflect = |target: &mut [f64]| {
                let dot: f64 = v.iter().zip(target.iter()).map(|(p, q)| p * q).sum();
                let f = 2.0 * dot / vnorm2;
                for (t, vi) in target.iter_mut().zip(&v) {
                    *t -= f * vi;
                }
            };
            for col in a.iter_mut().skip(j + 1) {
                reflect(&mut col[j..]);
            }
            reflect(&mut qty[j..]);
        }
        for (jj, col) in a.iter().enumerate().skip(j + 1) {
            r[j][jj] = col[j];
        }
    }

    if k > 0 {
        let diag: Vec<f64> = (0..k).map(|j| r[j][j].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let rcond = if max > 0.0 { min / max } else { 0.0 };
        if rcond < MIN_RCOND {
            return Err(OlsError::RankDeficient { rcond });
        }
    }

    let mut scaled = vec![0.0; k];
    for j in (0..k).rev() {
        let tail: f64 = ((j + 1)..k).map(|m| r[j][m] * scaled[m]).sum();
        scaled[j] = (qty[j] - tail) / r[j][j];
    }
    let coefficients: Vec<f64> = scaled.iter().zip(&scales).map(|(b, s)| b / s).collect();
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_means)
            .map(|(b, m)| b * m)
            .sum::<f64>();

    let mut fit = OlsFit {
        names: columns
            .iter()
            .map(|(name, _)| String::from(*name))
            .collect(),
        coefficients,
        intercept,
        rss: 0.0,
        n,
    };
    let cols: Vec<&[f64]> = columns.iter().map(|(_, c)| *c).collect();
    fit.rss = fit.residuals(&cols, response).iter().map(|e| e * e).sum();
    Ok(fit)
}
