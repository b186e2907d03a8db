//! Column-oriented samples with per-column provenance flags.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Observed,
    /// Never offered to an analysis.
    Latent,
    /// Computed from other columns, e.g. a change score.
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    /// Scenario id or user label.
    pub label: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("column `{name}` has {got} rows, expected {expected}")]
    LengthMismatch {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("no column named `{0}`")]
    MissingColumn(String),
    #[error("column `{0}` is latent and cannot be analysed")]
    LatentColumn(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    columns: Vec<Column>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(n: usize, provenance: Provenance) -> Self {
        Dataset {
            n,
            columns: Vec::new(),
            provenance,
        }
    }

    pub fn push_column(
        &mut self,
        name: &str,
        kind: ColumnKind,
        values: Vec<f64>,
    ) -> Result<(), DatasetError> {
        if values.len() != self.n {
            return Err(DatasetError::LengthMismatch {
                name: name.to_string(),
                got: values.len(),
                expected: self.n,
            });
        }
        if self.column(name).is_some() {
            return Err(DatasetError::DuplicateColumn(name.to_string()));
        }
        self.columns.push(Column {
            name: name.to_string(),
            kind,
            values,
        });
        Ok(())
    }

    /// Appends `name = followup - baseline` as a derived column.
    pub fn add_change_score(
        &mut self,
        name: &str,
        baseline: &str,
        followup: &str,
    ) -> Result<(), DatasetError> {
        let y0 = self.analysis_column(baseline)?;
        let y1 = self.analysis_column(followup)?;
        let delta = y1.iter().zip(y0).map(|(a, b)| a - b).collect();
        self.push_column(name, ColumnKind::Derived, delta)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Values of an observed or derived column; latent columns are refused.
    pub fn analysis_column(&self, name: &str) -> Result<&[f64], DatasetError> {
        match self.column(name) {
            None => Err(DatasetError::MissingColumn(name.to_string())),
            Some(c) if c.kind == ColumnKind::Latent => {
                Err(DatasetError::LatentColumn(name.to_string()))
            }
            Some(c) => Ok(&c.values),
        }
    }

    /// Columns visible to analyses (everything except latent columns).
    pub fn analysis_view(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.kind != ColumnKind::Latent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn schema_checks() {
        let mut d = Dataset::new(2, Provenance::default());
        d.push_column("a", ColumnKind::Observed, vec![1.0, 2.0])
            .unwrap();
        d.push_column("u", ColumnKind::Latent, vec![0.0, 0.0])
            .unwrap();
        assert!(matches!(
            d.push_column("b", ColumnKind::Observed, vec![1.0]),
            Err(DatasetError::LengthMismatch { .. })
        ));
        assert_eq!(
            d.push_column("a", ColumnKind::Observed, vec![1.0, 1.0]),
            Err(DatasetError::DuplicateColumn("a".into()))
        );
        assert_eq!(
            d.analysis_column("u"),
            Err(DatasetError::LatentColumn("u".into()))
        );
        assert_eq!(
            d.analysis_column("z"),
            Err(DatasetError::MissingColumn("z".into()))
        );
        assert_eq!(d.analysis_view().count(), 1);
    }

    #[test]
    fn change_score_column() {
        let mut d = Dataset::new(2, Provenance::default());
        d.push_column("y0", ColumnKind::Observed, vec![4.0, 1.5])
            .unwrap();
        d.push_column("y1", ColumnKind::Observed, vec![4.2, 1.5])
            .unwrap();
        d.add_change_score("dy", "y0", "y1").unwrap();
        let c = d.column("dy").unwrap();
        assert_eq!(c.kind, ColumnKind::Derived);
        assert_eq!(c.values, vec![4.2 - 4.0, 0.0]);
    }
}
